#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcflab/types.hpp"

namespace mcflab {

struct AxisSpec {
    double lo = -1.0;
    double hi = 1.0;
    bool periodic = false;

    double period() const { return hi - lo; }
};

using ChristoffelArray = std::array<Mat, kMaxDim>;  // gamma[c](a,b) = Gamma^c_ab

// Curvature data at a single chart point. The Riemann tensor is stored fully
// lowered with the sign convention pinned by R(u,v,u,v) > 0 on the round
// sphere, i.e. sectional curvature K = R(u,v,u,v) / (|u|^2|v|^2 - <u,v>^2).
struct CurvatureData {
    Vec point;
    Mat g;
    ChristoffelArray gamma;
    Tensor4 riemann;
};

struct GeodesicPath {
    std::vector<double> times;
    std::vector<Vec> points;
    std::vector<Vec> velocities;
    bool exited = false;   // left the chart domain before time T
    double exit_time = 0;  // valid when exited
};

// A coordinate domain with a smooth metric field. All derived tensors come
// from 4th-order central differences of the metric evaluator; presets also
// carry analytic Christoffel/Riemann evaluators that tests use as oracles.
class AmbientChart {
public:
    using MetricFn = std::function<Mat(const Vec&)>;
    using ChristoffelFn = std::function<ChristoffelArray(const Vec&)>;
    using RiemannFn = std::function<Tensor4(const Vec&)>;

    AmbientChart(std::string kind, std::vector<AxisSpec> axes, MetricFn metric,
                 double length_scale = 1.0)
        : kind_(std::move(kind)),
          axes_(std::move(axes)),
          metric_(std::move(metric)),
          length_scale_(length_scale) {
        if (axes_.empty() || static_cast<int>(axes_.size()) > kMaxDim)
            throw ValidationError("chart dimension must be between 1 and 4");
        if (length_scale_ <= 0.0) throw ValidationError("length_scale must be positive");
        fd_step_ = 1e-3 * length_scale_;
        if (fd_step_ < 1e-12)
            throw ConfigError("differencing step underflow for length_scale " +
                              std::to_string(length_scale_));
    }

    const std::string& kind() const { return kind_; }
    int dim() const { return static_cast<int>(axes_.size()); }
    double length_scale() const { return length_scale_; }
    double fd_step() const { return fd_step_; }
    const std::vector<AxisSpec>& axes() const { return axes_; }

    void set_analytic_christoffel(ChristoffelFn fn) { analytic_gamma_ = std::move(fn); }
    void set_analytic_riemann(RiemannFn fn) { analytic_riemann_ = std::move(fn); }
    bool has_analytic_christoffel() const { return static_cast<bool>(analytic_gamma_); }
    bool has_analytic_riemann() const { return static_cast<bool>(analytic_riemann_); }

    // Maps periodic coordinates into their fundamental interval. Non-periodic
    // coordinates pass through unchanged.
    Vec wrap(Vec x) const {
        for (int a = 0; a < dim(); ++a) {
            if (!axes_[a].periodic) continue;
            const double p = axes_[a].period();
            double t = std::fmod(x[a] - axes_[a].lo, p);
            if (t < 0) t += p;
            x[a] = axes_[a].lo + t;
        }
        return x;
    }

    // Minimal-image representative of a coordinate difference.
    Vec wrap_delta(Vec d) const {
        for (int a = 0; a < dim(); ++a) {
            if (!axes_[a].periodic) continue;
            const double p = axes_[a].period();
            d[a] -= p * std::round(d[a] / p);
        }
        return d;
    }

    bool in_domain(const Vec& x) const {
        for (int a = 0; a < dim(); ++a) {
            if (axes_[a].periodic) continue;
            if (!(x[a] > axes_[a].lo && x[a] < axes_[a].hi)) return false;
        }
        return true;
    }

    void require_in_domain(const Vec& x) const {
        if (!in_domain(x))
            throw DomainError("point outside chart domain (" + kind_ + ")");
    }

    // Raw metric evaluation: wraps periodic axes but skips the domain check,
    // so finite-difference stencils may reach slightly past the boundary.
    Mat metric_raw(const Vec& x) const { return metric_(wrap(x)); }

    Mat metric_at(const Vec& x) const {
        require_in_domain(x);
        Mat g = metric_raw(x);
        const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-10 * (1.0 + g.cwiseAbs().maxCoeff()))
            throw ValidationError("metric evaluator returned a non-symmetric matrix");
        Eigen::LLT<Mat> llt(g);
        if (llt.info() != Eigen::Success)
            throw ValidationError("metric is not positive definite at queried point");
        return g;
    }

    double inner(const Vec& x, const Vec& u, const Vec& v) const {
        return u.dot(metric_raw(x) * v);
    }
    double norm(const Vec& x, const Vec& u) const {
        return std::sqrt(std::max(0.0, inner(x, u, u)));
    }

    // dg[k](a,b) = d g_ab / d x^k, 4th-order central difference.
    std::array<Mat, kMaxDim> metric_derivatives(const Vec& x) const {
        std::array<Mat, kMaxDim> dg;
        const double h = fd_step_;
        for (int k = 0; k < dim(); ++k) {
            Vec xp2 = x, xp1 = x, xm1 = x, xm2 = x;
            xp2[k] += 2 * h;
            xp1[k] += h;
            xm1[k] -= h;
            xm2[k] -= 2 * h;
            dg[k] = (-metric_raw(xp2) + 8.0 * metric_raw(xp1) - 8.0 * metric_raw(xm1) +
                     metric_raw(xm2)) /
                    (12.0 * h);
        }
        return dg;
    }

    ChristoffelArray christoffel_at(const Vec& x) const {
        require_in_domain(x);
        return christoffel_raw(x);
    }

    ChristoffelArray christoffel_raw(const Vec& x) const {
        const int d = dim();
        const Mat g = metric_raw(x);
        const Mat ginv = g.inverse();
        const auto dg = metric_derivatives(x);
        ChristoffelArray gamma;
        for (int c = 0; c < d; ++c) gamma[c] = Mat::Zero(d, d);
        for (int c = 0; c < d; ++c)
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b) {
                    double s = 0.0;
                    for (int e = 0; e < d; ++e)
                        s += ginv(c, e) * (dg[a](b, e) + dg[b](a, e) - dg[e](a, b));
                    gamma[c](a, b) = 0.5 * s;
                    gamma[c](b, a) = gamma[c](a, b);
                }
        return gamma;
    }

    ChristoffelArray christoffel_analytic_at(const Vec& x) const {
        if (!analytic_gamma_) throw Error("no analytic Christoffel oracle for this chart");
        require_in_domain(x);
        return analytic_gamma_(wrap(x));
    }

    // Fully lowered Riemann tensor from second metric derivatives:
    //   R_abcd = 1/2 (g_ad,bc + g_bc,ad - g_bd,ac - g_ac,bd)
    //            + g_ef (Gamma^e_da Gamma^f_cb - Gamma^e_ca Gamma^f_db)
    // Single-level differencing keeps the result accurate even where the
    // Christoffels themselves are large (e.g. near sphere-chart margins).
    CurvatureData riemann_at(const Vec& x) const {
        require_in_domain(x);
        const int d = dim();
        CurvatureData out;
        out.point = wrap(x);
        out.g = metric_raw(x);
        out.gamma = christoffel_raw(x);

        const double h = fd_step_;
        // d2g[a][b] = second partial of the metric matrix along axes a,b
        std::array<std::array<Mat, kMaxDim>, kMaxDim> d2g;
        const Mat g0 = out.g;
        for (int a = 0; a < d; ++a) {
            Vec xp2 = x, xp1 = x, xm1 = x, xm2 = x;
            xp2[a] += 2 * h;
            xp1[a] += h;
            xm1[a] -= h;
            xm2[a] -= 2 * h;
            d2g[a][a] = (-metric_raw(xp2) + 16.0 * metric_raw(xp1) - 30.0 * g0 +
                         16.0 * metric_raw(xm1) - metric_raw(xm2)) /
                        (12.0 * h * h);
        }
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                auto d_along_b = [&](double shift_a) {
                    Vec base = x;
                    base[a] += shift_a;
                    Vec xp2 = base, xp1 = base, xm1 = base, xm2 = base;
                    xp2[b] += 2 * h;
                    xp1[b] += h;
                    xm1[b] -= h;
                    xm2[b] -= 2 * h;
                    return Mat(
                        (-metric_raw(xp2) + 8.0 * metric_raw(xp1) - 8.0 * metric_raw(xm1) +
                         metric_raw(xm2)) /
                        (12.0 * h));
                };
                d2g[a][b] = (-d_along_b(2 * h) + 8.0 * d_along_b(h) - 8.0 * d_along_b(-h) +
                             d_along_b(-2 * h)) /
                            (12.0 * h);
                d2g[b][a] = d2g[a][b];
            }

        Tensor4 R(d);
        // Lowered Christoffels for the quadratic terms.
        ChristoffelArray gamma_low;  // gamma_low[e](a,b) = g_ec Gamma^c_ab
        for (int e = 0; e < d; ++e) {
            gamma_low[e] = Mat::Zero(d, d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    double s = 0.0;
                    for (int c = 0; c < d; ++c) s += out.g(e, c) * out.gamma[c](a, b);
                    gamma_low[e](a, b) = s;
                }
        }
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c)
                    for (int e = 0; e < d; ++e) {
                        double s = 0.5 * (d2g[b][c](a, e) + d2g[a][e](b, c) -
                                          d2g[a][c](b, e) - d2g[b][e](a, c));
                        for (int f = 0; f < d; ++f)
                            s += gamma_low[f](e, a) * out.gamma[f](c, b) -
                                 gamma_low[f](c, a) * out.gamma[f](e, b);
                        R(a, b, c, e) = s;
                    }
        out.riemann = R;
        return out;
    }

    Tensor4 riemann_analytic_at(const Vec& x) const {
        if (!analytic_riemann_) throw Error("no analytic Riemann oracle for this chart");
        require_in_domain(x);
        return analytic_riemann_(wrap(x));
    }

    // Integrates the geodesic equation x'' + Gamma(x',x') = 0 with classical
    // RK4 at a fixed step. If the geodesic leaves the domain the path is
    // truncated and flagged.
    GeodesicPath geodesic_shoot(const Vec& x0, const Vec& v0, double T,
                                double step_factor = 5e-3) const {
        require_in_domain(x0);
        if (T <= 0) throw ValidationError("geodesic_shoot requires T > 0");
        const double dt_target = step_factor * length_scale_;
        const int nsteps = std::max(1, static_cast<int>(std::ceil(T / dt_target)));
        const double dt = T / nsteps;

        GeodesicPath path;
        path.times.reserve(nsteps + 1);
        path.points.reserve(nsteps + 1);
        path.velocities.reserve(nsteps + 1);

        auto accel = [&](const Vec& x, const Vec& v) {
            const auto gamma = christoffel_raw(x);
            Vec a = Vec::Zero(dim());
            for (int c = 0; c < dim(); ++c) a[c] = -v.dot(gamma[c] * v);
            return a;
        };

        Vec x = wrap(x0), v = v0;
        path.times.push_back(0.0);
        path.points.push_back(x);
        path.velocities.push_back(v);
        for (int i = 0; i < nsteps; ++i) {
            const Vec k1x = v, k1v = accel(x, v);
            const Vec k2x = v + 0.5 * dt * k1v, k2v = accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
            const Vec k3x = v + 0.5 * dt * k2v, k3v = accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
            const Vec k4x = v + dt * k3v, k4v = accel(x + dt * k3x, v + dt * k3v);
            Vec xn = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            Vec vn = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            xn = wrap(xn);
            if (!in_domain(xn)) {
                path.exited = true;
                path.exit_time = path.times.back();
                return path;
            }
            x = xn;
            v = vn;
            path.times.push_back(dt * (i + 1));
            path.points.push_back(x);
            path.velocities.push_back(v);
        }
        return path;
    }

private:
    std::string kind_;
    std::vector<AxisSpec> axes_;
    MetricFn metric_;
    double length_scale_;
    double fd_step_;
    ChristoffelFn analytic_gamma_;
    RiemannFn analytic_riemann_;
};

using ChartPtr = std::shared_ptr<const AmbientChart>;

inline Mat metric_at(const AmbientChart& chart, const Vec& x) { return chart.metric_at(x); }
inline ChristoffelArray christoffel_at(const AmbientChart& chart, const Vec& x) {
    return chart.christoffel_at(x);
}
inline CurvatureData riemann_at(const AmbientChart& chart, const Vec& x) {
    return chart.riemann_at(x);
}

inline double sectional_curvature(const CurvatureData& cd, const Vec& u, const Vec& v) {
    const int d = cd.g.rows();
    double r = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) r += cd.riemann(a, b, c, e) * u[a] * v[b] * u[c] * v[e];
    const double uu = u.dot(cd.g * u);
    const double vv = v.dot(cd.g * v);
    const double uv = u.dot(cd.g * v);
    const double denom = uu * vv - uv * uv;
    if (denom < 1e-12 * std::max(1.0, uu * vv))
        throw DegenerateInputError("sectional_curvature: vectors span a degenerate plane");
    return r / denom;
}

// Residual diagnostics used by the invariants tests and acceptance suite.
inline double riemann_symmetry_residual(const Tensor4& R) {
    double res = 0.0;
    const int d = R.dim;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    res = std::max(res, std::abs(R(a, b, c, e) + R(b, a, c, e)));
                    res = std::max(res, std::abs(R(a, b, c, e) + R(a, b, e, c)));
                    res = std::max(res, std::abs(R(a, b, c, e) - R(c, e, a, b)));
                }
    return res;
}

inline double first_bianchi_residual(const Tensor4& R) {
    double res = 0.0;
    const int d = R.dim;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e)
                    res = std::max(res, std::abs(R(a, b, c, e) + R(a, c, e, b) + R(a, e, b, c)));
    return res;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

// Profile of a surface of revolution g = dr^2 + f(r)^2 dtheta^2.
struct Profile {
    std::function<double(double)> f, df, d2f;

    static Profile cosh_profile() {
        return {[](double r) { return std::cosh(r); }, [](double r) { return std::sinh(r); },
                [](double r) { return std::cosh(r); }};
    }
};

// Warp factor of the 3d metric g = f(x,y)^2 dtheta^2 + dx^2 + dy^2.
struct Profile2 {
    std::function<double(double, double)> f, fx, fy, fxx, fxy, fyy;

    static Profile2 cosh_cosh() {
        return {[](double x, double y) { return std::cosh(x) * std::cosh(y); },
                [](double x, double y) { return std::sinh(x) * std::cosh(y); },
                [](double x, double y) { return std::cosh(x) * std::sinh(y); },
                [](double x, double y) { return std::cosh(x) * std::cosh(y); },
                [](double x, double y) { return std::sinh(x) * std::sinh(y); },
                [](double x, double y) { return std::cosh(x) * std::cosh(y); }};
    }
};

inline std::shared_ptr<AmbientChart> make_flat_chart(int dim, double half_width = 10.0,
                                                     const std::vector<bool>& periodic = {},
                                                     double period = 2.0 * M_PI) {
    std::vector<AxisSpec> axes(dim);
    for (int a = 0; a < dim; ++a) {
        const bool per = a < static_cast<int>(periodic.size()) && periodic[a];
        axes[a] = per ? AxisSpec{0.0, period, true} : AxisSpec{-half_width, half_width, false};
    }
    auto chart = std::make_shared<AmbientChart>(
        "flat", axes, [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); });
    chart->set_analytic_christoffel([dim](const Vec&) {
        ChristoffelArray gamma;
        for (int c = 0; c < dim; ++c) gamma[c] = Mat::Zero(dim, dim);
        return gamma;
    });
    chart->set_analytic_riemann([dim](const Vec&) { return Tensor4(dim); });
    return chart;
}

// Unit round sphere in (theta, phi) with g = dtheta^2 + sin^2(theta) dphi^2.
// The polar caps are excluded from the domain (the chart degenerates there).
inline std::shared_ptr<AmbientChart> make_round_sphere_chart(double theta_margin = 5e-3) {
    std::vector<AxisSpec> axes = {{theta_margin, M_PI - theta_margin, false},
                                  {0.0, 2.0 * M_PI, true}};
    auto metric = [](const Vec& x) {
        Mat g = Mat::Zero(2, 2);
        const double s = std::sin(x[0]);
        g(0, 0) = 1.0;
        g(1, 1) = s * s;
        return g;
    };
    auto chart = std::make_shared<AmbientChart>("round-sphere", axes, metric);
    chart->set_analytic_christoffel([](const Vec& x) {
        ChristoffelArray gamma;
        gamma[0] = Mat::Zero(2, 2);
        gamma[1] = Mat::Zero(2, 2);
        const double s = std::sin(x[0]), c = std::cos(x[0]);
        gamma[0](1, 1) = -s * c;
        gamma[1](0, 1) = gamma[1](1, 0) = c / s;
        return gamma;
    });
    chart->set_analytic_riemann([](const Vec& x) {
        // Constant curvature +1: R_abcd = g_ac g_bd - g_ad g_bc.
        Tensor4 R(2);
        const double s2 = std::sin(x[0]) * std::sin(x[0]);
        Mat g = Mat::Zero(2, 2);
        g(0, 0) = 1.0;
        g(1, 1) = s2;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int e = 0; e < 2; ++e)
                        R(a, b, c, e) = g(a, c) * g(b, e) - g(a, e) * g(b, c);
        return R;
    });
    return chart;
}

inline std::shared_ptr<AmbientChart> make_surface_of_revolution_chart(Profile profile,
                                                                      double r_max = 1.4) {
    std::vector<AxisSpec> axes = {{-r_max, r_max, false}, {0.0, 2.0 * M_PI, true}};
    auto f = profile.f;
    auto metric = [f](const Vec& x) {
        Mat g = Mat::Zero(2, 2);
        const double fr = f(x[0]);
        g(0, 0) = 1.0;
        g(1, 1) = fr * fr;
        return g;
    };
    auto chart = std::make_shared<AmbientChart>("surface-of-revolution", axes, metric);
    if (profile.df) {
        auto df = profile.df;
        chart->set_analytic_christoffel([f, df](const Vec& x) {
            ChristoffelArray gamma;
            gamma[0] = Mat::Zero(2, 2);
            gamma[1] = Mat::Zero(2, 2);
            gamma[0](1, 1) = -f(x[0]) * df(x[0]);
            gamma[1](0, 1) = gamma[1](1, 0) = df(x[0]) / f(x[0]);
            return gamma;
        });
    }
    if (profile.d2f) {
        auto d2f = profile.d2f;
        chart->set_analytic_riemann([f, d2f](const Vec& x) {
            Tensor4 R(2);
            const double rthrth = -f(x[0]) * d2f(x[0]);  // R_{r theta r theta} = -f f''
            R(0, 1, 0, 1) = rthrth;
            R(1, 0, 1, 0) = rthrth;
            R(0, 1, 1, 0) = -rthrth;
            R(1, 0, 0, 1) = -rthrth;
            return R;
        });
    }
    return chart;
}

// Coordinates (theta, x, y); the circle {x = y = 0} is a closed geodesic of
// codimension two when f has a critical point at the origin.
inline std::shared_ptr<AmbientChart> make_warped3d_chart(Profile2 w, double half_width = 1.4) {
    std::vector<AxisSpec> axes = {{0.0, 2.0 * M_PI, true},
                                  {-half_width, half_width, false},
                                  {-half_width, half_width, false}};
    auto f = w.f;
    auto metric = [f](const Vec& x) {
        Mat g = Mat::Zero(3, 3);
        const double fv = f(x[1], x[2]);
        g(0, 0) = fv * fv;
        g(1, 1) = 1.0;
        g(2, 2) = 1.0;
        return g;
    };
    auto chart = std::make_shared<AmbientChart>("warped-3d", axes, metric);
    if (w.fx && w.fy) {
        auto fx = w.fx, fy = w.fy;
        chart->set_analytic_christoffel([f, fx, fy](const Vec& p) {
            ChristoffelArray gamma;
            for (int c = 0; c < 3; ++c) gamma[c] = Mat::Zero(3, 3);
            const double fv = f(p[1], p[2]), dx = fx(p[1], p[2]), dy = fy(p[1], p[2]);
            gamma[0](0, 1) = gamma[0](1, 0) = dx / fv;
            gamma[0](0, 2) = gamma[0](2, 0) = dy / fv;
            gamma[1](0, 0) = -fv * dx;
            gamma[2](0, 0) = -fv * dy;
            return gamma;
        });
    }
    if (w.fxx && w.fxy && w.fyy) {
        auto fxx = w.fxx, fxy = w.fxy, fyy = w.fyy, f0 = w.f;
        chart->set_analytic_riemann([f0, fxx, fxy, fyy](const Vec& p) {
            Tensor4 R(3);
            const double fv = f0(p[1], p[2]);
            // R(X, d_theta, Y, d_theta) = -f Hess f (X, Y) on the flat base.
            const double hxx = -fv * fxx(p[1], p[2]);
            const double hxy = -fv * fxy(p[1], p[2]);
            const double hyy = -fv * fyy(p[1], p[2]);
            auto put = [&R](int a, int b, int c, int e, double val) {
                R(a, b, c, e) = val;
                R(b, a, c, e) = -val;
                R(a, b, e, c) = -val;
                R(b, a, e, c) = val;
            };
            // Components R_{x theta x theta} etc. plus pair-symmetric images.
            put(1, 0, 1, 0, hxx);
            put(2, 0, 2, 0, hyy);
            put(1, 0, 2, 0, hxy);
            put(2, 0, 1, 0, hxy);
            return R;
        });
    }
    return chart;
}

// Metric product of two charts (block-diagonal metric).
inline std::shared_ptr<AmbientChart> make_product_chart(const ChartPtr& a, const ChartPtr& b) {
    const int da = a->dim(), db = b->dim();
    if (da + db > kMaxDim) throw ValidationError("product chart dimension exceeds 4");
    std::vector<AxisSpec> axes;
    for (const auto& ax : a->axes()) axes.push_back(ax);
    for (const auto& ax : b->axes()) axes.push_back(ax);
    auto metric = [a, b, da, db](const Vec& x) {
        Mat g = Mat::Zero(da + db, da + db);
        g.topLeftCorner(da, da) = a->metric_raw(x.head(da));
        g.bottomRightCorner(db, db) = b->metric_raw(x.tail(db));
        return g;
    };
    const double scale = std::min(a->length_scale(), b->length_scale());
    return std::make_shared<AmbientChart>("product(" + a->kind() + "," + b->kind() + ")", axes,
                                          metric, scale);
}

}  // namespace mcflab
