#pragma once

#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "mcflab/chart.hpp"
#include "mcflab/immersion.hpp"
#include "mcflab/types.hpp"

namespace mcflab {

// Squared metric distance to a reference submanifold. Scenario presets
// provide the closed form; the generic fallback projects onto the discrete
// reference through Fermi coordinates built from geodesic shooting.
class SquaredDistanceField {
public:
    using PsiFn = std::function<double(const AmbientChart&, const Vec&)>;
    using GradFn = std::function<Vec(const AmbientChart&, const Vec&)>;

    static SquaredDistanceField analytic(ChartPtr chart, PsiFn psi, GradFn grad_cov = nullptr) {
        SquaredDistanceField f;
        f.chart_ = std::move(chart);
        f.psi_ = std::move(psi);
        f.grad_cov_ = std::move(grad_cov);
        return f;
    }

    static SquaredDistanceField projection(const DiscreteImmersion& sigma) {
        if (sigma.n != 1)
            throw ValidationError("projection distance field supports curve references only");
        SquaredDistanceField f;
        f.chart_ = sigma.chart;
        f.sigma_ = sigma;
        f.frames_ = frames_at(sigma);
        auto lengths = segment_lengths(sigma);
        f.cum_.assign(lengths.size() + 1, 0.0);
        for (size_t k = 0; k < lengths.size(); ++k) f.cum_[k + 1] = f.cum_[k] + lengths[k];
        return f;
    }

    bool analytic_form() const { return static_cast<bool>(psi_); }
    const AmbientChart& chart() const { return *chart_; }

    double psi(const Vec& p) const {
        if (psi_) return psi_(*chart_, p);
        return project(p).first;
    }

    // Covariant gradient components d_a psi; finite differences when no
    // closed form is attached.
    Vec grad_covariant(const Vec& p) const {
        if (grad_cov_) return grad_cov_(*chart_, p);
        const int d = chart_->dim();
        const double h = chart_->fd_step();
        Vec out(d);
        for (int a = 0; a < d; ++a) {
            Vec xp2 = p, xp1 = p, xm1 = p, xm2 = p;
            xp2[a] += 2 * h;
            xp1[a] += h;
            xm1[a] -= h;
            xm2[a] -= 2 * h;
            out[a] = (-psi(xp2) + 8.0 * psi(xp1) - 8.0 * psi(xm1) + psi(xm2)) / (12.0 * h);
        }
        return out;
    }

    Vec grad_contravariant(const Vec& p) const {
        const Mat g = chart_->metric_raw(p);
        return Vec(g.ldlt().solve(grad_covariant(p)));
    }

private:
    // Fermi projection: find (t, w) with exp_{gamma(t)}(sum_a w_a nu_a(t)) = p
    // by damped Newton on the shooting map; psi = |w|^2.
    std::pair<double, Vec> project(const Vec& p) const {
        const DiscreteImmersion& sig = *sigma_;
        const int N = sig.count();
        const int d = chart_->dim();
        const int m = d - 1;

        int k0 = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < N; ++k) {
            const double dist = chart_->norm(p, chart_->wrap_delta(sig.samples[k] - p));
            if (dist < best) {
                best = dist;
                k0 = k;
            }
        }

        // Base curve interpolated by a local cubic through samples k0-1..k0+2,
        // parametrized by arclength offset from sample k0.
        Vec pts[4];
        double s[4];
        pts[1] = sig.samples[k0];
        s[1] = 0.0;
        pts[0] = pts[1] + chart_->wrap_delta(sig.samples[(k0 - 1 + N) % N] - pts[1]);
        s[0] = -seg_len(k0 - 1);
        pts[2] = pts[1] + chart_->wrap_delta(sig.samples[(k0 + 1) % N] - pts[1]);
        s[2] = seg_len(k0);
        pts[3] = pts[2] + chart_->wrap_delta(sig.samples[(k0 + 2) % N] - chart_->wrap(pts[2]));
        s[3] = s[2] + seg_len(k0 + 1);

        auto base_point = [&](double t) {
            Vec out = Vec::Zero(d);
            for (int i = 0; i < 4; ++i) {
                double w = 1.0;
                for (int j = 0; j < 4; ++j)
                    if (j != i) w *= (t - s[j]) / (s[i] - s[j]);
                out += w * pts[i];
            }
            return out;
        };
        auto base_tangent = [&](double t) {
            Vec out = Vec::Zero(d);
            for (int i = 0; i < 4; ++i) {
                double w = 0.0;
                for (int j = 0; j < 4; ++j) {
                    if (j == i) continue;
                    double term = 1.0 / (s[i] - s[j]);
                    for (int l = 0; l < 4; ++l)
                        if (l != i && l != j) term *= (t - s[l]) / (s[i] - s[l]);
                    w += term;
                }
                out += w * pts[i];
            }
            return out;
        };

        const Mat hint = frames_->normal[k0];
        auto shoot_residual = [&](const Vec& u) -> Vec {
            const double t = u[0];
            const Vec base = chart_->wrap(base_point(t));
            const Mat g = chart_->metric_raw(base);
            Mat tan(d, 1);
            const Vec tv = base_tangent(t);
            const double tn = std::sqrt(std::max(1e-300, tv.dot(g * tv)));
            tan.col(0) = tv / tn;
            const Mat normal = detail::complete_normal_frame(g, tan, m, hint);
            Vec w = Vec::Zero(d);
            for (int a = 0; a < m; ++a) w += u[1 + a] * normal.col(a);
            const double wn = std::sqrt(std::max(0.0, w.dot(g * w)));
            Vec endpoint = base;
            if (wn > 1e-14) {
                auto path = chart_->geodesic_shoot(base, w, 1.0);
                if (path.exited) throw DistanceError("projection geodesic left the domain");
                endpoint = path.points.back();
            }
            return chart_->wrap_delta(endpoint - p);
        };

        Vec u = Vec::Zero(1 + m);
        Vec r = shoot_residual(u);
        double rn = r.norm();
        const double tol = 1e-10 * chart_->length_scale();
        for (int it = 0; it < 50 && rn > tol; ++it) {
            Mat J(d, 1 + m);
            const double dh = 1e-6 * chart_->length_scale();
            for (int c = 0; c < 1 + m; ++c) {
                Vec up = u, um = u;
                up[c] += dh;
                um[c] -= dh;
                J.col(c) = (shoot_residual(up) - shoot_residual(um)) / (2 * dh);
            }
            const Vec step = J.fullPivLu().solve(-r);
            double lambda = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < 8; ++bt, lambda *= 0.5) {
                const Vec cand = u + lambda * step;
                Vec rc;
                try {
                    rc = shoot_residual(cand);
                } catch (const DistanceError&) {
                    continue;
                }
                if (rc.norm() < rn) {
                    u = cand;
                    r = rc;
                    rn = rc.norm();
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
        }
        if (rn > 1e3 * tol) {
            std::ostringstream os;
            os << "distance projection did not converge (residual " << rn << " at point";
            for (int a = 0; a < d; ++a) os << ' ' << p[a];
            os << ")";
            throw DistanceError(os.str());
        }
        double psi_val = 0.0;
        for (int a = 0; a < m; ++a) psi_val += u[1 + a] * u[1 + a];
        return {psi_val, u};
    }

    double seg_len(int k) const {
        const int N = sigma_->count();
        k = ((k % N) + N) % N;
        return cum_[k + 1] - cum_[k];
    }

    ChartPtr chart_;
    PsiFn psi_;
    GradFn grad_cov_;
    std::optional<DiscreteImmersion> sigma_;
    std::optional<FrameField> frames_;
    std::vector<double> cum_;
};

// Covariant Hessian of psi and the spectrum of the metric-raised
// endomorphism g^{-1} nabla^2 psi (real, since it is symmetrizable).
struct HessianPsi {
    Mat covariant;
    Vec eigenvalues;   // ascending
    double asymmetry;  // max |H - H^T| before symmetrization
};

inline HessianPsi hessian_psi(const SquaredDistanceField& field, const Vec& p) {
    const AmbientChart& chart = field.chart();
    const int d = chart.dim();
    const double h = chart.fd_step();

    auto f = [&](const Vec& x) { return field.psi(x); };
    Vec grad(d);
    Mat second = Mat::Zero(d, d);
    const double f0 = f(p);
    for (int a = 0; a < d; ++a) {
        Vec xp2 = p, xp1 = p, xm1 = p, xm2 = p;
        xp2[a] += 2 * h;
        xp1[a] += h;
        xm1[a] -= h;
        xm2[a] -= 2 * h;
        const double fp2 = f(xp2), fp1 = f(xp1), fm1 = f(xm1), fm2 = f(xm2);
        grad[a] = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
        second(a, a) = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            auto d_along_b = [&](double shift) {
                Vec base = p;
                base[a] += shift;
                Vec xp2 = base, xp1 = base, xm1 = base, xm2 = base;
                xp2[b] += 2 * h;
                xp1[b] += h;
                xm1[b] -= h;
                xm2[b] -= 2 * h;
                return (-f(xp2) + 8.0 * f(xp1) - 8.0 * f(xm1) + f(xm2)) / (12.0 * h);
            };
            second(a, b) = (-d_along_b(2 * h) + 8.0 * d_along_b(h) - 8.0 * d_along_b(-h) +
                            d_along_b(-2 * h)) /
                           (12.0 * h);
            second(b, a) = second(a, b);
        }

    // Use the analytic gradient when present; keeps the Christoffel term
    // consistent with the closed form.
    if (field.analytic_form()) grad = field.grad_covariant(p);

    const auto gamma = chart.christoffel_raw(p);
    Mat hess = second;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) hess(a, b) -= gamma[c](a, b) * grad[c];
    HessianPsi out;
    out.asymmetry = (hess - hess.transpose()).cwiseAbs().maxCoeff();
    hess = 0.5 * (hess + hess.transpose());

    const Mat g = chart.metric_raw(p);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hess, g);
    out.covariant = hess;
    out.eigenvalues = es.eigenvalues();
    return out;
}

// Sum of the n smallest eigenvalues (input ascending).
inline double tr_n_smallest(const Vec& eigenvalues, int n) {
    if (n < 1 || n > eigenvalues.size())
        throw ValidationError("tr_n_smallest: n out of range");
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += eigenvalues[i];
    return s;
}

// Fermi-style evidence grid filling the tubular neighbourhood U_eps1:
// base sample x normal direction x radius.
struct TubePoint {
    int base = 0, direction = 0;
    double radius = 0;
    Vec point;
};

struct TubularRegion {
    DiscreteImmersion sigma;
    FrameField frames;
    double epsilon1 = 0.5;
    std::vector<TubePoint> grid;
    int base_count = 0, radial_levels = 0, angular_count = 0;
};

inline TubularRegion build_tubular_region(const DiscreteImmersion& sigma, double epsilon1,
                                          const SquaredDistanceField& field, int base_count = 16,
                                          int radial_levels = 8, int angular_count = 8) {
    if (epsilon1 <= 0) throw ValidationError("epsilon1 must be positive");
    if (radial_levels < 8) throw ValidationError("tubular grid needs at least 8 radial levels");
    TubularRegion region;
    region.sigma = sigma;
    region.frames = frames_at(sigma);
    region.epsilon1 = epsilon1;
    const int N = sigma.count();
    const int m = region.frames.m;
    const int ndir = m == 1 ? 2 : std::max(8, angular_count);
    base_count = std::min(base_count, N);
    region.base_count = base_count;
    region.radial_levels = radial_levels;
    region.angular_count = ndir;

    for (int b = 0; b < base_count; ++b) {
        const int k = static_cast<int>(static_cast<long>(b) * N / base_count);
        const Vec& x = sigma.samples[k];
        for (int dir = 0; dir < ndir; ++dir) {
            Vec nu;
            if (m == 1) {
                nu = (dir == 0 ? 1.0 : -1.0) * region.frames.normal[k].col(0);
            } else {
                const double ang = 2.0 * M_PI * dir / ndir;
                nu = std::cos(ang) * region.frames.normal[k].col(0) +
                     std::sin(ang) * region.frames.normal[k].col(1);
            }
            for (int l = 1; l <= radial_levels; ++l) {
                const double r = epsilon1 * l / radial_levels;
                auto path = sigma.chart->geodesic_shoot(x, r * nu, 1.0);
                if (path.exited)
                    throw CertificationError("tube grid point left the chart domain");
                TubePoint tp;
                tp.base = k;
                tp.direction = dir;
                tp.radius = r;
                tp.point = path.points.back();
                const double psi = field.psi(tp.point);
                if (psi > epsilon1 * epsilon1 * (1.0 + 1e-6) + 1e-12)
                    throw CertificationError("tube grid point lies outside U_eps1");
                region.grid.push_back(tp);
            }
        }
    }
    return region;
}

// Region-scoped squared distance: rejects queries far outside the tube and
// returns psi with its contravariant gradient.
inline std::pair<double, Vec> squared_distance(const TubularRegion& region,
                                               const SquaredDistanceField& field, const Vec& p) {
    const double psi = field.psi(p);
    const double range = 2.0 * region.epsilon1;
    if (psi > range * range)
        throw DistanceError("point lies outside the working tube (psi = " +
                            std::to_string(psi) + ")");
    return {psi, field.grad_contravariant(p)};
}

struct BarrierEvidence {
    TubePoint at;
    double psi = 0, tr_n = 0, ratio = 0;
};

struct BarrierCertificate {
    std::string scenario_id;
    double epsilon1 = 0;
    double psi_floor = 0;
    double safety = 0.05;
    double min_ratio = 0;  // grid infimum of tr_n / psi, before the safety factor
    double c1 = 0;         // certified constant, after the safety factor
    bool verdict = false;
    std::vector<BarrierEvidence> evidence;
};

// Certifies tr_n grad^2 psi >= c1 psi on the tube by taking the grid infimum
// of the ratio with a safety factor. Points with psi below the floor are
// excluded to avoid 0/0 on Sigma itself.
inline BarrierCertificate certify_barrier(const TubularRegion& region,
                                          const SquaredDistanceField& field, int n,
                                          double psi_floor = -1.0, double safety = 0.05,
                                          std::string scenario_id = "") {
    BarrierCertificate cert;
    cert.scenario_id = std::move(scenario_id);
    cert.epsilon1 = region.epsilon1;
    cert.safety = safety;
    cert.psi_floor = psi_floor >= 0 ? psi_floor : std::pow(1e-3 * region.epsilon1, 2);
    cert.min_ratio = std::numeric_limits<double>::infinity();

    for (const TubePoint& tp : region.grid) {
        double psi;
        HessianPsi hp;
        try {
            psi = field.psi(tp.point);
            hp = hessian_psi(field, tp.point);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "barrier evidence failed at base " << tp.base << " direction " << tp.direction
               << " radius " << tp.radius << ": " << e.what();
            throw CertificationError(os.str());
        }
        if (psi < cert.psi_floor) continue;
        BarrierEvidence ev;
        ev.at = tp;
        ev.psi = psi;
        ev.tr_n = tr_n_smallest(hp.eigenvalues, n);
        ev.ratio = ev.tr_n / psi;
        cert.min_ratio = std::min(cert.min_ratio, ev.ratio);
        cert.evidence.push_back(ev);
    }
    if (cert.evidence.empty()) throw CertificationError("no usable barrier evidence points");
    cert.c1 = cert.min_ratio >= 0 ? cert.min_ratio * (1.0 - safety)
                                  : cert.min_ratio * (1.0 + safety);
    cert.verdict = cert.c1 > 0;
    return cert;
}

// Convergence-controlled certification: the grid is doubled until the
// infimum moves by no more than 2% between refinements.
inline BarrierCertificate certify_barrier_refined(const DiscreteImmersion& sigma, double epsilon1,
                                                  const SquaredDistanceField& field, int n,
                                                  double psi_floor = -1.0, double safety = 0.05,
                                                  std::string scenario_id = "",
                                                  int max_rounds = 3) {
    int bases = 16, radial = 8, angular = 8;
    TubularRegion region = build_tubular_region(sigma, epsilon1, field, bases, radial, angular);
    BarrierCertificate cert = certify_barrier(region, field, n, psi_floor, safety, scenario_id);
    for (int round = 1; round < max_rounds; ++round) {
        bases *= 2;
        radial *= 2;
        TubularRegion fine = build_tubular_region(sigma, epsilon1, field, bases, radial, angular);
        BarrierCertificate next = certify_barrier(fine, field, n, psi_floor, safety, scenario_id);
        const double change = std::abs(next.min_ratio - cert.min_ratio) /
                              std::max(1e-12, std::abs(cert.min_ratio));
        cert = next;
        if (change <= 0.02) break;
    }
    return cert;
}

}  // namespace mcflab
