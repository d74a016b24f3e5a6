#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "mcflab/chart.hpp"
#include "mcflab/types.hpp"

namespace mcflab {

// Sampled closed submanifold. Curves (n=1) are ordered cyclically; surfaces
// (n=2) are structured row-major grids with per-axis periodicity. Surfaces
// with a non-periodic axis get derived fields on interior rows only.
struct DiscreteImmersion {
    int n = 1;
    ChartPtr chart;
    std::vector<Vec> samples;
    int grid_rows = 0, grid_cols = 0;
    bool rows_periodic = false, cols_periodic = true;

    int count() const { return static_cast<int>(samples.size()); }
    int grid_index(int i, int j) const { return i * grid_cols + j; }
};

inline DiscreteImmersion make_curve(ChartPtr chart, std::vector<Vec> pts) {
    DiscreteImmersion imm;
    imm.n = 1;
    imm.chart = std::move(chart);
    imm.samples.reserve(pts.size());
    for (auto& p : pts) imm.samples.push_back(imm.chart->wrap(p));
    return imm;
}

inline DiscreteImmersion make_grid(ChartPtr chart, int rows, int cols, std::vector<Vec> pts,
                                   bool rows_periodic, bool cols_periodic) {
    if (static_cast<int>(pts.size()) != rows * cols)
        throw ValidationError("grid immersion: sample count does not match rows*cols");
    DiscreteImmersion imm;
    imm.n = 2;
    imm.chart = std::move(chart);
    imm.grid_rows = rows;
    imm.grid_cols = cols;
    imm.rows_periodic = rows_periodic;
    imm.cols_periodic = cols_periodic;
    imm.samples.reserve(pts.size());
    for (auto& p : pts) imm.samples.push_back(imm.chart->wrap(p));
    return imm;
}

// ---------------------------------------------------------------------------
// Curve geometry helpers
// ---------------------------------------------------------------------------

// Metric length of each segment (k -> k+1 cyclic), midpoint-rule metric.
inline std::vector<double> segment_lengths(const DiscreteImmersion& imm) {
    const int N = imm.count();
    std::vector<double> len(N);
    for (int k = 0; k < N; ++k) {
        const Vec& a = imm.samples[k];
        const Vec d = imm.chart->wrap_delta(imm.samples[(k + 1) % N] - a);
        const Vec mid = a + 0.5 * d;
        len[k] = imm.chart->norm(mid, d);
    }
    return len;
}

// Metric length (n=1) or area (n=2). Segment/cell contributions are sorted
// before accumulation so the result is invariant under cyclic reindexing.
inline double volume(const DiscreteImmersion& imm) {
    std::vector<double> parts;
    if (imm.n == 1) {
        parts = segment_lengths(imm);
    } else {
        const int R = imm.grid_rows, C = imm.grid_cols;
        const int rmax = imm.rows_periodic ? R : R - 1;
        const int cmax = imm.cols_periodic ? C : C - 1;
        auto density = [&](int i, int j) {
            // sqrt(det) of the induced metric from one-sided parameter tangents
            const Vec& x = imm.samples[imm.grid_index(i, j)];
            const Vec t1 = imm.chart->wrap_delta(
                imm.samples[imm.grid_index((i + 1) % R, j)] - x);
            const Vec t2 = imm.chart->wrap_delta(
                imm.samples[imm.grid_index(i, (j + 1) % C)] - x);
            const Mat g = imm.chart->metric_raw(x);
            const double a = t1.dot(g * t1), b = t1.dot(g * t2), c = t2.dot(g * t2);
            return std::sqrt(std::max(0.0, a * c - b * b));
        };
        for (int i = 0; i < rmax; ++i)
            for (int j = 0; j < cmax; ++j) {
                const double q = 0.25 * (density(i, j) + density((i + 1) % R, j) +
                                         density(i, (j + 1) % C) +
                                         density((i + 1) % R, (j + 1) % C));
                parts.push_back(q);
            }
    }
    std::sort(parts.begin(), parts.end());
    return std::accumulate(parts.begin(), parts.end(), 0.0);
}

// Segment-pair separation test in chart coordinates, metric at the first
// endpoint. Used by the embeddedness check and by Hausdorff distances.
inline double point_segment_distance(const AmbientChart& chart, const Vec& p, const Vec& a,
                                     const Vec& seg_delta) {
    const Mat g = chart.metric_raw(p);
    const Vec w = chart.wrap_delta(a - p);
    const double dd = seg_delta.dot(g * seg_delta);
    double s = 0.0;
    if (dd > 0) s = std::clamp(-w.dot(g * seg_delta) / dd, 0.0, 1.0);
    const Vec q = w + s * seg_delta;
    return std::sqrt(std::max(0.0, q.dot(g * q)));
}

namespace detail {

// Min distance between segments A(s) = a0 + s da and B(t) = b0 + t db over
// the unit square, in the Euclidean structure induced by a Cholesky factor.
inline double segment_segment_distance(const Vec& a0, const Vec& da, const Vec& b0,
                                       const Vec& db, const Mat& g) {
    auto nrm = [&](const Vec& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); };
    const double A = da.dot(g * da), B = da.dot(g * db), C = db.dot(g * db);
    const Vec w0 = a0 - b0;
    const double D = da.dot(g * w0), E = db.dot(g * w0);
    const double det = A * C - B * B;
    double s = 0.0, t = 0.0;
    if (det > 1e-14 * std::max(1.0, A * C)) {
        s = (B * E - C * D) / det;
        t = (A * E - B * D) / det;
    }
    s = std::clamp(s, 0.0, 1.0);
    t = std::clamp(t, 0.0, 1.0);
    double best = nrm(w0 + s * da - t * db);
    // Clamped interior stationary point may not be optimal; check the edges.
    for (double ss : {0.0, 1.0}) {
        double tt = C > 0 ? std::clamp((ss * B + E) / C, 0.0, 1.0) : 0.0;
        best = std::min(best, nrm(w0 + ss * da - tt * db));
    }
    for (double tt : {0.0, 1.0}) {
        double ss = A > 0 ? std::clamp((tt * B - D) / A, 0.0, 1.0) : 0.0;
        best = std::min(best, nrm(w0 + ss * da - tt * db));
    }
    return best;
}

// Fornberg finite-difference weights: nodes z[0..nn-1] relative to the
// evaluation point 0, derivative orders 0..m. c(j,k) = weight of node j for
// the k-th derivative.
inline void fornberg_weights(const double* z, int nn, int m, double c[5][3]) {
    for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 3; ++k) c[j][k] = 0.0;
    double c1 = 1.0, c4 = z[0];
    c[0][0] = 1.0;
    for (int i = 1; i < nn; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = z[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = z[i] - z[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
}

}  // namespace detail

// Discrete embeddedness: no two non-adjacent segments come closer than
// rel_tol times the local spacing. O(N^2) pair testing, fine at desk scale.
inline bool is_embedded(const DiscreteImmersion& imm, double rel_tol = 1e-3,
                        std::pair<int, int>* offending = nullptr) {
    if (imm.n != 1) return true;  // surfaces are not flowed; no check needed
    const int N = imm.count();
    std::vector<Vec> delta(N);
    std::vector<double> len(N);
    for (int k = 0; k < N; ++k) {
        delta[k] = imm.chart->wrap_delta(imm.samples[(k + 1) % N] - imm.samples[k]);
        len[k] = imm.chart->norm(imm.samples[k], delta[k]);
    }
    for (int i = 0; i < N; ++i) {
        const Mat g = imm.chart->metric_raw(imm.samples[i]);
        for (int j = i + 2; j < N; ++j) {
            if (i == 0 && j == N - 1) continue;  // adjacent across the seam
            const Vec b0 = imm.chart->wrap_delta(imm.samples[j] - imm.samples[i]);
            const double dist = detail::segment_segment_distance(Vec(Vec::Zero(imm.chart->dim())),
                                                                 delta[i], b0, delta[j], g);
            if (dist < rel_tol * std::min(len[i], len[j])) {
                if (offending) *offending = {i, j};
                return false;
            }
        }
    }
    return true;
}

inline void validate_curve(const DiscreteImmersion& imm, bool check_spacing_ratio = false) {
    if (imm.n != 1) throw ValidationError("validate_curve: not a curve");
    if (imm.count() < 8) throw ValidationError("curve needs at least 8 samples");
    const auto len = segment_lengths(imm);
    const double scale = imm.chart->length_scale();
    for (int k = 0; k < imm.count(); ++k) {
        imm.chart->require_in_domain(imm.samples[k]);
        if (len[k] < 1e-14 * scale)
            throw ValidationError("adjacent samples coincide at index " + std::to_string(k));
    }
    if (check_spacing_ratio) {
        const auto [mn, mx] = std::minmax_element(len.begin(), len.end());
        if (*mx > 3.0 * *mn + 1e-12)
            throw ValidationError("sample spacing ratio exceeds 3 after resampling");
    }
    std::pair<int, int> bad;
    if (!is_embedded(imm, 1e-3, &bad))
        throw ValidationError("curve self-intersects near segments " + std::to_string(bad.first) +
                              " and " + std::to_string(bad.second));
}

// Redistributes curve samples to uniform metric arclength. Positions come
// from local cubic interpolation through the four bracketing samples, so the
// shape moves by O(spacing^4) rather than the chord sagitta.
inline DiscreteImmersion resample(const DiscreteImmersion& imm, int target_count) {
    if (imm.n != 1) throw ValidationError("resample supports curves only");
    if (target_count < 8) throw ValidationError("resample: target_count must be >= 8");
    const int N = imm.count();
    const auto len = segment_lengths(imm);
    std::vector<double> cum(N + 1, 0.0);
    for (int k = 0; k < N; ++k) cum[k + 1] = cum[k] + len[k];
    const double L = cum[N];
    if (L < 1e-12 * imm.chart->length_scale())
        throw DegeneracyError("resample: total length below tolerance");

    auto interpolate = [&](int seg, double tau) {
        // Window seg-1 .. seg+2, unwrapped around sample seg, arclength nodes.
        Vec pts[4];
        double t[4];
        pts[1] = imm.samples[seg];
        t[1] = 0.0;
        pts[0] = pts[1] + imm.chart->wrap_delta(imm.samples[(seg - 1 + N) % N] - pts[1]);
        t[0] = -len[(seg - 1 + N) % N];
        pts[2] = pts[1] + imm.chart->wrap_delta(imm.samples[(seg + 1) % N] - pts[1]);
        t[2] = len[seg];
        pts[3] = pts[2] +
                 imm.chart->wrap_delta(imm.samples[(seg + 2) % N] - imm.chart->wrap(pts[2]));
        t[3] = len[seg] + len[(seg + 1) % N];
        Vec out = Vec::Zero(imm.chart->dim());
        for (int i = 0; i < 4; ++i) {
            double w = 1.0;
            for (int j = 0; j < 4; ++j)
                if (j != i) w *= (tau - t[j]) / (t[i] - t[j]);
            out += w * pts[i];
        }
        return out;
    };

    std::vector<Vec> out;
    out.reserve(target_count);
    int seg = 0;
    for (int j = 0; j < target_count; ++j) {
        const double s = L * j / target_count;
        while (seg + 1 < N && cum[seg + 1] <= s) ++seg;
        out.push_back(imm.chart->wrap(interpolate(seg, s - cum[seg])));
    }
    DiscreteImmersion res = imm;
    res.samples = std::move(out);
    return res;
}

// ---------------------------------------------------------------------------
// Frames, second fundamental form, mean curvature
// ---------------------------------------------------------------------------

struct FrameField {
    int n = 1, m = 1, d = 2;
    std::vector<Mat> tangent;  // d x n, columns g-orthonormal
    std::vector<Mat> normal;   // d x m, columns g-orthonormal
    std::vector<bool> valid;   // false on surface boundary rows/cols

    // Curve parametrization derivatives kept for the h computation.
    std::vector<Vec> d1, d2;

    std::vector<std::vector<Mat>> h;  // h[k][alpha](i,j)
    bool has_h = false;

    std::vector<Vec> H_normal;   // m components in the normal frame
    std::vector<Vec> H_ambient;  // chart-coordinate vector
    bool has_H = false;
};

namespace detail {

// Gram-Schmidt a candidate against accepted columns, g-inner product.
inline bool gs_append(const Mat& g, std::vector<Vec>& accepted, Vec cand, Vec* out) {
    for (const Vec& u : accepted) cand -= u.dot(g * cand) * u;
    const double nrm = std::sqrt(std::max(0.0, cand.dot(g * cand)));
    if (nrm < 1e-6) return false;
    *out = cand / nrm;
    return true;
}

// Completes an orthonormal normal frame at a sample. `hint` columns (possibly
// empty) are tried first so frames propagate continuously along the manifold;
// coordinate axes serve as the deterministic fallback seed.
inline Mat complete_normal_frame(const Mat& g, const Mat& tangent, int m, const Mat& hint) {
    const int d = g.rows();
    std::vector<Vec> accepted;
    for (int i = 0; i < tangent.cols(); ++i) accepted.push_back(tangent.col(i));
    Mat normal(d, m);
    int found = 0;
    auto try_candidate = [&](const Vec& cand) {
        Vec u;
        if (!gs_append(g, accepted, cand, &u)) return false;
        accepted.push_back(u);
        normal.col(found++) = u;
        return true;
    };
    for (int c = 0; c < hint.cols() && found < m; ++c) try_candidate(hint.col(c));
    for (int a = 0; a < d && found < m; ++a) try_candidate(Vec(Vec::Unit(d, a)));
    if (found < m) throw FrameError("normal frame completion failed");
    return normal;
}

}  // namespace detail

inline FrameField frames_at(const DiscreteImmersion& imm);

namespace detail {

inline FrameField curve_frames(const DiscreteImmersion& imm) {
    const int N = imm.count();
    const int d = imm.chart->dim();
    FrameField ff;
    ff.n = 1;
    ff.d = d;
    ff.m = d - 1;
    ff.tangent.resize(N);
    ff.normal.resize(N);
    ff.valid.assign(N, true);
    ff.d1.resize(N);
    ff.d2.resize(N);

    const auto len = segment_lengths(imm);
    for (int k = 0; k < N; ++k) {
        // Five-sample window in local unwrapped coordinates around sample k,
        // nodes at signed arclength offsets.
        double s[5];
        Vec pts[5];
        pts[2] = imm.samples[k];
        s[2] = 0.0;
        Vec fwd = pts[2];
        double acc = 0.0;
        for (int j = 1; j <= 2; ++j) {
            const int idx = (k + j - 1 + N) % N;
            fwd += imm.chart->wrap_delta(imm.samples[(k + j) % N] - imm.chart->wrap(fwd));
            acc += len[idx];
            pts[2 + j] = fwd;
            s[2 + j] = acc;
        }
        Vec bwd = pts[2];
        acc = 0.0;
        for (int j = 1; j <= 2; ++j) {
            const int idx = (k - j + N) % N;
            bwd += imm.chart->wrap_delta(imm.samples[idx] - imm.chart->wrap(bwd));
            acc -= len[idx];
            pts[2 - j] = bwd;
            s[2 - j] = acc;
        }
        double w[5][3];
        fornberg_weights(s, 5, 2, w);
        Vec v1 = Vec::Zero(d), v2 = Vec::Zero(d);
        for (int j = 0; j < 5; ++j) {
            v1 += w[j][1] * pts[j];
            v2 += w[j][2] * pts[j];
        }
        ff.d1[k] = v1;
        ff.d2[k] = v2;

        const Mat g = imm.chart->metric_raw(imm.samples[k]);
        const double nrm = std::sqrt(std::max(0.0, v1.dot(g * v1)));
        if (nrm < 1e-12) throw FrameError("degenerate tangent at sample " + std::to_string(k));
        Mat tangent(d, 1);
        tangent.col(0) = v1 / nrm;
        ff.tangent[k] = tangent;
        const Mat hint = k == 0 ? Mat(d, 0) : ff.normal[k - 1];
        ff.normal[k] = complete_normal_frame(g, tangent, ff.m, hint);
    }
    return ff;
}

inline FrameField surface_frames(const DiscreteImmersion& imm) {
    const int R = imm.grid_rows, C = imm.grid_cols;
    const int d = imm.chart->dim();
    FrameField ff;
    ff.n = 2;
    ff.d = d;
    ff.m = d - 2;
    const int N = imm.count();
    ff.tangent.resize(N);
    ff.normal.resize(N);
    ff.valid.assign(N, false);

    for (int i = 0; i < R; ++i) {
        const bool row_interior = imm.rows_periodic || (i >= 1 && i <= R - 2);
        for (int j = 0; j < C; ++j) {
            const bool col_interior = imm.cols_periodic || (j >= 1 && j <= C - 2);
            const int k = imm.grid_index(i, j);
            if (!row_interior || !col_interior) continue;
            const Vec& x = imm.samples[k];
            const Vec t1 = 0.5 * imm.chart->wrap_delta(
                                     imm.samples[imm.grid_index((i + 1) % R, j)] -
                                     imm.samples[imm.grid_index((i - 1 + R) % R, j)]);
            const Vec t2 = 0.5 * imm.chart->wrap_delta(
                                     imm.samples[imm.grid_index(i, (j + 1) % C)] -
                                     imm.samples[imm.grid_index(i, (j - 1 + C) % C)]);
            const Mat g = imm.chart->metric_raw(x);
            std::vector<Vec> accepted;
            Mat tangent(d, 2);
            Vec u;
            if (!gs_append(g, accepted, t1, &u)) throw FrameError("degenerate grid tangent");
            accepted.push_back(u);
            tangent.col(0) = u;
            if (!gs_append(g, accepted, t2, &u)) throw FrameError("degenerate grid tangent");
            accepted.push_back(u);
            tangent.col(1) = u;
            ff.tangent[k] = tangent;
            Mat hint(d, 0);
            if (j > 0 && ff.valid[imm.grid_index(i, j - 1)])
                hint = ff.normal[imm.grid_index(i, j - 1)];
            else if (i > 0 && ff.valid[imm.grid_index(i - 1, j)])
                hint = ff.normal[imm.grid_index(i - 1, j)];
            ff.normal[k] = complete_normal_frame(g, tangent, ff.m, hint);
            ff.valid[k] = true;
        }
    }
    return ff;
}

}  // namespace detail

inline FrameField frames_at(const DiscreteImmersion& imm) {
    return imm.n == 1 ? detail::curve_frames(imm) : detail::surface_frames(imm);
}

// Fills h_{alpha i j} = <nabla_{e_i} e_j, nu_alpha>_g using the chart
// Christoffels. Curves reuse the stored parametrization derivatives.
inline void second_fundamental_form(const DiscreteImmersion& imm, FrameField& ff) {
    const int d = ff.d;
    const int N = imm.count();
    ff.h.assign(N, {});
    if (imm.n == 1) {
        for (int k = 0; k < N; ++k) {
            const auto gamma = imm.chart->christoffel_raw(imm.samples[k]);
            const Mat g = imm.chart->metric_raw(imm.samples[k]);
            const Vec& v1 = ff.d1[k];
            Vec kappa = ff.d2[k];
            for (int c = 0; c < d; ++c) kappa[c] += v1.dot(gamma[c] * v1);
            const double speed2 = v1.dot(g * v1);
            std::vector<Mat> hk(ff.m, Mat::Zero(1, 1));
            for (int a = 0; a < ff.m; ++a)
                hk[a](0, 0) = ff.normal[k].col(a).dot(g * kappa) / speed2;
            ff.h[k] = std::move(hk);
        }
    } else {
        const int R = imm.grid_rows, C = imm.grid_cols;
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) {
                const int k = imm.grid_index(i, j);
                if (!ff.valid[k]) continue;
                const Vec& x = imm.samples[k];
                auto at = [&](int di, int dj) -> Vec {
                    const int ii = (i + di + R) % R, jj = (j + dj + C) % C;
                    return x + imm.chart->wrap_delta(imm.samples[imm.grid_index(ii, jj)] - x);
                };
                const Vec t1 = 0.5 * (at(1, 0) - at(-1, 0));
                const Vec t2 = 0.5 * (at(0, 1) - at(0, -1));
                const Vec d11 = at(1, 0) - 2.0 * x + at(-1, 0);
                const Vec d22 = at(0, 1) - 2.0 * x + at(0, -1);
                const Vec d12 = 0.25 * (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1));
                const auto gamma = imm.chart->christoffel_raw(x);
                const Mat g = imm.chart->metric_raw(x);
                Mat t(d, 2);
                t.col(0) = t1;
                t.col(1) = t2;
                // E expresses the orthonormal tangents through the parameter
                // tangents: e_i = sum_a E(a,i) t_a.
                Mat gram(2, 2);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) gram(a, b) = t.col(a).dot(g * t.col(b));
                Mat rhs(2, 2);
                for (int a = 0; a < 2; ++a)
                    for (int ii = 0; ii < 2; ++ii)
                        rhs(a, ii) = t.col(a).dot(g * ff.tangent[k].col(ii));
                const Mat E = gram.ldlt().solve(rhs);
                // Normal components of nabla_{t_a} t_b.
                std::array<std::array<Vec, 2>, 2> dd;
                dd[0][0] = d11;
                dd[1][1] = d22;
                dd[0][1] = dd[1][0] = d12;
                std::vector<Mat> hk(ff.m, Mat::Zero(2, 2));
                for (int al = 0; al < ff.m; ++al) {
                    Mat S(2, 2);
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            Vec nab = dd[a][b];
                            for (int c = 0; c < d; ++c) nab[c] += t.col(a).dot(gamma[c] * t.col(b));
                            S(a, b) = ff.normal[k].col(al).dot(g * nab);
                        }
                    for (int ii = 0; ii < 2; ++ii)
                        for (int jj = 0; jj < 2; ++jj) {
                            double s = 0.0;
                            for (int a = 0; a < 2; ++a)
                                for (int b = 0; b < 2; ++b) s += E(a, ii) * E(b, jj) * S(a, b);
                            hk[al](ii, jj) = s;
                        }
                }
                ff.h[k] = std::move(hk);
            }
    }
    ff.has_h = true;
}

// H^alpha = sum_i h_{alpha i i}, plus the chart-coordinate vector.
inline void mean_curvature(const DiscreteImmersion& imm, FrameField& ff) {
    if (!ff.has_h) second_fundamental_form(imm, ff);
    const int N = imm.count();
    ff.H_normal.assign(N, Vec::Zero(ff.m));
    ff.H_ambient.assign(N, Vec::Zero(ff.d));
    for (int k = 0; k < N; ++k) {
        if (!ff.valid[k]) continue;
        Vec Hn = Vec::Zero(ff.m);
        for (int a = 0; a < ff.m; ++a) Hn[a] = ff.h[k][a].trace();
        ff.H_normal[k] = Hn;
        Vec Ha = Vec::Zero(ff.d);
        for (int a = 0; a < ff.m; ++a) Ha += Hn[a] * ff.normal[k].col(a);
        ff.H_ambient[k] = Ha;
    }
    ff.has_H = true;
}

inline FrameField full_frames(const DiscreteImmersion& imm) {
    FrameField ff = frames_at(imm);
    second_fundamental_form(imm, ff);
    mean_curvature(imm, ff);
    return ff;
}

// Symmetric Hausdorff distance between two closed curves, point-to-polyline
// with the metric frozen at the query point.
inline double hausdorff_distance(const DiscreteImmersion& A, const DiscreteImmersion& B) {
    auto one_sided = [](const DiscreteImmersion& P, const DiscreteImmersion& Q) {
        const int NQ = Q.count();
        std::vector<Vec> qdelta(NQ);
        for (int j = 0; j < NQ; ++j)
            qdelta[j] = Q.chart->wrap_delta(Q.samples[(j + 1) % NQ] - Q.samples[j]);
        double worst = 0.0;
        for (const Vec& p : P.samples) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < NQ; ++j)
                best = std::min(best,
                                point_segment_distance(*P.chart, p, Q.samples[j], qdelta[j]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

}  // namespace mcflab
