#pragma once

#include <vector>

#include "mcflab/chart.hpp"
#include "mcflab/immersion.hpp"
#include "mcflab/types.hpp"

namespace mcflab {

inline double riemann_contract(const Tensor4& R, const Vec& u, const Vec& v, const Vec& w,
                               const Vec& z) {
    const int d = R.dim;
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
        if (u[a] == 0.0) continue;
        for (int b = 0; b < d; ++b) {
            if (v[b] == 0.0) continue;
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) s += R(a, b, c, e) * u[a] * v[b] * w[c] * z[e];
        }
    }
    return s;
}

// Tangential trace of the ambient curvature on the normal bundle, in the
// given frames: Ricci_part(alpha,beta) = sum_i R(e_i, nu_alpha, e_i, nu_beta).
// With the sphere-positive sign convention this equals the Gauss curvature
// for a curve on a surface.
inline Mat partial_ricci(const CurvatureData& cd, const Mat& tangent, const Mat& normal) {
    const int n = tangent.cols(), m = normal.cols();
    Mat out = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += riemann_contract(cd.riemann, tangent.col(i), normal.col(a), tangent.col(i),
                                      normal.col(b));
            out(a, b) = s;
            out(b, a) = s;
        }
    return out;
}

// Quadratic expression in the second fundamental form:
// A(alpha,beta) = sum_{i,j} h_{alpha i j} h_{beta i j}. Positive semidefinite.
inline Mat shape_quadratic(const std::vector<Mat>& h_sample) {
    const int m = static_cast<int>(h_sample.size());
    Mat out = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const double s = (h_sample[a].array() * h_sample[b].array()).sum();
            out(a, b) = s;
            out(b, a) = s;
        }
    return out;
}

struct StabilityCertificate {
    std::string scenario_id;
    double margin = 1e-4;
    double c0 = 0.0;
    bool strongly_stable = false;
    std::vector<int> sample_index;
    std::vector<Mat> op;           // S = -partial_ricci - shape_quadratic per sample
    std::vector<Vec> eigenvalues;  // ascending per sample
};

// Pointwise operator S on the normal bundle with eigenvalue field and the
// global constant c0 = min over samples of the smallest eigenvalue. The sign
// is pinned so the totally geodesic neck of the cosh surface yields S = +1.
inline StabilityCertificate certify_strong_stability(const DiscreteImmersion& imm,
                                                     double margin = 1e-4,
                                                     std::string scenario_id = "") {
    if (margin <= 0) throw ValidationError("stability margin must be positive");
    FrameField ff;
    try {
        ff = frames_at(imm);
        second_fundamental_form(imm, ff);
    } catch (const Error& e) {
        throw CertificationError(std::string("frame computation failed: ") + e.what());
    }

    StabilityCertificate cert;
    cert.scenario_id = std::move(scenario_id);
    cert.margin = margin;
    cert.c0 = std::numeric_limits<double>::infinity();

    const int N = imm.count();
    for (int k = 0; k < N; ++k) {
        if (!ff.valid[k]) continue;
        CurvatureData cd;
        try {
            cd = imm.chart->riemann_at(imm.samples[k]);
        } catch (const Error& e) {
            throw CertificationError("curvature evaluation failed at sample " +
                                     std::to_string(k) + ": " + e.what());
        }
        const Mat ricci = partial_ricci(cd, ff.tangent[k], ff.normal[k]);
        const Mat quad = shape_quadratic(ff.h[k]);
        Mat S = -ricci - quad;
        S = 0.5 * (S + S.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(S);
        cert.sample_index.push_back(k);
        cert.op.push_back(S);
        cert.eigenvalues.push_back(es.eigenvalues());
        cert.c0 = std::min(cert.c0, es.eigenvalues()[0]);
    }
    if (cert.sample_index.empty())
        throw CertificationError("no valid samples to certify");
    cert.strongly_stable = cert.c0 > cert.margin;
    return cert;
}

// Discrete second-variation quadratic form along a closed curve:
//   Q(V) = sum_k w_k ( |nabla^perp V|^2 + <S_k v_k, v_k> ),
// where V is given by normal-frame components per sample. Strong stability
// makes the integrand pointwise >= c0 |V|^2.
inline double second_variation_quadratic(const DiscreteImmersion& imm, const FrameField& ff,
                                         const StabilityCertificate& cert,
                                         const std::vector<Vec>& components,
                                         double* weighted_norm2 = nullptr) {
    if (imm.n != 1) throw ValidationError("second_variation_quadratic supports curves only");
    const int N = imm.count();
    const auto len = segment_lengths(imm);

    std::vector<Vec> ambient(N);
    for (int k = 0; k < N; ++k) ambient[k] = ff.normal[k] * components[k];

    double q = 0.0, norm2 = 0.0;
    for (int k = 0; k < N; ++k) {
        const Vec& x = imm.samples[k];
        const Mat g = imm.chart->metric_raw(x);
        const auto gamma = imm.chart->christoffel_raw(x);
        const double w = 0.5 * (len[(k - 1 + N) % N] + len[k]);
        const double ds = len[(k - 1 + N) % N] + len[k];

        // Covariant derivative along the curve, then normal projection.
        Vec dV = (ambient[(k + 1) % N] - ambient[(k - 1 + N) % N]) / ds;
        const Vec e1 = ff.tangent[k].col(0);
        for (int c = 0; c < imm.chart->dim(); ++c) dV[c] += e1.dot(gamma[c] * ambient[k]);
        Vec perp = dV;
        for (int i = 0; i < ff.n; ++i) {
            const Vec ei = ff.tangent[k].col(i);
            perp -= ei.dot(g * dV) * ei;
        }
        const double grad2 = perp.dot(g * perp);
        const double sv = components[k].dot(cert.op[k] * components[k]);
        q += w * (grad2 + sv);
        norm2 += w * components[k].squaredNorm();
    }
    if (weighted_norm2) *weighted_norm2 = norm2;
    return q;
}

}  // namespace mcflab
