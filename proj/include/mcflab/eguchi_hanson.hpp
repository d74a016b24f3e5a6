#pragma once

#include <cmath>

#include "mcflab/chart.hpp"

namespace mcflab {

// Eguchi-Hanson gravitational instanton on T*S^2, written in a chart that is
// regular across the zero-section 2-sphere.
//
// Starting from the classical form
//   ds^2 = (1 - a^4/r^4)^{-1} dr^2 + (r^2/4)(1 - a^4/r^4) sigma3^2
//          + (r^2/4)(dtheta^2 + sin^2 theta dphi^2),
//   sigma3 = dpsi + cos(theta) dphi,
// substitute rho^2 = (r^4 - a^4)/(4 r^2), i.e. r^2 = 2 rho^2 + Q with
// Q = sqrt(4 rho^4 + a^4), and pass to fiber coordinates xi = rho cos(psi),
// eta = rho sin(psi). With psi-period 2*pi the metric is smooth at rho = 0
// and the components become, with P = 4 (rho^2 + Q) / Q^2 and C = r^2/4:
//
//   g = d xi^2 + d eta^2 + P (xi d xi + eta d eta)^2
//       + 2 cos(theta) (xi d eta - eta d xi) d phi
//       + C dtheta^2 + (C sin^2 theta + rho^2 cos^2 theta) dphi^2.
//
// The zero section is {xi = eta = 0}, a round 2-sphere of radius a/2. The
// chart covers it minus the poles; theta stays inside (margin, pi - margin).
// All components are smooth functions of (xi, eta) through rho = 0, so the
// generic finite-difference curvature path applies without special casing.
inline std::shared_ptr<AmbientChart> make_eguchi_hanson_chart(double a = 1.0,
                                                              double theta_margin = 0.02,
                                                              double fiber_extent = 0.9) {
    if (a <= 0) throw ValidationError("eguchi-hanson parameter a must be positive");
    std::vector<AxisSpec> axes = {{-fiber_extent, fiber_extent, false},
                                  {-fiber_extent, fiber_extent, false},
                                  {theta_margin, M_PI - theta_margin, false},
                                  {0.0, 2.0 * M_PI, true}};
    const double a4 = a * a * a * a;
    auto metric = [a4](const Vec& x) {
        const double xi = x[0], eta = x[1], th = x[2];
        const double rho2 = xi * xi + eta * eta;
        const double Q = std::sqrt(4.0 * rho2 * rho2 + a4);
        const double r2 = 2.0 * rho2 + Q;
        const double P = 4.0 * (rho2 + Q) / (Q * Q);
        const double C = 0.25 * r2;
        const double ct = std::cos(th), st = std::sin(th);
        Mat g = Mat::Zero(4, 4);
        g(0, 0) = 1.0 + P * xi * xi;
        g(0, 1) = g(1, 0) = P * xi * eta;
        g(1, 1) = 1.0 + P * eta * eta;
        g(0, 3) = g(3, 0) = -eta * ct;
        g(1, 3) = g(3, 1) = xi * ct;
        g(2, 2) = C;
        g(3, 3) = C * st * st + rho2 * ct * ct;
        return g;
    };
    return std::make_shared<AmbientChart>("eguchi-hanson", axes, metric);
}

}  // namespace mcflab
