#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace mcflab {

// Ambient dimension is at most 4 (n <= 2 submanifolds of codimension <= 2),
// so all dense objects live on the stack.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};
struct DegeneracyError : Error {
    using Error::Error;
};
struct FrameError : Error {
    using Error::Error;
};
struct DistanceError : Error {
    using Error::Error;
};
struct SingularityError : Error {
    using Error::Error;
};
struct CertificationError : Error {
    using Error::Error;
};

// Fully lowered rank-4 tensor R_{abcd} on a chart of dimension <= 4.
struct Tensor4 {
    int dim = 0;
    std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> v{};

    explicit Tensor4(int d = 0) : dim(d) { v.fill(0.0); }

    double& operator()(int a, int b, int c, int d) {
        return v[((a * dim + b) * dim + c) * dim + d];
    }
    double operator()(int a, int b, int c, int d) const {
        return v[((a * dim + b) * dim + c) * dim + d];
    }

    double max_abs() const {
        double m = 0.0;
        const int n = dim * dim * dim * dim;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    }
};

// Shortest-round-trip style formatting used by every CSV writer, so that
// identical doubles always produce identical bytes.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace mcflab
