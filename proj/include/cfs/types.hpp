#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdlib>
#include <complex>
#include <stdexcept>
#include <string>

namespace cfs {

inline constexpr int kDim = 4;

using Complex = std::complex<double>;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using CVec4 = Eigen::Vector4cd;
using CMat4 = Eigen::Matrix4cd;

/// Spinor at a point, components in the local orthonormal frame.
using Spinor = CVec4;
/// Endomorphism of (or map between) spinor fibers.
using SpinMatrix = CMat4;

/// Rank-3 array indexed as a[i](j, k).
using Array3 = std::array<Mat4, 4>;

inline const Mat4& eta() {
    static const Mat4 e = Vec4(1.0, -1.0, -1.0, -1.0).asDiagonal();
    return e;
}

/// Base class of all library errors; `kind()` names the failure class.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct SignatureError : Error {
    explicit SignatureError(const std::string& w) : Error("signature", w) {}
};
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& w) : Error("convergence", w) {}
};
struct GeometryError : Error {
    explicit GeometryError(const std::string& w) : Error("geometry", w) {}
};
struct BranchCutError : Error {
    explicit BranchCutError(const std::string& w) : Error("branch-cut", w) {}
};
struct RegularizationError : Error {
    explicit RegularizationError(const std::string& w) : Error("regularization", w) {}
};
struct InitialDataError : Error {
    explicit InitialDataError(const std::string& w) : Error("initial-data", w) {}
};
struct SingularEndpointError : Error {
    explicit SingularEndpointError(const std::string& w) : Error("singular-endpoint", w) {}
};
struct IllConditionedError : Error {
    explicit IllConditionedError(const std::string& w) : Error("ill-conditioned", w) {}
};
struct AccuracyError : Error {
    explicit AccuracyError(const std::string& w) : Error("accuracy", w) {}
};

inline double minkowski_dot(const Vec4& a, const Vec4& b) {
    return a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
}

/// Worker threads from CFS_THREADS (default 1).
inline int thread_count() {
    const char* v = std::getenv("CFS_THREADS");
    if (!v) return 1;
    const int n = std::atoi(v);
    return n > 0 ? n : 1;
}

}  // namespace cfs
