#pragma once

// Gaussian continuous-variable states in the quadrature ordering
// (x1, p1, x2, p2, ...), with x = (c + c^dag)/sqrt2 and p = i(c^dag - c)/sqrt2,
// so the vacuum covariance is identity/2.

#include <Eigen/Dense>

#include <compare>
#include <vector>

namespace optomech::gaussian {

using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalTolerance = 1e-9;

/// Real symmetric 2n x 2n second-moment matrix of a Gaussian state.
/// Construction validates symmetry and the uncertainty principle.
class CovarianceMatrix {
public:
    /// Throws ParameterError on shape/symmetry problems and UnphysicalError
    /// when a symplectic eigenvalue drops below 1/2 - physical_tolerance.
    explicit CovarianceMatrix(Matrix data, double physical_tolerance = kPhysicalTolerance);

    static CovarianceMatrix vacuum(int modes);

    int modes() const { return static_cast<int>(data_.rows() / 2); }
    const Matrix& matrix() const { return data_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

private:
    Matrix data_;
};

/// Two-mode covariance in block form [[A, C], [C^T, B]].
struct TwoModeCM {
    Eigen::Matrix2d A = 0.5 * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d B = 0.5 * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();

    Eigen::Matrix4d full() const;
    static TwoModeCM from_full(const Eigen::Matrix4d& v);
    /// Swaps the roles of the two modes.
    TwoModeCM swapped() const { return {B, A, C.transpose()}; }
};

/// Logarithmic negativity in nats. Always >= 0.
class NegativityValue {
public:
    NegativityValue() = default;
    /// Throws ParameterError for negative or non-finite input.
    explicit NegativityValue(double nats);

    double value() const { return value_; }
    bool entangled() const { return value_ > 0.0; }

    auto operator<=>(const NegativityValue&) const = default;

private:
    double value_ = 0.0;
};

/// Symplectic Gram matrix Omega = diag([[0,1],[-1,0]], ...) for n modes.
Matrix symplectic_form(int modes);

/// All n symplectic eigenvalues of a 2n x 2n covariance (moduli of the
/// eigenvalues of i*Omega*V), sorted ascending. Throws UnphysicalError unless
/// V is positive definite.
std::vector<double> symplectic_eigenvalues(const Matrix& v);

/// Flips the momentum of `mode` (p -> -p), i.e. partial transposition.
Matrix partial_transpose(const Matrix& v, int mode);

/// 4x4 submatrix on the quadratures of modes i and j. Throws ParameterError
/// on out-of-range or equal indices.
TwoModeCM extract_pair(const CovarianceMatrix& v, int i, int j);

/// Smallest symplectic eigenvalue of the partially transposed state,
///   nu_- = sqrt(sigma/2 - sqrt(sigma^2 - 4 det V)/2),
///   sigma = det A + det B - 2 det C,
/// evaluated as sqrt(2 det V / (sigma + sqrt(sigma^2 - 4 det V))) to avoid
/// cancellation. Radicands below -1e-12 * max(1, sigma^2) raise UnphysicalError;
/// smaller negative radicands are clamped to zero.
double symplectic_min_pt(const TwoModeCM& v);

/// max(0, -ln(2 nu_-)).
NegativityValue log_negativity(const TwoModeCM& v);

/// Symplectic-eigenvalue check with tolerance; no exception.
bool is_physical(const Matrix& v, double tolerance = kPhysicalTolerance);

} // namespace optomech::gaussian
