#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace optomech::numerics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Right-hand side of y' = f(t, y). Writes into `dydt`, which is pre-sized.
using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

struct Tolerances {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_steps = 10'000'000;

    bool operator==(const Tolerances&) const = default;
};

struct OdeSpec {
    Eigen::Index dimension = 0;
    Rhs rhs;
    Tolerances tolerances{};
    /// When set, disables step control and takes uniform steps of this size
    /// (clipped to land on the output grid). Used for convergence checks.
    std::optional<double> fixed_step{};
};

struct SolveReport {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    /// Scaled error norm of the last accepted step (<= 1 under step control).
    double last_error_estimate = 0.0;
};

struct OdeSolution {
    std::vector<Vector> states;
    SolveReport report;
};

/// Dormand-Prince 5(4) integration. `y0` is the state at `t_grid.front()`;
/// returns one state per grid time. Steps are shortened to hit every grid time
/// exactly, so no interpolation is involved.
///
/// Throws SolverError on step-size underflow or when the step budget runs out,
/// ParameterError on a non-ascending grid or non-positive tolerances.
OdeSolution integrate(const OdeSpec& spec, const Vector& y0, std::span<const double> t_grid);

/// Full complex spectrum of a real square matrix.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

/// max Re(lambda) over the spectrum.
double spectral_abscissa(const Matrix& a);

/// Solves Z X + X Z^T = -Q through the Kronecker-sum linear system
/// (I (x) Z + Z (x) I) vec(X) = -vec(Q), with one step of iterative refinement.
/// The result is symmetrized when Q is symmetric.
/// Throws SolverError if the Kronecker system is numerically singular.
Matrix lyapunov_solve(const Matrix& z, const Matrix& q);

/// ||Z X + X Z^T + Q||_max
double lyapunov_residual(const Matrix& z, const Matrix& x, const Matrix& q);

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// `count` evenly spaced values from `start` to `stop` inclusive.
std::vector<double> linspace(double start, double stop, std::size_t count);

} // namespace optomech::numerics
