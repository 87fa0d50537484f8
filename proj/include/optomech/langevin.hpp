#pragma once

// Strongly driven coupled cavities: steady-state amplitudes, linearised
// fluctuation dynamics dR/dt = Z R + noise for
// R = (dq1, dp1, dq2, dp2, dXa, dPa, dXb, dPb) with X = (a + a^dag)/sqrt2,
// P = i(a^dag - a)/sqrt2, and the steady covariance from Z V + V Z^T = -N.

#include "optomech/gaussian.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace optomech::langevin {

using complex = std::complex<double>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Drive given by laser amplitude, bare detuning omega - omega_L and bare coupling.
struct BareDrive {
    double eta = 0.0;
    double Delta_tilde = 0.0;
    double g = 0.0;
};

/// Drive given directly by effective optomechanical couplings and detunings.
struct EffectiveDrive {
    double g_a_s = 0.0;
    double g_b_s = 0.0;
    double Delta_a = 0.0;
    double Delta_b = 0.0;
};

struct DriveParams {
    double Omega = 1.0;
    double lambda = 0.0;
    double kappa = 0.0;
    double gamma_m = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    std::variant<BareDrive, EffectiveDrive> drive = EffectiveDrive{};

    /// Throws ParameterError unless Omega > 0, kappa > 0, gamma_m >= 0, n1, n2 >= 0.
    void validate() const;
};

struct SteadyState {
    complex a_s{};
    complex b_s{};
    double q1_s = 0.0;
    double q2_s = 0.0;
    double p1_s = 0.0;
    double p2_s = 0.0;
    double Delta_a = 0.0;
    double Delta_b = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

struct SteadyStateOptions {
    double damping = 0.5;
    int max_iterations = 10'000;
    double tolerance = 1e-12;
};

/// The fixed point did not converge; carries the last iterate.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, SteadyState last)
        : std::runtime_error(what), last_(last) {}
    const SteadyState& last_iterate() const { return last_; }

private:
    SteadyState last_;
};

/// Amplitudes for the given effective detunings (the linear field equations).
std::pair<complex, complex> field_amplitudes(const DriveParams& params, const BareDrive& drive,
                                             double Delta_a, double Delta_b);

/// Max-norm residual of the self-consistency equations at `ss`.
double steady_state_residual(const DriveParams& params, const SteadyState& ss);

/// Damped fixed-point iteration on the mirror displacements. Requires a
/// BareDrive. Throws NonConvergenceError.
SteadyState solve_steady_state(const DriveParams& params, const SteadyStateOptions& options = {});

/// Rotates both cavity fields by the phase of a_s (a gauge choice that leaves
/// the fiber coupling invariant). Throws ParameterError if b_s is then not real
/// to `tolerance` relative, since independent rotations would alter the coupling.
SteadyState rotate_common_phase(const SteadyState& ss, double tolerance = 1e-9);

/// g_a^s = sqrt2 g a_s, g_b^s = sqrt2 g b_s. Throws ParameterError if a_s or
/// b_s has a non-negligible imaginary part: rotate the phase reference first.
EffectiveDrive effective_drive(const SteadyState& ss, double g, double tolerance = 1e-9);

struct DriftModel {
    Matrix8 Z = Matrix8::Zero();
    Matrix8 Ntilde = Matrix8::Zero();
};

/// Z = [[Z1, Z2], [Z2, Z3]] and the Markovian noise matrix
/// diag(0, gamma_m(2 n1 + 1), 0, gamma_m(2 n2 + 1), kappa, kappa, kappa, kappa).
DriftModel build_drift(const DriveParams& params, const EffectiveDrive& drive);

/// Effective drive used as-is; bare drive goes through solve_steady_state,
/// rotate_common_phase and effective_drive.
DriftModel build_drift(const DriveParams& params);

struct Stability {
    bool stable = false;
    double abscissa = 0.0;
};

/// Stable iff the spectral abscissa is below -1e-12.
Stability is_stable(const Eigen::MatrixXd& z);

/// Steady covariance of the eight quadratures with solve diagnostics.
struct SteadyCovariance {
    Matrix8 V = Matrix8::Zero();
    double residual = 0.0;       ///< max|Z V + V Z^T + N| / max|N|
    double min_symplectic = 0.0; ///< smallest symplectic eigenvalue of V

    bool physical(double tolerance = 1e-8) const { return min_symplectic >= 0.5 - tolerance; }
};

/// Exact solution of Z V + V Z^T = -N. Throws InstabilityError if the drift is
/// not strictly stable (see is_stable) and SolverError if the relative
/// residual exceeds 1e-10.
///
/// V is returned even when it dips below the uncertainty bound: the
/// delta-correlated Brownian noise is a high-Q approximation, and at finite
/// gamma_m / Omega the exact solution violates the bound by O(gamma_m / Omega)
/// at low nbar. Callers decide what to do with min_symplectic.
SteadyCovariance solve_lyapunov(const DriftModel& model);

/// Mode order: mirror 1, mirror 2, cavity A, cavity B.
enum class ModePair {
    Mirror1Mirror2, ///< distant mirrors
    Mirror1CavityA, ///< mirror and adjacent cavity
    Mirror1CavityB, ///< mirror and distant cavity
};

inline constexpr std::array<ModePair, 3> kAllPairs = {
    ModePair::Mirror1Mirror2, ModePair::Mirror1CavityA, ModePair::Mirror1CavityB};

/// Log negativity of the 4x4 block of `v` for the given pair.
gaussian::NegativityValue pair_negativity(const Matrix8& v, ModePair pair);

struct SweepPoint {
    double delta = 0.0;
    double nbar = 0.0;
    bool stable = false;
    double abscissa = 0.0;
    /// Smallest symplectic eigenvalue of the steady covariance (stable points).
    double min_symplectic = 0.0;
    /// Filled for stable points, in kAllPairs order.
    std::optional<std::array<double, 3>> negativities;
    std::string error;
};

/// Evaluates every (delta, nbar) pair, delta-major. For an effective drive
/// delta sets Delta_a = Delta_b; for a bare drive it sets Delta_tilde. nbar
/// sets n1 = n2. Per-point failures (instability, non-convergence) are recorded
/// in the row instead of aborting.
std::vector<SweepPoint> sweep(const DriveParams& params, std::span<const double> delta_grid,
                              std::span<const double> nbar_grid, int threads = 1);

/// params with the sweep coordinates applied.
DriveParams at_point(const DriveParams& params, double delta, double nbar);

} // namespace optomech::langevin
