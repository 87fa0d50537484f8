#pragma once

// Closed-system Born-Oppenheimer dynamics of two fiber-coupled optomechanical
// mirrors. Within each photon-difference branch n = n_A - n_B the mirrors see
//
//   H = Omega C^dag C + (Omega - 4 N lambda) D^dag D - 2 N lambda (D^2 + D^dag^2),
//   N = n (g / 4 lambda)^2,
//
// with C, D the centre-of-mass and relative modes. The D mode is diagonalised
// by a Bogoliubov transformation and propagated in closed form. All rates and
// times are in units of the mechanical frequency.

#include "optomech/gaussian.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace optomech::bo {

using complex = std::complex<double>;

struct BOParams {
    double Omega = 1.0;
    double g = 0.0;
    double lambda = 0.0;
    complex alpha_A{};
    complex alpha_B{};
    double n_thermal = 0.0;

    /// Throws ParameterError unless Omega > 0, lambda != 0, g >= 0, n_thermal >= 0.
    void validate() const;
};

/// Photon-difference branch data. Invariants: u^2 - v^2 = 1, |M| < 1/2.
struct BOBranch {
    int n = 0;
    double N = 0.0;
    double M = 0.0;
    double u = 1.0;
    double v = 0.0;
    /// Half the frequency of the diagonalised relative mode.
    double omega0 = 0.5;
};

/// Throws BranchDomainError when |M| >= 1/2 or Omega = 4 N lambda.
BOBranch make_branch(const BOParams& params, int n);

/// Heisenberg propagation coefficients:
///   c(t) = [F c + G d + i s c^dag - i s d^dag] / 2
///   d(t) = [G c + F d - i s c^dag + i s d^dag] / 2
struct PropagatorFG {
    double t = 0.0;
    complex F{2.0, 0.0};
    complex G{};
    double s = 0.0;
};

PropagatorFG propagator(const BOBranch& branch, double Omega, double t);

/// Real 4x4 symplectic map acting on (x1, p1, x2, p2) equivalent to `fg`.
Eigen::Matrix4d quadrature_map(const PropagatorFG& fg);

/// Covariance of the two mirrors at time t, starting from identical
/// uncorrelated thermal states with occupancy params.n_thermal.
gaussian::TwoModeCM evolve_covariance(const BOBranch& branch, const BOParams& params, double t);

struct BranchWeight {
    int n = 0;
    double weight = 0.0;
};

/// Photon-difference distribution marginalised from a double Poisson table.
struct BranchWeights {
    std::vector<BranchWeight> entries; // ascending n, zero-weight entries dropped
    int n_a_max = 0;
    int n_b_max = 0;

    double total() const;
    double weight_of(int n) const;
};

/// Truncation index for a Poisson(mean) table: at least
/// mean + cutoff_sigmas * sqrt(mean), extended until the neglected tail is
/// below 1e-15.
int poisson_cutoff(double mean, double cutoff_sigmas);

/// Difference distribution of independent Poisson(mean_a) and Poisson(mean_b),
/// by truncated double summation.
BranchWeights poisson_difference_weights(double mean_a, double mean_b, double cutoff_sigmas = 8.0);

/// Coherent-state branch table, means |alpha_A|^2 and |alpha_B|^2.
/// Throws ParameterError if cutoff_sigmas < 6.
BranchWeights branch_weights(complex alpha_A, complex alpha_B, double cutoff_sigmas = 8.0);

/// How a photon-branch ensemble is turned into a single negativity.
enum class MixtureMode {
    PerBranch,     ///< sum_n w_n * N(V_n)
    AveragedState, ///< N(sum_n w_n V_n)
};

/// Weighted negativity at one time.
gaussian::NegativityValue weighted_negativity(const BOParams& params, double t,
                                              MixtureMode mode = MixtureMode::PerBranch,
                                              double cutoff_sigmas = 8.0);

/// Weighted negativity on a time grid. Branches are evaluated on up to
/// `threads` workers; reduction runs in ascending branch order.
std::vector<gaussian::NegativityValue> weighted_negativity_series(
    const BOParams& params, std::span<const double> times, MixtureMode mode = MixtureMode::PerBranch,
    double cutoff_sigmas = 8.0, int threads = 1);

/// Radiation-pressure coupling g = (omega / L) sqrt(hbar / (m Omega)) in rad/s,
/// from the cavity frequency omega [rad/s], cavity length L [m], mirror mass
/// m [kg] and mechanical frequency Omega [rad/s]. Divide by Omega for the
/// dimensionless coupling used everywhere else.
double coupling_from_physical(double cavity_frequency, double cavity_length, double mirror_mass,
                              double mechanical_frequency);

} // namespace optomech::bo
