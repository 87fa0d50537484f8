#pragma once

// Open-system Born-Oppenheimer dynamics. Each photon branch evolves under a
// thermal Lindblad master equation, solved through the normal-ordered
// characteristic function
//
//   chi(eps, eta) = < e^{eps C^dag} e^{-eps* C} e^{eta D^dag} e^{-eta* D} >
//                 = exp(-z^T L z + i z^T q),   z = (Re eps, Im eps, Re eta, Im eta),
//
// whose Gaussian parameters obey dL/dt = M L + L M^T - 4 lambda K and
// dq/dt = M q. Cavity decay enters only through the branch weights, whose
// coherent amplitudes shrink as alpha e^{-kappa t}.

#include "optomech/bo_closed.hpp"
#include "optomech/gaussian.hpp"
#include "optomech/numerics.hpp"

#include <span>
#include <vector>

namespace optomech::dissipative {

struct DissipativeParams {
    bo::BOParams base;
    double kappa = 0.0;  ///< cavity amplitude decay rate
    double Gamma = 0.0;  ///< mirror energy decay rate
    double n_bath = 0.0; ///< mirror bath occupancy

    void validate() const;
};

struct CharState {
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    Eigen::Vector4d q = Eigen::Vector4d::Zero();
};

struct CharSystem {
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
    double lambda4 = 0.0; ///< the 4 lambda multiplying K
};

struct CharDerivative {
    Eigen::Matrix4d dL;
    Eigen::Vector4d dq;
};

/// M = diag(M1, M2), K = diag(K1, K2) with
///   M1 = [[-G/2, W], [-W, -G/2]],  M2 = [[-G/2, W - 8 N lambda], [-W, -G/2]],
///   K1 = -G nbar / (4 lambda) I,    K2 = [[-G nbar / (4 lambda), N], [N, -G nbar / (4 lambda)]].
/// Throws ParameterError for lambda = 0.
CharSystem build_char_system(const DissipativeParams& params, const bo::BOBranch& branch);

/// dL = M L + L M^T - 4 lambda K (symmetrized), dq = M q.
CharDerivative char_rhs(const CharState& state, const CharSystem& sys);

/// Product of two thermal mirror states with occupancy n: L = n I, q = 0.
CharState thermal_char_state(double n_thermal);

/// Integrates one branch from thermal_char_state(params.base.n_thermal) at
/// t = 0, returning the state at every grid time.
std::vector<CharState> integrate_char(const DissipativeParams& params, const bo::BOBranch& branch,
                                      std::span<const double> t_grid,
                                      const numerics::Tolerances& tolerances = {});

/// Mirror covariance in (x1, p1, x2, p2). Second moments in (C, D) are
/// J (L + I/2) J^T with J = diag(j, j), j = [[0, 1], [-1, 0]]; the result is
/// rotated to the local mirror modes with c = (C + D)/sqrt2, d = (C - D)/sqrt2.
/// Throws UnphysicalError when a symplectic eigenvalue is below 1/2 - 1e-6.
gaussian::TwoModeCM covariance_from_char(const CharState& state);

/// Branch weights at time t with coherent amplitudes alpha e^{-kappa t}.
bo::BranchWeights decayed_weights(const DissipativeParams& params, double t,
                                  double cutoff_sigmas = 8.0);

/// Weighted negativity on the grid. Branches are those of the t = 0 table;
/// weights are evaluated in closed form at every grid time.
std::vector<gaussian::NegativityValue> dissipative_negativity(
    const DissipativeParams& params, std::span<const double> t_grid,
    bo::MixtureMode mode = bo::MixtureMode::PerBranch, const numerics::Tolerances& tolerances = {},
    double cutoff_sigmas = 8.0, int threads = 1);

} // namespace optomech::dissipative
