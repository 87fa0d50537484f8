#include "optomech/bo_dissipative.hpp"

#include "optomech/errors.hpp"
#include "optomech/parallel.hpp"

#include <cmath>
#include <string>

namespace optomech::dissipative {

using gaussian::NegativityValue;
using gaussian::TwoModeCM;

void DissipativeParams::validate() const {
    base.validate();
    if (!(kappa >= 0.0)) throw ParameterError("kappa must be non-negative");
    if (!(Gamma >= 0.0)) throw ParameterError("Gamma must be non-negative");
    if (!(n_bath >= 0.0)) throw ParameterError("n_bath must be non-negative");
}

CharSystem build_char_system(const DissipativeParams& params, const bo::BOBranch& branch) {
    const double lambda = params.base.lambda;
    if (lambda == 0.0) throw ParameterError("build_char_system: lambda must be non-zero");
    const double Omega = params.base.Omega;
    const double half_gamma = 0.5 * params.Gamma;
    const double k_diag = -params.Gamma * params.n_bath / (4.0 * lambda);

    CharSystem sys;
    sys.M(0, 0) = -half_gamma;
    sys.M(0, 1) = Omega;
    sys.M(1, 0) = -Omega;
    sys.M(1, 1) = -half_gamma;
    sys.M(2, 2) = -half_gamma;
    sys.M(2, 3) = Omega - 8.0 * branch.N * lambda;
    sys.M(3, 2) = -Omega;
    sys.M(3, 3) = -half_gamma;

    sys.K(0, 0) = k_diag;
    sys.K(1, 1) = k_diag;
    sys.K(2, 2) = k_diag;
    sys.K(3, 3) = k_diag;
    sys.K(2, 3) = branch.N;
    sys.K(3, 2) = branch.N;

    sys.lambda4 = 4.0 * lambda;
    return sys;
}

CharDerivative char_rhs(const CharState& state, const CharSystem& sys) {
    CharDerivative d;
    const Eigen::Matrix4d ml = sys.M * state.L;
    d.dL = ml + ml.transpose() - sys.lambda4 * sys.K;
    d.dL = 0.5 * (d.dL + d.dL.transpose()).eval();
    d.dq = sys.M * state.q;
    return d;
}

CharState thermal_char_state(double n_thermal) {
    if (!(n_thermal >= 0.0)) throw ParameterError("n_thermal must be non-negative");
    CharState s;
    s.L = n_thermal * Eigen::Matrix4d::Identity();
    return s;
}

namespace {

constexpr Eigen::Index kPacked = 14; // 10 upper-triangle entries of L, 4 of q

numerics::Vector pack(const CharState& s) {
    numerics::Vector y(kPacked);
    Eigen::Index k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) y[k++] = s.L(i, j);
    for (int i = 0; i < 4; ++i) y[k++] = s.q[i];
    return y;
}

CharState unpack(const numerics::Vector& y) {
    CharState s;
    Eigen::Index k = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            s.L(i, j) = y[k];
            s.L(j, i) = y[k];
            ++k;
        }
    }
    for (int i = 0; i < 4; ++i) s.q[i] = y[k++];
    return s;
}

} // namespace

std::vector<CharState> integrate_char(const DissipativeParams& params, const bo::BOBranch& branch,
                                      std::span<const double> t_grid,
                                      const numerics::Tolerances& tolerances) {
    params.validate();
    if (t_grid.empty()) return {};
    if (t_grid.front() < 0.0) throw ParameterError("integrate_char: times must be non-negative");

    const CharSystem sys = build_char_system(params, branch);
    numerics::OdeSpec spec;
    spec.dimension = kPacked;
    spec.tolerances = tolerances;
    spec.rhs = [&sys](double, const numerics::Vector& y, numerics::Vector& dydt) {
        const auto d = char_rhs(unpack(y), sys);
        CharState packed;
        packed.L = d.dL;
        packed.q = d.dq;
        dydt = pack(packed);
    };

    // The initial thermal state lives at t = 0.
    std::vector<double> grid;
    const bool prepend = t_grid.front() > 0.0;
    if (prepend) grid.push_back(0.0);
    grid.insert(grid.end(), t_grid.begin(), t_grid.end());

    const auto solution =
        numerics::integrate(spec, pack(thermal_char_state(params.base.n_thermal)), grid);
    std::vector<CharState> states;
    states.reserve(t_grid.size());
    for (std::size_t i = prepend ? 1 : 0; i < solution.states.size(); ++i) {
        states.push_back(unpack(solution.states[i]));
    }
    return states;
}

TwoModeCM covariance_from_char(const CharState& state) {
    // chi_W = chi_N exp(-|z|^2/2) = < exp(i sqrt2 (u2 X - u1 P)) > per mode, so
    // (J z)^T V_CD (J z) = z^T (L + I/2) z.
    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j(0, 1) = 1.0;
    j(1, 0) = -1.0;
    j(2, 3) = 1.0;
    j(3, 2) = -1.0;
    const Eigen::Matrix4d v_cd = j * (state.L + 0.5 * Eigen::Matrix4d::Identity()) * j.transpose();

    // (x_C, p_C, x_D, p_D) = T (x1, p1, x2, p2); T is symmetric and orthogonal.
    const double h = 1.0 / std::sqrt(2.0);
    Eigen::Matrix4d t;
    t << h, 0, h, 0,
         0, h, 0, h,
         h, 0, -h, 0,
         0, h, 0, -h;
    Eigen::Matrix4d v = t * v_cd * t;
    v = 0.5 * (v + v.transpose()).eval();

    const auto nu = gaussian::symplectic_eigenvalues(v);
    if (nu.front() < 0.5 - 1e-6) {
        throw UnphysicalError("covariance_from_char: symplectic eigenvalue " +
                              std::to_string(nu.front()) + " < 1/2");
    }
    return TwoModeCM::from_full(v);
}

bo::BranchWeights decayed_weights(const DissipativeParams& params, double t, double cutoff_sigmas) {
    if (!(t >= 0.0)) throw ParameterError("decayed_weights: t must be non-negative");
    const double decay = std::exp(-2.0 * params.kappa * t);
    auto w = bo::poisson_difference_weights(std::norm(params.base.alpha_A) * decay,
                                            std::norm(params.base.alpha_B) * decay, cutoff_sigmas);
    const double total = w.total();
    if (std::abs(total - 1.0) > 1e-9) {
        throw SolverError("decayed_weights: normalisation off by " + std::to_string(total - 1.0));
    }
    return w;
}

std::vector<NegativityValue> dissipative_negativity(const DissipativeParams& params,
                                                    std::span<const double> t_grid,
                                                    bo::MixtureMode mode,
                                                    const numerics::Tolerances& tolerances,
                                                    double cutoff_sigmas, int threads) {
    params.validate();
    const auto initial = bo::branch_weights(params.base.alpha_A, params.base.alpha_B, cutoff_sigmas);

    std::vector<bo::BOBranch> branches;
    for (const auto& e : initial.entries) branches.push_back(bo::make_branch(params.base, e.n));
    const int n_min = branches.front().n;

    std::vector<std::vector<TwoModeCM>> covariances(branches.size());
    parallel_for(branches.size(), threads, [&](std::size_t b) {
        const auto states = integrate_char(params, branches[b], t_grid, tolerances);
        auto& out = covariances[b];
        out.reserve(states.size());
        for (const auto& s : states) out.push_back(covariance_from_char(s));
    });

    std::vector<NegativityValue> result(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const auto w = decayed_weights(params, t_grid[k], cutoff_sigmas);
        const double total = w.total();
        double sum = 0.0;
        Eigen::Matrix4d avg = Eigen::Matrix4d::Zero();
        for (const auto& e : w.entries) {
            const auto idx = static_cast<std::size_t>(e.n - n_min);
            if (e.n < n_min || idx >= branches.size() || branches[idx].n != e.n) {
                throw SolverError("dissipative_negativity: branch " + std::to_string(e.n) +
                                  " missing from the initial table");
            }
            if (mode == bo::MixtureMode::PerBranch) {
                if (branches[idx].N != 0.0) {
                    sum += e.weight * gaussian::log_negativity(covariances[idx][k]).value();
                }
            } else {
                avg += e.weight * covariances[idx][k].full();
            }
        }
        result[k] = mode == bo::MixtureMode::PerBranch
                        ? NegativityValue(sum / total)
                        : gaussian::log_negativity(TwoModeCM::from_full(avg / total));
    }
    return result;
}

} // namespace optomech::dissipative
