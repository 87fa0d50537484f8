#include "optomech/langevin.hpp"

#include "optomech/errors.hpp"
#include "optomech/numerics.hpp"
#include "optomech/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace optomech::langevin {

void DriveParams::validate() const {
    if (!(Omega > 0.0)) throw ParameterError("Omega must be positive");
    if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
    if (!(gamma_m >= 0.0)) throw ParameterError("gamma_m must be non-negative");
    if (!(n1 >= 0.0) || !(n2 >= 0.0)) throw ParameterError("bath occupancies must be non-negative");
    if (!std::isfinite(lambda)) throw ParameterError("lambda must be finite");
}

std::pair<complex, complex> field_amplitudes(const DriveParams& params, const BareDrive& drive,
                                             double Delta_a, double Delta_b) {
    const complex i{0.0, 1.0};
    const double kappa = params.kappa;
    const double lambda = params.lambda;
    const double eta = drive.eta;
    const complex denom =
        lambda * lambda + kappa * kappa + i * kappa * (Delta_a + Delta_b) - Delta_a * Delta_b;
    const complex a = (-i * lambda * eta + eta * (kappa + i * Delta_b)) / denom;
    const complex b = (-i * lambda * eta + eta * (kappa + i * Delta_a)) / denom;
    return {a, b};
}

double steady_state_residual(const DriveParams& params, const SteadyState& ss) {
    const auto* drive = std::get_if<BareDrive>(&params.drive);
    if (drive == nullptr) throw ParameterError("steady_state_residual: requires a bare drive");
    const complex i{0.0, 1.0};
    const double g = drive->g;
    const double Da = drive->Delta_tilde - g * ss.q1_s;
    const double Db = drive->Delta_tilde - g * ss.q2_s;
    // Field equations (kappa + i Delta_a) a + i lambda b = eta, and symmetric.
    const complex ra = (params.kappa + i * Da) * ss.a_s + i * params.lambda * ss.b_s - drive->eta;
    const complex rb = (params.kappa + i * Db) * ss.b_s + i * params.lambda * ss.a_s - drive->eta;
    const double rq1 = ss.q1_s - g * std::norm(ss.a_s) / params.Omega;
    const double rq2 = ss.q2_s - g * std::norm(ss.b_s) / params.Omega;
    return std::max({std::abs(ra), std::abs(rb), std::abs(rq1), std::abs(rq2),
                     std::abs(ss.Delta_a - Da), std::abs(ss.Delta_b - Db), std::abs(ss.p1_s),
                     std::abs(ss.p2_s)});
}

SteadyState solve_steady_state(const DriveParams& params, const SteadyStateOptions& options) {
    params.validate();
    const auto* drive = std::get_if<BareDrive>(&params.drive);
    if (drive == nullptr) throw ParameterError("solve_steady_state: requires a bare drive");

    const double g = drive->g;
    SteadyState ss;
    double q1 = 0.0, q2 = 0.0;
    complex a_prev{}, b_prev{};
    bool have_prev = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const double Da = drive->Delta_tilde - g * q1;
        const double Db = drive->Delta_tilde - g * q2;
        const auto [a, b] = field_amplitudes(params, *drive, Da, Db);
        ss.a_s = a;
        ss.b_s = b;
        ss.q1_s = q1;
        ss.q2_s = q2;
        ss.Delta_a = Da;
        ss.Delta_b = Db;
        ss.iterations = it;

        const double change = have_prev ? std::max(std::abs(a - a_prev), std::abs(b - b_prev))
                                        : std::numeric_limits<double>::infinity();
        const double q1_target = g * std::norm(a) / params.Omega;
        const double q2_target = g * std::norm(b) / params.Omega;
        const double q_change = std::max(std::abs(q1_target - q1), std::abs(q2_target - q2));
        if (change <= options.tolerance && q_change <= options.tolerance) {
            ss.residual = steady_state_residual(params, ss);
            return ss;
        }
        a_prev = a;
        b_prev = b;
        have_prev = true;
        q1 = (1.0 - options.damping) * q1 + options.damping * q1_target;
        q2 = (1.0 - options.damping) * q2 + options.damping * q2_target;
    }
    ss.residual = steady_state_residual(params, ss);
    throw NonConvergenceError("steady state did not converge after " +
                                  std::to_string(options.max_iterations) +
                                  " iterations (residual " + std::to_string(ss.residual) + ")",
                              ss);
}

SteadyState rotate_common_phase(const SteadyState& ss, double tolerance) {
    SteadyState out = ss;
    if (std::abs(ss.a_s) == 0.0 && std::abs(ss.b_s) == 0.0) return out;
    const complex reference = std::abs(ss.a_s) > 0.0 ? ss.a_s : ss.b_s;
    const complex phase = std::conj(reference) / std::abs(reference);
    out.a_s = ss.a_s * phase;
    out.b_s = ss.b_s * phase;
    const double scale = std::max(std::abs(out.a_s), std::abs(out.b_s));
    if (std::abs(out.b_s.imag()) > tolerance * scale || std::abs(out.a_s.imag()) > tolerance * scale) {
        throw ParameterError(
            "rotate_common_phase: a_s and b_s have different phases; no common rotation makes both real");
    }
    out.a_s = {out.a_s.real(), 0.0};
    out.b_s = {out.b_s.real(), 0.0};
    return out;
}

EffectiveDrive effective_drive(const SteadyState& ss, double g, double tolerance) {
    const double scale = std::max({std::abs(ss.a_s), std::abs(ss.b_s), 1e-300});
    if (std::abs(ss.a_s.imag()) > tolerance * scale || std::abs(ss.b_s.imag()) > tolerance * scale) {
        throw ParameterError("effective_drive: complex steady amplitudes; rotate the phase reference first");
    }
    const double root2 = std::sqrt(2.0);
    return {root2 * g * ss.a_s.real(), root2 * g * ss.b_s.real(), ss.Delta_a, ss.Delta_b};
}

DriftModel build_drift(const DriveParams& params, const EffectiveDrive& d) {
    params.validate();
    const double W = params.Omega;
    const double gm = params.gamma_m;
    const double k = params.kappa;
    const double l = params.lambda;

    Eigen::Matrix4d z1;
    z1 << 0, W, 0, 0,
          -W, -gm, 0, 0,
          0, 0, 0, W,
          0, 0, -W, -gm;
    Eigen::Matrix4d z2 = Eigen::Matrix4d::Zero();
    z2(1, 0) = d.g_a_s;
    z2(3, 2) = d.g_b_s;
    Eigen::Matrix4d z3;
    z3 << -k, d.Delta_a, 0, l,
          -d.Delta_a, -k, -l, 0,
          0, l, -k, d.Delta_b,
          -l, 0, -d.Delta_b, -k;

    DriftModel m;
    m.Z << z1, z2, z2, z3;
    m.Ntilde.diagonal() << 0.0, gm * (2.0 * params.n1 + 1.0), 0.0, gm * (2.0 * params.n2 + 1.0), k, k,
        k, k;
    return m;
}

DriftModel build_drift(const DriveParams& params) {
    if (const auto* eff = std::get_if<EffectiveDrive>(&params.drive)) return build_drift(params, *eff);
    const auto& bare = std::get<BareDrive>(params.drive);
    const auto ss = rotate_common_phase(solve_steady_state(params));
    return build_drift(params, effective_drive(ss, bare.g));
}

Stability is_stable(const Eigen::MatrixXd& z) {
    const double abscissa = numerics::spectral_abscissa(z);
    return {abscissa < -1e-12, abscissa};
}

SteadyCovariance solve_lyapunov(const DriftModel& model) {
    const auto stability = is_stable(model.Z);
    if (!stability.stable) {
        throw InstabilityError("solve_lyapunov: drift matrix is not stable (spectral abscissa " +
                               std::to_string(stability.abscissa) + "); check is_stable first");
    }
    SteadyCovariance out;
    out.V = numerics::symmetrized(numerics::lyapunov_solve(model.Z, model.Ntilde));
    const double scale = std::max(numerics::max_abs(model.Ntilde), 1e-300);
    out.residual = numerics::lyapunov_residual(model.Z, out.V, model.Ntilde) / scale;
    if (!(out.residual <= 1e-10)) {
        throw SolverError("solve_lyapunov: relative residual " + std::to_string(out.residual) +
                          " above 1e-10");
    }
    try {
        out.min_symplectic = gaussian::symplectic_eigenvalues(out.V).front();
    } catch (const UnphysicalError&) {
        out.min_symplectic = 0.0; // not even positive definite
    }
    return out;
}

gaussian::NegativityValue pair_negativity(const Matrix8& v, ModePair pair) {
    int j = 0;
    switch (pair) {
    case ModePair::Mirror1Mirror2: j = 1; break;
    case ModePair::Mirror1CavityA: j = 2; break;
    case ModePair::Mirror1CavityB: j = 3; break;
    }
    if (j == 0) throw ParameterError("pair_negativity: unknown mode pair");
    gaussian::TwoModeCM cm;
    cm.A = v.block<2, 2>(0, 0);
    cm.B = v.block<2, 2>(2 * j, 2 * j);
    cm.C = v.block<2, 2>(0, 2 * j);
    return gaussian::log_negativity(cm);
}

DriveParams at_point(const DriveParams& params, double delta, double nbar) {
    DriveParams p = params;
    p.n1 = nbar;
    p.n2 = nbar;
    if (auto* eff = std::get_if<EffectiveDrive>(&p.drive)) {
        eff->Delta_a = delta;
        eff->Delta_b = delta;
    } else {
        std::get<BareDrive>(p.drive).Delta_tilde = delta;
    }
    return p;
}

std::vector<SweepPoint> sweep(const DriveParams& params, std::span<const double> delta_grid,
                              std::span<const double> nbar_grid, int threads) {
    params.validate();
    if (delta_grid.empty() || nbar_grid.empty()) throw ParameterError("sweep: grids must be non-empty");
    std::vector<SweepPoint> out(delta_grid.size() * nbar_grid.size());
    parallel_for(out.size(), threads, [&](std::size_t idx) {
        SweepPoint& row = out[idx];
        row.delta = delta_grid[idx / nbar_grid.size()];
        row.nbar = nbar_grid[idx % nbar_grid.size()];
        try {
            const DriveParams p = at_point(params, row.delta, row.nbar);
            const DriftModel model = build_drift(p);
            const auto st = is_stable(model.Z);
            row.stable = st.stable;
            row.abscissa = st.abscissa;
            if (!st.stable) {
                row.error = "unstable (spectral abscissa " + std::to_string(st.abscissa) + ")";
                return;
            }
            const auto steady = solve_lyapunov(model);
            row.min_symplectic = steady.min_symplectic;
            std::array<double, 3> neg{};
            for (std::size_t k = 0; k < kAllPairs.size(); ++k) {
                neg[k] = pair_negativity(steady.V, kAllPairs[k]).value();
            }
            row.negativities = neg;
        } catch (const std::exception& e) {
            row.stable = false;
            row.negativities.reset();
            row.error = e.what();
        }
    });
    return out;
}

} // namespace optomech::langevin
