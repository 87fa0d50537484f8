#include "optomech/bo_closed.hpp"

#include "optomech/errors.hpp"
#include "optomech/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace optomech::bo {

using gaussian::NegativityValue;
using gaussian::TwoModeCM;

void BOParams::validate() const {
    if (!(Omega > 0.0)) throw ParameterError("Omega must be positive");
    if (lambda == 0.0 || !std::isfinite(lambda)) throw ParameterError("lambda must be non-zero");
    if (!(g >= 0.0)) throw ParameterError("g must be non-negative");
    if (!(n_thermal >= 0.0)) throw ParameterError("n_thermal must be non-negative");
}

BOBranch make_branch(const BOParams& params, int n) {
    params.validate();
    const double Omega = params.Omega;
    const double lambda = params.lambda;
    BOBranch b;
    b.n = n;
    const double ratio = params.g / (4.0 * lambda);
    b.N = static_cast<double>(n) * ratio * ratio;
    if (b.N == 0.0) {
        b.M = 0.0;
        b.u = 1.0;
        b.v = 0.0;
        b.omega0 = 0.5 * Omega;
        return b;
    }
    const double detuned = Omega - 4.0 * b.N * lambda;
    if (detuned == 0.0) {
        throw BranchDomainError("branch n = " + std::to_string(n) + ": Omega = 4 N lambda");
    }
    b.M = 2.0 * b.N * lambda / detuned;
    if (!(std::abs(b.M) < 0.5)) {
        throw BranchDomainError("branch n = " + std::to_string(n) + ": |M| = " +
                                std::to_string(std::abs(b.M)) +
                                " >= 1/2, squeezing expansion invalid");
    }
    const double four_m2 = 4.0 * b.M * b.M;
    const double root = std::sqrt(1.0 + four_m2 / (1.0 - four_m2));
    b.u = std::sqrt(0.5 * (1.0 + root));
    // uv carries the sign of M (the D^2 + D^dag^2 coefficient is -2 N lambda).
    b.v = std::copysign(std::sqrt(0.5 * (root - 1.0)), b.M);
    b.omega0 = (Omega - 8.0 * lambda * b.N) * Omega / (2.0 * std::sqrt(1.0 - four_m2) * detuned);
    return b;
}

PropagatorFG propagator(const BOBranch& branch, double Omega, double t) {
    if (!(t >= 0.0)) throw ParameterError("propagator: t must be non-negative");
    const complex free = std::polar(1.0, -Omega * t);
    const complex squeeze_fwd = std::polar(1.0, -2.0 * branch.omega0 * t);
    const complex squeeze_bwd = std::conj(squeeze_fwd);
    const double u2 = branch.u * branch.u;
    const double v2 = branch.v * branch.v;
    PropagatorFG fg;
    fg.t = t;
    fg.F = free + u2 * squeeze_fwd - v2 * squeeze_bwd;
    fg.G = free + v2 * squeeze_bwd - u2 * squeeze_fwd;
    fg.s = 2.0 * branch.u * branch.v * std::sin(2.0 * branch.omega0 * t);
    return fg;
}

Eigen::Matrix4d quadrature_map(const PropagatorFG& fg) {
    // a(t) = P a + Q a^dag with a = (c, d).
    const complex beta{0.0, fg.s};
    const Eigen::Matrix2cd P = (Eigen::Matrix2cd() << fg.F, fg.G, fg.G, fg.F).finished() * 0.5;
    const Eigen::Matrix2cd Q = (Eigen::Matrix2cd() << beta, -beta, -beta, beta).finished() * 0.5;
    Eigen::Matrix4d s;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const complex sum = P(i, j) + Q(i, j);
            const complex diff = P(i, j) - Q(i, j);
            s(2 * i, 2 * j) = sum.real();
            s(2 * i, 2 * j + 1) = -diff.imag();
            s(2 * i + 1, 2 * j) = sum.imag();
            s(2 * i + 1, 2 * j + 1) = diff.real();
        }
    }
    return s;
}

TwoModeCM evolve_covariance(const BOBranch& branch, const BOParams& params, double t) {
    const Eigen::Matrix4d s = quadrature_map(propagator(branch, params.Omega, t));
    Eigen::Matrix4d v = (params.n_thermal + 0.5) * (s * s.transpose());
    v = 0.5 * (v + v.transpose()).eval();
    return TwoModeCM::from_full(v);
}

double BranchWeights::total() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.weight;
    return sum;
}

double BranchWeights::weight_of(int n) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), n,
                                     [](const BranchWeight& e, int key) { return e.n < key; });
    return (it != entries.end() && it->n == n) ? it->weight : 0.0;
}

namespace {

double poisson_pmf(double mean, int k) {
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

std::vector<double> poisson_table(double mean, int cutoff) {
    std::vector<double> p(static_cast<std::size_t>(cutoff) + 1);
    for (int k = 0; k <= cutoff; ++k) p[static_cast<std::size_t>(k)] = poisson_pmf(mean, k);
    return p;
}

} // namespace

int poisson_cutoff(double mean, double cutoff_sigmas) {
    if (!(mean >= 0.0)) throw ParameterError("poisson_cutoff: mean must be non-negative");
    if (mean == 0.0) return 0;
    int k = static_cast<int>(std::ceil(mean + cutoff_sigmas * std::sqrt(mean)));
    auto tail_above = [mean](int m) {
        double sum = 0.0;
        for (int j = m + 1;; ++j) {
            const double p = poisson_pmf(mean, j);
            sum += p;
            if (j > mean && p < 1e-18 * std::max(sum, 1e-300)) break;
            if (p == 0.0 && j > mean) break;
        }
        return sum;
    };
    while (tail_above(k) > 1e-15) ++k;
    return k;
}

BranchWeights poisson_difference_weights(double mean_a, double mean_b, double cutoff_sigmas) {
    BranchWeights out;
    out.n_a_max = poisson_cutoff(mean_a, cutoff_sigmas);
    out.n_b_max = poisson_cutoff(mean_b, cutoff_sigmas);
    const auto pa = poisson_table(mean_a, out.n_a_max);
    const auto pb = poisson_table(mean_b, out.n_b_max);
    std::vector<double> by_n(static_cast<std::size_t>(out.n_a_max + out.n_b_max) + 1, 0.0);
    // Index n + n_b_max, summed in a fixed order.
    for (int na = 0; na <= out.n_a_max; ++na) {
        for (int nb = 0; nb <= out.n_b_max; ++nb) {
            by_n[static_cast<std::size_t>(na - nb + out.n_b_max)] +=
                pa[static_cast<std::size_t>(na)] * pb[static_cast<std::size_t>(nb)];
        }
    }
    for (std::size_t i = 0; i < by_n.size(); ++i) {
        if (by_n[i] > 0.0) out.entries.push_back({static_cast<int>(i) - out.n_b_max, by_n[i]});
    }
    return out;
}

BranchWeights branch_weights(complex alpha_A, complex alpha_B, double cutoff_sigmas) {
    if (!(cutoff_sigmas >= 6.0)) throw ParameterError("cutoff_sigmas must be >= 6");
    return poisson_difference_weights(std::norm(alpha_A), std::norm(alpha_B), cutoff_sigmas);
}

namespace {

// Per-branch results on the time grid: negativities (PerBranch) or covariances
// (AveragedState).
struct BranchSeries {
    std::vector<double> negativity;
    std::vector<Eigen::Matrix4d> covariance;
};

} // namespace

std::vector<NegativityValue> weighted_negativity_series(const BOParams& params,
                                                        std::span<const double> times,
                                                        MixtureMode mode, double cutoff_sigmas,
                                                        int threads) {
    params.validate();
    const BranchWeights weights = branch_weights(params.alpha_A, params.alpha_B, cutoff_sigmas);

    // Domain errors abort before any work is scheduled.
    std::vector<BOBranch> branches;
    branches.reserve(weights.entries.size());
    for (const auto& e : weights.entries) branches.push_back(make_branch(params, e.n));

    std::vector<BranchSeries> series(branches.size());
    parallel_for(branches.size(), threads, [&](std::size_t b) {
        const auto& branch = branches[b];
        auto& out = series[b];
        if (mode == MixtureMode::PerBranch) {
            out.negativity.assign(times.size(), 0.0);
            // N = 0 branches evolve by local rotations only: exactly separable.
            if (branch.N == 0.0) return;
            for (std::size_t k = 0; k < times.size(); ++k) {
                out.negativity[k] =
                    gaussian::log_negativity(evolve_covariance(branch, params, times[k])).value();
            }
        } else {
            out.covariance.resize(times.size());
            for (std::size_t k = 0; k < times.size(); ++k) {
                out.covariance[k] = evolve_covariance(branch, params, times[k]).full();
            }
        }
    });

    std::vector<NegativityValue> result(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (mode == MixtureMode::PerBranch) {
            double sum = 0.0;
            double total = 0.0;
            for (std::size_t b = 0; b < branches.size(); ++b) {
                sum += weights.entries[b].weight * series[b].negativity[k];
                total += weights.entries[b].weight;
            }
            result[k] = NegativityValue(sum / total);
        } else {
            Eigen::Matrix4d avg = Eigen::Matrix4d::Zero();
            double total = 0.0;
            for (std::size_t b = 0; b < branches.size(); ++b) {
                avg += weights.entries[b].weight * series[b].covariance[k];
                total += weights.entries[b].weight;
            }
            result[k] = gaussian::log_negativity(TwoModeCM::from_full(avg / total));
        }
    }
    return result;
}

NegativityValue weighted_negativity(const BOParams& params, double t, MixtureMode mode,
                                    double cutoff_sigmas) {
    const double times[] = {t};
    return weighted_negativity_series(params, times, mode, cutoff_sigmas, 1).front();
}

double coupling_from_physical(double cavity_frequency, double cavity_length, double mirror_mass,
                              double mechanical_frequency) {
    constexpr double hbar = 1.054571817e-34;
    if (!(cavity_frequency > 0.0) || !(cavity_length > 0.0) || !(mirror_mass > 0.0) ||
        !(mechanical_frequency > 0.0)) {
        throw ParameterError("coupling_from_physical: all inputs must be positive");
    }
    return (cavity_frequency / cavity_length) * std::sqrt(hbar / (mirror_mass * mechanical_frequency));
}

} // namespace optomech::bo
