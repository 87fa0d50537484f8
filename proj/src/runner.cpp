#include "optomech/runner.hpp"

#include "optomech/bo_closed.hpp"
#include "optomech/csv.hpp"
#include "optomech/parallel.hpp"

#include <algorithm>
#include <ostream>

namespace optomech::runner {

using csv::format_double;

bo::BOParams bo_params(const config::RunConfig& c, double n_thermal) {
    const auto& b = c.bo.value();
    bo::BOParams p;
    p.Omega = b.Omega;
    p.g = b.g();
    p.lambda = b.lambda;
    p.alpha_A = b.alpha_A;
    p.alpha_B = b.alpha_B;
    p.n_thermal = n_thermal;
    return p;
}

dissipative::DissipativeParams dissipative_params(const config::RunConfig& c) {
    dissipative::DissipativeParams p;
    p.base = bo_params(c, c.bo.value().n_thermal);
    const auto& l = c.loss.value();
    p.kappa = l.kappa;
    p.Gamma = l.Gamma;
    p.n_bath = l.n_bath;
    return p;
}

langevin::DriveParams drive_params(const config::RunConfig& c) {
    const auto& d = c.drive.value();
    langevin::DriveParams p;
    p.Omega = d.Omega;
    p.lambda = d.lambda;
    p.kappa = d.kappa;
    p.gamma_m = d.gamma_m;
    if (const auto* e = std::get_if<config::EffectiveDriveSection>(&d.kind)) {
        p.drive = langevin::EffectiveDrive{e->g_a_s, e->g_b_s, 0.0, 0.0};
    } else {
        const auto& b = std::get<config::BareDriveSection>(d.kind);
        p.drive = langevin::BareDrive{b.eta, 0.0, b.g};
    }
    return p;
}

namespace {

std::filesystem::path output_path(const config::RunConfig& c, const RunOverrides& o) {
    if (o.out) return *o.out;
    if (c.output) return *c.output;
    throw config::ConfigError("output: no output path in the config and no --out given");
}

RunReport run_bo_unitary(const config::RunConfig& c, const std::filesystem::path& out, int threads) {
    const auto times = c.grids.time->values();
    const auto temps = c.grids.n_thermal ? c.grids.n_thermal->values()
                                         : std::vector<double>{c.bo->n_thermal};
    std::vector<std::vector<gaussian::NegativityValue>> curves;
    for (double n : temps) {
        curves.push_back(bo::weighted_negativity_series(bo_params(c, n), times, c.mixture,
                                                        c.bo->cutoff_sigmas, threads));
    }
    csv::AtomicCsvWriter w(out, kHeaderBoUnitary);
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t j = 0; j < temps.size(); ++j) {
            w.write({format_double(times[k]), format_double(temps[j]),
                     format_double(curves[j][k].value())});
        }
    }
    w.commit();
    return {kExitSuccess, out, times.size() * temps.size(), 0};
}

RunReport run_bo_dissipative(const config::RunConfig& c, const std::filesystem::path& out,
                             int threads) {
    const auto times = c.grids.time->values();
    const auto curve = dissipative::dissipative_negativity(dissipative_params(c), times, c.mixture,
                                                           c.solver, c.bo->cutoff_sigmas, threads);
    csv::AtomicCsvWriter w(out, kHeaderBoDissipative);
    for (std::size_t k = 0; k < times.size(); ++k) {
        w.write({format_double(times[k]), format_double(curve[k].value())});
    }
    w.commit();
    return {kExitSuccess, out, times.size(), 0};
}

RunReport run_steady_sweep(const config::RunConfig& c, const std::filesystem::path& out, int threads,
                           std::ostream& log) {
    const auto deltas = c.grids.delta->values();
    const auto nbars = c.grids.nbar->values();
    const auto points = langevin::sweep(drive_params(c), deltas, nbars, threads);
    RunReport report{kExitSuccess, out, points.size(), 0};
    csv::AtomicCsvWriter w(out, kHeaderSteadySweep);
    for (const auto& p : points) {
        csv::Row row{format_double(p.delta), format_double(p.nbar), p.stable ? "1" : "0",
                     std::nullopt, std::nullopt, std::nullopt};
        if (p.negativities) {
            for (std::size_t k = 0; k < 3; ++k) row[3 + k] = format_double((*p.negativities)[k]);
        } else {
            ++report.flagged;
            log << "delta=" << format_double(p.delta) << " nbar=" << format_double(p.nbar) << ": "
                << p.error << '\n';
        }
        w.write(row);
    }
    w.commit();

    std::size_t below = 0;
    double worst = 0.5;
    for (const auto& p : points) {
        if (!p.negativities || p.min_symplectic >= 0.5 - 1e-8) continue;
        ++below;
        worst = std::min(worst, p.min_symplectic);
    }
    if (below > 0) {
        log << "note: " << below << " points have a steady covariance below the uncertainty bound "
            << "(smallest symplectic eigenvalue " << format_double(worst)
            << "); the white-noise mirror bath is a high-Q approximation\n";
    }
    if (report.flagged > 0) report.exit_code = kExitPartial;
    return report;
}

RunReport run_stability(const config::RunConfig& c, const std::filesystem::path& out, int threads,
                        std::ostream& log) {
    const auto deltas = c.grids.delta->values();
    const auto base = drive_params(c);
    struct Point {
        std::optional<langevin::Stability> stability;
        std::string error;
    };
    std::vector<Point> points(deltas.size());
    parallel_for(deltas.size(), threads, [&](std::size_t i) {
        try {
            points[i].stability = langevin::is_stable(
                langevin::build_drift(langevin::at_point(base, deltas[i], 0.0)).Z);
        } catch (const std::exception& e) {
            points[i].error = e.what();
        }
    });
    RunReport report{kExitSuccess, out, points.size(), 0};
    csv::AtomicCsvWriter w(out, kHeaderStability);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (p.stability) {
            w.write({format_double(deltas[i]), format_double(p.stability->abscissa),
                     p.stability->stable ? "1" : "0"});
        } else {
            ++report.flagged;
            log << "delta=" << format_double(deltas[i]) << ": " << p.error << '\n';
            w.write({format_double(deltas[i]), std::nullopt, std::nullopt});
        }
    }
    w.commit();
    if (report.flagged > 0) report.exit_code = kExitPartial;
    return report;
}

} // namespace

RunReport run(const config::RunConfig& c, const RunOverrides& overrides, std::ostream& log) {
    config::validate(c);
    const auto out = output_path(c, overrides);
    const int threads = overrides.threads.value_or(c.threads);
    switch (c.pipeline) {
    case config::Pipeline::BoUnitary: return run_bo_unitary(c, out, threads);
    case config::Pipeline::BoDissipative: return run_bo_dissipative(c, out, threads);
    case config::Pipeline::SteadySweep: return run_steady_sweep(c, out, threads, log);
    case config::Pipeline::Stability: return run_stability(c, out, threads, log);
    }
    throw std::logic_error("unknown pipeline");
}

} // namespace optomech::runner
