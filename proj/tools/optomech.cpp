// optomech <bo-unitary|bo-dissipative|steady-sweep|stability> --config P [--out P] [--threads k]
// optomech validate --config P

#include "optomech/config.hpp"
#include "optomech/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace optomech;

int run_pipeline(config::Pipeline pipeline, const std::string& config_path,
                 const runner::RunOverrides& overrides) {
    const auto cfg = config::load_config(config_path);
    if (cfg.pipeline != pipeline) {
        std::cerr << "error: " << config_path << " configures pipeline " << config::to_string(cfg.pipeline)
                  << ", not " << config::to_string(pipeline) << '\n';
        return runner::kExitFatal;
    }
    const auto report = runner::run(cfg, overrides, std::cerr);
    std::cerr << "wrote " << report.rows << " rows to " << report.output.string();
    if (report.flagged > 0) std::cerr << " (" << report.flagged << " flagged)";
    std::cerr << '\n';
    return report.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement dynamics of optomechanically coupled mirrors"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int threads = -1;

    auto* validate = app.add_subcommand("validate", "Parse and validate a config without running it");
    validate->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);

    std::vector<std::pair<CLI::App*, config::Pipeline>> pipelines;
    for (auto p : {config::Pipeline::BoUnitary, config::Pipeline::BoDissipative,
                   config::Pipeline::SteadySweep, config::Pipeline::Stability}) {
        auto* sub = app.add_subcommand(config::to_string(p));
        sub->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "output CSV (overrides the config)");
        sub->add_option("--threads", threads, "worker threads, 0 = machine parallelism")
            ->check(CLI::NonNegativeNumber);
        pipelines.emplace_back(sub, p);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return runner::kExitFatal;
    }

    try {
        if (validate->parsed()) {
            const auto cfg = config::load_config(config_path);
            std::cout << "ok: " << config::to_string(cfg.pipeline) << '\n';
            return runner::kExitSuccess;
        }
        runner::RunOverrides overrides;
        if (!out_path.empty()) overrides.out = out_path;
        if (threads >= 0) overrides.threads = threads;
        for (const auto& [sub, pipeline] : pipelines) {
            if (sub->parsed()) return run_pipeline(pipeline, config_path, overrides);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return runner::kExitFatal;
}
