#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftless/config.hpp"
#include "driftless/gradcheck.hpp"
#include "driftless/metrics.hpp"
#include "driftless/pipeline.hpp"
#include "driftless/presets.hpp"
#include "driftless/report.hpp"

namespace driftless::cli {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::int64_t seed = 0;
    bool seed_set = false;
};

namespace detail {

inline config::ExperimentConfig resolve_config(const CommonOpts& opts,
                                               const std::string& fallback_preset) {
    if (!opts.config_path.empty() && !opts.preset.empty())
        throw std::invalid_argument("--config and --preset are mutually exclusive");
    if (!opts.config_path.empty()) return config::load_file(opts.config_path);
    if (!opts.preset.empty()) return presets::by_name(opts.preset);
    if (!fallback_preset.empty()) return presets::by_name(fallback_preset);
    throw std::invalid_argument("--config: a config file or --preset is required");
}

/// Seed precedence: --seed flag, then DRIFTLESS_SEED, then the config's list.
inline std::uint64_t resolve_seed(const CommonOpts& opts, const config::ExperimentConfig& cfg) {
    if (opts.seed_set) {
        if (opts.seed < 0) throw std::invalid_argument("--seed: must be >= 0");
        return static_cast<std::uint64_t>(opts.seed);
    }
    if (const char* env = std::getenv("DRIFTLESS_SEED")) {
        try {
            std::size_t used = 0;
            const std::string text(env);
            const std::uint64_t v = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("DRIFTLESS_SEED: not a non-negative integer");
        }
    }
    return cfg.seeds.front();
}

inline std::string resolve_out_dir(const CommonOpts& opts, const config::ExperimentConfig& cfg) {
    return opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
}

inline void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "experiment config file (JSON)");
    sub->add_option("--preset", opts.preset, "built-in preset name");
    sub->add_option("--out", opts.out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", opts.seed, "RNG seed (overrides DRIFTLESS_SEED and the config)")
        ->check(CLI::NonNegativeNumber)
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

} // namespace detail

inline int cmd_run(const CommonOpts& opts, std::ostream& out) {
    const auto cfg = detail::resolve_config(opts, "");
    const auto seed = detail::resolve_seed(opts, cfg);
    const auto out_dir = detail::resolve_out_dir(opts, cfg);

    const auto result = pipeline::run_simulation(cfg.pipeline, seed);
    fs::create_directories(out_dir);
    metrics::write_run(cfg, seed, result, out_dir);
    out << "run: seed " << seed << ", " << result.status << " after "
        << result.final_params.version << " steps / "
        << result.steps.back().completions_total << " completions, metrics in " << out_dir
        << "\n";
    return 0;
}

inline int cmd_mixture_demo(const CommonOpts& opts, std::ostream& out) {
    auto cfg = detail::resolve_config(opts, "mixture-demo");
    if (opts.seed_set || std::getenv("DRIFTLESS_SEED"))
        cfg.seeds = {detail::resolve_seed(opts, cfg)};
    const auto out_dir = detail::resolve_out_dir(opts, cfg);
    fs::create_directories(out_dir);

    std::ofstream table(out_dir + "/mixture_comparison.csv");
    if (!table) throw std::runtime_error("mixture-demo: cannot write " + out_dir);
    table << "seed,domain,domain_name,target,adaptive_share,static_share,adaptive_drift,"
             "static_drift\n";

    const auto& names = cfg.pipeline.envs;
    for (const auto seed : cfg.seeds) {
        auto adaptive_cfg = cfg;
        adaptive_cfg.pipeline.adaptive = true;
        const auto adaptive = pipeline::run_simulation(adaptive_cfg.pipeline, seed);
        const auto stat = pipeline::run_static_baseline(cfg.pipeline, seed);

        const auto adir = out_dir + "/adaptive_seed_" + std::to_string(seed);
        const auto sdir = out_dir + "/static_seed_" + std::to_string(seed);
        fs::create_directories(adir);
        fs::create_directories(sdir);
        metrics::write_run(adaptive_cfg, seed, adaptive, adir);
        auto static_cfg = cfg;
        static_cfg.pipeline.adaptive = false;
        metrics::write_run(static_cfg, seed, stat, sdir);

        const auto a_shares = pipeline::completed_shares(adaptive, names.size());
        const auto s_shares = pipeline::completed_shares(stat, names.size());
        double a_max = 0.0, s_max = 0.0;
        for (std::size_t d = 0; d < names.size(); ++d) {
            const double target = cfg.pipeline.weights[d];
            const double a_drift = std::abs(a_shares[d] - target);
            const double s_drift = std::abs(s_shares[d] - target);
            a_max = std::max(a_max, a_drift);
            s_max = std::max(s_max, s_drift);
            table << seed << "," << d << "," << names[d].name << "," << target << ","
                  << a_shares[d] << "," << s_shares[d] << "," << a_drift << "," << s_drift
                  << "\n";
        }
        out << "mixture-demo: seed " << seed << ", max drift adaptive " << a_max << ", static "
            << s_max << "\n";
    }
    out << "mixture-demo: wrote " << out_dir << "/mixture_comparison.csv\n";
    return 0;
}

inline int cmd_grad_check(const CommonOpts& opts, std::ostream& out, std::ostream& err) {
    std::uint64_t seed = 1;
    if (!opts.config_path.empty() || !opts.preset.empty() || opts.seed_set ||
        std::getenv("DRIFTLESS_SEED")) {
        config::ExperimentConfig cfg;
        if (!opts.config_path.empty() || !opts.preset.empty())
            cfg = detail::resolve_config(opts, "");
        seed = detail::resolve_seed(opts, cfg);
    }
    const auto res = gradcheck::check_objective_gradient(seed, 100);
    out << "grad-check: max relative error " << res.max_rel_err << " over " << res.batches
        << " batches\n";
    if (res.max_rel_err < gradcheck::kTolerance) return 0;
    err << "grad-check: failed at parameter index " << res.worst_index << " (error "
        << res.max_rel_err << ", tolerance " << gradcheck::kTolerance << ")\n";
    return 1;
}

inline int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
    const auto rep = report::generate(dir);
    for (const auto& e : rep.errors) err << e << "\n";
    for (const auto& t : rep.tables_written) out << "report: wrote " << dir << "/" << t << "\n";
    if (rep.hard_length_ratio_dap_over_lp)
        out << "report: hard-class length ratio (dap/lp) " << *rep.hard_length_ratio_dap_over_lp
            << "\n";
    return rep.errors.empty() && !rep.tables_written.empty() ? 0 : 1;
}

/// Entry point shared by the binary and the tests. args excludes argv[0].
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"deterministic multi-domain RLVR training loop, desk scale"};
    app.require_subcommand(1);

    CommonOpts run_opts, demo_opts, grad_opts;
    std::string report_dir;

    auto* run = app.add_subcommand("run", "run one simulation and write metrics");
    detail::add_common(run, run_opts);
    auto* demo =
        app.add_subcommand("mixture-demo", "compare adaptive vs static sampling drift");
    detail::add_common(demo, demo_opts);
    auto* grad = app.add_subcommand("grad-check", "finite-difference check of the gradient");
    detail::add_common(grad, grad_opts);
    auto* rep = app.add_subcommand("report", "aggregate run metrics into plot tables");
    rep->add_option("dir", report_dir, "run directory")->required();

    std::vector<const char*> argv;
    argv.push_back("driftless");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (run->parsed()) return cmd_run(run_opts, out);
        if (demo->parsed()) return cmd_mixture_demo(demo_opts, out);
        if (grad->parsed()) return cmd_grad_check(grad_opts, out, err);
        if (rep->parsed()) return cmd_report(report_dir, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace driftless::cli
