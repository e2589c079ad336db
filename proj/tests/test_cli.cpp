#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <driftless/cli.hpp>
#include <driftless/config.hpp>
#include <driftless/metrics.hpp>
#include <driftless/presets.hpp>

using namespace driftless;
using Catch::Matchers::ContainsSubstring;

namespace fs = std::filesystem;

namespace {

struct EnvGuard {
    EnvGuard() { unsetenv("DRIFTLESS_SEED"); }
    ~EnvGuard() { unsetenv("DRIFTLESS_SEED"); }
    void set(const std::string& v) { setenv("DRIFTLESS_SEED", v.c_str(), 1); }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const fs::path& scratch_root() {
    static const fs::path root = [] {
        const fs::path dir = fs::temp_directory_path() / "driftless_cli_tests";
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = scratch_root() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string small_config_path() {
    static const std::string path = [] {
        auto cfg = presets::dap_compare();
        cfg.pipeline.max_steps = 10;
        cfg.pipeline.groups_per_step = 4;
        cfg.seeds = {3};
        cfg.out_dir = (scratch_root() / "default_out").string();
        const std::string p = (scratch_root() / "small.json").string();
        config::save_file(cfg, p);
        return p;
    }();
    return path;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("run writes the three metric files") {
    EnvGuard env;
    const auto dir = fresh_dir("run_basic");
    const auto res =
        call({"run", "--config", small_config_path(), "--out", dir.string(), "--seed", "7"});
    INFO(res.err);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.out, ContainsSubstring("seed 7"));

    const auto completions =
        metrics::read_jsonl((dir / "per_completion.jsonl").string(), metrics::completion_keys());
    const auto steps = metrics::read_jsonl((dir / "per_step.jsonl").string(), metrics::step_keys());
    const auto summary = metrics::read_summary((dir / "summary.json").string());
    REQUIRE_FALSE(completions.empty());
    REQUIRE(steps.size() == 11);
    REQUIRE(summary.at("seed").get<std::uint64_t>() == 7);
    REQUIRE(summary.at("status").get<std::string>() == "completed_steps");
}

TEST_CASE("same config and seed give byte-identical metrics") {
    EnvGuard env;
    const auto a = fresh_dir("repro_a");
    const auto b = fresh_dir("repro_b");
    REQUIRE(call({"run", "--config", small_config_path(), "--out", a.string(), "--seed", "4"}).code == 0);
    REQUIRE(call({"run", "--config", small_config_path(), "--out", b.string(), "--seed", "4"}).code == 0);
    for (const auto* name : {"per_completion.jsonl", "per_step.jsonl", "summary.json"})
        REQUIRE(read_file(a / name) == read_file(b / name));

    const auto c = fresh_dir("repro_c");
    REQUIRE(call({"run", "--config", small_config_path(), "--out", c.string(), "--seed", "5"}).code == 0);
    REQUIRE(read_file(a / "per_step.jsonl") != read_file(c / "per_step.jsonl"));
}

TEST_CASE("seed precedence is flag, then environment, then config") {
    EnvGuard env;
    const auto seed_of = [](const fs::path& dir) {
        return metrics::read_summary((dir / "summary.json").string()).at("seed").get<std::uint64_t>();
    };

    const auto flag_dir = fresh_dir("seed_flag");
    env.set("99");
    REQUIRE(call({"run", "--config", small_config_path(), "--out", flag_dir.string(), "--seed",
                  "5"}).code == 0);
    REQUIRE(seed_of(flag_dir) == 5);

    const auto env_dir = fresh_dir("seed_env");
    REQUIRE(call({"run", "--config", small_config_path(), "--out", env_dir.string()}).code == 0);
    REQUIRE(seed_of(env_dir) == 99);

    unsetenv("DRIFTLESS_SEED");
    const auto cfg_dir = fresh_dir("seed_cfg");
    REQUIRE(call({"run", "--config", small_config_path(), "--out", cfg_dir.string()}).code == 0);
    REQUIRE(seed_of(cfg_dir) == 3);
}

TEST_CASE("bad invocations exit nonzero with a message") {
    EnvGuard env;
    REQUIRE(call({}).code != 0);
    REQUIRE(call({"bogus"}).code != 0);

    const auto both = call({"run", "--config", small_config_path(), "--preset", "dap-compare"});
    REQUIRE(both.code != 0);
    REQUIRE_THAT(both.err, ContainsSubstring("mutually exclusive"));

    const auto neither = call({"run"});
    REQUIRE(neither.code != 0);
    REQUIRE_THAT(neither.err, ContainsSubstring("--config"));

    const auto negative = call({"run", "--config", small_config_path(), "--seed", "-3"});
    REQUIRE(negative.code != 0);

    env.set("12abc");
    const auto garbage = call({"run", "--config", small_config_path()});
    REQUIRE(garbage.code != 0);
    REQUIRE_THAT(garbage.err, ContainsSubstring("DRIFTLESS_SEED"));
}

TEST_CASE("grad-check passes on the analytic gradient") {
    EnvGuard env;
    const auto res = call({"grad-check", "--seed", "1"});
    INFO(res.err);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.out, ContainsSubstring("max relative error"));
}

TEST_CASE("report aggregates a dap and lp pair") {
    EnvGuard env;
    const auto dir = fresh_dir("report_pair");

    auto dap_cfg = presets::dap_compare();
    dap_cfg.pipeline.max_steps = 10;
    dap_cfg.pipeline.groups_per_step = 4;
    auto lp_cfg = dap_cfg;
    lp_cfg.pipeline.penalty.mode = reward::PenaltyMode::LP;
    const std::string dap_path = (dir / "dap.json").string();
    const std::string lp_path = (dir / "lp.json").string();
    config::save_file(dap_cfg, dap_path);
    config::save_file(lp_cfg, lp_path);

    REQUIRE(call({"run", "--config", dap_path, "--out", (dir / "dap_run").string(), "--seed",
                  "2"}).code == 0);
    REQUIRE(call({"run", "--config", lp_path, "--out", (dir / "lp_run").string(), "--seed",
                  "2"}).code == 0);

    const auto rep = call({"report", dir.string()});
    INFO(rep.err);
    REQUIRE(rep.code == 0);
    REQUIRE_THAT(rep.out, ContainsSubstring("hard-class length ratio"));
    for (const auto* name : {"reward_by_domain.csv", "length_by_class.csv",
                             "mixture_by_completions.csv", "version_lag_hist.csv",
                             "length_ratio_summary.json"})
        REQUIRE(fs::exists(dir / name));

    const auto ratio_summary = metrics::read_summary((dir / "length_ratio_summary.json").string());
    REQUIRE(ratio_summary.at("hard_length_ratio_dap_over_lp").get<double>() > 0.0);
}

TEST_CASE("report on an empty directory fails") {
    EnvGuard env;
    const auto dir = fresh_dir("report_empty");
    const auto res = call({"report", dir.string()});
    REQUIRE(res.code != 0);
    REQUIRE_THAT(res.err, ContainsSubstring("no runs"));
}

TEST_CASE("mixture-demo writes the comparison table") {
    EnvGuard env;
    const auto dir = fresh_dir("mixture_demo");
    const auto res = call({"mixture-demo", "--out", dir.string(), "--seed", "5"});
    INFO(res.err);
    REQUIRE(res.code == 0);

    const auto table = read_file(dir / "mixture_comparison.csv");
    REQUIRE_THAT(table,
                 ContainsSubstring("seed,domain,domain_name,target,adaptive_share,static_share,"
                                   "adaptive_drift,static_drift"));
    REQUIRE_THAT(table, ContainsSubstring("\n5,0,"));
    REQUIRE(fs::exists(dir / "adaptive_seed_5" / "summary.json"));
    REQUIRE(fs::exists(dir / "static_seed_5" / "summary.json"));

    const auto adaptive =
        metrics::read_summary((dir / "adaptive_seed_5" / "summary.json").string());
    const auto stat = metrics::read_summary((dir / "static_seed_5" / "summary.json").string());
    REQUIRE(adaptive.at("adaptive").get<bool>());
    REQUIRE_FALSE(stat.at("adaptive").get<bool>());
}
