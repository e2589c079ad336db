#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftless/config.hpp"
#include "driftless/pipeline.hpp"

/// Line-delimited metrics: one self-describing JSON object per line, every
/// line carrying the full fixed key set for its stream. Readers reject lines
/// whose key set deviates, which pins the schema.
namespace driftless::metrics {

using nlohmann::json;

inline const std::set<std::string>& completion_keys() {
    static const std::set<std::string> keys = {
        "index",          "time",           "domain",          "domain_name",
        "prompt_class",   "difficulty",     "group_size",      "solve_rate",
        "mean_length",    "mean_raw_reward", "mean_shaped_reward", "behavior_version",
        "retained",       "completions_total"};
    return keys;
}

inline const std::set<std::string>& step_keys() {
    static const std::set<std::string> keys = {
        "step",          "time",          "objective",        "groups_consumed_total",
        "filtered_groups_total",          "completions_total", "mixture",
        "domain_expected_reward",         "expected_length_easy", "expected_length_hard",
        "expected_solve_easy",            "expected_solve_hard",  "mean_version_lag",
        "max_version_lag", "lags",        "ratio_min",         "ratio_max"};
    return keys;
}

inline json to_json(const pipeline::CompletionRecord& r, const std::string& domain_name) {
    json j;
    j["index"] = r.index;
    j["time"] = r.time;
    j["domain"] = r.domain;
    j["domain_name"] = domain_name;
    j["prompt_class"] = r.prompt_class;
    j["difficulty"] = config::to_string(r.difficulty);
    j["group_size"] = r.group_size;
    j["solve_rate"] = r.solve_rate;
    j["mean_length"] = r.mean_length;
    j["mean_raw_reward"] = r.mean_raw_reward;
    j["mean_shaped_reward"] = r.mean_shaped_reward;
    j["behavior_version"] = r.behavior_version;
    j["retained"] = r.retained;
    j["completions_total"] = r.completions_total;
    return j;
}

inline json to_json(const pipeline::StepRecord& r) {
    json j;
    j["step"] = r.step;
    j["time"] = r.time;
    j["objective"] = r.objective;
    j["groups_consumed_total"] = r.groups_consumed_total;
    j["filtered_groups_total"] = r.filtered_groups_total;
    j["completions_total"] = r.completions_total;
    j["mixture"] = r.mixture;
    j["domain_expected_reward"] = r.domain_expected_reward;
    j["expected_length_easy"] = r.expected_length_easy;
    j["expected_length_hard"] = r.expected_length_hard;
    j["expected_solve_easy"] = r.expected_solve_easy;
    j["expected_solve_hard"] = r.expected_solve_hard;
    j["mean_version_lag"] = r.mean_version_lag;
    j["max_version_lag"] = r.max_version_lag;
    j["lags"] = r.lags;
    j["ratio_min"] = r.ratio_min;
    j["ratio_max"] = r.ratio_max;
    return j;
}

inline json summary_json(const config::ExperimentConfig& cfg, std::uint64_t seed,
                         const pipeline::SimulationResult& result) {
    const auto lag = pipeline::version_lag_stats(result);
    json j;
    j["status"] = result.status;
    j["seed"] = seed;
    j["adaptive"] = cfg.pipeline.adaptive;
    j["penalty_mode"] = config::to_string(cfg.pipeline.penalty.mode);
    j["policy_version"] = result.final_params.version;
    j["groups"] = {{"generated", result.counters.groups_generated},
                   {"filtered_out", result.counters.groups_filtered_out},
                   {"consumed", result.counters.groups_consumed},
                   {"awaiting_trainer", result.counters.groups_awaiting_trainer},
                   {"in_service", result.counters.groups_in_service}};
    j["mean_version_lag"] = lag.mean;
    j["max_version_lag"] = lag.max;
    const auto& last = result.steps.back();  // at least the step-0 record exists
    j["completions_total"] = last.completions_total;
    j["final_mixture"] = last.mixture;
    j["final_domain_expected_reward"] = last.domain_expected_reward;
    j["final_expected_length_easy"] = last.expected_length_easy;
    j["final_expected_length_hard"] = last.expected_length_hard;
    j["final_expected_solve_easy"] = last.expected_solve_easy;
    j["final_expected_solve_hard"] = last.expected_solve_hard;
    json names = json::array();
    for (const auto& e : cfg.pipeline.envs) names.push_back(e.name);
    j["domain_names"] = names;
    j["weights"] = cfg.pipeline.weights;
    return j;
}

/// Writes per_completion.jsonl, per_step.jsonl and summary.json into dir
/// (which must already exist).
inline void write_run(const config::ExperimentConfig& cfg, std::uint64_t seed,
                      const pipeline::SimulationResult& result, const std::string& dir) {
    {
        std::ofstream out(dir + "/per_completion.jsonl");
        if (!out) throw std::runtime_error("metrics: cannot write " + dir + "/per_completion.jsonl");
        for (const auto& r : result.completions)
            out << to_json(r, cfg.pipeline.envs[r.domain].name).dump() << "\n";
    }
    {
        std::ofstream out(dir + "/per_step.jsonl");
        if (!out) throw std::runtime_error("metrics: cannot write " + dir + "/per_step.jsonl");
        for (const auto& r : result.steps) out << to_json(r).dump() << "\n";
    }
    {
        std::ofstream out(dir + "/summary.json");
        if (!out) throw std::runtime_error("metrics: cannot write " + dir + "/summary.json");
        out << summary_json(cfg, seed, result).dump(2) << "\n";
    }
}

namespace detail {
inline void check_keys(const json& j, const std::set<std::string>& expected,
                       const std::string& where) {
    if (!j.is_object()) throw std::runtime_error(where + ": line is not an object");
    std::set<std::string> got;
    for (const auto& [k, _] : j.items()) got.insert(k);
    if (got != expected) throw std::runtime_error(where + ": line does not match the fixed schema");
}
} // namespace detail

/// Reads one JSONL file, validating every line against the given key set.
inline std::vector<json> read_jsonl(const std::string& path, const std::set<std::string>& keys) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics: cannot open " + path);
    std::vector<json> lines;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(n) + ": " + e.what());
        }
        detail::check_keys(j, keys, path + ":" + std::to_string(n));
        lines.push_back(std::move(j));
    }
    return lines;
}

inline json read_summary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics: cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace driftless::metrics
