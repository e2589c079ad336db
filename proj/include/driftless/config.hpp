#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftless/pipeline.hpp"

namespace driftless::config {

using nlohmann::json;

/// A full experiment: one pipeline setup plus the seeds to run it under and
/// where to put the output.
struct ExperimentConfig {
    pipeline::PipelineConfig pipeline;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::string out_dir = "runs/out";

    void validate() const {
        if (seeds.empty()) throw std::invalid_argument("seeds: at least one seed required");
        if (out_dir.empty()) throw std::invalid_argument("out_dir: must be non-empty");
        pipeline.validate();
    }
};

namespace detail {

[[noreturn]] inline void bad_key(const std::string& key, const std::string& why) {
    throw std::invalid_argument(key + ": " + why);
}

inline void expect_object(const json& j, const std::string& key) {
    if (!j.is_object()) bad_key(key, "expected an object");
}

/// Strict field access: every lookup names the key it is validating.
inline const json& field(const json& j, const std::string& section, const std::string& name) {
    const std::string key = section.empty() ? name : section + "." + name;
    if (!j.contains(name)) bad_key(key, "missing");
    return j.at(name);
}

inline void reject_unknown(const json& j, const std::string& section,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) { ok = true; break; }
        if (!ok) bad_key(section.empty() ? key : section + "." + key, "unknown key");
    }
}

inline double as_number(const json& j, const std::string& key) {
    if (!j.is_number()) bad_key(key, "expected a number");
    return j.get<double>();
}

inline std::uint64_t as_uint(const json& j, const std::string& key) {
    if (!j.is_number_unsigned()) bad_key(key, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline bool as_bool(const json& j, const std::string& key) {
    if (!j.is_boolean()) bad_key(key, "expected a boolean");
    return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& key) {
    if (!j.is_string()) bad_key(key, "expected a string");
    return j.get<std::string>();
}

} // namespace detail

inline std::string to_string(reward::PenaltyMode m) {
    return m == reward::PenaltyMode::LP ? "lp" : "dap";
}
inline std::string to_string(env::RewardKind k) {
    switch (k) {
        case env::RewardKind::BinaryExactMatch: return "binary_exact_match";
        case env::RewardKind::FractionSatisfied: return "fraction_satisfied";
        case env::RewardKind::AllTestsPass: return "all_tests_pass";
    }
    return "binary_exact_match";
}
inline std::string to_string(env::Difficulty d) {
    return d == env::Difficulty::Easy ? "easy" : "hard";
}
inline std::string to_string(env::ServiceModel m) {
    return m == env::ServiceModel::Deterministic ? "deterministic" : "exponential";
}
inline std::string to_string(gspo::AdvantageNorm n) {
    return n == gspo::AdvantageNorm::Standardized ? "standardized" : "mean_only";
}

inline reward::PenaltyMode penalty_mode_from(const std::string& s, const std::string& key) {
    if (s == "lp") return reward::PenaltyMode::LP;
    if (s == "dap") return reward::PenaltyMode::DAP;
    detail::bad_key(key, "expected \"lp\" or \"dap\"");
}
inline env::RewardKind reward_kind_from(const std::string& s, const std::string& key) {
    if (s == "binary_exact_match") return env::RewardKind::BinaryExactMatch;
    if (s == "fraction_satisfied") return env::RewardKind::FractionSatisfied;
    if (s == "all_tests_pass") return env::RewardKind::AllTestsPass;
    detail::bad_key(key, "expected binary_exact_match, fraction_satisfied or all_tests_pass");
}
inline env::Difficulty difficulty_from(const std::string& s, const std::string& key) {
    if (s == "easy") return env::Difficulty::Easy;
    if (s == "hard") return env::Difficulty::Hard;
    detail::bad_key(key, "expected \"easy\" or \"hard\"");
}
inline env::ServiceModel service_model_from(const std::string& s, const std::string& key) {
    if (s == "deterministic") return env::ServiceModel::Deterministic;
    if (s == "exponential") return env::ServiceModel::Exponential;
    detail::bad_key(key, "expected \"deterministic\" or \"exponential\"");
}
inline gspo::AdvantageNorm advantage_norm_from(const std::string& s, const std::string& key) {
    if (s == "standardized") return gspo::AdvantageNorm::Standardized;
    if (s == "mean_only") return gspo::AdvantageNorm::MeanOnly;
    detail::bad_key(key, "expected \"standardized\" or \"mean_only\"");
}

inline json to_json(const ExperimentConfig& cfg) {
    const auto& p = cfg.pipeline;
    json j;
    j["seeds"] = cfg.seeds;
    j["out_dir"] = cfg.out_dir;
    j["weights"] = p.weights;
    j["sampler"] = {{"warmup_threshold", p.sampler.warmup_threshold},
                    {"clip_lo", p.sampler.clip_lo},
                    {"clip_hi", p.sampler.clip_hi}};
    j["clip"] = {{"eps_low", p.clip.eps_low}, {"eps_high", p.clip.eps_high}};
    j["penalty"] = {{"max_len", p.penalty.max_len},
                    {"buffer", p.penalty.buffer},
                    {"gamma", p.penalty.gamma},
                    {"lambda_f", p.penalty.lambda_f},
                    {"mode", to_string(p.penalty.mode)}};
    j["policy"] = {{"vocab_size", p.policy.vocab_size},
                   {"init_verbosity_logit", p.policy.init_verbosity_logit},
                   {"easy_logit_boost", p.policy.easy_logit_boost}};
    j["pipeline"] = {{"actor_slots", p.actor_slots},
                     {"group_size", p.group_size},
                     {"groups_per_step", p.groups_per_step},
                     {"broadcast_delay", p.broadcast_delay},
                     {"max_steps", p.max_steps},
                     {"max_completions", p.max_completions},
                     {"adaptive", p.adaptive},
                     {"step_size", p.step_size},
                     {"advantage_norm", to_string(p.advantage_norm)}};
    j["envs"] = json::array();
    for (const auto& e : p.envs) {
        json je;
        je["name"] = e.name;
        je["reward_kind"] = to_string(e.reward_kind);
        je["service"] = {{"model", to_string(e.service_time.model)},
                         {"mean", e.service_time.mean}};
        je["prompt_classes"] = json::array();
        for (const auto& pc : e.prompt_classes)
            je["prompt_classes"].push_back({{"class_id", pc.class_id},
                                            {"correct_token", pc.correct_token},
                                            {"difficulty", to_string(pc.difficulty)}});
        j["envs"].push_back(std::move(je));
    }
    return j;
}

inline ExperimentConfig from_json(const json& j) {
    using namespace detail;
    expect_object(j, "config");
    reject_unknown(j, "", {"seeds", "out_dir", "weights", "sampler", "clip", "penalty", "policy",
                           "pipeline", "envs"});
    ExperimentConfig cfg;
    auto& p = cfg.pipeline;

    const json& seeds = field(j, "", "seeds");
    if (!seeds.is_array() || seeds.empty()) bad_key("seeds", "expected a non-empty array");
    cfg.seeds.clear();
    for (const auto& s : seeds) cfg.seeds.push_back(as_uint(s, "seeds"));
    cfg.out_dir = as_string(field(j, "", "out_dir"), "out_dir");

    const json& w = field(j, "", "weights");
    if (!w.is_array()) bad_key("weights", "expected an array");
    p.weights.clear();
    for (const auto& v : w) p.weights.push_back(as_number(v, "weights"));

    const json& sa = field(j, "", "sampler");
    expect_object(sa, "sampler");
    reject_unknown(sa, "sampler", {"warmup_threshold", "clip_lo", "clip_hi"});
    p.sampler.warmup_threshold = as_uint(field(sa, "sampler", "warmup_threshold"),
                                         "sampler.warmup_threshold");
    p.sampler.clip_lo = as_number(field(sa, "sampler", "clip_lo"), "sampler.clip_lo");
    p.sampler.clip_hi = as_number(field(sa, "sampler", "clip_hi"), "sampler.clip_hi");

    const json& cl = field(j, "", "clip");
    expect_object(cl, "clip");
    reject_unknown(cl, "clip", {"eps_low", "eps_high"});
    p.clip.eps_low = as_number(field(cl, "clip", "eps_low"), "clip.eps_low");
    p.clip.eps_high = as_number(field(cl, "clip", "eps_high"), "clip.eps_high");

    const json& pe = field(j, "", "penalty");
    expect_object(pe, "penalty");
    reject_unknown(pe, "penalty", {"max_len", "buffer", "gamma", "lambda_f", "mode"});
    p.penalty.max_len =
        static_cast<std::uint32_t>(as_uint(field(pe, "penalty", "max_len"), "penalty.max_len"));
    p.penalty.buffer =
        static_cast<std::uint32_t>(as_uint(field(pe, "penalty", "buffer"), "penalty.buffer"));
    p.penalty.gamma = as_number(field(pe, "penalty", "gamma"), "penalty.gamma");
    p.penalty.lambda_f = as_number(field(pe, "penalty", "lambda_f"), "penalty.lambda_f");
    p.penalty.mode =
        penalty_mode_from(as_string(field(pe, "penalty", "mode"), "penalty.mode"), "penalty.mode");

    const json& po = field(j, "", "policy");
    expect_object(po, "policy");
    reject_unknown(po, "policy", {"vocab_size", "init_verbosity_logit", "easy_logit_boost"});
    p.policy.vocab_size = static_cast<std::uint32_t>(
        as_uint(field(po, "policy", "vocab_size"), "policy.vocab_size"));
    p.policy.init_verbosity_logit =
        as_number(field(po, "policy", "init_verbosity_logit"), "policy.init_verbosity_logit");
    p.policy.easy_logit_boost =
        as_number(field(po, "policy", "easy_logit_boost"), "policy.easy_logit_boost");

    const json& pi = field(j, "", "pipeline");
    expect_object(pi, "pipeline");
    reject_unknown(pi, "pipeline",
                   {"actor_slots", "group_size", "groups_per_step", "broadcast_delay", "max_steps",
                    "max_completions", "adaptive", "step_size", "advantage_norm"});
    p.actor_slots = static_cast<std::size_t>(
        as_uint(field(pi, "pipeline", "actor_slots"), "pipeline.actor_slots"));
    p.group_size = static_cast<std::uint32_t>(
        as_uint(field(pi, "pipeline", "group_size"), "pipeline.group_size"));
    p.groups_per_step = static_cast<std::size_t>(
        as_uint(field(pi, "pipeline", "groups_per_step"), "pipeline.groups_per_step"));
    p.broadcast_delay =
        as_number(field(pi, "pipeline", "broadcast_delay"), "pipeline.broadcast_delay");
    p.max_steps = as_uint(field(pi, "pipeline", "max_steps"), "pipeline.max_steps");
    p.max_completions =
        as_uint(field(pi, "pipeline", "max_completions"), "pipeline.max_completions");
    p.adaptive = as_bool(field(pi, "pipeline", "adaptive"), "pipeline.adaptive");
    p.step_size = as_number(field(pi, "pipeline", "step_size"), "pipeline.step_size");
    p.advantage_norm = advantage_norm_from(
        as_string(field(pi, "pipeline", "advantage_norm"), "pipeline.advantage_norm"),
        "pipeline.advantage_norm");

    const json& envs = field(j, "", "envs");
    if (!envs.is_array() || envs.empty()) bad_key("envs", "expected a non-empty array");
    p.envs.clear();
    for (std::size_t d = 0; d < envs.size(); ++d) {
        const std::string section = "envs[" + std::to_string(d) + "]";
        const json& je = envs[d];
        expect_object(je, section);
        reject_unknown(je, section, {"name", "reward_kind", "service", "prompt_classes"});
        env::EnvSpec e;
        e.domain = static_cast<mixture::DomainId>(d);
        e.name = as_string(field(je, section, "name"), section + ".name");
        e.reward_kind = reward_kind_from(
            as_string(field(je, section, "reward_kind"), section + ".reward_kind"),
            section + ".reward_kind");
        const json& sv = field(je, section, "service");
        expect_object(sv, section + ".service");
        reject_unknown(sv, section + ".service", {"model", "mean"});
        e.service_time.model = service_model_from(
            as_string(field(sv, section + ".service", "model"), section + ".service.model"),
            section + ".service.model");
        e.service_time.mean =
            as_number(field(sv, section + ".service", "mean"), section + ".service.mean");
        const json& pcs = field(je, section, "prompt_classes");
        if (!pcs.is_array() || pcs.empty())
            bad_key(section + ".prompt_classes", "expected a non-empty array");
        for (const auto& jpc : pcs) {
            const std::string pkey = section + ".prompt_classes";
            expect_object(jpc, pkey);
            reject_unknown(jpc, pkey, {"class_id", "correct_token", "difficulty"});
            env::PromptClass pc;
            pc.class_id =
                static_cast<std::uint32_t>(as_uint(field(jpc, pkey, "class_id"), pkey + ".class_id"));
            pc.correct_token = static_cast<std::uint32_t>(
                as_uint(field(jpc, pkey, "correct_token"), pkey + ".correct_token"));
            pc.difficulty = difficulty_from(
                as_string(field(jpc, pkey, "difficulty"), pkey + ".difficulty"),
                pkey + ".difficulty");
            e.prompt_classes.push_back(pc);
        }
        p.envs.push_back(std::move(e));
    }

    cfg.validate();
    return cfg;
}

inline std::string dump(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

inline ExperimentConfig parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    return from_json(j);
}

inline ExperimentConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

inline void save_file(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("config: cannot write " + path);
    out << dump(cfg);
}

} // namespace driftless::config
