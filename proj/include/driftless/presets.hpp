#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "driftless/config.hpp"

namespace driftless::presets {

namespace detail {

inline env::EnvSpec make_env(mixture::DomainId d, std::string name, env::RewardKind kind,
                             env::ServiceModel model, double mean,
                             std::vector<env::PromptClass> classes) {
    env::EnvSpec e;
    e.domain = d;
    e.name = std::move(name);
    e.reward_kind = kind;
    e.service_time = {model, mean};
    e.prompt_classes = std::move(classes);
    return e;
}

/// Five domains in the default mix: exact-match math and logic, all-tests
/// code and function calling, constraint-fraction instruction following.
/// Service means caricature the rate heterogeneity (code slowest).
inline std::vector<env::EnvSpec> five_domains(bool with_easy_classes, env::ServiceModel model) {
    using env::Difficulty;
    using env::RewardKind;
    std::vector<env::EnvSpec> envs;
    if (with_easy_classes) {
        envs.push_back(make_env(0, "math", RewardKind::BinaryExactMatch, model, 1.0,
                                {{0, 3, Difficulty::Easy}, {1, 11, Difficulty::Hard}}));
        envs.push_back(make_env(1, "code", RewardKind::AllTestsPass, model, 5.0,
                                {{2, 5, Difficulty::Easy}, {3, 13, Difficulty::Hard}}));
        envs.push_back(make_env(2, "logic", RewardKind::BinaryExactMatch, model, 1.5,
                                {{4, 2, Difficulty::Easy}, {5, 9, Difficulty::Hard}}));
        envs.push_back(make_env(3, "instruction", RewardKind::FractionSatisfied, model, 1.0,
                                {{6, 6, Difficulty::Easy}, {7, 12, Difficulty::Hard}}));
        envs.push_back(make_env(4, "function", RewardKind::AllTestsPass, model, 0.8,
                                {{8, 1, Difficulty::Easy}, {9, 14, Difficulty::Hard}}));
    } else {
        envs.push_back(make_env(0, "math", RewardKind::BinaryExactMatch, model, 1.0,
                                {{0, 3, Difficulty::Hard}}));
        envs.push_back(make_env(1, "code", RewardKind::AllTestsPass, model, 5.0,
                                {{1, 5, Difficulty::Hard}}));
        envs.push_back(make_env(2, "logic", RewardKind::BinaryExactMatch, model, 1.5,
                                {{2, 2, Difficulty::Hard}}));
        envs.push_back(make_env(3, "instruction", RewardKind::FractionSatisfied, model, 1.0,
                                {{3, 6, Difficulty::Hard}}));
        envs.push_back(make_env(4, "function", RewardKind::AllTestsPass, model, 0.8,
                                {{4, 1, Difficulty::Hard}}));
    }
    return envs;
}

} // namespace detail

/// Default full run: five heterogeneous domains, adaptive sampling, DAP
/// shaping, async actors with a delayed broadcast. Output length and buffer
/// keep the reference B/L ratio of 1/8 at toy scale.
inline config::ExperimentConfig paper_launch() {
    config::ExperimentConfig cfg;
    auto& p = cfg.pipeline;
    p.weights = {0.40, 0.25, 0.15, 0.10, 0.10};
    p.envs = detail::five_domains(true, env::ServiceModel::Exponential);
    p.actor_slots = 4;
    p.group_size = 8;
    p.groups_per_step = 8;
    p.broadcast_delay = 0.5;
    p.max_steps = 200;
    p.max_completions = 0;
    p.adaptive = true;
    p.step_size = 0.5;
    p.penalty = {64, 8, 1.0, 1.0, reward::PenaltyMode::DAP};
    p.policy = {16, 2.0, 2.0};
    cfg.seeds = {1, 2, 3};
    cfg.out_dir = "runs/paper-launch";
    return cfg;
}

/// Mixture-drift demonstration: many actor slots keep a large in-flight
/// population, so static sampling under 5x service heterogeneity visibly
/// skews the completed mix while adaptive sampling holds the targets.
inline config::ExperimentConfig mixture_demo() {
    config::ExperimentConfig cfg;
    auto& p = cfg.pipeline;
    p.weights = {0.40, 0.25, 0.15, 0.10, 0.10};
    p.envs = detail::five_domains(false, env::ServiceModel::Exponential);
    p.actor_slots = 128;
    p.group_size = 8;
    p.groups_per_step = 8;
    p.broadcast_delay = 0.5;
    p.max_steps = 0;
    p.max_completions = 5000;
    p.adaptive = true;
    p.step_size = 0.05;
    p.penalty = {64, 16, 1.0, 1.0, reward::PenaltyMode::DAP};
    p.policy = {16, 0.0, 2.0};
    cfg.seeds = {1, 2, 3};
    cfg.out_dir = "runs/mixture-demo";
    return cfg;
}

/// Length-shaping comparison: one domain with an easy and a hard class, run
/// synchronously so the only difference between paired runs is the penalty
/// mode. The LP twin is this config with penalty.mode = "lp". Uses mean-only
/// advantages: per-group standardization divides out any uniform penalty
/// scale, which would erase most of the contrast between the two modes.
inline config::ExperimentConfig dap_compare() {
    config::ExperimentConfig cfg;
    auto& p = cfg.pipeline;
    p.weights = {1.0};
    p.envs = {detail::make_env(0, "math", env::RewardKind::BinaryExactMatch,
                               env::ServiceModel::Deterministic, 1.0,
                               {{0, 3, env::Difficulty::Easy}, {1, 5, env::Difficulty::Hard}})};
    p.actor_slots = 1;
    p.group_size = 8;
    p.groups_per_step = 32;
    p.broadcast_delay = 0.0;
    p.max_steps = 200;
    p.max_completions = 0;
    p.adaptive = true;
    p.step_size = 2.2;
    p.advantage_norm = gspo::AdvantageNorm::MeanOnly;
    p.penalty = {128, 112, 1.0, 0.1, reward::PenaltyMode::DAP};
    p.policy = {8, 3.3, 4.0};
    cfg.seeds = {1, 2, 3, 4, 5};
    cfg.out_dir = "runs/dap-compare";
    return cfg;
}

inline std::vector<std::string> names() { return {"paper-launch", "mixture-demo", "dap-compare"}; }

inline config::ExperimentConfig by_name(const std::string& name) {
    if (name == "paper-launch") return paper_launch();
    if (name == "mixture-demo") return mixture_demo();
    if (name == "dap-compare") return dap_compare();
    throw std::invalid_argument("preset: unknown name \"" + name +
                                "\" (expected paper-launch, mixture-demo or dap-compare)");
}

} // namespace driftless::presets
