#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftless/analytics.hpp"
#include "driftless/env.hpp"
#include "driftless/gspo.hpp"
#include "driftless/mixture.hpp"
#include "driftless/policy.hpp"
#include "driftless/reward.hpp"
#include "driftless/rng.hpp"

namespace driftless::pipeline {

struct SamplerConfig {
    std::uint64_t warmup_threshold = 50;
    double clip_lo = 0.1;
    double clip_hi = 10.0;
};

struct PolicyConfig {
    std::uint32_t vocab_size = 16;
    double init_verbosity_logit = 0.0;
    double easy_logit_boost = 2.0;  // added on the correct token of easy classes
};

/// Everything one simulated run needs. max_steps / max_completions are halt
/// conditions; 0 disables that condition (at least one must be set).
struct PipelineConfig {
    std::size_t actor_slots = 4;
    std::uint32_t group_size = 8;       // G
    std::size_t groups_per_step = 8;
    double broadcast_delay = 0.0;       // simulated seconds
    std::uint64_t max_steps = 200;
    std::uint64_t max_completions = 0;  // rollouts, not groups
    bool adaptive = true;
    double step_size = 0.05;
    gspo::AdvantageNorm advantage_norm = gspo::AdvantageNorm::Standardized;
    gspo::ClipConfig clip;
    reward::PenaltyConfig penalty;      // penalty.max_len doubles as generation L
    SamplerConfig sampler;
    PolicyConfig policy;
    std::vector<double> weights;        // one per env, sums to 1
    std::vector<env::EnvSpec> envs;

    std::size_t num_prompt_classes() const {
        std::size_t n = 0;
        for (const auto& e : envs) n += e.prompt_classes.size();
        return n;
    }

    void validate() const {
        if (envs.empty()) throw std::invalid_argument("envs: at least one domain required");
        if (weights.size() != envs.size())
            throw std::invalid_argument("weights: must have one entry per env");
        mixture::DomainWeights::validated(weights);
        if (actor_slots < 1) throw std::invalid_argument("actor_slots: must be >= 1");
        if (group_size < 2) throw std::invalid_argument("group_size: must be >= 2");
        if (groups_per_step < 1) throw std::invalid_argument("groups_per_step: must be >= 1");
        if (!(broadcast_delay >= 0.0))
            throw std::invalid_argument("broadcast_delay: must be >= 0");
        if (max_steps == 0 && max_completions == 0)
            throw std::invalid_argument("max_steps: set max_steps or max_completions");
        if (!(step_size >= 0.0) || !std::isfinite(step_size))
            throw std::invalid_argument("step_size: must be finite and >= 0");
        clip.validate();
        penalty.validate();
        if (policy.vocab_size < 2) throw std::invalid_argument("policy.vocab_size: must be >= 2");
        mixture::SamplerState::make(envs.size(), sampler.warmup_threshold, sampler.clip_lo,
                                    sampler.clip_hi);

        std::vector<bool> seen(num_prompt_classes(), false);
        for (std::size_t d = 0; d < envs.size(); ++d) {
            envs[d].validate();
            if (envs[d].domain != d)
                throw std::invalid_argument("envs: domain field must equal the env's index");
            for (const auto& pc : envs[d].prompt_classes) {
                if (pc.class_id >= seen.size() || seen[pc.class_id])
                    throw std::invalid_argument(
                        "prompt_classes: class ids must be unique and contiguous from 0");
                seen[pc.class_id] = true;
                if (pc.correct_token >= policy.vocab_size)
                    throw std::invalid_argument("prompt_classes: correct_token out of vocab");
            }
        }
    }
};

/// Initial parameters: hard classes flat, easy classes get a head start on
/// their correct token.
inline toy::PolicyParams make_policy(const PipelineConfig& cfg) {
    auto params = toy::PolicyParams::make(static_cast<std::uint32_t>(cfg.num_prompt_classes()),
                                          cfg.policy.vocab_size, cfg.policy.init_verbosity_logit);
    for (const auto& e : cfg.envs)
        for (const auto& pc : e.prompt_classes)
            if (pc.difficulty == env::Difficulty::Easy)
                params.answer_logits[pc.class_id][pc.correct_token] = cfg.policy.easy_logit_boost;
    return params;
}

/// One line of the per-completion stream: a group came back from generation
/// and verification.
struct CompletionRecord {
    std::uint64_t index = 0;            // 0-based group arrival order
    double time = 0.0;
    mixture::DomainId domain = 0;
    std::uint32_t prompt_class = 0;
    env::Difficulty difficulty = env::Difficulty::Hard;
    std::uint32_t group_size = 0;
    double solve_rate = 0.0;
    double mean_length = 0.0;
    double mean_raw_reward = 0.0;
    double mean_shaped_reward = 0.0;
    std::uint64_t behavior_version = 0;
    bool retained = false;              // survived zero-advantage filtering
    std::uint64_t completions_total = 0;
};

/// One line of the per-step stream. Record 0 is the pre-training baseline;
/// record k describes trainer step k. Expected-value fields are exact under
/// the current parameters (see analytics.hpp); a difficulty with no classes
/// reports 0.
struct StepRecord {
    std::uint64_t step = 0;
    double time = 0.0;
    double objective = 0.0;
    std::uint64_t groups_consumed_total = 0;
    std::uint64_t filtered_groups_total = 0;
    std::uint64_t completions_total = 0;
    std::vector<double> mixture;                 // completed share per domain
    std::vector<double> domain_expected_reward;  // per domain
    double expected_length_easy = 0.0;
    double expected_length_hard = 0.0;
    double expected_solve_easy = 0.0;
    double expected_solve_hard = 0.0;
    double mean_version_lag = 0.0;
    std::uint64_t max_version_lag = 0;
    std::vector<std::uint64_t> lags;             // this step's batch, one per group
    double ratio_min = 1.0;                      // over this step's batch
    double ratio_max = 1.0;
};

struct Counters {
    std::uint64_t groups_generated = 0;
    std::uint64_t groups_filtered_out = 0;
    std::uint64_t groups_consumed = 0;
    std::uint64_t groups_awaiting_trainer = 0;
    std::uint64_t groups_in_service = 0;
};

struct SimulationResult {
    std::vector<CompletionRecord> completions;
    std::vector<StepRecord> steps;
    std::vector<std::uint64_t> consumed_lags;  // one per consumed group
    Counters counters;
    toy::PolicyParams final_params;
    std::string status;  // "completed_steps" or "completed_completions"
};

struct LagStats {
    double mean = 0.0;
    std::uint64_t max = 0;
};

/// Completed-rollout share per domain over the whole run.
inline std::vector<double> completed_shares(const SimulationResult& result,
                                            std::size_t num_domains) {
    std::vector<double> shares(num_domains, 0.0);
    std::uint64_t total = 0;
    for (const auto& c : result.completions) {
        shares.at(c.domain) += static_cast<double>(c.group_size);
        total += c.group_size;
    }
    if (total > 0)
        for (auto& s : shares) s /= static_cast<double>(total);
    return shares;
}

inline LagStats version_lag_stats(const SimulationResult& result) {
    LagStats s;
    if (result.consumed_lags.empty()) return s;
    std::uint64_t sum = 0;
    for (auto l : result.consumed_lags) {
        sum += l;
        s.max = std::max(s.max, l);
    }
    s.mean = static_cast<double>(sum) / static_cast<double>(result.consumed_lags.size());
    return s;
}

namespace detail {

enum class EventKind : int { GroupCompleted = 0, TrainerStep = 1, VersionBroadcast = 2 };

struct PendingGroup {
    mixture::DomainId domain = 0;
    std::uint32_t prompt_class = 0;
    env::Difficulty difficulty = env::Difficulty::Hard;
    std::vector<toy::ToyRollout> rollouts;
    std::uint64_t behavior_version = 0;
};

struct SimEvent {
    double time = 0.0;
    EventKind kind = EventKind::GroupCompleted;
    std::uint64_t seq = 0;  // insertion order, the final tie-breaker
    std::size_t slot = 0;
    PendingGroup group;
    toy::PolicyParams snapshot;
};

struct EventAfter {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        return a.seq > b.seq;
    }
};

// total generations can exceed any sensible experiment; treat as a wedged run
constexpr std::uint64_t kStallCap = 50'000'000;

} // namespace detail

/// Deterministic discrete-event loop over actor slots, verifiers, and one
/// trainer. Same (config, seed) gives an identical record stream. Within one
/// timestamp, events process as GroupCompleted, then TrainerStep, then
/// VersionBroadcast (insertion order within a kind), and freed actor slots
/// restart only after the whole timestamp has drained, so a zero-delay
/// broadcast reaches the actors before their next group starts.
inline SimulationResult run_simulation(const PipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);

    SimulationResult result;
    toy::PolicyParams trainer_params = make_policy(cfg);
    toy::PolicyParams actor_params = trainer_params;
    auto weights = mixture::DomainWeights::validated(cfg.weights);
    auto sampler = mixture::SamplerState::make(cfg.envs.size(), cfg.sampler.warmup_threshold,
                                               cfg.sampler.clip_lo, cfg.sampler.clip_hi);

    std::priority_queue<detail::SimEvent, std::vector<detail::SimEvent>, detail::EventAfter> queue;
    std::uint64_t next_seq = 0;
    std::deque<gspo::GroupBatch> ready;  // filtered groups awaiting the trainer
    std::size_t reserved = 0;            // ready-groups already claimed by scheduled steps
    std::vector<std::size_t> free_slots(cfg.actor_slots);
    for (std::size_t i = 0; i < cfg.actor_slots; ++i) free_slots[i] = i;

    std::uint64_t completions_total = 0;
    std::uint64_t lag_sum = 0;
    std::uint64_t lag_max = 0;
    bool halted = false;
    double now = 0.0;

    const auto mixture_vec = [&]() {
        std::vector<double> m(cfg.envs.size(), 0.0);
        if (sampler.total == 0) return std::vector<double>(cfg.weights);
        for (std::size_t d = 0; d < m.size(); ++d)
            m[d] = static_cast<double>(sampler.counts[d]) / static_cast<double>(sampler.total);
        return m;
    };

    const auto difficulty_expectations = [&](StepRecord& rec) {
        double len[2] = {0.0, 0.0}, solve[2] = {0.0, 0.0};
        std::size_t n[2] = {0, 0};
        for (const auto& e : cfg.envs) {
            for (const auto& pc : e.prompt_classes) {
                const int i = pc.difficulty == env::Difficulty::Easy ? 0 : 1;
                len[i] += analytics::expected_length(trainer_params, pc.class_id, cfg.penalty.max_len);
                solve[i] += analytics::expected_solve_rate(trainer_params, e, pc, cfg.penalty.max_len);
                n[i] += 1;
            }
        }
        rec.expected_length_easy = n[0] ? len[0] / static_cast<double>(n[0]) : 0.0;
        rec.expected_length_hard = n[1] ? len[1] / static_cast<double>(n[1]) : 0.0;
        rec.expected_solve_easy = n[0] ? solve[0] / static_cast<double>(n[0]) : 0.0;
        rec.expected_solve_hard = n[1] ? solve[1] / static_cast<double>(n[1]) : 0.0;
    };

    const auto emit_step_record = [&](double objective, double ratio_min, double ratio_max,
                                      std::vector<std::uint64_t> lags) {
        StepRecord rec;
        rec.step = trainer_params.version;
        rec.time = now;
        rec.objective = objective;
        rec.groups_consumed_total = result.counters.groups_consumed;
        rec.filtered_groups_total = result.counters.groups_filtered_out;
        rec.completions_total = completions_total;
        rec.mixture = mixture_vec();
        rec.domain_expected_reward.reserve(cfg.envs.size());
        for (const auto& e : cfg.envs)
            rec.domain_expected_reward.push_back(
                analytics::domain_expected_reward(trainer_params, e, cfg.penalty.max_len));
        difficulty_expectations(rec);
        if (result.counters.groups_consumed > 0) {
            rec.mean_version_lag =
                static_cast<double>(lag_sum) / static_cast<double>(result.counters.groups_consumed);
            rec.max_version_lag = lag_max;
        }
        rec.lags = std::move(lags);
        rec.ratio_min = ratio_min;
        rec.ratio_max = ratio_max;
        result.steps.push_back(std::move(rec));
    };

    const auto start_group = [&](std::size_t slot) {
        const auto probs =
            cfg.adaptive ? mixture::domain_probabilities(weights, sampler) : cfg.weights;
        const auto d = mixture::sample_domain(probs, rng);
        const auto& spec = cfg.envs[d];
        const auto cls_idx = mixture::sample_prompt(spec.prompt_classes.size(), rng);
        const auto& pc = spec.prompt_classes[cls_idx];

        detail::SimEvent ev;
        ev.kind = detail::EventKind::GroupCompleted;
        ev.slot = slot;
        ev.group.domain = d;
        ev.group.prompt_class = pc.class_id;
        ev.group.difficulty = pc.difficulty;
        ev.group.behavior_version = actor_params.version;
        ev.group.rollouts.reserve(cfg.group_size);
        for (std::uint32_t i = 0; i < cfg.group_size; ++i)
            ev.group.rollouts.push_back(
                toy::generate(actor_params, pc.class_id, cfg.penalty.max_len, rng));
        ev.time = now + env::service_delay(spec, rng);
        ev.seq = next_seq++;
        result.counters.groups_generated += 1;
        queue.push(std::move(ev));
    };

    const auto on_group_completed = [&](detail::SimEvent&& ev) {
        free_slots.push_back(ev.slot);
        auto& group = ev.group;
        const auto& spec = cfg.envs[group.domain];

        std::vector<reward::RolloutOutcome> outcomes;
        outcomes.reserve(group.rollouts.size());
        for (const auto& r : group.rollouts) {
            const auto vr = env::verify(spec, r);
            outcomes.push_back({r.length, r.finished, vr.raw_reward, vr.correct});
        }
        const auto stats = reward::solve_rate(outcomes);
        std::vector<double> shaped(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i)
            shaped[i] = reward::shaped_reward(outcomes[i], stats, cfg.penalty);

        mixture::record_completion(sampler, group.domain, cfg.group_size);
        completions_total += cfg.group_size;

        gspo::GroupBatch batch;
        batch.rollouts = std::move(group.rollouts);
        batch.shaped_rewards = shaped;
        batch.advantages = gspo::group_advantages(shaped, cfg.advantage_norm);
        batch.behavior_version = group.behavior_version;
        const bool retained = gspo::has_reward_signal(batch);

        CompletionRecord rec;
        rec.index = result.completions.size();
        rec.time = now;
        rec.domain = group.domain;
        rec.prompt_class = group.prompt_class;
        rec.difficulty = group.difficulty;
        rec.group_size = cfg.group_size;
        rec.solve_rate = stats.solve_rate;
        double len_sum = 0.0, raw_sum = 0.0, shaped_sum = 0.0;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            len_sum += outcomes[i].length;
            raw_sum += outcomes[i].raw_reward;
            shaped_sum += shaped[i];
        }
        rec.mean_length = len_sum / static_cast<double>(outcomes.size());
        rec.mean_raw_reward = raw_sum / static_cast<double>(outcomes.size());
        rec.mean_shaped_reward = shaped_sum / static_cast<double>(outcomes.size());
        rec.behavior_version = batch.behavior_version;
        rec.retained = retained;
        rec.completions_total = completions_total;
        result.completions.push_back(std::move(rec));

        if (retained) {
            ready.push_back(std::move(batch));
            while (ready.size() - reserved >= cfg.groups_per_step) {
                detail::SimEvent step;
                step.kind = detail::EventKind::TrainerStep;
                step.time = now;
                step.seq = next_seq++;
                queue.push(std::move(step));
                reserved += cfg.groups_per_step;
            }
        } else {
            result.counters.groups_filtered_out += 1;
        }

        if (cfg.max_completions > 0 && completions_total >= cfg.max_completions) {
            halted = true;
            result.status = "completed_completions";
        }
    };

    const auto on_trainer_step = [&]() {
        std::vector<gspo::GroupBatch> batch;
        batch.reserve(cfg.groups_per_step);
        for (std::size_t i = 0; i < cfg.groups_per_step; ++i) {
            batch.push_back(std::move(ready.front()));
            ready.pop_front();
        }
        reserved -= cfg.groups_per_step;

        std::vector<std::uint64_t> lags;
        lags.reserve(batch.size());
        for (const auto& g : batch) {
            const std::uint64_t lag = trainer_params.version - g.behavior_version;
            lags.push_back(lag);
            result.consumed_lags.push_back(lag);
            lag_sum += lag;
            lag_max = std::max(lag_max, lag);
        }
        result.counters.groups_consumed += batch.size();

        const double objective = gspo::eval_objective(trainer_params, batch, cfg.clip);
        double ratio_min = batch.front().ratios.front();
        double ratio_max = ratio_min;
        for (const auto& g : batch)
            for (double r : g.ratios) {
                ratio_min = std::min(ratio_min, r);
                ratio_max = std::max(ratio_max, r);
            }
        const auto grad = gspo::objective_gradient(trainer_params, batch, cfg.clip);
        trainer_params = toy::apply_update(trainer_params, grad, cfg.step_size);

        detail::SimEvent bc;
        bc.kind = detail::EventKind::VersionBroadcast;
        bc.time = now + cfg.broadcast_delay;
        bc.seq = next_seq++;
        bc.snapshot = trainer_params;
        queue.push(std::move(bc));

        emit_step_record(objective, ratio_min, ratio_max, std::move(lags));

        if (cfg.max_steps > 0 && trainer_params.version >= cfg.max_steps) {
            halted = true;
            result.status = "completed_steps";
        }
    };

    emit_step_record(0.0, 1.0, 1.0, {});  // step-0 baseline under initial params

    while (!halted) {
        if (!free_slots.empty()) {
            std::sort(free_slots.begin(), free_slots.end());
            for (std::size_t slot : free_slots) start_group(slot);
            free_slots.clear();
        }
        if (queue.empty()) break;  // unreachable: every free slot schedules a completion
        if (result.counters.groups_generated > detail::kStallCap)
            throw std::runtime_error("run_simulation: halt conditions unreachable, run wedged");

        now = queue.top().time;
        while (!halted && !queue.empty() && queue.top().time == now) {
            detail::SimEvent ev = queue.top();
            queue.pop();
            switch (ev.kind) {
                case detail::EventKind::GroupCompleted:
                    on_group_completed(std::move(ev));
                    break;
                case detail::EventKind::TrainerStep:
                    on_trainer_step();
                    break;
                case detail::EventKind::VersionBroadcast:
                    if (ev.snapshot.version > actor_params.version)
                        actor_params = std::move(ev.snapshot);
                    break;
            }
        }
    }

    while (!queue.empty()) {
        if (queue.top().kind == detail::EventKind::GroupCompleted)
            result.counters.groups_in_service += 1;
        queue.pop();
    }
    result.counters.groups_awaiting_trainer = ready.size();
    result.final_params = trainer_params;
    return result;
}

/// The uncorrected regime: identical loop, but the domain draw always uses the
/// target weights, so heterogeneous service times skew what completes.
inline SimulationResult run_static_baseline(PipelineConfig cfg, std::uint64_t seed) {
    cfg.adaptive = false;
    return run_simulation(cfg, seed);
}

} // namespace driftless::pipeline
