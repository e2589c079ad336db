#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "driftless/policy.hpp"

namespace driftless::gspo {

/// Per-token log-probabilities of one sequence under the current and the
/// behavior parameters.
struct SequenceLogProbs {
    std::vector<double> new_logps;
    std::vector<double> old_logps;
};

/// Asymmetric clip bounds (1 - eps_low, 1 + eps_high).
struct ClipConfig {
    double eps_low = 3e-3;
    double eps_high = 4e-3;

    void validate() const {
        if (!(eps_low > 0.0 && eps_low <= eps_high && eps_high < 1.0))
            throw std::invalid_argument("clip: need 0 < eps_low <= eps_high < 1");
    }
};

enum class AdvantageNorm { Standardized, MeanOnly };

/// One prompt group as the trainer consumes it: the G rollouts with their
/// shaped rewards, group-relative advantages, and (once computed at
/// consumption time) sequence-level importance ratios.
struct GroupBatch {
    std::vector<toy::ToyRollout> rollouts;
    std::vector<double> shaped_rewards;
    std::vector<double> advantages;
    std::vector<double> ratios;
    std::uint64_t behavior_version = 0;
};

/// Sequence-level importance ratio: the geometric mean of per-token
/// probability ratios, exp((1/|y|) * sum_t (new - old)).
inline double sequence_ratio(const SequenceLogProbs& lp) {
    if (lp.new_logps.empty() || lp.new_logps.size() != lp.old_logps.size())
        throw std::invalid_argument("sequence_ratio: token vectors empty or mismatched");
    double sum = 0.0;
    for (std::size_t t = 0; t < lp.new_logps.size(); ++t) {
        const double d = lp.new_logps[t] - lp.old_logps[t];
        if (!std::isfinite(d)) throw std::invalid_argument("sequence_ratio: non-finite log-prob");
        sum += d;
    }
    return std::exp(sum / static_cast<double>(lp.new_logps.size()));
}

/// Group-relative advantages: (r - mean) / (std + 1e-6) with population
/// standard deviation, or mean-only centering when requested.
inline std::vector<double> group_advantages(const std::vector<double>& shaped_rewards,
                                            AdvantageNorm norm = AdvantageNorm::Standardized) {
    const std::size_t g = shaped_rewards.size();
    if (g < 2) throw std::invalid_argument("group_advantages: need G >= 2");
    double mean = 0.0;
    for (double r : shaped_rewards) mean += r;
    mean /= static_cast<double>(g);

    std::vector<double> adv(g);
    if (norm == AdvantageNorm::MeanOnly) {
        for (std::size_t i = 0; i < g; ++i) adv[i] = shaped_rewards[i] - mean;
        return adv;
    }
    double var = 0.0;
    for (double r : shaped_rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(g);
    const double denom = std::sqrt(var) + 1e-6;
    for (std::size_t i = 0; i < g; ++i) adv[i] = (shaped_rewards[i] - mean) / denom;
    return adv;
}

inline bool has_reward_signal(const GroupBatch& group) {
    for (std::size_t i = 1; i < group.shaped_rewards.size(); ++i)
        if (group.shaped_rewards[i] != group.shaped_rewards[0]) return true;
    return false;
}

/// Dynamic sampling: drop groups whose shaped rewards are all equal (their
/// advantages are identically zero and carry no gradient). Order preserved.
inline std::vector<GroupBatch> filter_zero_advantage(std::vector<GroupBatch> groups) {
    std::vector<GroupBatch> kept;
    kept.reserve(groups.size());
    for (auto& g : groups)
        if (has_reward_signal(g)) kept.push_back(std::move(g));
    return kept;
}

inline double clip(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

/// Clipped surrogate for one sequence:
/// min(ratio * A, clip(ratio, 1-eps_low, 1+eps_high) * A).
inline double gspo_surrogate(double ratio, double advantage, const ClipConfig& cfg) {
    if (!(ratio > 0.0)) throw std::invalid_argument("gspo_surrogate: ratio must be > 0");
    const double clipped = clip(ratio, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
    return std::min(ratio * advantage, clipped * advantage);
}

/// Mean over groups of (1/G) * sum_i surrogate(s_i, A_i). Uses the ratios and
/// advantages stored in the groups. Empty batch is a no-op (objective 0).
inline double batch_objective(const std::vector<GroupBatch>& groups, const ClipConfig& cfg) {
    if (groups.empty()) return 0.0;
    double total = 0.0;
    for (const auto& g : groups) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.ratios.size(); ++i)
            s += gspo_surrogate(g.ratios[i], g.advantages[i], cfg);
        total += s / static_cast<double>(g.ratios.size());
    }
    return total / static_cast<double>(groups.size());
}

/// Recompute every ratio in the batch under the given parameters (the stored
/// behavior log-probs stand in for pi_theta_old) and return the objective.
/// This is the scalar the trainer ascends, and the function that
/// objective_gradient differentiates; finite-difference checks evaluate it.
inline double eval_objective(const toy::PolicyParams& params, std::vector<GroupBatch>& groups,
                             const ClipConfig& cfg) {
    for (auto& g : groups) {
        g.ratios.resize(g.rollouts.size());
        for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
            SequenceLogProbs lp{toy::token_log_probs(params, g.rollouts[i]),
                                g.rollouts[i].behavior_logps};
            g.ratios[i] = sequence_ratio(lp);
        }
    }
    return batch_objective(groups, cfg);
}

/// Analytic gradient of eval_objective with respect to the flat parameter
/// vector. The min/clip branches act as piecewise-constant masks: a sequence
/// whose min selects the clipped branch strictly (ratio beyond a bound, so
/// the branch is constant) contributes nothing; ties at a bound follow the
/// unclipped branch. For each active sequence the contribution is
/// A * s * (1/|y|) * grad log pi(y), scaled by the batch averaging.
inline std::vector<double> objective_gradient(const toy::PolicyParams& params,
                                              std::vector<GroupBatch>& groups,
                                              const ClipConfig& cfg) {
    std::vector<double> grad(params.flat_size(), 0.0);
    if (groups.empty()) return grad;
    const double group_w = 1.0 / static_cast<double>(groups.size());

    for (auto& g : groups) {
        g.ratios.resize(g.rollouts.size());
        const double seq_w = group_w / static_cast<double>(g.rollouts.size());
        for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
            const auto& r = g.rollouts[i];
            SequenceLogProbs lp{toy::token_log_probs(params, r), r.behavior_logps};
            const double s = sequence_ratio(lp);
            g.ratios[i] = s;

            const double adv = g.advantages[i];
            const double unclipped = s * adv;
            const double clipped = clip(s, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high) * adv;
            if (unclipped > clipped) continue;  // clipped branch selected, constant

            const double coef = seq_w * adv * s / static_cast<double>(r.length);
            const auto glp = toy::grad_log_prob(params, r);
            const std::size_t base = params.class_offset(r.prompt_class);
            for (std::size_t j = 0; j <= params.vocab_size; ++j)
                grad[base + j] += coef * glp[base + j];
        }
    }
    return grad;
}

} // namespace driftless::gspo
