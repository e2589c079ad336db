#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace driftless::reward {

enum class PenaltyMode { LP, DAP };

/// Length-penalty configuration: max output length L, buffer width B, and the
/// difficulty-aware scaling knobs gamma / lambda_f.
struct PenaltyConfig {
    std::uint32_t max_len = 64;    // L, tokens
    std::uint32_t buffer = 16;     // B, tokens
    double gamma = 1.0;
    double lambda_f = 1.0;
    PenaltyMode mode = PenaltyMode::DAP;

    void validate() const {
        if (!(buffer > 0 && buffer < max_len))
            throw std::invalid_argument("penalty.buffer: need 0 < B < L");
        if (!(gamma >= 0.0)) throw std::invalid_argument("penalty.gamma: must be >= 0");
        if (!(lambda_f >= 0.0 && lambda_f <= 1.0))
            throw std::invalid_argument("penalty.lambda_f: must be in [0,1]");
    }
};

/// One verified rollout as the shaper sees it.
struct RolloutOutcome {
    std::uint32_t length = 0;   // l, tokens, <= L
    bool finished = false;      // emitted a terminator before hitting L
    double raw_reward = 0.0;    // R in [0,1]
    bool correct = false;       // R == 1 exactly
};

/// Per-group solve statistics.
struct GroupStats {
    double solve_rate = 0.0;    // s in [0,1]
    std::uint32_t group_size = 0;
};

/// Linear penalty inside the buffer zone (L-B, L]; zero at or below L-B.
/// Value is ((L-B) - l) / B, so it reaches -1 at l == L.
inline double length_penalty(std::uint32_t l, std::uint32_t L, std::uint32_t B) {
    if (!(B > 0 && B < L)) throw std::invalid_argument("length_penalty: need 0 < B < L");
    if (l == 0 || l > L) throw std::invalid_argument("length_penalty: need 1 <= l <= L");
    const std::uint32_t threshold = L - B;
    if (l <= threshold) return 0.0;
    return (static_cast<double>(threshold) - static_cast<double>(l)) / static_cast<double>(B);
}

/// Fraction of the group that solved the prompt exactly.
inline GroupStats solve_rate(const std::vector<RolloutOutcome>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("solve_rate: empty group");
    std::uint32_t n_correct = 0;
    for (const auto& o : outcomes) n_correct += o.correct ? 1 : 0;
    return GroupStats{static_cast<double>(n_correct) / static_cast<double>(outcomes.size()),
                      static_cast<std::uint32_t>(outcomes.size())};
}

/// Penalty strength for one rollout. In LP mode the penalty is always applied
/// at full strength. In DAP mode, precedence order:
///   1. truncated at L without finishing  -> 1  (full penalty, budget guard)
///   2. correct                           -> s^gamma
///   3. incorrect                         -> lambda_f
inline double penalty_scale(const RolloutOutcome& outcome, const GroupStats& stats,
                            const PenaltyConfig& cfg) {
    if (cfg.mode == PenaltyMode::LP) return 1.0;
    if (outcome.length >= cfg.max_len && !outcome.finished) return 1.0;
    if (outcome.correct) {
        // a correct rollout implies at least one solve in its group
        assert(stats.solve_rate > 0.0);
        return std::pow(stats.solve_rate, cfg.gamma);
    }
    return cfg.lambda_f;
}

/// Final reward r = R + lambda * P(l). Never exceeds R; never below R - 1.
inline double shaped_reward(const RolloutOutcome& outcome, const GroupStats& stats,
                            const PenaltyConfig& cfg) {
    const double lambda = penalty_scale(outcome, stats, cfg);
    return outcome.raw_reward + lambda * length_penalty(outcome.length, cfg.max_len, cfg.buffer);
}

} // namespace driftless::reward
