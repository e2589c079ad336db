#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftless/mixture.hpp"
#include "driftless/policy.hpp"
#include "driftless/rng.hpp"

namespace driftless::env {

enum class RewardKind { BinaryExactMatch, FractionSatisfied, AllTestsPass };

enum class Difficulty { Easy, Hard };

enum class ServiceModel { Deterministic, Exponential };

struct PromptClass {
    std::uint32_t class_id = 0;  // index into the policy's class table
    std::uint32_t correct_token = 0;
    Difficulty difficulty = Difficulty::Hard;
};

struct ServiceTime {
    ServiceModel model = ServiceModel::Deterministic;
    double mean = 1.0;
};

/// One synthetic verifiable environment. The reward kind decides how an
/// answer token is scored; the service time model decides how long a group
/// takes to come back.
struct EnvSpec {
    mixture::DomainId domain = 0;
    std::string name;
    RewardKind reward_kind = RewardKind::BinaryExactMatch;
    std::vector<PromptClass> prompt_classes;
    ServiceTime service_time;

    void validate() const {
        if (prompt_classes.empty())
            throw std::invalid_argument("env: at least one prompt class required");
        if (!(service_time.mean > 0.0))
            throw std::invalid_argument("env: service-time mean must be > 0");
    }

    const PromptClass& class_for(std::uint32_t class_id) const {
        for (const auto& pc : prompt_classes)
            if (pc.class_id == class_id) return pc;
        throw std::invalid_argument("env: rollout's prompt class does not belong to this env");
    }
};

struct VerifierResult {
    double raw_reward = 0.0;
    bool correct = false;
};

namespace detail {
constexpr int kConstraintBits = 4;  // FractionSatisfied checks this many low bits

inline int matching_low_bits(std::uint32_t a, std::uint32_t b) {
    int n = 0;
    for (int i = 0; i < kConstraintBits; ++i)
        if (((a >> i) & 1u) == ((b >> i) & 1u)) ++n;
    return n;
}
} // namespace detail

/// Reward a finished rollout with this answer token would earn.
inline double token_reward(const EnvSpec& spec, const PromptClass& pc, std::uint32_t answer) {
    switch (spec.reward_kind) {
        case RewardKind::BinaryExactMatch:
        case RewardKind::AllTestsPass:
            return answer == pc.correct_token ? 1.0 : 0.0;
        case RewardKind::FractionSatisfied:
            return detail::matching_low_bits(answer, pc.correct_token) /
                   static_cast<double>(detail::kConstraintBits);
    }
    return 0.0;
}

/// Score one rollout. Unfinished rollouts always score 0. Exact-match kinds
/// give 1 iff the answer token equals the class's correct token;
/// FractionSatisfied gives the fraction of the 4 constraint bits matched.
inline VerifierResult verify(const EnvSpec& spec, const toy::ToyRollout& rollout) {
    const PromptClass& pc = spec.class_for(rollout.prompt_class);
    if (!rollout.finished || !rollout.answer_token.has_value()) return {0.0, false};
    const double reward = token_reward(spec, pc, *rollout.answer_token);
    return {reward, reward == 1.0};
}

/// Simulated verification-plus-generation latency for one group.
inline double service_delay(const EnvSpec& spec, Rng& rng) {
    if (spec.service_time.model == ServiceModel::Deterministic) return spec.service_time.mean;
    return rng.exponential(spec.service_time.mean);
}

} // namespace driftless::env
