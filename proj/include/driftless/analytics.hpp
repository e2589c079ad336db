#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "driftless/env.hpp"
#include "driftless/policy.hpp"

/// Closed-form expectations under the toy policy. The rollout distribution is
/// filler-count-geometric with an independent softmax answer, so mean length,
/// mean raw reward, and solve probability have exact expressions; the metric
/// curves use these instead of noisy sample means.
namespace driftless::analytics {

inline std::vector<double> answer_probs(const toy::PolicyParams& params, std::uint32_t cls) {
    const auto logsm = toy::log_softmax(params.answer_logits.at(cls));
    std::vector<double> p(logsm.size());
    for (std::size_t i = 0; i < logsm.size(); ++i) p[i] = std::exp(logsm[i]);
    return p;
}

/// E[length] = sum_k sigma^k (1-sigma) (k+1) + sigma^L * L.
inline double expected_length(const toy::PolicyParams& params, std::uint32_t cls,
                              std::size_t max_len) {
    const double sigma = toy::sigmoid(params.verbosity_logits.at(cls));
    double e = 0.0;
    double pk = 1.0;  // sigma^k
    for (std::size_t k = 0; k < max_len; ++k) {
        e += pk * (1.0 - sigma) * static_cast<double>(k + 1);
        pk *= sigma;
    }
    return e + pk * static_cast<double>(max_len);
}

inline double finish_probability(const toy::PolicyParams& params, std::uint32_t cls,
                                 std::size_t max_len) {
    const double sigma = toy::sigmoid(params.verbosity_logits.at(cls));
    return 1.0 - std::pow(sigma, static_cast<double>(max_len));
}

/// E[raw reward] = P(finished) * sum_tok softmax(tok) * token_reward(tok).
inline double expected_raw_reward(const toy::PolicyParams& params, const env::EnvSpec& spec,
                                  const env::PromptClass& pc, std::size_t max_len) {
    const auto probs = answer_probs(params, pc.class_id);
    double mean = 0.0;
    for (std::size_t tok = 0; tok < probs.size(); ++tok)
        mean += probs[tok] * env::token_reward(spec, pc, static_cast<std::uint32_t>(tok));
    return finish_probability(params, pc.class_id, max_len) * mean;
}

/// P(reward == 1) = P(finished) * sum over exactly-correct tokens.
inline double expected_solve_rate(const toy::PolicyParams& params, const env::EnvSpec& spec,
                                  const env::PromptClass& pc, std::size_t max_len) {
    const auto probs = answer_probs(params, pc.class_id);
    double hit = 0.0;
    for (std::size_t tok = 0; tok < probs.size(); ++tok)
        if (env::token_reward(spec, pc, static_cast<std::uint32_t>(tok)) == 1.0) hit += probs[tok];
    return finish_probability(params, pc.class_id, max_len) * hit;
}

/// Uniform-over-classes mean of expected_raw_reward, matching how prompts are
/// drawn within a domain.
inline double domain_expected_reward(const toy::PolicyParams& params, const env::EnvSpec& spec,
                                     std::size_t max_len) {
    double sum = 0.0;
    for (const auto& pc : spec.prompt_classes) sum += expected_raw_reward(params, spec, pc, max_len);
    return sum / static_cast<double>(spec.prompt_classes.size());
}

} // namespace driftless::analytics
