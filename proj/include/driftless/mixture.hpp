#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "driftless/rng.hpp"

namespace driftless::mixture {

using DomainId = std::uint32_t;

/// Target mixture over domains. Entries are strictly positive and sum to 1;
/// validated once at construction so downstream code can assume it.
struct DomainWeights {
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t d) const { return weights[d]; }

    static DomainWeights validated(std::vector<double> w) {
        if (w.empty()) throw std::invalid_argument("weights: at least one domain required");
        double sum = 0.0;
        for (double v : w) {
            if (!(v > 0.0)) throw std::invalid_argument("weights: every entry must be > 0");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("weights: entries must sum to 1 within 1e-9");
        return DomainWeights{std::move(w)};
    }
};

/// Live completion counts per domain plus the knobs of the corrective loop.
/// counts[d] only ever grows; total mirrors the sum at all times.
struct SamplerState {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    std::uint64_t warmup_threshold = 50;
    double clip_lo = 0.1;
    double clip_hi = 10.0;

    static SamplerState make(std::size_t num_domains,
                             std::uint64_t warmup = 50,
                             double clip_lo = 0.1,
                             double clip_hi = 10.0) {
        if (!(clip_lo > 0.0 && clip_lo < 1.0 && clip_hi > 1.0))
            throw std::invalid_argument("sampler clip bounds: need 0 < clip_lo < 1 < clip_hi");
        SamplerState s;
        s.counts.assign(num_domains, 0);
        s.warmup_threshold = warmup;
        s.clip_lo = clip_lo;
        s.clip_hi = clip_hi;
        return s;
    }
};

/// Corrective factor for one domain: clip(weight / empirical_share, lo, hi).
/// A domain with no completions yet gets the full upward correction clip_hi.
inline double adjustment_factor(double weight, std::uint64_t count, std::uint64_t total,
                                double clip_lo, double clip_hi) {
    if (!(weight > 0.0)) throw std::invalid_argument("adjustment_factor: weight must be > 0");
    if (total < count) throw std::invalid_argument("adjustment_factor: total < count");
    if (count == 0) return clip_hi;
    const double share = static_cast<double>(count) / static_cast<double>(total);
    const double alpha = weight / share;
    if (alpha < clip_lo) return clip_lo;
    if (alpha > clip_hi) return clip_hi;
    return alpha;
}

/// Domain draw distribution. Static (the target weights) during warmup,
/// afterwards proportional to w_d * alpha_d renormalized.
inline std::vector<double> domain_probabilities(const DomainWeights& weights,
                                                const SamplerState& state) {
    const std::size_t d_count = weights.size();
    if (state.counts.size() != d_count)
        throw std::invalid_argument("domain_probabilities: state/weights size mismatch");
    if (state.total < state.warmup_threshold) return weights.weights;

    std::vector<double> probs(d_count);
    double norm = 0.0;
    for (std::size_t d = 0; d < d_count; ++d) {
        probs[d] = weights[d] * adjustment_factor(weights[d], state.counts[d], state.total,
                                                  state.clip_lo, state.clip_hi);
        norm += probs[d];
    }
    for (double& p : probs) p /= norm;
    return probs;
}

/// Categorical draw over a normalized probability vector.
inline DomainId sample_domain(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t d = 0; d < probs.size(); ++d) {
        cum += probs[d];
        if (u < cum) return static_cast<DomainId>(d);
    }
    return static_cast<DomainId>(probs.size() - 1);  // fp guard
}

/// Uniform prompt index in [0, size), with replacement across calls.
inline std::uint64_t sample_prompt(std::uint64_t domain_dataset_size, Rng& rng) {
    if (domain_dataset_size == 0)
        throw std::invalid_argument("sample_prompt: domain dataset size must be >= 1");
    return rng.uniform_int(domain_dataset_size);
}

/// Book k freshly completed rollouts against a domain.
inline void record_completion(SamplerState& state, DomainId domain, std::uint64_t k) {
    if (domain >= state.counts.size())
        throw std::invalid_argument("record_completion: domain out of range");
    state.counts[domain] += k;
    state.total += k;
}

} // namespace driftless::mixture
