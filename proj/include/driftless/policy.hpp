#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "driftless/rng.hpp"

namespace driftless::toy {

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

inline double log_sigmoid(double u) {
    // log sigma(u), stable for both signs
    if (u >= 0.0) return -std::log1p(std::exp(-u));
    return u - std::log1p(std::exp(u));
}

inline std::vector<double> log_softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    const double lse = m + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

/// Parameters of the filler-then-answer policy, one block per prompt class:
/// answer logits z (V entries) and a verbosity logit u. The probability of
/// emitting one more filler token is sigma(u); otherwise the answer token is
/// drawn from softmax(z) and generation stops.
///
/// The flat parameter layout (used by gradients and updates) is
/// [u, z_0 .. z_{V-1}] per class, classes in order.
struct PolicyParams {
    std::uint32_t vocab_size = 16;
    std::vector<std::vector<double>> answer_logits;  // [class][V]
    std::vector<double> verbosity_logits;            // [class]
    std::uint64_t version = 0;

    static PolicyParams make(std::uint32_t num_classes, std::uint32_t vocab_size,
                             double init_verbosity_logit) {
        if (vocab_size < 2) throw std::invalid_argument("policy.vocab_size: must be >= 2");
        PolicyParams p;
        p.vocab_size = vocab_size;
        p.answer_logits.assign(num_classes, std::vector<double>(vocab_size, 0.0));
        p.verbosity_logits.assign(num_classes, init_verbosity_logit);
        return p;
    }

    std::size_t num_classes() const { return verbosity_logits.size(); }
    std::size_t flat_size() const { return num_classes() * (vocab_size + 1); }
    std::size_t class_offset(std::size_t c) const { return c * (vocab_size + 1); }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(flat_size());
        for (std::size_t c = 0; c < num_classes(); ++c) {
            out.push_back(verbosity_logits[c]);
            out.insert(out.end(), answer_logits[c].begin(), answer_logits[c].end());
        }
        return out;
    }

    void assign_flat(const std::vector<double>& flat) {
        if (flat.size() != flat_size())
            throw std::invalid_argument("policy params: flat vector size mismatch");
        std::size_t i = 0;
        for (std::size_t c = 0; c < num_classes(); ++c) {
            verbosity_logits[c] = flat[i++];
            for (std::uint32_t v = 0; v < vocab_size; ++v) answer_logits[c][v] = flat[i++];
        }
    }
};

/// One generated sequence: k filler tokens then (unless truncated) one answer
/// token. Truncation convention: the generator makes at most L filler/answer
/// decisions; if all L come out as fillers the rollout is truncated unfinished
/// with length L and its probability mass is sigma(u)^L. log_prob, gradients
/// and the recorded per-token log-probs all use this same convention.
struct ToyRollout {
    std::uint32_t prompt_class = 0;
    std::uint32_t filler_count = 0;               // == length when truncated
    std::optional<std::uint32_t> answer_token;    // absent iff truncated
    std::uint32_t length = 0;                     // k+1 finished, L truncated
    bool finished = false;
    std::uint64_t behavior_version = 0;
    std::vector<double> behavior_logps;           // per token, under the generating params
};

inline ToyRollout generate(const PolicyParams& params, std::uint32_t prompt_class,
                           std::uint32_t max_len, Rng& rng) {
    if (max_len < 2) throw std::invalid_argument("generate: max_len must be >= 2");
    if (prompt_class >= params.num_classes())
        throw std::invalid_argument("generate: prompt class out of range");

    const double sig = sigmoid(params.verbosity_logits[prompt_class]);
    const double lp_filler = log_sigmoid(params.verbosity_logits[prompt_class]);
    const double lp_answer_gate = log_sigmoid(-params.verbosity_logits[prompt_class]);

    ToyRollout r;
    r.prompt_class = prompt_class;
    r.behavior_version = params.version;
    r.behavior_logps.reserve(8);

    for (std::uint32_t step = 0; step < max_len; ++step) {
        if (rng.uniform() < sig) {
            r.filler_count += 1;
            r.behavior_logps.push_back(lp_filler);
            continue;
        }
        // answer token ends the rollout
        const auto logsm = log_softmax(params.answer_logits[prompt_class]);
        std::vector<double> probs(logsm.size());
        for (std::size_t v = 0; v < logsm.size(); ++v) probs[v] = std::exp(logsm[v]);
        const double u = rng.uniform();
        double cum = 0.0;
        std::uint32_t tok = static_cast<std::uint32_t>(probs.size() - 1);
        for (std::size_t v = 0; v < probs.size(); ++v) {
            cum += probs[v];
            if (u < cum) { tok = static_cast<std::uint32_t>(v); break; }
        }
        r.answer_token = tok;
        r.finished = true;
        r.behavior_logps.push_back(lp_answer_gate + logsm[tok]);
        r.length = r.filler_count + 1;
        return r;
    }
    // all max_len decisions were fillers: truncated, unfinished
    r.finished = false;
    r.length = max_len;
    return r;
}

/// Per-token log-probabilities of an existing rollout under (possibly newer)
/// parameters. Same token layout as ToyRollout::behavior_logps.
inline std::vector<double> token_log_probs(const PolicyParams& params, const ToyRollout& r) {
    if (r.prompt_class >= params.num_classes())
        throw std::invalid_argument("token_log_probs: prompt class out of range");
    const double u = params.verbosity_logits[r.prompt_class];
    std::vector<double> out;
    out.reserve(r.length);
    for (std::uint32_t t = 0; t < r.filler_count; ++t) out.push_back(log_sigmoid(u));
    if (r.finished) {
        if (!r.answer_token || *r.answer_token >= params.vocab_size)
            throw std::invalid_argument("token_log_probs: rollout/vocab shape mismatch");
        const auto logsm = log_softmax(params.answer_logits[r.prompt_class]);
        out.push_back(log_sigmoid(-u) + logsm[*r.answer_token]);
    }
    return out;
}

inline double log_prob(const PolicyParams& params, const ToyRollout& r) {
    double sum = 0.0;
    for (double lp : token_log_probs(params, r)) sum += lp;
    return sum;
}

/// Exact gradient of log_prob with respect to the flat parameter vector.
/// Nonzero only in the rollout's class block:
///   d/du = k*(1 - sigma) - sigma*[finished]
///   d/dz = onehot(answer) - softmax(z)   (finished), 0 (truncated)
inline std::vector<double> grad_log_prob(const PolicyParams& params, const ToyRollout& r) {
    if (r.prompt_class >= params.num_classes())
        throw std::invalid_argument("grad_log_prob: prompt class out of range");
    std::vector<double> grad(params.flat_size(), 0.0);
    const std::size_t base = params.class_offset(r.prompt_class);
    const double sig = sigmoid(params.verbosity_logits[r.prompt_class]);
    const double k = static_cast<double>(r.filler_count);

    grad[base] = k * (1.0 - sig) - (r.finished ? sig : 0.0);
    if (r.finished) {
        const auto logsm = log_softmax(params.answer_logits[r.prompt_class]);
        for (std::uint32_t v = 0; v < params.vocab_size; ++v)
            grad[base + 1 + v] = -std::exp(logsm[v]);
        grad[base + 1 + *r.answer_token] += 1.0;
    }
    return grad;
}

/// Gradient-ascent step: params + step_size * gradient, version bumped by 1.
/// A non-finite gradient entry aborts the step.
inline PolicyParams apply_update(const PolicyParams& params, const std::vector<double>& gradient,
                                 double step_size) {
    if (gradient.size() != params.flat_size())
        throw std::invalid_argument("apply_update: gradient size mismatch");
    for (double g : gradient)
        if (!std::isfinite(g)) throw std::domain_error("apply_update: non-finite gradient");

    PolicyParams next = params;
    std::size_t i = 0;
    for (std::size_t c = 0; c < next.num_classes(); ++c) {
        next.verbosity_logits[c] += step_size * gradient[i++];
        for (std::uint32_t v = 0; v < next.vocab_size; ++v)
            next.answer_logits[c][v] += step_size * gradient[i++];
    }
    next.version = params.version + 1;
    return next;
}

} // namespace driftless::toy
