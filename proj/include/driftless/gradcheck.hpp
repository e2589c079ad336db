#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "driftless/gspo.hpp"
#include "driftless/policy.hpp"
#include "driftless/rng.hpp"

/// Central finite differences against the analytic objective gradient. Used
/// by both the test suite and the grad-check subcommand.
namespace driftless::gradcheck {

constexpr double kTolerance = 1e-4;

struct Result {
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    std::size_t batches = 0;
};

inline std::vector<double> finite_diff_gradient(const toy::PolicyParams& params,
                                                std::vector<gspo::GroupBatch>& groups,
                                                const gspo::ClipConfig& clip, double h = 1e-6) {
    auto flat = params.flatten();
    std::vector<double> grad(flat.size());
    toy::PolicyParams probe = params;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = flat[i];
        flat[i] = saved + h;
        probe.assign_flat(flat);
        const double above = gspo::eval_objective(probe, groups, clip);
        flat[i] = saved - h;
        probe.assign_flat(flat);
        const double below = gspo::eval_objective(probe, groups, clip);
        flat[i] = saved;
        grad[i] = (above - below) / (2.0 * h);
    }
    probe.assign_flat(flat);
    return grad;
}

namespace detail {

inline toy::PolicyParams random_params(std::uint32_t classes, std::uint32_t vocab, Rng& rng) {
    auto p = toy::PolicyParams::make(classes, vocab, 0.0);
    auto flat = p.flatten();
    for (auto& v : flat) v = rng.uniform() * 2.0 - 1.0;
    p.assign_flat(flat);
    return p;
}

/// One random off-policy batch: rollouts generated under perturbed behavior
/// parameters, shaped rewards drawn from a small discrete set.
inline std::vector<gspo::GroupBatch> random_batch(const toy::PolicyParams& current, Rng& rng,
                                                  std::uint32_t max_len) {
    toy::PolicyParams behavior = current;
    auto flat = behavior.flatten();
    for (auto& v : flat) v += (rng.uniform() * 2.0 - 1.0) * 0.05;
    behavior.assign_flat(flat);

    const auto all_equal = [](const std::vector<double>& v) {
        for (double r : v)
            if (r != v.front()) return false;
        return true;
    };

    std::vector<gspo::GroupBatch> groups(2);
    for (auto& g : groups) {
        const auto cls = static_cast<std::uint32_t>(rng.uniform_int(current.num_classes()));
        for (int i = 0; i < 6; ++i) g.rollouts.push_back(toy::generate(behavior, cls, max_len, rng));
        do {
            g.shaped_rewards.clear();
            for (std::size_t i = 0; i < g.rollouts.size(); ++i)
                g.shaped_rewards.push_back(0.25 * static_cast<double>(rng.uniform_int(5)));
        } while (all_equal(g.shaped_rewards));
        g.advantages = gspo::group_advantages(g.shaped_rewards);
    }
    return groups;
}

/// FD probes must not flip a clip branch, so reject batches with a ratio
/// within 1e-4 of either bound.
inline bool near_clip_bound(const toy::PolicyParams& current, std::vector<gspo::GroupBatch>& groups,
                            const gspo::ClipConfig& clip) {
    gspo::eval_objective(current, groups, clip);
    for (const auto& g : groups)
        for (double s : g.ratios)
            if (std::abs(s - (1.0 - clip.eps_low)) < 1e-4 ||
                std::abs(s - (1.0 + clip.eps_high)) < 1e-4)
                return true;
    return false;
}

} // namespace detail

/// Compares objective_gradient with central differences over n_batches random
/// off-policy batches. corrupt_gradient deliberately damages the analytic
/// gradient, as a negative control for the harness itself.
inline Result check_objective_gradient(std::uint64_t seed, std::size_t n_batches,
                                       bool corrupt_gradient = false) {
    Rng rng(seed);
    const gspo::ClipConfig clip{3e-3, 4e-3};
    Result res;
    res.batches = n_batches;

    for (std::size_t b = 0; b < n_batches; ++b) {
        const auto params = detail::random_params(2, 16, rng);
        std::vector<gspo::GroupBatch> groups;
        int tries = 0;
        do {
            groups = detail::random_batch(params, rng, 12);
        } while (detail::near_clip_bound(params, groups, clip) && ++tries < 50);

        auto analytic = gspo::objective_gradient(params, groups, clip);
        if (corrupt_gradient)
            for (auto& v : analytic) v = -v - 0.05;
        const auto fd = finite_diff_gradient(params, groups, clip);

        for (std::size_t i = 0; i < fd.size(); ++i) {
            const double denom = std::max(std::abs(fd[i]), 1e-3);
            const double rel = std::abs(analytic[i] - fd[i]) / denom;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_index = i;
            }
        }
    }
    return res;
}

} // namespace driftless::gradcheck
