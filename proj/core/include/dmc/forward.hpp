#pragma once

#include <cstdint>

#include "dmc/distribution.hpp"
#include "dmc/model.hpp"

namespace dmc {

struct ForwardOptions {
    std::uint64_t max_iterations = 10'000'000;
    // Frontier cells below this mass are dropped; everything dropped is
    // charged against the accuracy budget so the certified bound stays valid.
    double prune_threshold = 1e-15;
};

struct ForwardResult {
    SparseDist dist;
    // p_notreached - p_inf at termination, plus all pruned mass: the
    // certified bound on how far any CDF value can be off.
    double residual = 0.0;
    double pruned = 0.0;
    std::uint64_t iterations = 0;
};

// Exact forward generation of the reward-to-target distribution, carried to
// accuracy epsilon. States in non-target bottom SCCs feed the mass at
// infinity; target states stop accumulating and keep their reward.
ForwardResult forward_distribution(const Dtmc& dtmc, const StateRewards& rewards,
                                   const StateSet& target, double epsilon,
                                   const ForwardOptions& options = {});

} // namespace dmc
