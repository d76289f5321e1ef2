#pragma once

// Nonparametric nearest-neighbor imitation policy over low-dim
// observations, plus a closed-loop rollout evaluator. Deliberately
// dependency-free and deterministic; stands in for neural behavior
// cloning when checking that generated data actually trains better
// agents than the source demos alone.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "demogen/datastore.hpp"
#include "demogen/world.hpp"

namespace demogen {

class KnnPolicy {
public:
    // Stores every (observation, action) pair; per-dimension weights are
    // 1/std over the training set (zero-variance dimensions get weight 0).
    // Throws ValidationError on empty input or layout mismatch.
    static KnnPolicy fit(const std::vector<Episode>& episodes, int k);

    // Weighted-Euclidean k nearest neighbors; motion components averaged,
    // gripper is the sign of the mean (>= 0 maps to +1). Distance ties
    // break toward the lower training index.
    DeltaAction act(std::span<const double> obs) const;

    std::size_t pair_count() const { return actions_.size(); }
    std::size_t dim() const { return dim_; }
    int k() const { return k_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    KnnPolicy() = default;

    std::size_t dim_ = 0;
    int k_ = 1;
    std::vector<double> data_;  // pair_count x dim_, row-major
    std::vector<DeltaAction> actions_;
    std::vector<double> weights_;
};

// Fraction of n_rollouts fresh resets (seeded seed + rollout index) that
// reach task success within the horizon under closed-loop control.
double evaluate(const KnnPolicy& policy, const TaskDef& def, const std::string& variant,
                const ControllerProfile& profile, int n_rollouts, std::uint64_t seed);

}  // namespace demogen
