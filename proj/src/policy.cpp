#include "demogen/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "demogen/errors.hpp"

namespace demogen {

KnnPolicy KnnPolicy::fit(const std::vector<Episode>& episodes, int k) {
    if (episodes.empty()) throw ValidationError("KnnPolicy::fit: no episodes");
    if (k < 1) throw ValidationError("KnnPolicy::fit: k must be >= 1");

    KnnPolicy policy;
    policy.k_ = k;
    policy.dim_ = episodes.front().steps.empty() ? 0 : episodes.front().steps.front().obs.size();
    if (policy.dim_ == 0) throw ValidationError("KnnPolicy::fit: empty observations");

    std::size_t total = 0;
    for (const auto& ep : episodes) total += ep.steps.size();
    policy.data_.reserve(total * policy.dim_);
    policy.actions_.reserve(total);

    for (const auto& ep : episodes) {
        for (const auto& step : ep.steps) {
            if (step.obs.size() != policy.dim_)
                throw ValidationError("KnnPolicy::fit: observation layout mismatch in episode " +
                                      ep.episode_id);
            policy.data_.insert(policy.data_.end(), step.obs.begin(), step.obs.end());
            policy.actions_.push_back(step.action);
        }
    }

    // weight = 1/std per dimension, population std over all pairs
    const std::size_t n = policy.actions_.size();
    policy.weights_.assign(policy.dim_, 0.0);
    std::vector<double> mean(policy.dim_, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < policy.dim_; ++d) mean[d] += policy.data_[i * policy.dim_ + d];
    for (std::size_t d = 0; d < policy.dim_; ++d) mean[d] /= static_cast<double>(n);
    std::vector<double> var(policy.dim_, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < policy.dim_; ++d) {
            const double delta = policy.data_[i * policy.dim_ + d] - mean[d];
            var[d] += delta * delta;
        }
    // weight = 1/std, with near-constant dimensions floored at 10% of the
    // largest std: dimensions excited only by action noise would otherwise
    // dominate the metric with weights two orders of magnitude above the
    // task-relevant ones
    double max_sd = 0.0;
    std::vector<double> sd(policy.dim_);
    for (std::size_t d = 0; d < policy.dim_; ++d) {
        sd[d] = std::sqrt(var[d] / static_cast<double>(n));
        max_sd = std::max(max_sd, sd[d]);
    }
    for (std::size_t d = 0; d < policy.dim_; ++d) {
        if (sd[d] <= 1e-12)
            policy.weights_[d] = 0.0;
        else
            policy.weights_[d] = 1.0 / std::max(sd[d], 0.1 * max_sd);
    }
    return policy;
}

DeltaAction KnnPolicy::act(std::span<const double> obs) const {
    if (obs.size() != dim_) throw ValidationError("KnnPolicy::act: observation layout mismatch");
    const std::size_t n = actions_.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);

    // brute-force scan with early abandoning against the current kth-best
    std::vector<std::pair<double, std::size_t>> best;  // (dist2, index), worst first
    best.reserve(k + 1);
    std::vector<double> wq(dim_);
    for (std::size_t d = 0; d < dim_; ++d) wq[d] = weights_[d] * weights_[d];

    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &data_[i * dim_];
        const double bound =
            best.size() == k ? best.front().first : std::numeric_limits<double>::infinity();
        double dist2 = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            const double delta = row[d] - obs[d];
            dist2 += wq[d] * delta * delta;
            if (dist2 >= bound) break;
        }
        if (dist2 >= bound) continue;  // strict <: equal distances keep the earlier index
        best.emplace_back(dist2, i);
        std::push_heap(best.begin(), best.end());
        if (best.size() > k) {
            std::pop_heap(best.begin(), best.end());
            best.pop_back();
        }
    }

    DeltaAction out;
    double grip_sum = 0.0;
    for (const auto& [dist2, idx] : best) {
        const DeltaAction& a = actions_[idx];
        out.d_pos = out.d_pos + a.d_pos;
        out.d_rot = out.d_rot + a.d_rot;
        grip_sum += a.gripper;
    }
    const double inv = 1.0 / static_cast<double>(best.size());
    out.d_pos = out.d_pos * inv;
    out.d_rot = out.d_rot * inv;
    out.gripper = grip_sum >= 0.0 ? 1.0 : -1.0;
    return out;
}

double evaluate(const KnnPolicy& policy, const TaskDef& def, const std::string& variant,
                const ControllerProfile& profile, int n_rollouts, std::uint64_t seed) {
    if (n_rollouts < 1) throw ValidationError("evaluate: n_rollouts must be >= 1");
    const ResetDistribution& dist = def.variant(variant);
    int successes = 0;
    for (int r = 0; r < n_rollouts; ++r) {
        RandomStream rng(seed + static_cast<std::uint64_t>(r));
        WorldState state;
        try {
            state = reset(def.task, dist, rng);
        } catch (const ResetError&) {
            continue;  // counted as a failed rollout
        }
        for (int t = 0; t < def.task.horizon; ++t) {
            const std::vector<double> obs = observe(state);
            state = step(state, policy.act(obs), profile);
            if (check_success(def.task, state)) {
                ++successes;
                break;
            }
        }
    }
    return static_cast<double>(successes) / static_cast<double>(n_rollouts);
}

}  // namespace demogen
