#pragma once

// The generation engine: per subtask, observe the reference object, pick a
// source segment, rigidly transform it to the observed pose, bridge from
// the current ee pose with an interpolation segment, execute step by step
// under action noise, and keep the episode only when the task check
// passes at the end.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "demogen/datastore.hpp"
#include "demogen/segmenting.hpp"
#include "demogen/world.hpp"

namespace demogen {

struct PoseNoise {
    double pos = 0.0;  // uniform bound per translation component (m)
    double rot = 0.0;  // uniform bound on top-down rotation (rad)
};

enum class SelectionStrategy { kRandom, kNearestNeighbor };

struct GenConfig {
    double sigma = 0.05;  // dimensionless; scales per-component normal draws
                          // by the profile per-tick limits
    int n_interp = 5;
    int n_fixed = 0;
    SelectionStrategy strategy = SelectionStrategy::kRandom;
    int nn_k = 3;
    bool per_subtask = false;
    int max_attempts = 100000;
    std::optional<PoseNoise> pose_noise;
};

void validate_config(const GenConfig& cfg);

// Chooses the source demo for subtask idx. With per_subtask false and a
// committed demo, returns it unchanged. Random: uniform over all demos.
// Nearest-neighbor: uniform over the nn_k demos whose recorded initial
// object pose is closest to obj_pose (ties keep input order).
std::size_t select_segment(const std::vector<SegmentedDemo>& demos, int idx, const Pose& obj_pose,
                           const GenConfig& cfg, std::optional<std::size_t> committed,
                           RandomStream& rng);

// Perturbs the six motion components by sigma * N(0,1), scaled by the
// profile limits; the gripper is untouched. Translation components clamp
// to +-max_step_pos and |d_rot| stays under pi.
DeltaAction add_noise(const DeltaAction& action, double sigma, RandomStream& rng,
                      const ControllerProfile& profile);

// Uniform perturbation of an observed object pose (position per component,
// top-down rotation).
Pose perturb_pose(const Pose& pose, const PoseNoise& noise, RandomStream& rng);

struct AttemptResult {
    std::optional<Episode> episode;          // set on success
    std::vector<std::string> sources_used;   // per subtask reached
};

// One generation attempt, fully determined by the seed. Reset exhaustion
// and non-finite trajectories count as failures, not errors.
AttemptResult generate_attempt(const TaskDef& def, const std::string& variant,
                               const std::vector<SegmentedDemo>& demos, const GenConfig& cfg,
                               const ControllerProfile& profile, std::uint64_t seed);

// Convenience wrapper returning just the episode.
std::optional<Episode> generate_one(const TaskDef& def, const std::string& variant,
                                    const std::vector<SegmentedDemo>& demos, const GenConfig& cfg,
                                    const ControllerProfile& profile, std::uint64_t seed);

// Runs attempts seeded base_seed + attempt index, in order, until
// n_success successes or cfg.max_attempts; output is ordered by attempt
// index and is byte-identical for any jobs count. The report is flagged
// incomplete when the budget runs out first.
std::pair<std::vector<Episode>, GenReport> generate_dataset(
    const TaskDef& def, const std::string& variant, const std::vector<SegmentedDemo>& demos,
    const GenConfig& cfg, const ControllerProfile& profile, int n_success,
    std::uint64_t base_seed, int jobs = 1);

}  // namespace demogen
