#include "demogen/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include "demogen/errors.hpp"
#include "demogen/log.hpp"

namespace demogen {

namespace {
// Substream tags so scene randomness (reset, pose noise, selection) stays
// identical across runs that differ only in action-noise settings.
constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
}  // namespace

void validate_config(const GenConfig& cfg) {
    if (cfg.sigma < 0) throw ValidationError("config: sigma must be >= 0");
    if (cfg.n_interp < 0 || cfg.n_fixed < 0)
        throw ValidationError("config: interpolation counts must be >= 0");
    if (cfg.strategy == SelectionStrategy::kNearestNeighbor && cfg.nn_k < 1)
        throw ValidationError("config: nn_k must be >= 1 for nearest_neighbor selection");
    if (cfg.max_attempts < 1) throw ValidationError("config: max_attempts must be >= 1");
    if (cfg.pose_noise && (cfg.pose_noise->pos < 0 || cfg.pose_noise->rot < 0))
        throw ValidationError("config: pose noise bounds must be >= 0");
}

std::size_t select_segment(const std::vector<SegmentedDemo>& demos, int idx, const Pose& obj_pose,
                           const GenConfig& cfg, std::optional<std::size_t> committed,
                           RandomStream& rng) {
    if (demos.empty()) throw ValidationError("select_segment: no source demos");
    if (!cfg.per_subtask && committed) return *committed;
    if (cfg.strategy == SelectionStrategy::kRandom)
        return static_cast<std::size_t>(rng.uniform_index(demos.size()));

    std::vector<std::size_t> order(demos.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> dist(demos.size());
    for (std::size_t j = 0; j < demos.size(); ++j)
        dist[j] = pose_distance(obj_pose, demos[j].initial_object_poses[static_cast<std::size_t>(idx)]);
    std::stable_sort(order.begin(), order.end(),
                     [&dist](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.nn_k), demos.size());
    return order[rng.uniform_index(k)];
}

DeltaAction add_noise(const DeltaAction& action, double sigma, RandomStream& rng,
                      const ControllerProfile& profile) {
    if (sigma < 0) throw ValidationError("add_noise: sigma must be >= 0");
    if (sigma == 0) return action;
    DeltaAction out = action;
    out.d_pos.x += sigma * rng.normal() * profile.max_step_pos;
    out.d_pos.y += sigma * rng.normal() * profile.max_step_pos;
    out.d_pos.z += sigma * rng.normal() * profile.max_step_pos;
    out.d_rot.x += sigma * rng.normal() * profile.max_step_rot;
    out.d_rot.y += sigma * rng.normal() * profile.max_step_rot;
    out.d_rot.z += sigma * rng.normal() * profile.max_step_rot;
    out.d_pos.x = std::clamp(out.d_pos.x, -profile.max_step_pos, profile.max_step_pos);
    out.d_pos.y = std::clamp(out.d_pos.y, -profile.max_step_pos, profile.max_step_pos);
    out.d_pos.z = std::clamp(out.d_pos.z, -profile.max_step_pos, profile.max_step_pos);
    const double ang = out.d_rot.norm();
    constexpr double kMaxAngle = kPi * (1.0 - 1e-12);
    if (ang > kMaxAngle) out.d_rot = out.d_rot * (kMaxAngle / ang);
    return out;
}

Pose perturb_pose(const Pose& pose, const PoseNoise& noise, RandomStream& rng) {
    const Vec3 dt{rng.uniform(-noise.pos, noise.pos), rng.uniform(-noise.pos, noise.pos),
                  rng.uniform(-noise.pos, noise.pos)};
    const double dyaw = rng.uniform(-noise.rot, noise.rot);
    return Pose(Quat::from_axis_angle({0, 0, 1}, dyaw) * pose.rotation, pose.translation + dt);
}

AttemptResult generate_attempt(const TaskDef& def, const std::string& variant,
                               const std::vector<SegmentedDemo>& demos, const GenConfig& cfg,
                               const ControllerProfile& profile, std::uint64_t seed) {
    validate_config(cfg);
    if (demos.empty()) throw ValidationError("generate: no source demos");
    const TaskSpec& task = def.task;
    const int n_subtasks = static_cast<int>(task.subtasks.size());
    for (const auto& d : demos)
        if (static_cast<int>(d.segments.size()) != n_subtasks)
            throw ValidationError("generate: source demo " + d.source_episode_id +
                                  " was parsed for a different task");

    RandomStream scene_rng(derive_seed(seed, kSceneStream));
    RandomStream noise_rng(derive_seed(seed, kNoiseStream));

    AttemptResult result;
    WorldState state;
    try {
        state = reset(task, def.variant(variant), scene_rng);
    } catch (const ResetError&) {
        return result;  // counted as a failed attempt
    }

    Episode ep;
    ep.task = task.name;
    ep.variant = variant;
    ep.seed = seed;
    ep.profile = profile.name;
    ep.quality = "generated";
    ep.init_state = state;
    ep.episode_id = task.name + "_" + variant + "_gen" + std::to_string(seed);

    std::optional<std::size_t> committed;
    bool aborted = false;
    for (int i = 0; i < n_subtasks && !aborted; ++i) {
        const int obj_idx = task.object_index(task.subtasks[i].reference_object);
        Pose obj_pose = state.objects[static_cast<std::size_t>(obj_idx)].pose;
        if (cfg.pose_noise) obj_pose = perturb_pose(obj_pose, *cfg.pose_noise, scene_rng);

        const std::size_t pick = select_segment(demos, i, obj_pose, cfg, committed, scene_rng);
        if (!cfg.per_subtask) committed = pick;
        const SegmentedDemo& demo = demos[pick];
        result.sources_used.push_back(demo.source_episode_id);
        ep.source_ids.push_back(demo.source_episode_id);

        const PoseSegment seg = transform_segment(demo.segments[static_cast<std::size_t>(i)],
                                                  demo.initial_object_poses[static_cast<std::size_t>(i)],
                                                  obj_pose);
        const PoseSegment bridge =
            interpolate(state.ee_pose, seg.targets.front(), cfg.n_interp, cfg.n_fixed,
                        seg.grippers.front());

        const auto execute = [&](const PoseSegment& s) {
            for (std::size_t t = 0; t < s.targets.size(); ++t) {
                DeltaAction a = extract_delta(state.ee_pose, s.targets[t]);
                a.gripper = s.grippers[t];
                a = add_noise(a, cfg.sigma, noise_rng, profile);
                EpisodeStep step;
                step.obs = observe(state);
                step.action = a;
                step.target = apply_delta(state.ee_pose, a);
                try {
                    state = demogen::step(state, a, profile);
                } catch (const std::invalid_argument&) {
                    aborted = true;  // corrupted trajectory
                    return;
                }
                ep.steps.push_back(std::move(step));
                if (state.step_count > task.horizon) {
                    aborted = true;
                    return;
                }
            }
        };
        execute(bridge);
        if (!aborted) execute(seg);
        ep.subtask_boundaries.push_back(static_cast<int>(ep.steps.size()));
    }

    if (aborted || !check_success(task, state)) return result;
    ep.success = true;
    result.episode = std::move(ep);
    return result;
}

std::optional<Episode> generate_one(const TaskDef& def, const std::string& variant,
                                    const std::vector<SegmentedDemo>& demos, const GenConfig& cfg,
                                    const ControllerProfile& profile, std::uint64_t seed) {
    return generate_attempt(def, variant, demos, cfg, profile, seed).episode;
}

std::pair<std::vector<Episode>, GenReport> generate_dataset(
    const TaskDef& def, const std::string& variant, const std::vector<SegmentedDemo>& demos,
    const GenConfig& cfg, const ControllerProfile& profile, int n_success,
    std::uint64_t base_seed, int jobs) {
    if (n_success < 1) throw ValidationError("generate_dataset: n_success must be >= 1");
    if (jobs < 1) jobs = 1;
    validate_config(cfg);

    std::vector<Episode> episodes;
    episodes.reserve(static_cast<std::size_t>(n_success));
    GenReport report;

    int next_attempt = 0;
    while (report.successes < n_success && next_attempt < cfg.max_attempts) {
        // One wave of independent attempts; results are folded in attempt
        // order, so any jobs count reproduces the serial run exactly.
        const int wave = std::min(jobs, cfg.max_attempts - next_attempt);
        std::vector<AttemptResult> results(static_cast<std::size_t>(wave));
        if (wave == 1) {
            results[0] = generate_attempt(def, variant, demos, cfg, profile,
                                          base_seed + static_cast<std::uint64_t>(next_attempt));
        } else {
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(wave));
            for (int w = 0; w < wave; ++w)
                threads.emplace_back([&, w] {
                    results[static_cast<std::size_t>(w)] =
                        generate_attempt(def, variant, demos, cfg, profile,
                                         base_seed + static_cast<std::uint64_t>(next_attempt + w));
                });
            for (auto& t : threads) t.join();
        }
        for (int w = 0; w < wave && report.successes < n_success; ++w) {
            AttemptResult& r = results[static_cast<std::size_t>(w)];
            ++report.attempts;
            if (!r.sources_used.empty())
                ++report.per_source_attempts[r.sources_used.front()];
            else
                ++report.per_source_attempts["(reset-failure)"];
            if (r.episode) {
                ++report.successes;
                ++report.per_source_histogram[r.sources_used.front()];
                episodes.push_back(std::move(*r.episode));
            }
        }
        next_attempt += wave;
        log_debug("generate: " + std::to_string(report.successes) + "/" +
                  std::to_string(n_success) + " after " + std::to_string(report.attempts) +
                  " attempts");
    }

    report.complete = report.successes >= n_success;
    report.dgr = report.attempts > 0
                     ? static_cast<double>(report.successes) / static_cast<double>(report.attempts)
                     : 0.0;
    log_info("generate: task=" + def.task.name + " variant=" + variant + " dgr=" +
             std::to_string(report.dgr) + " (" + std::to_string(report.successes) + "/" +
             std::to_string(report.attempts) + ")");
    return {std::move(episodes), std::move(report)};
}

}  // namespace demogen
