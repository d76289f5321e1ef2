#include "demogen/demonstrator.hpp"

#include <cmath>

#include "demogen/errors.hpp"
#include "demogen/log.hpp"

namespace demogen {

namespace {

constexpr double kApproachHeight = 0.08;  // above object tops
constexpr double kCarryHeight = 0.16;     // clears the tallest receptacle (peg top + socket)
constexpr double kExpertVelScale = 0.4;   // fraction of the profile per-tick limits
constexpr double kJitter = 0.01;
constexpr double kArriveTol = 1e-9;

struct Waypoint {
    Pose pose;
    double gripper = -1.0;
    int hold = 0;       // extra dwell ticks after arrival
    bool precise = false;  // exempt from sloppy jitter
};

Pose yaw_pose(double yaw, const Vec3& t) {
    return Pose(Quat::from_axis_angle({0, 0, 1}, yaw), t);
}

void apply_quality(std::vector<Waypoint>& wps, const std::string& quality, RandomStream& rng,
                   std::size_t redundant_after) {
    if (quality == "clean") return;
    if (quality != "sloppy") throw ValidationError("unknown quality profile '" + quality + "'");
    if (redundant_after + 1 < wps.size()) {
        const Waypoint& a = wps[redundant_after];
        const Waypoint& b = wps[redundant_after + 1];
        Waypoint mid = a;
        mid.pose = Pose(slerp(a.pose.rotation, b.pose.rotation, 0.5),
                        (a.pose.translation + b.pose.translation) * 0.5);
        mid.hold = 0;
        wps.insert(wps.begin() + static_cast<std::ptrdiff_t>(redundant_after) + 1, mid);
    }
    for (auto& wp : wps) {
        if (wp.precise) continue;
        wp.pose.translation.x += rng.uniform(-kJitter, kJitter);
        wp.pose.translation.y += rng.uniform(-kJitter, kJitter);
        wp.pose.translation.z += rng.uniform(-kJitter, kJitter);
    }
}

// Grasp plan: approach above the object, descend to its center, close.
std::vector<Waypoint> plan_grasp(const ObjectState& obj, const std::string& quality,
                                 RandomStream& rng) {
    const double yaw = obj.pose.yaw();
    const Vec3 c = obj.pose.translation;
    std::vector<Waypoint> wps;
    wps.push_back({yaw_pose(yaw, {c.x, c.y, top_height(obj) + kApproachHeight}), -1.0, 0, false});
    wps.push_back({yaw_pose(yaw, c), -1.0, 0, false});
    wps.push_back({wps.back().pose, +1.0, 3, false});
    apply_quality(wps, quality, rng, 0);
    return wps;
}

// Placement plan: lift, traverse at carry height, descend so the carried
// object rests on the goal, open. The ee target accounts for the actual
// grasp offset so off-center grasps still place the object exactly.
std::vector<Waypoint> plan_place(const WorldState& state, const ObjectState& carried,
                                 const Vec3& goal_center, double goal_yaw,
                                 const std::string& quality, RandomStream& rng) {
    const Pose rel = compose(inverse(state.ee_pose), carried.pose);
    const Quat target_rot = Quat::from_axis_angle({0, 0, 1}, goal_yaw);
    const auto ee_for = [&](const Vec3& carried_center) {
        return Pose(target_rot, carried_center - target_rot.rotate(rel.translation));
    };
    const Vec3 ee_now = state.ee_pose.translation;
    std::vector<Waypoint> wps;
    wps.push_back({Pose(state.ee_pose.rotation, {ee_now.x, ee_now.y, kCarryHeight}), +1.0, 0, false});
    wps.push_back({ee_for({goal_center.x, goal_center.y, kCarryHeight}), +1.0, 0, false});
    wps.push_back({ee_for(goal_center), +1.0, 2, true});
    wps.push_back({wps.back().pose, -1.0, 1, true});
    apply_quality(wps, quality, rng, 0);
    return wps;
}

std::vector<Waypoint> plan_subtask(const TaskSpec& task, const WorldState& state, int idx,
                                   const std::string& quality, RandomStream& rng) {
    const SubtaskSpec& st = task.subtasks[idx];
    const ObjectState* ref = state.find_object(st.reference_object);
    if (ref == nullptr) throw ValidationError("reference object missing from state");
    if (st.end_metric == EndMetric::kGrasped) return plan_grasp(*ref, quality, rng);

    const ObjectState* carried = state.find_object(carried_object(task, idx));
    if (carried == nullptr || state.attached_object != carried->id)
        throw ExpertError("expert reached subtask " + std::to_string(idx) +
                          " without holding the carried object");
    double carried_half = carried->param;
    if (carried->geom == GeometryClass::kSocket) carried_half = kSocketHalfThickness;
    const Vec3 goal{ref->pose.translation.x, ref->pose.translation.y,
                    top_height(*ref) + carried_half};
    return plan_place(state, *carried, goal, ref->pose.yaw(), quality, rng);
}

// One clamped tick toward the waypoint at expert speed.
Pose next_pose_toward(const Pose& cur, const Pose& goal, const ControllerProfile& profile) {
    const double vmax = kExpertVelScale * profile.max_step_pos;
    const double wmax = kExpertVelScale * profile.max_step_rot;
    Vec3 dp = goal.translation - cur.translation;
    const double dist = dp.norm();
    if (dist > vmax) dp = dp * (vmax / dist);
    const Vec3 rel = quat_to_axis_angle(goal.rotation * cur.rotation.conjugate());
    const double ang = rel.norm();
    Quat q = goal.rotation;
    if (ang > wmax) q = axis_angle_to_quat(rel * (wmax / ang)) * cur.rotation;
    return Pose(q, cur.translation + dp);
}

bool arrived(const Pose& cur, const Pose& goal) {
    return (goal.translation - cur.translation).norm() < kArriveTol &&
           quat_to_axis_angle(goal.rotation * cur.rotation.conjugate()).norm() < kArriveTol;
}

}  // namespace

Episode demonstrate(const TaskSpec& task, const WorldState& start,
                    const ControllerProfile& profile, const std::string& quality,
                    RandomStream& rng) {
    Episode ep;
    ep.task = task.name;
    ep.profile = profile.name;
    ep.quality = quality;
    ep.init_state = start;

    WorldState state = start;
    const int n_subtasks = static_cast<int>(task.subtasks.size());
    int scan = 0;  // next subtask whose end metric we are watching for

    const auto emit = [&](const Pose& target, double gripper) {
        DeltaAction a = extract_delta(state.ee_pose, target);
        a.gripper = gripper;
        EpisodeStep step;
        step.obs = observe(state);
        step.action = a;
        step.target = apply_delta(state.ee_pose, a);
        state = demogen::step(state, a, profile);
        ep.steps.push_back(std::move(step));
        if (scan < n_subtasks && subtask_end(task, scan, state)) {
            ep.subtask_boundaries.push_back(static_cast<int>(ep.steps.size()));
            ++scan;
        }
        if (state.step_count > task.horizon)
            throw ExpertError("expert exceeded horizon on task '" + task.name + "'");
    };

    for (int idx = 0; idx < n_subtasks && scan < n_subtasks; ++idx) {
        const auto wps = plan_subtask(task, state, idx, quality, rng);
        for (const auto& wp : wps) {
            while (!arrived(state.ee_pose, wp.pose)) {
                emit(next_pose_toward(state.ee_pose, wp.pose, profile), wp.gripper);
                if (scan >= n_subtasks) break;
            }
            for (int h = 0; h < wp.hold && scan < n_subtasks; ++h) emit(wp.pose, wp.gripper);
            if (scan >= n_subtasks) break;
        }
        if (scan <= idx)
            throw ExpertError("subtask " + std::to_string(idx) + " end metric never fired on '" +
                              task.name + "'");
    }

    if (!check_success(task, state))
        throw ExpertError("expert finished without task success on '" + task.name + "'");
    ep.success = true;
    return ep;
}

std::vector<Episode> collect_source(const TaskDef& def, const std::string& variant, int n,
                                    const std::string& quality, std::uint64_t seed,
                                    const ControllerProfile& profile) {
    if (n < 1) throw ValidationError("collect_source: n must be >= 1");
    const ResetDistribution& dist = def.variant(variant);
    std::vector<Episode> episodes;
    episodes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::uint64_t ep_seed = seed + static_cast<std::uint64_t>(i);
        Episode ep;
        bool ok = false;
        std::string last_error;
        for (int retry = 0; retry < 3 && !ok; ++retry) {
            RandomStream rng(retry == 0 ? ep_seed : derive_seed(ep_seed, 900 + retry));
            try {
                WorldState start = reset(def.task, dist, rng);
                ep = demonstrate(def.task, start, profile, quality, rng);
                ok = true;
            } catch (const ResetError& e) {
                last_error = e.what();
            } catch (const ExpertError& e) {
                last_error = e.what();
            }
        }
        if (!ok)
            throw ExpertError("collect_source: episode " + std::to_string(i) +
                              " failed after 3 retries: " + last_error);
        ep.variant = variant;
        ep.seed = ep_seed;
        ep.episode_id = def.task.name + "_" + variant + "_src" + std::to_string(ep_seed);
        episodes.push_back(std::move(ep));
        log_debug("collected source episode " + episodes.back().episode_id + " (" +
                  std::to_string(episodes.back().steps.size()) + " steps)");
    }
    return episodes;
}

}  // namespace demogen
