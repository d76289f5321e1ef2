#include "demogen/world.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "demogen/errors.hpp"

namespace demogen {

namespace {

constexpr double kSocketRim = 0.01;       // socket outer radius = hole radius + rim
constexpr double kBoardHalfSize = 0.07;
constexpr double kPlaceTolSlack = 0.005;  // stacking tolerance = bottom half-extent + slack
constexpr double kPlaceZTol = 0.01;
constexpr int kMaxResamples = 100;

const Pose kHomePose = Pose::translate(0.0, 0.0, 0.30);

double horizontal_distance(const Pose& a, const Pose& b) {
    const double dx = a.translation.x - b.translation.x;
    const double dy = a.translation.y - b.translation.y;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

const ObjectSpec* TaskSpec::find_object(const std::string& id) const {
    for (const auto& o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

int TaskSpec::object_index(const std::string& id) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i].id == id) return static_cast<int>(i);
    return -1;
}

const ObjectState* WorldState::find_object(const std::string& id) const {
    for (const auto& o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

const ResetDistribution& TaskDef::variant(const std::string& name) const {
    auto it = variants.find(name);
    if (it == variants.end())
        throw ValidationError("task '" + task.name + "' has no variant '" + name + "'");
    return it->second;
}

Pose home_pose() { return kHomePose; }

double rest_height(GeometryClass geom, double param) {
    switch (geom) {
        case GeometryClass::kBlock: return param;
        case GeometryClass::kSocket: return kSocketHalfThickness;
        case GeometryClass::kPegBoard: return kBoardHalfThickness;
    }
    return param;
}

double top_height(const ObjectState& obj) {
    switch (obj.geom) {
        case GeometryClass::kBlock: return obj.pose.translation.z + obj.param;
        case GeometryClass::kSocket: return obj.pose.translation.z + kSocketHalfThickness;
        case GeometryClass::kPegBoard: return obj.pose.translation.z + kBoardHalfThickness;
    }
    return obj.pose.translation.z + obj.param;
}

double overlap_radius(GeometryClass geom, double param) {
    switch (geom) {
        case GeometryClass::kBlock: return param;
        case GeometryClass::kSocket: return param + kSocketRim;
        case GeometryClass::kPegBoard: return kBoardHalfSize;
    }
    return param;
}

void restore_geometry(WorldState& state, const TaskSpec& task) {
    for (auto& obj : state.objects) {
        const ObjectSpec* spec = task.find_object(obj.id);
        if (spec != nullptr) obj.geom = spec->geom;
    }
}

void validate_task(const TaskSpec& task) {
    if (task.objects.empty()) throw ValidationError("task '" + task.name + "': no objects");
    if (task.subtasks.empty()) throw ValidationError("task '" + task.name + "': no subtasks");
    if (task.horizon <= 0)
        throw ValidationError("task '" + task.name + "': horizon must be positive");
    if (task.success_check != "stack" && task.success_check != "stack_three" &&
        task.success_check != "peg_insert")
        throw ValidationError("task '" + task.name + "': unknown success check '" +
                              task.success_check + "'");
    for (const auto& obj : task.objects)
        if (obj.param <= 0)
            throw ValidationError("task '" + task.name + "': object '" + obj.id +
                                  "' parameter must be positive");
    for (std::size_t i = 0; i < task.subtasks.size(); ++i) {
        const SubtaskSpec& st = task.subtasks[i];
        if (task.find_object(st.reference_object) == nullptr)
            throw ValidationError("task '" + task.name + "': subtask " + std::to_string(i) +
                                  " references unknown object '" + st.reference_object + "'");
        if (st.end_metric == EndMetric::kPlacedOn || st.end_metric == EndMetric::kInserted) {
            bool found = false;
            for (std::size_t j = 0; j < i; ++j)
                if (task.subtasks[j].end_metric == EndMetric::kGrasped) found = true;
            if (!found)
                throw ValidationError("task '" + task.name + "': subtask " + std::to_string(i) +
                                      " places/inserts with no preceding grasp");
        }
    }
}

const std::string& carried_object(const TaskSpec& task, int idx) {
    for (int j = idx - 1; j >= 0; --j)
        if (task.subtasks[j].end_metric == EndMetric::kGrasped)
            return task.subtasks[j].reference_object;
    throw ValidationError("task '" + task.name + "': subtask " + std::to_string(idx) +
                          " has no preceding grasp");
}

WorldState reset(const TaskSpec& task, const ResetDistribution& dist, RandomStream& rng) {
    for (const auto& obj : task.objects) {
        const auto it = dist.regions.find(obj.id);
        if (it == dist.regions.end())
            throw ValidationError("reset distribution missing region for object '" + obj.id + "'");
        const ResetRegion& r = it->second;
        if (r.x_lo > r.x_hi || r.y_lo > r.y_hi || r.theta_lo > r.theta_hi ||
            r.scale_lo > r.scale_hi)
            throw ValidationError("reset region for '" + obj.id + "' is not well-ordered");
    }

    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        WorldState state;
        state.ee_pose = kHomePose;
        state.objects.reserve(task.objects.size());
        for (const auto& spec : task.objects) {
            const ResetRegion& r = dist.regions.at(spec.id);
            const double x = rng.uniform(r.x_lo, r.x_hi);
            const double y = rng.uniform(r.y_lo, r.y_hi);
            const double theta = rng.uniform(r.theta_lo, r.theta_hi);
            const double drawn = rng.uniform(r.scale_lo, r.scale_hi);
            const double scale = (r.scale_lo == 0.0 && r.scale_hi == 0.0) ? spec.param : drawn;
            ObjectState obj;
            obj.id = spec.id;
            obj.geom = spec.geom;
            obj.param = scale;
            obj.pose = Pose(Quat::from_axis_angle({0, 0, 1}, theta),
                            {x, y, rest_height(spec.geom, scale)});
            state.objects.push_back(obj);
        }
        bool overlap = false;
        for (std::size_t i = 0; i < state.objects.size() && !overlap; ++i)
            for (std::size_t j = i + 1; j < state.objects.size() && !overlap; ++j) {
                const double ri = overlap_radius(state.objects[i].geom, state.objects[i].param);
                const double rj = overlap_radius(state.objects[j].geom, state.objects[j].param);
                if (horizontal_distance(state.objects[i].pose, state.objects[j].pose) < ri + rj)
                    overlap = true;
            }
        if (!overlap) return state;
    }
    throw ResetError("reset for task '" + task.name + "' exhausted " +
                     std::to_string(kMaxResamples) + " resamples");
}

namespace {

// Settle height for a just-released object: receptacle if a socket sits
// over a peg, top of a block it was set down on, else the table.
double settle_height(const WorldState& state, const ObjectState& obj) {
    if (obj.geom == GeometryClass::kSocket) {
        for (const auto& other : state.objects) {
            if (other.id == obj.id || other.geom != GeometryClass::kPegBoard) continue;
            const double clearance = obj.param - other.param;  // hole radius - peg radius
            if (clearance > 0 && horizontal_distance(obj.pose, other.pose) <= clearance)
                return top_height(other) + kSocketHalfThickness;
        }
        return kSocketHalfThickness;
    }
    if (obj.geom == GeometryClass::kBlock) {
        double best = obj.param;  // table
        for (const auto& other : state.objects) {
            if (other.id == obj.id || other.geom != GeometryClass::kBlock) continue;
            if (horizontal_distance(obj.pose, other.pose) <= other.param + kPlaceTolSlack)
                best = std::max(best, top_height(other) + obj.param);
        }
        return best;
    }
    return rest_height(obj.geom, obj.param);
}

}  // namespace

WorldState step(const WorldState& state, const DeltaAction& action,
                const ControllerProfile& profile) {
    if (!action.finite()) throw std::invalid_argument("non-finite action component");

    WorldState next = state;
    const Pose target = apply_delta(state.ee_pose, action);

    // translation, clamped to max_step_pos along the straight line
    Vec3 dp = target.translation - state.ee_pose.translation;
    const double dist = dp.norm();
    if (dist > profile.max_step_pos) dp = dp * (profile.max_step_pos / dist);
    const Vec3 new_t = state.ee_pose.translation + dp;

    // rotation, clamped to max_step_rot along the relative-rotation geodesic
    const Vec3 rel = quat_to_axis_angle(target.rotation * state.ee_pose.rotation.conjugate());
    const double angle = rel.norm();
    Quat new_q = target.rotation;
    if (angle > profile.max_step_rot)
        new_q = axis_angle_to_quat(rel * (profile.max_step_rot / angle)) * state.ee_pose.rotation;
    const Pose moved(new_q, new_t);

    // attached object rides rigidly with the ee motion
    const Pose ee_motion = compose(moved, inverse(state.ee_pose));
    if (state.attached_object) {
        for (auto& obj : next.objects)
            if (obj.id == *state.attached_object) obj.pose = compose(ee_motion, obj.pose);
    }
    next.ee_pose = moved;

    // gripper: >= +0.5 close, <= -0.5 open, in between hold
    if (action.gripper >= 0.5) {
        next.gripper_closed = true;
        if (!next.attached_object) {
            const ObjectState* best = nullptr;
            double best_d = std::numeric_limits<double>::infinity();
            for (const auto& obj : next.objects) {
                if (obj.geom == GeometryClass::kPegBoard) continue;  // fixtures
                const double d = (obj.pose.translation - next.ee_pose.translation).norm();
                if (d <= profile.grasp_radius && d < best_d) {
                    best = &obj;
                    best_d = d;
                }
            }
            if (best != nullptr) next.attached_object = best->id;
        }
    } else if (action.gripper <= -0.5) {
        next.gripper_closed = false;
        if (next.attached_object) {
            for (auto& obj : next.objects)
                if (obj.id == *next.attached_object)
                    obj.pose.translation.z = settle_height(next, obj);
            next.attached_object.reset();
        }
    }

    next.step_count = state.step_count + 1;
#ifndef NDEBUG
    validate_state(next);
#endif
    return next;
}

bool placed_on(const WorldState& state, const std::string& top_id, const std::string& bottom_id) {
    const ObjectState* top = state.find_object(top_id);
    const ObjectState* bottom = state.find_object(bottom_id);
    if (top == nullptr || bottom == nullptr) return false;
    if (state.attached_object == top_id) return false;
    if (horizontal_distance(top->pose, bottom->pose) > bottom->param + kPlaceTolSlack) return false;
    const double rest = bottom->pose.translation.z + bottom->param + top->param;
    return std::abs(top->pose.translation.z - rest) <= kPlaceZTol;
}

bool inserted(const WorldState& state, const std::string& socket_id, const std::string& board_id) {
    const ObjectState* socket = state.find_object(socket_id);
    const ObjectState* board = state.find_object(board_id);
    if (socket == nullptr || board == nullptr) return false;
    if (state.attached_object == socket_id) return false;
    const double clearance = socket->param - board->param;
    if (clearance <= 0) return false;
    if (horizontal_distance(socket->pose, board->pose) > clearance) return false;
    const double rest = board->pose.translation.z + kBoardHalfThickness + kSocketHalfThickness;
    return std::abs(socket->pose.translation.z - rest) <= kPlaceZTol;
}

// Success predicates bind objects by declaration order: stack = [top,
// bottom], stack_three = [middle, bottom, top], peg_insert = [socket, board].
bool check_success(const TaskSpec& task, const WorldState& state) {
    if (task.success_check == "stack")
        return placed_on(state, task.objects[0].id, task.objects[1].id);
    if (task.success_check == "stack_three")
        return placed_on(state, task.objects[0].id, task.objects[1].id) &&
               placed_on(state, task.objects[2].id, task.objects[0].id);
    if (task.success_check == "peg_insert")
        return inserted(state, task.objects[0].id, task.objects[1].id);
    throw ValidationError("unknown success check '" + task.success_check + "'");
}

bool subtask_end(const TaskSpec& task, int idx, const WorldState& state) {
    if (idx < 0 || idx >= static_cast<int>(task.subtasks.size()))
        throw ValidationError("subtask index out of range");
    const SubtaskSpec& st = task.subtasks[idx];
    switch (st.end_metric) {
        case EndMetric::kGrasped:
            return state.attached_object == st.reference_object;
        case EndMetric::kPlacedOn:
            return placed_on(state, carried_object(task, idx), st.reference_object);
        case EndMetric::kInserted:
            return inserted(state, carried_object(task, idx), st.reference_object);
        case EndMetric::kTaskSuccess:
            return check_success(task, state);
    }
    return false;
}

std::size_t observation_size(std::size_t n_objects) { return 8 + 7 * n_objects; }

std::vector<double> observe(const WorldState& state) {
    std::vector<double> obs;
    obs.reserve(observation_size(state.objects.size()));
    const auto push_pose = [&obs](const Pose& p) {
        obs.push_back(p.translation.x);
        obs.push_back(p.translation.y);
        obs.push_back(p.translation.z);
        obs.push_back(p.rotation.w);
        obs.push_back(p.rotation.x);
        obs.push_back(p.rotation.y);
        obs.push_back(p.rotation.z);
    };
    push_pose(state.ee_pose);
    obs.push_back(state.gripper_closed ? 1.0 : 0.0);
    for (const auto& obj : state.objects) push_pose(obj.pose);
    return obs;
}

namespace {
Pose pose_at(const std::vector<double>& obs, std::size_t off) {
    return Pose(Quat{obs[off + 3], obs[off + 4], obs[off + 5], obs[off + 6]},
                Vec3{obs[off], obs[off + 1], obs[off + 2]});
}
}  // namespace

Pose observed_ee_pose(const std::vector<double>& obs) { return pose_at(obs, 0); }

bool observed_gripper_closed(const std::vector<double>& obs) { return obs[7] != 0.0; }

Pose observed_object_pose(const std::vector<double>& obs, std::size_t object_index) {
    return pose_at(obs, 8 + 7 * object_index);
}

#ifndef NDEBUG
void validate_state(const WorldState& state) {
    if (state.attached_object) {
        assert(state.gripper_closed);
        assert(state.find_object(*state.attached_object) != nullptr);
    }
    assert(std::abs(state.ee_pose.rotation.norm() - 1.0) < 1e-9);
    for (const auto& obj : state.objects)
        assert(std::abs(obj.pose.rotation.norm() - 1.0) < 1e-9);
}
#endif

}  // namespace demogen
