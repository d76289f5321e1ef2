#pragma once

// Quasi-static kinematic world: a free-flying end effector tracks pose
// targets under per-tick motion clamps, objects move only while attached
// to the closed gripper, and releases settle by snapping z to the support
// underneath. No contact dynamics, no articulation, no rendering.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "demogen/geometry.hpp"
#include "demogen/rng.hpp"

namespace demogen {

enum class GeometryClass { kBlock, kPegBoard, kSocket };

// Fixed geometry of the non-block classes (meters). Table surface is z = 0.
inline constexpr double kSocketHalfThickness = 0.01;
inline constexpr double kBoardHalfThickness = 0.01;
inline constexpr double kPegHeight = 0.08;

// Object declaration inside a task. `param` is the one scale parameter of
// the geometry class: block half-extent, peg radius, or socket hole radius.
struct ObjectSpec {
    std::string id;
    GeometryClass geom = GeometryClass::kBlock;
    double param = 0.02;
};

enum class EndMetric { kGrasped, kPlacedOn, kInserted, kTaskSuccess };

struct SubtaskSpec {
    std::string reference_object;
    EndMetric end_metric = EndMetric::kGrasped;
};

struct TaskSpec {
    std::string name;
    std::vector<ObjectSpec> objects;
    std::vector<SubtaskSpec> subtasks;
    std::string success_check;  // registered predicate identifier
    int horizon = 400;

    const ObjectSpec* find_object(const std::string& id) const;
    int object_index(const std::string& id) const;  // -1 when absent
};

// Sampling region for one object: x/y box, top-down rotation range, scale
// range. Degenerate ranges (lo == hi) pin the value; a scale range of
// [0, 0] means "use the declared object parameter".
struct ResetRegion {
    double x_lo = 0, x_hi = 0;
    double y_lo = 0, y_hi = 0;
    double theta_lo = 0, theta_hi = 0;
    double scale_lo = 0, scale_hi = 0;
};

struct ResetDistribution {
    std::map<std::string, ResetRegion> regions;
};

// Per-tick motion limits of the tracking controller; the coarse/slow
// alternates emulate transferring data across robot arms.
struct ControllerProfile {
    std::string name;
    double max_step_pos = 0.05;
    double max_step_rot = 0.2;
    double grasp_radius = 0.03;
};

struct ObjectState {
    std::string id;
    GeometryClass geom = GeometryClass::kBlock;
    Pose pose;
    double param = 0.02;
};

struct WorldState {
    Pose ee_pose;
    bool gripper_closed = false;
    std::optional<std::string> attached_object;
    std::vector<ObjectState> objects;  // task declaration order
    int step_count = 0;

    const ObjectState* find_object(const std::string& id) const;
};

// Task plus its named reset-distribution variants.
struct TaskDef {
    TaskSpec task;
    std::map<std::string, ResetDistribution> variants;

    const ResetDistribution& variant(const std::string& name) const;
};

// --- simulation ---

// Fixed home pose for the end effector after reset.
Pose home_pose();

// Samples object placements uniformly from the variant regions,
// resampling on overlap (up to 100 times, then ResetError).
WorldState reset(const TaskSpec& task, const ResetDistribution& dist, RandomStream& rng);

// One controller tick. Throws std::invalid_argument on non-finite actions.
WorldState step(const WorldState& state, const DeltaAction& action,
                const ControllerProfile& profile);

bool check_success(const TaskSpec& task, const WorldState& state);

bool subtask_end(const TaskSpec& task, int idx, const WorldState& state);

// The object being carried during subtask idx: the reference object of the
// closest preceding grasped-metric subtask.
const std::string& carried_object(const TaskSpec& task, int idx);

// Fixed layout: ee position (3), ee quaternion wxyz (4), gripper flag (1),
// then per object position (3) + quaternion (4) in declaration order.
std::vector<double> observe(const WorldState& state);

std::size_t observation_size(std::size_t n_objects);
Pose observed_ee_pose(const std::vector<double>& obs);
bool observed_gripper_closed(const std::vector<double>& obs);
Pose observed_object_pose(const std::vector<double>& obs, std::size_t object_index);

// Geometry heights (table surface is z = 0).
double rest_height(GeometryClass geom, double param);
double top_height(const ObjectState& obj);
double overlap_radius(GeometryClass geom, double param);

// Placement predicates shared by metrics and success checks.
bool placed_on(const WorldState& state, const std::string& top_id, const std::string& bottom_id);
bool inserted(const WorldState& state, const std::string& socket_id, const std::string& board_id);

// Fills in geometry classes on a deserialized state from the owning task.
void restore_geometry(WorldState& state, const TaskSpec& task);

// Throws ValidationError when a task breaks its structural invariants.
void validate_task(const TaskSpec& task);

#ifndef NDEBUG
void validate_state(const WorldState& state);
#endif

}  // namespace demogen
