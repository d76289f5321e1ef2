#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "demogen/errors.hpp"
#include "demogen/tasks.hpp"
#include "demogen/world.hpp"

using namespace demogen;

namespace {
const TaskDef& stack_def() { return find_task("stack"); }
const ControllerProfile& default_profile() { return find_profile("default"); }

WorldState stacked_state(const TaskSpec& task) {
    RandomStream rng(1);
    WorldState s = reset(task, stack_def().variants.at("d0"), rng);
    ObjectState* red = nullptr;
    ObjectState* green = nullptr;
    for (auto& o : s.objects) (o.id == "red" ? red : green) = &o;
    red->pose = Pose(red->pose.rotation,
                     {green->pose.translation.x, green->pose.translation.y,
                      green->pose.translation.z + green->param + red->param});
    return s;
}
}  // namespace

TEST_CASE("reset determinism and degenerate regions") {
    const TaskDef& def = stack_def();

    RandomStream a(42), b(42);
    const WorldState s1 = reset(def.task, def.variants.at("d1"), a);
    const WorldState s2 = reset(def.task, def.variants.at("d1"), b);
    REQUIRE(s1.objects.size() == s2.objects.size());
    for (std::size_t i = 0; i < s1.objects.size(); ++i) {
        CHECK(s1.objects[i].pose.translation.x == s2.objects[i].pose.translation.x);
        CHECK(s1.objects[i].pose.translation.y == s2.objects[i].pose.translation.y);
        CHECK(s1.objects[i].pose.rotation.z == s2.objects[i].pose.rotation.z);
    }

    ResetDistribution pinned;
    pinned.regions["red"] = {-0.1, -0.1, 0.05, 0.05, 0.2, 0.2, 0, 0};
    pinned.regions["green"] = {0.1, 0.1, 0.0, 0.0, 0.0, 0.0, 0, 0};
    for (int i = 0; i < 5; ++i) {
        RandomStream rng(static_cast<std::uint64_t>(i * 977 + 3));
        const WorldState s = reset(def.task, pinned, rng);
        CHECK(s.objects[0].pose.translation.x == doctest::Approx(-0.1));
        CHECK(s.objects[0].pose.translation.y == doctest::Approx(0.05));
        CHECK(s.objects[0].pose.yaw() == doctest::Approx(0.2));
        CHECK(s.objects[1].pose.translation.x == doctest::Approx(0.1));
    }
}

TEST_CASE("reset sampling is uniform over the region") {
    const TaskDef& def = stack_def();
    ResetDistribution wide;
    wide.regions["red"] = {-0.2, 0.2, -0.2, 0.2, 0, 0, 0, 0};
    wide.regions["green"] = {0.6, 1.0, 0.6, 1.0, 0, 0, 0, 0};  // far away: no overlap rejections

    const int n = 10000;
    double min_x = 1e9, max_x = -1e9, sum_x = 0, min_y = 1e9, max_y = -1e9, sum_y = 0;
    RandomStream rng(5);
    for (int i = 0; i < n; ++i) {
        const WorldState s = reset(def.task, wide, rng);
        const double x = s.objects[0].pose.translation.x;
        const double y = s.objects[0].pose.translation.y;
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        sum_x += x;
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
        sum_y += y;
    }
    // 2% of the 0.4 m span
    CHECK(min_x < -0.2 + 0.008);
    CHECK(max_x > 0.2 - 0.008);
    CHECK(std::abs(sum_x / n) < 0.008);
    CHECK(min_y < -0.2 + 0.008);
    CHECK(max_y > 0.2 - 0.008);
    CHECK(std::abs(sum_y / n) < 0.008);
}

TEST_CASE("step tracks targets with clamping") {
    const TaskSpec& task = stack_def().task;
    const ControllerProfile& profile = default_profile();
    RandomStream rng(2);
    const WorldState start = reset(task, stack_def().variants.at("d0"), rng);

    // zero action: unchanged except step_count
    const WorldState same = step(start, DeltaAction{}, profile);
    CHECK(same.step_count == start.step_count + 1);
    CHECK((same.ee_pose.translation - start.ee_pose.translation).norm() == 0.0);

    // within limits: lands exactly on target
    DeltaAction small;
    small.d_pos = {0.03, 0.02, -0.01};
    const WorldState moved = step(start, small, profile);
    CHECK((moved.ee_pose.translation -
           (start.ee_pose.translation + small.d_pos)).norm() < 1e-15);

    // 0.5 m away: advances exactly max_step_pos along the line
    DeltaAction big;
    big.d_pos = {0.5, 0, 0};
    const WorldState clamped = step(start, big, profile);
    CHECK((clamped.ee_pose.translation - start.ee_pose.translation).norm() ==
          doctest::Approx(profile.max_step_pos).epsilon(1e-12));
    CHECK(clamped.ee_pose.translation.x ==
          doctest::Approx(start.ee_pose.translation.x + 0.05).epsilon(1e-12));

    // non-finite action rejected
    DeltaAction bad;
    bad.d_pos = {std::nan(""), 0, 0};
    CHECK_THROWS_AS(step(start, bad, profile), std::invalid_argument);
}

TEST_CASE("tracking converges within the tick bound") {
    const TaskSpec& task = stack_def().task;
    const ControllerProfile& profile = default_profile();
    RandomStream rng(3);
    WorldState state = reset(task, stack_def().variants.at("d0"), rng);

    const Pose goal(Quat::from_axis_angle({0, 0, 1}, 1.3), {0.21, -0.13, 0.05});
    const double d0 = (goal.translation - state.ee_pose.translation).norm();
    const double a0 = quat_to_axis_angle(goal.rotation * state.ee_pose.rotation.conjugate()).norm();
    const int bound = static_cast<int>(std::ceil(d0 / profile.max_step_pos) +
                                       std::ceil(a0 / profile.max_step_rot));
    int ticks = 0;
    while (ticks < bound) {
        DeltaAction a = extract_delta(state.ee_pose, goal);
        state = step(state, a, profile);
        ++ticks;
        if ((goal.translation - state.ee_pose.translation).norm() < 1e-12 &&
            quat_to_axis_angle(goal.rotation * state.ee_pose.rotation.conjugate()).norm() < 1e-12)
            break;
    }
    CHECK(ticks <= bound);
    CHECK((goal.translation - state.ee_pose.translation).norm() < 1e-12);
}

TEST_CASE("grasp attach and release snapping") {
    const TaskSpec& task = stack_def().task;
    const ControllerProfile& profile = default_profile();
    RandomStream rng(4);
    WorldState state = reset(task, stack_def().variants.at("d0"), rng);
    const Vec3 red_center = state.find_object("red")->pose.translation;

    // drive ee onto the red block center
    for (int i = 0; i < 100; ++i) {
        DeltaAction a = extract_delta(state.ee_pose, Pose(state.ee_pose.rotation, red_center));
        state = step(state, a, profile);
    }
    CHECK((state.ee_pose.translation - red_center).norm() < 1e-9);

    // close: attaches the nearest object
    DeltaAction close;
    close.gripper = 1.0;
    state = step(state, close, profile);
    CHECK(state.gripper_closed);
    REQUIRE(state.attached_object.has_value());
    CHECK(*state.attached_object == "red");

    // carried object keeps its relative pose while the ee moves
    const Pose rel_before = compose(inverse(state.ee_pose), state.find_object("red")->pose);
    DeltaAction lift;
    lift.d_pos = {0.02, 0.01, 0.04};
    lift.d_rot = {0, 0, 0.1};
    lift.gripper = 1.0;
    for (int i = 0; i < 10; ++i) state = step(state, lift, profile);
    const Pose rel_after = compose(inverse(state.ee_pose), state.find_object("red")->pose);
    CHECK((rel_after.translation - rel_before.translation).norm() < 1e-9);

    // release away from any support: falls to the table
    DeltaAction open;
    open.gripper = -1.0;
    state = step(state, open, profile);
    CHECK(!state.attached_object.has_value());
    CHECK(state.find_object("red")->pose.translation.z ==
          doctest::Approx(state.find_object("red")->param));
}

TEST_CASE("quasi-static: objects move only while attached") {
    const TaskSpec& task = stack_def().task;
    const ControllerProfile& profile = default_profile();
    RandomStream rng(6);
    WorldState state = reset(task, stack_def().variants.at("d1"), rng);
    const Pose red0 = state.find_object("red")->pose;
    const Pose green0 = state.find_object("green")->pose;

    RandomStream wiggle(8);
    for (int i = 0; i < 200; ++i) {
        DeltaAction a;
        a.d_pos = {wiggle.uniform(-0.05, 0.05), wiggle.uniform(-0.05, 0.05),
                   wiggle.uniform(-0.05, 0.05)};
        a.d_rot = {0, 0, wiggle.uniform(-0.2, 0.2)};
        a.gripper = -1.0;
        state = step(state, a, profile);
        CHECK((state.find_object("red")->pose.translation - red0.translation).norm() == 0.0);
        CHECK((state.find_object("green")->pose.translation - green0.translation).norm() == 0.0);
    }
}

TEST_CASE("check_success and subtask metrics on stack") {
    const TaskSpec& task = stack_def().task;
    RandomStream rng(9);
    const WorldState fresh = reset(task, stack_def().variants.at("d0"), rng);
    CHECK(!check_success(task, fresh));
    CHECK(!subtask_end(task, 0, fresh));  // nothing grasped

    const WorldState stacked = stacked_state(task);
    CHECK(check_success(task, stacked));
    CHECK(subtask_end(task, 1, stacked));

    WorldState grasped = fresh;
    grasped.gripper_closed = true;
    grasped.attached_object = "red";
    CHECK(subtask_end(task, 0, grasped));
    // attached top block does not count as placed
    WorldState held = stacked;
    held.gripper_closed = true;
    held.attached_object = "red";
    CHECK(!check_success(task, held));
}

TEST_CASE("observation layout and round trip") {
    const TaskSpec& task = stack_def().task;
    RandomStream rng(10);
    const WorldState state = reset(task, stack_def().variants.at("d0"), rng);
    const auto obs = observe(state);
    REQUIRE(obs.size() == 22);  // 8 + 2 * 7
    CHECK(observation_size(2) == 22);

    const Pose ee = observed_ee_pose(obs);
    CHECK((ee.translation - state.ee_pose.translation).norm() == 0.0);
    CHECK(observed_gripper_closed(obs) == state.gripper_closed);
    for (std::size_t i = 0; i < state.objects.size(); ++i) {
        const Pose p = observed_object_pose(obs, i);
        CHECK((p.translation - state.objects[i].pose.translation).norm() == 0.0);
        CHECK(p.rotation.w == state.objects[i].pose.rotation.w);
        CHECK(p.rotation.z == state.objects[i].pose.rotation.z);
    }

    const auto obs2 = observe(state);
    CHECK(obs == obs2);
}

TEST_CASE("peg_insert insertion geometry") {
    const TaskDef& def = find_task("peg_insert");
    RandomStream rng(12);
    WorldState state = reset(def.task, def.variants.at("d0"), rng);
    const ObjectState* board = state.find_object("board");

    ObjectState* ring = nullptr;
    for (auto& o : state.objects)
        if (o.id == "ring") ring = &o;
    REQUIRE(ring != nullptr);

    CHECK(!check_success(def.task, state));

    // ring over the peg within clearance, at insertion depth
    const double clearance = ring->param - board->param;
    ring->pose = Pose(ring->pose.rotation,
                      {board->pose.translation.x + clearance * 0.9, board->pose.translation.y,
                       board->pose.translation.z + kBoardHalfThickness + kSocketHalfThickness});
    CHECK(check_success(def.task, state));
    CHECK(subtask_end(def.task, 1, state));

    // just outside the clearance: fails
    ring->pose = Pose(ring->pose.rotation,
                      {board->pose.translation.x + clearance * 1.1, board->pose.translation.y,
                       ring->pose.translation.z});
    CHECK(!check_success(def.task, state));
}

TEST_CASE("task validation rejects malformed tasks") {
    TaskSpec bad;
    bad.name = "bad";
    bad.success_check = "stack";
    bad.horizon = 100;
    bad.objects = {{"a", GeometryClass::kBlock, 0.02}};
    bad.subtasks = {{"missing", EndMetric::kGrasped}};
    CHECK_THROWS_AS(validate_task(bad), ValidationError);

    bad.subtasks = {{"a", EndMetric::kPlacedOn}};  // no preceding grasp
    CHECK_THROWS_AS(validate_task(bad), ValidationError);

    TaskSpec empty;
    empty.name = "empty";
    CHECK_THROWS_AS(validate_task(empty), ValidationError);
}
