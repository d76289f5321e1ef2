#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "demogen/demonstrator.hpp"
#include "demogen/errors.hpp"
#include "demogen/segmenting.hpp"
#include "demogen/tasks.hpp"
#include "oracles.hpp"

using namespace demogen;

namespace {
Episode make_demo(const TaskDef& def, std::uint64_t seed, const char* quality = "clean") {
    RandomStream rng(seed);
    const WorldState start = reset(def.task, def.variants.at("d0"), rng);
    Episode ep = demonstrate(def.task, start, find_profile("default"), quality, rng);
    ep.episode_id = "test_ep_" + std::to_string(seed);
    return ep;
}
}  // namespace

TEST_CASE("parse partitions a stack demo into two segments") {
    const TaskDef& def = find_task("stack");
    const Episode ep = make_demo(def, 51);
    const SegmentedDemo demo = parse(ep, def.task);

    REQUIRE(demo.segments.size() == 2);
    REQUIRE(demo.initial_object_poses.size() == 2);
    CHECK(demo.source_episode_id == ep.episode_id);
    CHECK(demo.segments[0].size() + demo.segments[1].size() == ep.steps.size());
    CHECK(demo.segments[0].size() > 0);
    CHECK(demo.segments[1].size() > 0);

    // segment boundaries match the episode's recorded ones
    CHECK(static_cast<int>(demo.segments[0].size()) == ep.subtask_boundaries[0]);

    // the boundary step closes the gripper (grasp fires there)
    CHECK(demo.segments[0].grippers.back() == 1.0);

    // recorded reference-object poses equal the simulator's exactly
    const int red = def.task.object_index("red");
    const Pose red_init = observed_object_pose(ep.steps[0].obs, static_cast<std::size_t>(red));
    CHECK(oracle::pose_max_abs_diff(demo.initial_object_poses[0], red_init) == 0.0);
    const int green = def.task.object_index("green");
    const Pose green_at_boundary = observed_object_pose(
        ep.steps[static_cast<std::size_t>(ep.subtask_boundaries[0])].obs,
        static_cast<std::size_t>(green));
    CHECK(oracle::pose_max_abs_diff(demo.initial_object_poses[1], green_at_boundary) == 0.0);
}

TEST_CASE("parse is deterministic and idempotent") {
    const TaskDef& def = find_task("peg_insert");
    const Episode ep = make_demo(def, 77, "sloppy");
    const SegmentedDemo a = parse(ep, def.task);
    const SegmentedDemo b = parse(ep, def.task);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        REQUIRE(a.segments[i].size() == b.segments[i].size());
        for (std::size_t t = 0; t < a.segments[i].size(); ++t)
            CHECK(oracle::pose_max_abs_diff(a.segments[i].targets[t], b.segments[i].targets[t]) ==
                  0.0);
    }
}

TEST_CASE("parsed targets replay to final success from the initial state") {
    const TaskDef& def = find_task("stack_three");
    const ControllerProfile& profile = find_profile("default");
    const Episode ep = make_demo(def, 99);
    const SegmentedDemo demo = parse(ep, def.task);

    WorldState state = ep.init_state;
    restore_geometry(state, def.task);
    for (const auto& seg : demo.segments) {
        for (std::size_t t = 0; t < seg.size(); ++t) {
            DeltaAction a = extract_delta(state.ee_pose, seg.targets[t]);
            a.gripper = seg.grippers[t];
            state = step(state, a, profile);
        }
    }
    CHECK(check_success(def.task, state));
}

TEST_CASE("parse rejects non-success episodes and foreign tasks") {
    const TaskDef& def = find_task("stack");
    Episode ep = make_demo(def, 13);
    Episode failed = ep;
    failed.success = false;
    CHECK_THROWS_AS(parse(failed, def.task), ValidationError);

    // a stack demo never satisfies the peg_insert metrics
    const TaskDef& peg = find_task("peg_insert");
    CHECK_THROWS_AS(parse(ep, peg.task), ValidationError);
}
