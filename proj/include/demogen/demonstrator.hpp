#pragma once

// Scripted waypoint experts that stand in for human teleoperation. They
// act through the same delta-action interface as generated data (never
// teleporting state), so the action/target-pose equivalence holds for
// source demos too. Quality "clean" follows exact waypoints; "sloppy"
// jitters non-critical waypoints by up to 1 cm and inserts one redundant
// waypoint per subtask.

#include <cstdint>
#include <string>
#include <vector>

#include "demogen/datastore.hpp"
#include "demogen/world.hpp"

namespace demogen {

// Runs the expert from a freshly reset state; the returned episode passes
// check_success and every subtask boundary fires in order. Throws
// ExpertError when the horizon runs out before success.
Episode demonstrate(const TaskSpec& task, const WorldState& start,
                    const ControllerProfile& profile, const std::string& quality,
                    RandomStream& rng);

// n successful episodes on the named variant, episode i seeded with
// seed + i; up to 3 retries per episode before giving up.
std::vector<Episode> collect_source(const TaskDef& def, const std::string& variant, int n,
                                    const std::string& quality, std::uint64_t seed,
                                    const ControllerProfile& profile);

}  // namespace demogen
