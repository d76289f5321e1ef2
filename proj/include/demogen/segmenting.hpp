#pragma once

// Parsing source episodes into per-subtask segments of controller target
// poses. The episode is re-simulated from its initial state so the end
// metrics see full world states; the step that satisfies a metric is the
// last step of its segment.

#include <string>
#include <vector>

#include "demogen/datastore.hpp"
#include "demogen/world.hpp"

namespace demogen {

struct SegmentedDemo {
    std::vector<PoseSegment> segments;        // one per subtask, contiguous partition
    std::vector<Pose> initial_object_poses;   // reference-object pose at each segment start
    std::string source_episode_id;
};

// Throws ValidationError when a subtask end is never detected or the
// episode does not replay cleanly.
SegmentedDemo parse(const Episode& episode, const TaskSpec& task);

std::vector<SegmentedDemo> parse_all(const std::vector<Episode>& episodes, const TaskSpec& task);

}  // namespace demogen
