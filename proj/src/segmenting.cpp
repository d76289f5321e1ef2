#include "demogen/segmenting.hpp"

#include "demogen/errors.hpp"
#include "demogen/tasks.hpp"

namespace demogen {

SegmentedDemo parse(const Episode& episode, const TaskSpec& task) {
    if (!episode.success)
        throw ValidationError("parse: episode " + episode.episode_id + " is not a success");
    if (episode.steps.empty())
        throw ValidationError("parse: episode " + episode.episode_id + " has no steps");

    const ControllerProfile& profile = find_profile(episode.profile);
    const int n_subtasks = static_cast<int>(task.subtasks.size());

    SegmentedDemo demo;
    demo.source_episode_id = episode.episode_id;
    demo.segments.resize(static_cast<std::size_t>(n_subtasks));
    demo.initial_object_poses.reserve(static_cast<std::size_t>(n_subtasks));

    WorldState state = episode.init_state;
    restore_geometry(state, task);

    int subtask = 0;
    int segment_start = 0;
    for (std::size_t t = 0; t < episode.steps.size(); ++t) {
        if (subtask >= n_subtasks)
            throw ValidationError("parse: episode " + episode.episode_id +
                                  " has steps after the final subtask ended");
        if (static_cast<int>(t) == segment_start) {
            const int obj_idx = task.object_index(task.subtasks[subtask].reference_object);
            demo.initial_object_poses.push_back(state.objects[static_cast<std::size_t>(obj_idx)].pose);
        }
        const EpisodeStep& step = episode.steps[t];
        PoseSegment& seg = demo.segments[static_cast<std::size_t>(subtask)];
        seg.targets.push_back(apply_delta(observed_ee_pose(step.obs), step.action));
        seg.grippers.push_back(step.action.gripper);

        state = demogen::step(state, step.action, profile);
        if (subtask_end(task, subtask, state)) {
            ++subtask;
            segment_start = static_cast<int>(t) + 1;
        }
    }
    if (subtask < n_subtasks)
        throw ValidationError("parse: episode " + episode.episode_id + ": end of subtask " +
                              std::to_string(subtask) + " was never detected");
    return demo;
}

std::vector<SegmentedDemo> parse_all(const std::vector<Episode>& episodes, const TaskSpec& task) {
    std::vector<SegmentedDemo> out;
    out.reserve(episodes.size());
    for (const auto& ep : episodes) out.push_back(parse(ep, task));
    return out;
}

}  // namespace demogen
