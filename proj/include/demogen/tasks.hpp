#pragma once

// Built-in task catalog (stack, stack_three, peg_insert), controller
// profiles, and the JSON task-definition loader that lets new tasks and
// variants ship without recompiling.

#include <filesystem>
#include <string>
#include <vector>

#include "demogen/world.hpp"

namespace demogen {

const std::vector<TaskDef>& builtin_tasks();

// Built-in profiles: "default", "slow", "coarse".
const std::vector<ControllerProfile>& builtin_profiles();

const ControllerProfile& find_profile(const std::string& name);

// Looks the task up in `extra` first, then the built-ins; throws
// ValidationError when unknown.
const TaskDef& find_task(const std::string& name, const std::vector<TaskDef>& extra = {});

// Parses a task-definition JSON file (see README for the schema); every
// loaded task is validated. Throws IoError / ValidationError.
std::vector<TaskDef> load_task_file(const std::filesystem::path& path);

}  // namespace demogen
