#pragma once

// Durable dataset format (demogen.v1): JSON Lines, line 1 a manifest
// object, each following line one episode. Poses serialize as 7-number
// arrays [qw,qx,qy,qz,tx,ty,tz]; all numbers are written with 17
// significant digits so files are byte-stable for fixed inputs and seeds
// and round-trip exactly.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "demogen/geometry.hpp"
#include "demogen/world.hpp"

namespace demogen {

struct EpisodeStep {
    std::vector<double> obs;
    DeltaAction action;
    Pose target;  // absolute controller target implied by the action
};

struct Episode {
    std::string episode_id;
    std::string task;
    std::string variant;
    std::uint64_t seed = 0;
    bool success = false;
    WorldState init_state;
    std::vector<EpisodeStep> steps;
    std::vector<int> subtask_boundaries;  // exclusive end index per subtask
    std::vector<std::string> source_ids;  // per subtask; empty for source demos
    std::string profile;
    std::string quality;
};

// Generation accounting. Histograms attribute each attempt/success to the
// source chosen for the first subtask so their totals match the counters
// even under per-subtask mixing.
struct GenReport {
    int successes = 0;
    int attempts = 0;
    double dgr = 0.0;
    bool complete = true;
    std::map<std::string, int> per_source_histogram;
    std::map<std::string, int> per_source_attempts;
};

// Validates every episode invariant; throws ValidationError on violation.
void validate_episode(const Episode& ep);

// Atomic write (temp file + rename). Throws IoError with path context.
void save(const std::filesystem::path& path, const std::vector<Episode>& episodes,
          const std::optional<GenReport>& report = std::nullopt);

struct Dataset {
    std::vector<Episode> episodes;
    std::optional<GenReport> report;
    std::string task;
    std::string variant;
};

// Throws IoError on missing/truncated/mismatched files, ValidationError
// (with episode id and field) on invariant violations.
Dataset load(const std::filesystem::path& path);

}  // namespace demogen
