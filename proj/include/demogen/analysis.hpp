#pragma once

// Dataset diagnostics: bin-based support coverage of initial placements,
// provenance histograms, and the seed-variance / pose-noise experiment
// drivers. Reports render as CSV (one header row) plus aligned text tables.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "demogen/datagen.hpp"
#include "demogen/datastore.hpp"
#include "demogen/world.hpp"

namespace demogen {

struct ObjectCoverage {
    std::string id;
    long total_bins = 0;
    long nonzero_bins = 0;
    double coverage = 0.0;
};

struct CoverageReport {
    long total_bins = 0;    // cross product over (x, y, theta) of movable objects
    long nonzero_bins = 0;
    double coverage = 0.0;
    std::map<std::vector<int>, int> bin_counts;  // joint bin index -> episodes
    std::vector<ObjectCoverage> per_object;      // marginal coverage
    std::vector<std::string> movable_objects;
};

// Bins each episode's initial object placements over the variant regions.
// Movable objects are those whose region has nonzero extent in any of
// x/y/theta; each of the three dimensions splits into bins_per_dim equal
// intervals (upper-boundary values fall in the last bin; a zero-width
// dimension maps everything to its last bin). Throws ValidationError when
// a placement lies outside the variant ranges.
CoverageReport support_coverage(const std::vector<Episode>& episodes, const TaskSpec& task,
                                const ResetDistribution& dist, int bins_per_dim);

struct ProvenanceReport {
    // successes per (subtask index, source id)
    std::map<std::pair<int, std::string>, int> per_subtask;
    std::map<std::string, int> totals;  // summed over subtasks
    double top3_fraction = 0.0;
};

ProvenanceReport provenance_report(const std::vector<Episode>& episodes);

struct SeedVarianceRow {
    std::uint64_t seed = 0;
    GenReport report;
};

struct SeedVarianceResult {
    std::vector<SeedVarianceRow> rows;
    double mean_dgr = 0.0;
    double std_dgr = 0.0;  // sample standard deviation
};

SeedVarianceResult seed_variance_experiment(const TaskDef& def, const std::string& variant,
                                            const std::vector<SegmentedDemo>& demos,
                                            const GenConfig& cfg, const ControllerProfile& profile,
                                            int n_success, const std::vector<std::uint64_t>& seeds,
                                            int jobs = 1);

struct NoiseToleranceRow {
    std::optional<PoseNoise> level;  // nullopt = no pose noise
    GenReport report;
};

// One generation run per level with cfg.pose_noise overridden; the first
// level should be the no-noise baseline.
std::vector<NoiseToleranceRow> noise_tolerance_experiment(
    const TaskDef& def, const std::string& variant, const std::vector<SegmentedDemo>& demos,
    const GenConfig& cfg, const ControllerProfile& profile, int n_success,
    const std::vector<std::optional<PoseNoise>>& levels, std::uint64_t base_seed, int jobs = 1);

// --- rendering ---

std::string coverage_csv(const CoverageReport& r);
std::string provenance_csv(const ProvenanceReport& r);
std::string seed_variance_csv(const SeedVarianceResult& r);
std::string noise_tolerance_csv(const std::vector<NoiseToleranceRow>& rows);

// Renders a CSV string as an aligned text table.
std::string csv_to_table(const std::string& csv);

}  // namespace demogen
