#include "demogen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "demogen/errors.hpp"

namespace demogen {

namespace {

bool region_movable(const ResetRegion& r) {
    return r.x_hi > r.x_lo || r.y_hi > r.y_lo || r.theta_hi > r.theta_lo;
}

// Bin index over [lo, hi]; the upper boundary belongs to the last bin, and
// a zero-width range maps everything onto the last bin.
int bin_index(double v, double lo, double hi, int bins, const std::string& what,
              const std::string& episode_id) {
    const double slack = 1e-9 * std::max(1.0, std::abs(hi - lo));
    if (v < lo - slack || v > hi + slack)
        throw ValidationError("episode " + episode_id + ": " + what + " value " +
                              std::to_string(v) + " outside variant range [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    if (hi <= lo) return bins - 1;
    const double f = (v - lo) / (hi - lo);
    int idx = static_cast<int>(f * bins);
    if (idx >= bins) idx = bins - 1;
    if (idx < 0) idx = 0;
    return idx;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

CoverageReport support_coverage(const std::vector<Episode>& episodes, const TaskSpec& task,
                                const ResetDistribution& dist, int bins_per_dim) {
    if (bins_per_dim < 1) throw ValidationError("support_coverage: bins_per_dim must be >= 1");
    if (episodes.empty()) throw ValidationError("support_coverage: no episodes");

    for (const auto& ep : episodes)
        if (!ep.task.empty() && ep.task != task.name)
            throw ValidationError("episode " + ep.episode_id + ": task '" + ep.task +
                                  "' does not match '" + task.name + "'");

    CoverageReport report;
    std::vector<std::pair<std::string, ResetRegion>> movable;
    for (const auto& spec : task.objects) {
        auto it = dist.regions.find(spec.id);
        if (it == dist.regions.end())
            throw ValidationError("support_coverage: variant has no region for '" + spec.id + "'");
        if (region_movable(it->second)) {
            movable.emplace_back(spec.id, it->second);
            report.movable_objects.push_back(spec.id);
        }
    }
    if (movable.empty()) throw ValidationError("support_coverage: no movable objects");

    const int dims = static_cast<int>(movable.size()) * 3;
    report.total_bins = 1;
    for (int d = 0; d < dims; ++d) report.total_bins *= bins_per_dim;

    // marginals
    std::vector<std::set<std::vector<int>>> marginal(movable.size());

    for (const auto& ep : episodes) {
        std::vector<int> joint;
        joint.reserve(static_cast<std::size_t>(dims));
        for (std::size_t m = 0; m < movable.size(); ++m) {
            const auto& [id, region] = movable[m];
            const ObjectState* obj = ep.init_state.find_object(id);
            if (obj == nullptr)
                throw ValidationError("episode " + ep.episode_id + ": object '" + id +
                                      "' missing from init_state");
            const double yaw = obj->pose.yaw();
            const int bx = bin_index(obj->pose.translation.x, region.x_lo, region.x_hi,
                                     bins_per_dim, id + ".x", ep.episode_id);
            const int by = bin_index(obj->pose.translation.y, region.y_lo, region.y_hi,
                                     bins_per_dim, id + ".y", ep.episode_id);
            const int bt = bin_index(yaw, region.theta_lo, region.theta_hi, bins_per_dim,
                                     id + ".theta", ep.episode_id);
            joint.push_back(bx);
            joint.push_back(by);
            joint.push_back(bt);
            marginal[m].insert({bx, by, bt});
        }
        ++report.bin_counts[joint];
    }

    report.nonzero_bins = static_cast<long>(report.bin_counts.size());
    report.coverage = static_cast<double>(report.nonzero_bins) / static_cast<double>(report.total_bins);
    const long per_object_total = static_cast<long>(std::pow(bins_per_dim, 3));
    for (std::size_t m = 0; m < movable.size(); ++m) {
        ObjectCoverage oc;
        oc.id = movable[m].first;
        oc.total_bins = per_object_total;
        oc.nonzero_bins = static_cast<long>(marginal[m].size());
        oc.coverage = static_cast<double>(oc.nonzero_bins) / static_cast<double>(oc.total_bins);
        report.per_object.push_back(oc);
    }
    return report;
}

ProvenanceReport provenance_report(const std::vector<Episode>& episodes) {
    ProvenanceReport report;
    for (const auto& ep : episodes) {
        for (std::size_t i = 0; i < ep.source_ids.size(); ++i) {
            ++report.per_subtask[{static_cast<int>(i), ep.source_ids[i]}];
            ++report.totals[ep.source_ids[i]];
        }
    }
    long grand = 0;
    std::vector<long> counts;
    for (const auto& [id, n] : report.totals) {
        grand += n;
        counts.push_back(n);
    }
    std::sort(counts.rbegin(), counts.rend());
    long top3 = 0;
    for (std::size_t i = 0; i < counts.size() && i < 3; ++i) top3 += counts[i];
    report.top3_fraction = grand > 0 ? static_cast<double>(top3) / static_cast<double>(grand) : 0.0;
    return report;
}

SeedVarianceResult seed_variance_experiment(const TaskDef& def, const std::string& variant,
                                            const std::vector<SegmentedDemo>& demos,
                                            const GenConfig& cfg, const ControllerProfile& profile,
                                            int n_success, const std::vector<std::uint64_t>& seeds,
                                            int jobs) {
    if (seeds.size() < 2)
        throw ValidationError("seed_variance_experiment: need at least 2 seeds");
    SeedVarianceResult result;
    for (const std::uint64_t seed : seeds) {
        auto [episodes, report] =
            generate_dataset(def, variant, demos, cfg, profile, n_success, seed, jobs);
        result.rows.push_back({seed, std::move(report)});
    }
    double sum = 0;
    for (const auto& row : result.rows) sum += row.report.dgr;
    result.mean_dgr = sum / static_cast<double>(result.rows.size());
    double ss = 0;
    for (const auto& row : result.rows) {
        const double d = row.report.dgr - result.mean_dgr;
        ss += d * d;
    }
    result.std_dgr = std::sqrt(ss / static_cast<double>(result.rows.size() - 1));
    return result;
}

std::vector<NoiseToleranceRow> noise_tolerance_experiment(
    const TaskDef& def, const std::string& variant, const std::vector<SegmentedDemo>& demos,
    const GenConfig& cfg, const ControllerProfile& profile, int n_success,
    const std::vector<std::optional<PoseNoise>>& levels, std::uint64_t base_seed, int jobs) {
    if (levels.empty()) throw ValidationError("noise_tolerance_experiment: no levels");
    std::vector<NoiseToleranceRow> rows;
    for (const auto& level : levels) {
        GenConfig level_cfg = cfg;
        level_cfg.pose_noise = level;
        auto [episodes, report] =
            generate_dataset(def, variant, demos, level_cfg, profile, n_success, base_seed, jobs);
        rows.push_back({level, std::move(report)});
    }
    return rows;
}

std::string coverage_csv(const CoverageReport& r) {
    std::ostringstream out;
    out << "scope,total_bins,nonzero_bins,coverage\n";
    out << "joint," << r.total_bins << "," << r.nonzero_bins << "," << num(r.coverage) << "\n";
    for (const auto& oc : r.per_object)
        out << oc.id << "," << oc.total_bins << "," << oc.nonzero_bins << "," << num(oc.coverage)
            << "\n";
    return out.str();
}

std::string provenance_csv(const ProvenanceReport& r) {
    std::ostringstream out;
    out << "subtask,source_id,successes\n";
    for (const auto& [key, n] : r.per_subtask)
        out << key.first << "," << key.second << "," << n << "\n";
    out << "all,top3_fraction," << num(r.top3_fraction) << "\n";
    return out.str();
}

std::string seed_variance_csv(const SeedVarianceResult& r) {
    std::ostringstream out;
    out << "seed,successes,attempts,dgr\n";
    for (const auto& row : r.rows)
        out << row.seed << "," << row.report.successes << "," << row.report.attempts << ","
            << num(row.report.dgr) << "\n";
    out << "mean,,," << num(r.mean_dgr) << "\n";
    out << "std,,," << num(r.std_dgr) << "\n";
    return out.str();
}

std::string noise_tolerance_csv(const std::vector<NoiseToleranceRow>& rows) {
    std::ostringstream out;
    out << "pos_noise_m,rot_noise_rad,successes,attempts,dgr\n";
    for (const auto& row : rows) {
        const double pos = row.level ? row.level->pos : 0.0;
        const double rot = row.level ? row.level->rot : 0.0;
        out << num(pos) << "," << num(rot) << "," << row.report.successes << ","
            << row.report.attempts << "," << num(row.report.dgr) << "\n";
    }
    return out.str();
}

std::string csv_to_table(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.push_back("");
        cols = std::max(cols, row.size());
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(cols, 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << "  ";
            out << row[c];
            if (c + 1 < row.size())
                out << std::string(width[c] - row[c].size(), ' ');
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace demogen
