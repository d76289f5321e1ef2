// demogen: generate large manipulation datasets from a handful of scripted
// source demonstrations.
//
// Subcommands: collect-source, generate, analyze (coverage | provenance |
// seed-variance | noise-tolerance), policy-eval. Every command is
// reproducible from its flags, config, and seed. Exit codes: 0 ok,
// 2 usage/input error, 3 incomplete generation, 4 internal invariant
// violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "demogen/analysis.hpp"
#include "demogen/datagen.hpp"
#include "demogen/datastore.hpp"
#include "demogen/demonstrator.hpp"
#include "demogen/errors.hpp"
#include "demogen/log.hpp"
#include "demogen/policy.hpp"
#include "demogen/segmenting.hpp"
#include "demogen/tasks.hpp"

namespace {

using namespace demogen;
using nlohmann::json;

struct CommonTaskArgs {
    std::string task;
    std::string variant;
    std::string task_file;
    std::string profile = "default";

    const TaskDef& resolve(std::vector<TaskDef>& storage) const {
        if (!task_file.empty()) storage = load_task_file(task_file);
        return find_task(task, storage);
    }
};

GenConfig load_config(const std::string& config_path) {
    GenConfig cfg;
    if (config_path.empty()) return cfg;
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("config file " + config_path + ": " + e.what());
    }
    if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
    if (j.contains("n_interp")) cfg.n_interp = j.at("n_interp").get<int>();
    if (j.contains("n_fixed")) cfg.n_fixed = j.at("n_fixed").get<int>();
    if (j.contains("strategy")) {
        const std::string s = j.at("strategy").get<std::string>();
        if (s == "random")
            cfg.strategy = SelectionStrategy::kRandom;
        else if (s == "nearest_neighbor")
            cfg.strategy = SelectionStrategy::kNearestNeighbor;
        else
            throw ValidationError("config: unknown strategy '" + s + "'");
    }
    if (j.contains("nn_k")) cfg.nn_k = j.at("nn_k").get<int>();
    if (j.contains("per_subtask")) cfg.per_subtask = j.at("per_subtask").get<bool>();
    if (j.contains("max_attempts")) cfg.max_attempts = j.at("max_attempts").get<int>();
    if (j.contains("pose_noise") && !j.at("pose_noise").is_null()) {
        PoseNoise pn;
        pn.pos = j.at("pose_noise").at("pos").get<double>();
        pn.rot = j.at("pose_noise").at("rot").get<double>();
        cfg.pose_noise = pn;
    }
    return cfg;
}

std::string config_json(const GenConfig& cfg) {
    std::ostringstream out;
    out << "{\"sigma\":" << cfg.sigma << ",\"n_interp\":" << cfg.n_interp
        << ",\"n_fixed\":" << cfg.n_fixed << ",\"strategy\":\""
        << (cfg.strategy == SelectionStrategy::kRandom ? "random" : "nearest_neighbor")
        << "\",\"nn_k\":" << cfg.nn_k << ",\"per_subtask\":" << (cfg.per_subtask ? "true" : "false")
        << ",\"max_attempts\":" << cfg.max_attempts << ",\"pose_noise\":";
    if (cfg.pose_noise)
        out << "{\"pos\":" << cfg.pose_noise->pos << ",\"rot\":" << cfg.pose_noise->rot << "}";
    else
        out << "null";
    out << "}";
    return out.str();
}

// Noise level token: "none", "l1" (5 mm / 5 deg), "l2" (10 mm / 10 deg),
// or "POS:ROT" in meters:radians.
std::optional<PoseNoise> parse_level(const std::string& token) {
    if (token == "none") return std::nullopt;
    if (token == "l1") return PoseNoise{0.005, 5.0 * kPi / 180.0};
    if (token == "l2") return PoseNoise{0.010, 10.0 * kPi / 180.0};
    const auto colon = token.find(':');
    if (colon == std::string::npos)
        throw ValidationError("bad noise level '" + token + "' (expect none, l1, l2, or POS:ROT)");
    return PoseNoise{std::stod(token.substr(0, colon)), std::stod(token.substr(colon + 1))};
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
}

std::vector<SegmentedDemo> load_and_parse(const std::string& source_path, const TaskSpec& task) {
    Dataset src = load(source_path);
    if (src.episodes.empty()) throw ValidationError(source_path + ": no episodes");
    return parse_all(src.episodes, task);
}

int run(int argc, char** argv) {
    CLI::App app{"demonstration synthesis for quasi-static manipulation tasks"};
    app.require_subcommand(1);

    // collect-source
    auto* collect = app.add_subcommand("collect-source", "record scripted source demonstrations");
    CommonTaskArgs cargs;
    int collect_n = 10;
    std::string collect_quality = "clean";
    std::uint64_t collect_seed = 0;
    std::string collect_out;
    collect->add_option("--task", cargs.task, "task name")->required();
    collect->add_option("--variant", cargs.variant, "variant name")->required();
    collect->add_option("--n", collect_n, "number of episodes")->check(CLI::PositiveNumber);
    collect->add_option("--quality", collect_quality, "demonstrator quality (clean|sloppy)");
    collect->add_option("--seed", collect_seed, "base seed");
    collect->add_option("--out", collect_out, "output dataset path")->required();
    collect->add_option("--profile", cargs.profile, "controller profile");
    collect->add_option("--task-file", cargs.task_file, "extra task definitions (JSON)");

    // generate
    auto* gen = app.add_subcommand("generate", "generate episodes from a source dataset");
    CommonTaskArgs gargs;
    std::string gen_source, gen_config, gen_out;
    int gen_n_success = 200;
    std::uint64_t gen_seed = 0;
    int gen_jobs = 1;
    double gen_sigma = 0.0;
    int gen_n_interp = 0, gen_n_fixed = 0, gen_nn_k = 0, gen_max_attempts = 0;
    std::string gen_strategy, gen_per_subtask;
    gen->add_option("--task", gargs.task, "task name")->required();
    gen->add_option("--variant", gargs.variant, "variant name")->required();
    gen->add_option("--source", gen_source, "source dataset path")->required();
    gen->add_option("--n-success", gen_n_success, "successes to collect")->check(CLI::PositiveNumber);
    gen->add_option("--config", gen_config, "generation config (JSON)");
    gen->add_option("--seed", gen_seed, "base seed");
    gen->add_option("--out", gen_out, "output dataset path")->required();
    gen->add_option("--jobs", gen_jobs, "parallel attempts per wave")->check(CLI::PositiveNumber);
    gen->add_option("--profile", gargs.profile, "controller profile");
    gen->add_option("--task-file", gargs.task_file, "extra task definitions (JSON)");
    gen->add_option("--sigma", gen_sigma, "override: action noise scale");
    gen->add_option("--n-interp", gen_n_interp, "override: interpolation steps");
    gen->add_option("--n-fixed", gen_n_fixed, "override: fixed hold steps");
    gen->add_option("--strategy", gen_strategy, "override: random|nearest_neighbor");
    gen->add_option("--nn-k", gen_nn_k, "override: nearest-neighbor pool size");
    gen->add_option("--per-subtask", gen_per_subtask, "override: true|false");
    gen->add_option("--max-attempts", gen_max_attempts, "override: attempt budget");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "dataset diagnostics");
    analyze->require_subcommand(1);

    auto* cov = analyze->add_subcommand("coverage", "bin-based support coverage");
    std::string cov_dataset, cov_out, cov_task_file;
    int cov_bins = 3;
    cov->add_option("--dataset", cov_dataset, "dataset path")->required();
    cov->add_option("--bins", cov_bins, "bins per dimension")->check(CLI::PositiveNumber);
    cov->add_option("--out", cov_out, "CSV output path (default stdout)");
    cov->add_option("--task-file", cov_task_file, "extra task definitions (JSON)");

    auto* prov = analyze->add_subcommand("provenance", "per-source success histogram");
    std::string prov_dataset, prov_out;
    prov->add_option("--dataset", prov_dataset, "dataset path")->required();
    prov->add_option("--out", prov_out, "CSV output path (default stdout)");

    auto* seedvar = analyze->add_subcommand("seed-variance", "DGR spread across generation seeds");
    CommonTaskArgs svargs;
    std::string sv_source, sv_config, sv_out, sv_seeds = "0,1,2";
    int sv_n_success = 100, sv_jobs = 1;
    seedvar->add_option("--task", svargs.task, "task name")->required();
    seedvar->add_option("--variant", svargs.variant, "variant name")->required();
    seedvar->add_option("--source", sv_source, "source dataset path")->required();
    seedvar->add_option("--n-success", sv_n_success, "successes per seed")->check(CLI::PositiveNumber);
    seedvar->add_option("--seeds", sv_seeds, "comma-separated seed list");
    seedvar->add_option("--config", sv_config, "generation config (JSON)");
    seedvar->add_option("--out", sv_out, "CSV output path (default stdout)");
    seedvar->add_option("--jobs", sv_jobs, "parallel attempts per wave")->check(CLI::PositiveNumber);
    seedvar->add_option("--profile", svargs.profile, "controller profile");
    seedvar->add_option("--task-file", svargs.task_file, "extra task definitions (JSON)");

    auto* noise = analyze->add_subcommand("noise-tolerance", "DGR under object pose noise");
    CommonTaskArgs ntargs;
    std::string nt_source, nt_config, nt_out, nt_levels = "none,l1,l2";
    int nt_n_success = 100, nt_jobs = 1;
    std::uint64_t nt_seed = 0;
    noise->add_option("--task", ntargs.task, "task name")->required();
    noise->add_option("--variant", ntargs.variant, "variant name")->required();
    noise->add_option("--source", nt_source, "source dataset path")->required();
    noise->add_option("--n-success", nt_n_success, "successes per level")->check(CLI::PositiveNumber);
    noise->add_option("--levels", nt_levels, "comma-separated levels (none|l1|l2|POS:ROT)");
    noise->add_option("--seed", nt_seed, "base seed");
    noise->add_option("--config", nt_config, "generation config (JSON)");
    noise->add_option("--out", nt_out, "CSV output path (default stdout)");
    noise->add_option("--jobs", nt_jobs, "parallel attempts per wave")->check(CLI::PositiveNumber);
    noise->add_option("--profile", ntargs.profile, "controller profile");
    noise->add_option("--task-file", ntargs.task_file, "extra task definitions (JSON)");

    // policy-eval
    auto* peval = app.add_subcommand("policy-eval", "fit a kNN policy and roll it out");
    CommonTaskArgs pargs;
    std::string pe_train;
    int pe_k = 3, pe_rollouts = 50;
    std::uint64_t pe_seed = 0;
    peval->add_option("--train", pe_train, "training dataset path")->required();
    peval->add_option("--task", pargs.task, "task name")->required();
    peval->add_option("--variant", pargs.variant, "variant name")->required();
    peval->add_option("--k", pe_k, "neighbor count")->check(CLI::PositiveNumber);
    peval->add_option("--rollouts", pe_rollouts, "rollout count")->check(CLI::PositiveNumber);
    peval->add_option("--seed", pe_seed, "base seed");
    peval->add_option("--profile", pargs.profile, "controller profile");
    peval->add_option("--task-file", pargs.task_file, "extra task definitions (JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    if (collect->parsed()) {
        std::vector<TaskDef> storage;
        const TaskDef& def = cargs.resolve(storage);
        const ControllerProfile& profile = find_profile(cargs.profile);
        auto episodes =
            collect_source(def, cargs.variant, collect_n, collect_quality, collect_seed, profile);
        save(collect_out, episodes);
        std::cout << "wrote " << episodes.size() << " source episodes to " << collect_out << "\n";
        return 0;
    }

    if (gen->parsed()) {
        std::vector<TaskDef> storage;
        const TaskDef& def = gargs.resolve(storage);
        const ControllerProfile& profile = find_profile(gargs.profile);
        GenConfig cfg = load_config(gen_config);
        if (gen->count("--sigma") > 0) cfg.sigma = gen_sigma;
        if (gen->count("--n-interp") > 0) cfg.n_interp = gen_n_interp;
        if (gen->count("--n-fixed") > 0) cfg.n_fixed = gen_n_fixed;
        if (gen->count("--nn-k") > 0) cfg.nn_k = gen_nn_k;
        if (gen->count("--max-attempts") > 0) cfg.max_attempts = gen_max_attempts;
        if (!gen_strategy.empty()) {
            if (gen_strategy == "random")
                cfg.strategy = SelectionStrategy::kRandom;
            else if (gen_strategy == "nearest_neighbor")
                cfg.strategy = SelectionStrategy::kNearestNeighbor;
            else
                throw ValidationError("unknown strategy '" + gen_strategy + "'");
        }
        if (!gen_per_subtask.empty()) {
            if (gen_per_subtask != "true" && gen_per_subtask != "false")
                throw ValidationError("--per-subtask must be true or false");
            cfg.per_subtask = gen_per_subtask == "true";
        }
        validate_config(cfg);
        std::cerr << "effective config: " << config_json(cfg) << "\n";

        const auto demos = load_and_parse(gen_source, def.task);
        auto [episodes, report] =
            generate_dataset(def, gargs.variant, demos, cfg, profile, gen_n_success, gen_seed, gen_jobs);
        save(gen_out, episodes, report);
        std::cout << "dgr " << report.dgr << " (" << report.successes << "/" << report.attempts
                  << ")\n";
        if (!report.complete) {
            std::cerr << "generation incomplete: budget of " << cfg.max_attempts
                      << " attempts exhausted\n";
            return 3;
        }
        return 0;
    }

    if (cov->parsed()) {
        Dataset ds = load(cov_dataset);
        std::vector<TaskDef> storage;
        if (!cov_task_file.empty()) storage = load_task_file(cov_task_file);
        const TaskDef& def = find_task(ds.task, storage);
        const auto report =
            support_coverage(ds.episodes, def.task, def.variant(ds.variant), cov_bins);
        const std::string csv = coverage_csv(report);
        write_text(cov_out, csv);
        std::cerr << csv_to_table(csv);
        std::cout << "coverage " << report.coverage << " (nonzero " << report.nonzero_bins
                  << " / total " << report.total_bins << ")\n";
        return 0;
    }

    if (prov->parsed()) {
        Dataset ds = load(prov_dataset);
        const auto report = provenance_report(ds.episodes);
        const std::string csv = provenance_csv(report);
        write_text(prov_out, csv);
        std::cerr << csv_to_table(csv);
        std::cout << "top3_concentration " << report.top3_fraction << "\n";
        return 0;
    }

    if (seedvar->parsed()) {
        std::vector<TaskDef> storage;
        const TaskDef& def = svargs.resolve(storage);
        const ControllerProfile& profile = find_profile(svargs.profile);
        GenConfig cfg = load_config(sv_config);
        std::cerr << "effective config: " << config_json(cfg) << "\n";
        const auto demos = load_and_parse(sv_source, def.task);
        std::vector<std::uint64_t> seeds;
        std::istringstream ss(sv_seeds);
        std::string tok;
        while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
        const auto result = seed_variance_experiment(def, svargs.variant, demos, cfg, profile,
                                                     sv_n_success, seeds, sv_jobs);
        const std::string csv = seed_variance_csv(result);
        write_text(sv_out, csv);
        std::cerr << csv_to_table(csv);
        std::cout << "dgr mean " << result.mean_dgr << " std " << result.std_dgr << "\n";
        return 0;
    }

    if (noise->parsed()) {
        std::vector<TaskDef> storage;
        const TaskDef& def = ntargs.resolve(storage);
        const ControllerProfile& profile = find_profile(ntargs.profile);
        GenConfig cfg = load_config(nt_config);
        std::cerr << "effective config: " << config_json(cfg) << "\n";
        const auto demos = load_and_parse(nt_source, def.task);
        std::vector<std::optional<PoseNoise>> levels;
        std::istringstream ss(nt_levels);
        std::string tok;
        while (std::getline(ss, tok, ',')) levels.push_back(parse_level(tok));
        const auto rows = noise_tolerance_experiment(def, ntargs.variant, demos, cfg, profile,
                                                     nt_n_success, levels, nt_seed, nt_jobs);
        const std::string csv = noise_tolerance_csv(rows);
        write_text(nt_out, csv);
        std::cerr << csv_to_table(csv);
        return 0;
    }

    if (peval->parsed()) {
        std::vector<TaskDef> storage;
        const TaskDef& def = pargs.resolve(storage);
        const ControllerProfile& profile = find_profile(pargs.profile);
        Dataset train = load(pe_train);
        if (train.episodes.empty()) throw ValidationError(pe_train + ": no episodes");
        const KnnPolicy policy = KnnPolicy::fit(train.episodes, pe_k);
        const double rate = evaluate(policy, def, pargs.variant, profile, pe_rollouts, pe_seed);
        const int successes = static_cast<int>(std::lround(rate * pe_rollouts));
        std::cout << successes << "/" << pe_rollouts << " " << rate << "\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const demogen::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const demogen::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const demogen::ExpertError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
