#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "demogen/datastore.hpp"

using namespace demogen;
namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* env = std::getenv("DEMOGEN_BIN");
    REQUIRE(env != nullptr);
    return env;
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "demogen_cli_tests";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string run_stdout(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const std::string cmd = bin() + " " + args + " >" + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    (void)status;
    std::ifstream in(out);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("collect-source writes n episodes and is byte-reproducible") {
    const fs::path dir = work_dir();
    const fs::path a = dir / "src_a.jsonl";
    const fs::path b = dir / "src_b.jsonl";

    CHECK(run("collect-source --task stack --variant d0 --n 10 --seed 0 --out " + a.string()) == 0);
    const Dataset ds = load(a);
    CHECK(ds.episodes.size() == 10);
    CHECK(ds.task == "stack");
    for (const auto& ep : ds.episodes) CHECK(ep.success);

    CHECK(run("collect-source --task stack --variant d0 --n 10 --seed 0 --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("collect-source --variant d0 --n 5 --out /tmp/x.jsonl") == 2);  // missing --task
    CHECK(run("collect-source --task no_such_task --variant d0 --n 1 --out /tmp/x.jsonl") == 2);
    CHECK(run("analyze coverage --dataset /no/such/file.jsonl") == 2);
    CHECK(run("policy-eval --train /no/such/file.jsonl --task stack --variant d0") == 2);
    CHECK(run("policy-eval --train /tmp/x.jsonl --task stack --variant d0 --rollouts 0") == 2);
    CHECK(run("") == 2);  // no subcommand
    CHECK(run("--help") == 0);
    CHECK(run("generate --help") == 0);
}

TEST_CASE("generate honors config, prints dgr, embeds the report") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "gen_src.jsonl";
    REQUIRE(run("collect-source --task stack --variant d0 --n 10 --seed 0 --out " + src.string()) ==
            0);

    const fs::path cfg = dir / "cfg.json";
    {
        std::ofstream f(cfg);
        f << R"({"strategy":"nearest_neighbor","nn_k":3,"per_subtask":true,"sigma":0.05})";
    }
    const fs::path out = dir / "gen.jsonl";
    const std::string text =
        run_stdout("generate --task stack --variant d1 --source " + src.string() +
                   " --n-success 25 --config " + cfg.string() + " --seed 7 --out " + out.string());
    CHECK(text.find("dgr ") == 0);

    const Dataset ds = load(out);
    CHECK(ds.episodes.size() == 25);
    REQUIRE(ds.report.has_value());
    CHECK(ds.report->successes == 25);
    CHECK(ds.report->complete);
    for (const auto& ep : ds.episodes) {
        CHECK(ep.success);
        CHECK(ep.source_ids.size() == 2);
    }
}

TEST_CASE("generate is byte-identical across reruns and jobs counts") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "jobs_src.jsonl";
    REQUIRE(run("collect-source --task peg_insert --variant d0 --n 6 --seed 2 --out " +
                src.string()) == 0);

    const fs::path one = dir / "jobs1.jsonl";
    const fs::path eight = dir / "jobs8.jsonl";
    CHECK(run("generate --task peg_insert --variant d1 --source " + src.string() +
              " --n-success 15 --seed 5 --jobs 1 --out " + one.string()) == 0);
    CHECK(run("generate --task peg_insert --variant d1 --source " + src.string() +
              " --n-success 15 --seed 5 --jobs 8 --out " + eight.string()) == 0);
    CHECK(slurp(one) == slurp(eight));
}

TEST_CASE("generate exits 3 when the attempt budget runs out") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "budget_src.jsonl";
    REQUIRE(run("collect-source --task stack --variant d0 --n 3 --seed 0 --out " + src.string()) ==
            0);
    const fs::path out = dir / "budget.jsonl";
    CHECK(run("generate --task stack --variant d1 --source " + src.string() +
              " --n-success 500 --max-attempts 5 --seed 0 --out " + out.string()) == 3);
    const Dataset ds = load(out);  // partial file still written and flagged
    REQUIRE(ds.report.has_value());
    CHECK(!ds.report->complete);
    CHECK(ds.report->attempts == 5);
}

TEST_CASE("analyze coverage and provenance emit CSV") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "an_src.jsonl";
    const fs::path gen = dir / "an_gen.jsonl";
    REQUIRE(run("collect-source --task stack --variant d0 --n 5 --seed 1 --out " + src.string()) ==
            0);
    REQUIRE(run("generate --task stack --variant d1 --source " + src.string() +
                " --n-success 20 --seed 3 --out " + gen.string()) == 0);

    const std::string cov = run_stdout("analyze coverage --dataset " + gen.string() + " --bins 3");
    CHECK(cov.find("coverage ") != std::string::npos);

    const fs::path csv = dir / "prov.csv";
    const std::string prov = run_stdout("analyze provenance --dataset " + gen.string() +
                                        " --out " + csv.string());
    CHECK(prov.find("top3_concentration ") != std::string::npos);
    const std::string csv_text = slurp(csv);
    CHECK(csv_text.find("subtask,source_id,successes") == 0);
}

TEST_CASE("analyze seed-variance and noise-tolerance run end to end") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "exp_src.jsonl";
    REQUIRE(run("collect-source --task peg_insert --variant d0 --n 5 --seed 0 --out " +
                src.string()) == 0);

    const std::string sv = run_stdout("analyze seed-variance --task peg_insert --variant d1 "
                                      "--source " +
                                      src.string() + " --n-success 10 --seeds 0,1,2");
    CHECK(sv.find("dgr mean ") != std::string::npos);

    const fs::path csv = dir / "noise.csv";
    CHECK(run("analyze noise-tolerance --task peg_insert --variant d1 --source " + src.string() +
              " --n-success 10 --levels none,l1 --seed 1 --out " + csv.string()) == 0);
    const std::string text = slurp(csv);
    CHECK(text.find("pos_noise_m,rot_noise_rad") == 0);
    CHECK(text.find("\n0,0,") != std::string::npos);
    CHECK(text.find("\n0.005,") != std::string::npos);
}

TEST_CASE("policy-eval prints successes/rollouts rate and reruns identically") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "pe_src.jsonl";
    REQUIRE(run("collect-source --task stack --variant d0 --n 5 --seed 0 --out " + src.string()) ==
            0);
    const std::string a = run_stdout("policy-eval --train " + src.string() +
                                     " --task stack --variant d0 --k 1 --rollouts 10 --seed 4");
    const std::string b = run_stdout("policy-eval --train " + src.string() +
                                     " --task stack --variant d0 --k 1 --rollouts 10 --seed 4");
    CHECK(a == b);
    CHECK(a.find("/10 ") != std::string::npos);
}

TEST_CASE("DEMOGEN_LOG=info emits progress to stderr") {
    const fs::path dir = work_dir();
    const fs::path src = dir / "log_src.jsonl";
    REQUIRE(run("collect-source --task stack --variant d0 --n 3 --seed 0 --out " + src.string()) ==
            0);
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = "DEMOGEN_LOG=info " + bin() + " generate --task stack --variant d1" +
                            " --source " + src.string() + " --n-success 5 --seed 0 --out " +
                            (dir / "log_gen.jsonl").string() + " >/dev/null 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(slurp(err).find("[info]") != std::string::npos);
}

TEST_CASE("custom task files load and run") {
    const fs::path dir = work_dir();
    const fs::path taskfile = dir / "tasks.json";
    {
        std::ofstream f(taskfile);
        f << R"({"tasks":[{
            "name":"mini_stack","success_check":"stack","horizon":300,
            "objects":[{"id":"top","class":"block","param":0.02},
                        {"id":"base","class":"block","param":0.025}],
            "subtasks":[{"reference":"top","metric":"grasped"},
                         {"reference":"base","metric":"task_success"}],
            "variants":{"tiny":{
                "top":{"x":[-0.1,-0.05],"y":[-0.03,0.03],"theta":[0,0]},
                "base":{"x":[0.05,0.1],"y":[-0.03,0.03],"theta":[0,0]}}}}]})";
    }
    const fs::path out = dir / "mini.jsonl";
    CHECK(run("collect-source --task mini_stack --variant tiny --n 3 --seed 0 --task-file " +
              taskfile.string() + " --out " + out.string()) == 0);
    const Dataset ds = load(out);
    CHECK(ds.episodes.size() == 3);
    CHECK(ds.task == "mini_stack");
}
