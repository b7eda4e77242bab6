// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <riva/util.hpp>

using riva::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = RIVA_CLI_PATH;
const std::string kScenarioDir = RIVA_SCENARIO_DIR;

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& args) {
    fs::path dir = fs::temp_directory_path() / "riva_cli_io";
    fs::create_directories(dir);
    fs::path out_path = dir / "stdout.txt";
    fs::path err_path = dir / "stderr.txt";
    std::string cmd =
        kCli + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
    int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cli prints help and rejects missing subcommands") {
    CliResult help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(riva::contains(help.out, "run"));
    CHECK(riva::contains(help.out, "eval"));
    CHECK(riva::contains(help.out, "export"));

    CliResult bare = run_cli("");
    CHECK(bare.exit_code == 2);
}

TEST_CASE("cli run writes artifacts and reports the outcome") {
    TempDir out("riva_cli_run");
    CliResult r = run_cli("run --scenario " + kScenarioDir +
                          "/s3_detect_healthy.json --agent riva --k 2 --out " +
                          out.path.string());
    CHECK(r.exit_code == 0);
    CHECK(riva::contains(r.out, "success=true"));
    CHECK(riva::contains(r.out, "artifacts: "));

    fs::path run_dir = out.path / "runs" / "s3_detect_healthy" / "riva_k2" / "none" / "0";
    REQUIRE(fs::exists(run_dir / "report.json"));
    REQUIRE(fs::exists(run_dir / "history.json"));
    REQUIRE(fs::exists(run_dir / "trajectory.json"));
    json report = json::parse(slurp(run_dir / "report.json"));
    CHECK(report.at("seed") == 1);  // default repetition seed
    CHECK(report.at("agent") == "riva_k2");

    SECTION("inspect pretty-prints the stored run") {
        CliResult ins = run_cli("inspect --run " + run_dir.string());
        CHECK(ins.exit_code == 0);
        CHECK(riva::contains(ins.out, "answer: "));
        CHECK(riva::contains(ins.out, "goals (k=2):"));
        CHECK(riva::contains(ins.out, "verdicts:"));
    }
}

TEST_CASE("cli run validates its configuration") {
    SECTION("k must be positive") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --k 0");
        CHECK(r.exit_code == 2);
        CHECK(riva::contains(r.err, "k must be ≥ 1"));
    }
    SECTION("max steps must be positive") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --max-steps 0");
        CHECK(r.exit_code == 2);
        CHECK(riva::contains(r.err, "max_steps must be ≥ 1"));
    }
    SECTION("fault conditions are checked") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --fault wild");
        CHECK(r.exit_code == 2);
        CHECK(riva::contains(r.err, "unknown fault condition 'wild'"));
    }
    SECTION("unknown script sets are reported") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --script-set nope");
        CHECK(r.exit_code == 2);
        CHECK(riva::contains(r.err, "no script set 'nope'"));
    }
    SECTION("agent kind is constrained") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --agent oracle");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("cli run supports explicit backends, seeds, and strict mode") {
    TempDir out("riva_cli_run_flags");
    SECTION("scripted backend path override") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --backend scripted:" + kScenarioDir +
                              "/scripts/s3_riva.json --seed 9 --rep 2 --out " +
                              out.path.string());
        CHECK(r.exit_code == 0);
        json report = json::parse(
            slurp(out.path / "runs" / "s3_detect_healthy" / "riva_k2" / "none" / "2" /
                  "report.json"));
        CHECK(report.at("seed") == 9);
        CHECK(report.at("repetition") == 2);
    }
    SECTION("strict mode exits 1 on a scored miss") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s4_detect_burst.json --agent react --fault get_logs "
                              "--strict --out " +
                              out.path.string());
        CHECK(r.exit_code == 1);
        CHECK(riva::contains(r.out, "success=false"));
    }
    SECTION("env seed override still runs to completion") {
        CliResult r = run_cli("run --scenario " + kScenarioDir +
                              "/s3_detect_healthy.json --env-seed 4242 --out " +
                              out.path.string());
        CHECK(r.exit_code == 0);
        CHECK(riva::contains(r.out, "success=true"));
    }
}

TEST_CASE("cli eval runs a suite and export converts the aggregate") {
    TempDir out("riva_cli_eval");
    CliResult r = run_cli("eval --suite " + kScenarioDir +
                          "/suites/k3_starvation_suite.json --workers 2 --out " +
                          out.path.string());
    CHECK(r.exit_code == 0);
    CHECK(riva::contains(r.out, "riva_k3 none"));
    CHECK(riva::contains(r.out, "wrote " + out.path.string() + "/aggregate.json"));
    REQUIRE(fs::exists(out.path / "aggregate.json"));
    REQUIRE(fs::exists(out.path / "runs.csv"));
    REQUIRE(fs::exists(out.path / "cdf.csv"));

    json aggregate = json::parse(slurp(out.path / "aggregate.json"));
    CHECK(aggregate.at("runs").size() == 10);

    std::string runs_csv = slurp(out.path / "runs.csv");
    CHECK(riva::contains(runs_csv,
                         "task_id,agent,condition,repetition,task_type,success,steps,"
                         "max_context_tokens,total_tokens,terminated_by,seed"));

    SECTION("export to cdf-csv on stdout") {
        CliResult exp = run_cli("export --report " + out.path.string() +
                                "/aggregate.json --format cdf-csv");
        CHECK(exp.exit_code == 0);
        CHECK(riva::contains(exp.out, "metric,value,cumulative_fraction"));
        CHECK(riva::contains(exp.out, "riva_k3/none/"));
    }
    SECTION("export to a file") {
        fs::path file = out.path / "export.csv";
        CliResult exp = run_cli("export --report " + out.path.string() +
                                "/aggregate.json --format csv --out " + file.string());
        CHECK(exp.exit_code == 0);
        CHECK(fs::exists(file));
        CHECK(riva::contains(slurp(file), "s2_web_drift,riva_k3,none,0"));
    }
    SECTION("export rejects unknown formats at parse time") {
        CliResult exp = run_cli("export --report " + out.path.string() +
                                "/aggregate.json --format xml");
        CHECK(exp.exit_code == 2);
    }
}

TEST_CASE("cli list-tasks summarizes a suite") {
    CliResult r = run_cli("list-tasks --suite " + kScenarioDir + "/suites/main_suite.json");
    CHECK(r.exit_code == 0);
    CHECK(riva::contains(r.out, "s1_ping_stale"));
    CHECK(riva::contains(r.out, "s6_metric_anomaly"));
    CHECK(riva::contains(r.out, "6 task(s), 2 agent(s), 4 condition(s), 5 repetition(s)"));
}
