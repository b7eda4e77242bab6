// SPDX-License-Identifier: Apache-2.0

// Command-line entry point: single runs, full suite evaluations, run
// inspection, report export, and task listings.

#include <CLI11.hpp>
#include <iostream>
#include <memory>
#include <string>

#include <riva/riva.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitScoredFailure = 1;
constexpr int kExitConfigError = 2;

struct BackendChoice {
    std::string scripted_path;
    std::string http_url;
};

// Selector grammar: "scripted:<path>", "http://<url>", "https://<url>",
// or "http:<url>" for explicitness. Empty means scenario default.
BackendChoice parse_backend_selector(const std::string& selector) {
    BackendChoice choice;
    if (selector.empty()) return choice;
    if (selector.rfind("scripted:", 0) == 0) {
        choice.scripted_path = selector.substr(9);
        if (choice.scripted_path.empty())
            throw std::invalid_argument("scripted backend needs a script path");
        return choice;
    }
    if (selector.rfind("http://", 0) == 0 || selector.rfind("https://", 0) == 0) {
        choice.http_url = selector;
        return choice;
    }
    if (selector.rfind("http:", 0) == 0) {
        choice.http_url = selector.substr(5);
        return choice;
    }
    throw std::invalid_argument("unknown backend selector '" + selector +
                                "' (expected scripted:<path> or an http(s) URL)");
}

std::unique_ptr<riva::ChatBackend> make_backend(const BackendChoice& choice,
                                                const riva::Scenario& scenario,
                                                const std::string& script_set,
                                                const std::string& model,
                                                const std::string& auth_env,
                                                std::uint64_t rep_seed) {
    if (!choice.http_url.empty()) {
        riva::HttpBackendConfig config;
        config.base_url = choice.http_url;
        config.model = model;
        config.auth_env_var = auth_env;
        config.request_seed = rep_seed;
        return std::make_unique<riva::HttpBackend>(config);
    }
    std::string path = choice.scripted_path.empty() ? scenario.script_path(script_set)
                                                    : choice.scripted_path;
    return std::make_unique<riva::ScriptedBackend>(riva::ScriptedBackend::load(path));
}

void print_report_line(const riva::RunReport& r, std::ostream& out) {
    out << r.task_id << " agent=" << r.agent << " condition=" << r.condition
        << " rep=" << r.repetition << " success=" << (r.success ? "true" : "false")
        << " steps=" << r.steps << " terminated_by=" << r.terminated_by;
    if (!r.error.empty()) out << " error=" << r.error;
    out << "\n";
}

int cmd_run(const std::string& scenario_path, const std::string& agent_kind, std::size_t k,
            std::size_t max_steps, const std::string& fault, const std::string& backend_sel,
            const std::string& model, const std::string& auth_env, std::uint64_t seed,
            bool env_seed_set, std::uint64_t env_seed, std::size_t rep,
            const std::string& script_set_flag, const std::string& out_dir, bool strict) {
    riva::Scenario scenario = riva::load_scenario(scenario_path);
    if (env_seed_set) scenario.seed = env_seed;

    riva::AgentSpec agent;
    agent.kind = agent_kind;
    agent.k = k;
    agent.script_set = script_set_flag.empty() ? agent_kind : script_set_flag;

    auto condition = riva::fault_condition_from_string(fault);
    if (!condition) {
        std::cerr << "error: unknown fault condition '" << fault
                  << "' (expected none, get_logs, read_metrics, or both)\n";
        return kExitConfigError;
    }

    BackendChoice choice = parse_backend_selector(backend_sel);
    bool needs_script = choice.http_url.empty() && choice.scripted_path.empty();
    if (needs_script && scenario.scripts.find(agent.script_set) == scenario.scripts.end()) {
        std::cerr << "error: scenario has no script set '" << agent.script_set
                  << "'; pass --backend\n";
        return kExitConfigError;
    }
    auto backend =
        make_backend(choice, scenario, agent.script_set, model, auth_env, seed);

    riva::RunArtifacts artifacts =
        riva::run_task(scenario, agent, *condition, rep, seed, max_steps, *backend);
    riva::write_run_artifacts(out_dir, artifacts);

    print_report_line(artifacts.report, std::cout);
    std::cout << "artifacts: " << riva::run_directory(out_dir, artifacts.report) << "\n";
    if (strict && !artifacts.report.success) return kExitScoredFailure;
    return kExitOk;
}

int cmd_eval(const std::string& suite_path, const std::string& out_dir, std::size_t workers,
             bool strict) {
    riva::Suite suite = riva::load_suite(suite_path);
    riva::EvalOptions options;
    options.workers = workers;
    options.out_dir = out_dir;
    riva::AggregateReport report = riva::evaluate(suite, options);

    std::filesystem::create_directories(out_dir);
    riva::write_json_file(out_dir + "/aggregate.json", report.to_json());
    {
        std::ofstream csv(out_dir + "/runs.csv", std::ios::binary);
        riva::export_report(report, "csv", csv);
    }
    {
        std::ofstream csv(out_dir + "/cdf.csv", std::ios::binary);
        riva::export_report(report, "cdf-csv", csv);
    }

    bool all_ok = true;
    for (const auto& g : report.groups) {
        std::cout << g.agent << " " << g.condition << " " << g.task_type << ": "
                  << g.successes << "/" << g.runs << " ("
                  << riva::format_fraction(g.success_rate_runs * 100.0) << "%)\n";
    }
    for (const auto& r : report.runs) all_ok = all_ok && r.success;
    std::cout << "wrote " << out_dir << "/aggregate.json, runs.csv, cdf.csv and "
              << report.runs.size() << " run directories under " << out_dir << "/runs\n";
    if (strict && !all_ok) return kExitScoredFailure;
    return kExitOk;
}

int cmd_inspect(const std::string& run_dir) {
    riva::json report = riva::json::parse(riva::read_text_file(run_dir + "/report.json"));
    riva::json history = riva::json::parse(riva::read_text_file(run_dir + "/history.json"));
    riva::json trajectory =
        riva::json::parse(riva::read_text_file(run_dir + "/trajectory.json"));

    riva::RunReport r = riva::RunReport::from_json(report);
    print_report_line(r, std::cout);
    std::cout << "answer: " << (r.answer.empty() ? "(none)" : r.answer)
              << "\nexpected: " << r.expected << "\n";

    if (history.contains("goals")) {
        std::cout << "goals (k=" << history.value("k", 0) << "):\n";
        for (const auto& [id, goal] : history.at("goals").items()) {
            const auto& records = goal.at("records");
            std::cout << "  " << id << " [" << goal.at("status").get<std::string>() << ", "
                      << goal.at("origin").get<std::string>() << "] " << records.size()
                      << " record(s)\n";
            for (const auto& rec : records) {
                std::string result = rec.at("result").get<std::string>();
                if (result.size() > 100) result = result.substr(0, 100) + "...";
                for (char& c : result)
                    if (c == '\n') c = ' ';
                std::cout << "    " << rec.at("tool").get<std::string>() << " -> "
                          << (result.empty() ? "(empty)" : result) << "\n";
                std::cout << "      analysis: " << rec.at("analysis").get<std::string>()
                          << "\n";
            }
        }
    }
    if (trajectory.contains("verdicts")) {
        std::cout << "verdicts:\n";
        for (const auto& [id, verdict] : trajectory.at("verdicts").items())
            std::cout << "  " << id << " = " << verdict.at("value").get<std::string>()
                      << "\n";
    }
    std::cout << "trajectory: " << trajectory.value("counted_steps", 0)
              << " counted step(s), terminated_by="
              << trajectory.value("terminated_by", std::string("?")) << "\n";
    return kExitOk;
}

int cmd_export(const std::string& report_path, const std::string& format,
               const std::string& out_path) {
    riva::AggregateReport report =
        riva::AggregateReport::from_json(riva::json::parse(riva::read_text_file(report_path)));
    if (out_path.empty()) {
        riva::export_report(report, format, std::cout);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + out_path);
        riva::export_report(report, format, out);
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_list_tasks(const std::string& suite_path) {
    riva::Suite suite = riva::load_suite(suite_path);
    for (const auto& scenario : suite.tasks) {
        riva::Task task = riva::make_task(scenario, scenario.spec_path);
        std::cout << task.id << "  " << riva::to_string(task.type)
                  << "  expected: " << task.expected << "\n";
    }
    std::cout << suite.tasks.size() << " task(s), " << suite.agents.size() << " agent(s), "
              << suite.conditions.size() << " condition(s), " << suite.repetitions
              << " repetition(s)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"riva: spec-driven infrastructure verification with cross-validated tool calls"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run one agent on one scenario");
    std::string run_scenario, run_agent = "riva", run_fault = "none", run_backend;
    std::string run_model = "default", run_auth_env = "RIVA_API_KEY", run_script_set;
    std::string run_out = "riva_out";
    std::size_t run_k = 2, run_max_steps = 45, run_rep = 0;
    std::uint64_t run_seed = 1, run_env_seed = 0;
    bool run_strict = false;
    run->add_option("--scenario", run_scenario, "Scenario JSON file")->required();
    run->add_option("--agent", run_agent, "Agent kind: riva or react")
        ->check(CLI::IsMember({"riva", "react"}));
    run->add_option("--k", run_k, "Records required per property goal (riva)");
    run->add_option("--max-steps", run_max_steps, "Combined step budget");
    run->add_option("--fault", run_fault,
                    "Tool fault condition: none, get_logs, read_metrics, both");
    run->add_option("--backend", run_backend,
                    "Backend selector: scripted:<path> or an http(s) URL "
                    "(default: the scenario's script for the agent)");
    run->add_option("--model", run_model, "Model name for HTTP backends");
    run->add_option("--auth-env", run_auth_env,
                    "Environment variable holding the HTTP backend credential");
    run->add_option("--seed", run_seed, "Repetition seed (recorded; sent to HTTP backends)");
    auto* env_seed_opt =
        run->add_option("--env-seed", run_env_seed,
                        "Override the scenario's environment seed");
    run->add_option("--rep", run_rep, "Repetition index for the artifact layout");
    run->add_option("--script-set", run_script_set,
                    "Scenario script set name (default: the agent kind)");
    run->add_option("--out", run_out, "Output directory");
    run->add_flag("--strict", run_strict, "Exit 1 when the run scores as a failure");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a full suite");
    std::string eval_suite, eval_out = "riva_out";
    std::size_t eval_workers = 1;
    bool eval_strict = false;
    eval->add_option("--suite", eval_suite, "Suite JSON file")->required();
    eval->add_option("--out", eval_out, "Output directory");
    eval->add_option("--workers", eval_workers, "Parallel run workers");
    eval->add_flag("--strict", eval_strict, "Exit 1 when any run scores as a failure");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Pretty-print one run's artifacts");
    std::string inspect_dir;
    inspect->add_option("--run", inspect_dir, "Run directory with report/history/trajectory")
        ->required();

    // export
    auto* exp = app.add_subcommand("export", "Convert an aggregate report");
    std::string export_report_path, export_format = "json", export_out;
    exp->add_option("--report", export_report_path, "aggregate.json produced by eval")
        ->required();
    exp->add_option("--format", export_format, "json, csv, or cdf-csv")
        ->check(CLI::IsMember({"json", "csv", "cdf-csv"}));
    exp->add_option("--out", export_out, "Output file (default: stdout)");

    // list-tasks
    auto* list = app.add_subcommand("list-tasks", "List a suite's tasks and expected answers");
    std::string list_suite;
    list->add_option("--suite", list_suite, "Suite JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run->parsed()) {
            if (run_k == 0) {
                std::cerr << "error: k must be ≥ 1\n";
                return kExitConfigError;
            }
            if (run_max_steps == 0) {
                std::cerr << "error: max_steps must be ≥ 1\n";
                return kExitConfigError;
            }
            return cmd_run(run_scenario, run_agent, run_k, run_max_steps, run_fault,
                           run_backend, run_model, run_auth_env, run_seed,
                           env_seed_opt->count() > 0, run_env_seed, run_rep, run_script_set,
                           run_out, run_strict);
        }
        if (eval->parsed()) return cmd_eval(eval_suite, eval_out, eval_workers, eval_strict);
        if (inspect->parsed()) return cmd_inspect(inspect_dir);
        if (exp->parsed()) return cmd_export(export_report_path, export_format, export_out);
        if (list->parsed()) return cmd_list_tasks(list_suite);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
