// SPDX-License-Identifier: Apache-2.0
#pragma once

// Task scoring, the repetition protocol, and report export. Scoring is a
// pure function of (task type, submitted answer, ground truth, aliases);
// aggregation is deterministic so identical suites produce byte-identical
// reports.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "riva/backend.hpp"
#include "riva/orchestrator.hpp"
#include "riva/prompts.hpp"
#include "riva/scenario.hpp"
#include "riva/toolkit.hpp"

namespace riva {

inline constexpr const char* kReportSchemaVersion = "1";

// ---- scoring ------------------------------------------------------------

// Reads a yes/no out of a free-text detection answer. Unrecognizable
// answers score as wrong for either expectation.
inline std::optional<bool> detection_answer(const std::string& answer) {
    std::string norm = normalize_text(answer);
    std::vector<std::string> tokens = split_words(norm);
    if (tokens.empty()) return std::nullopt;
    if (tokens.front() == "yes") return true;
    if (tokens.front() == "no") return false;
    if (contains(norm, "no incident") || contains(norm, "no fault") ||
        contains(norm, "no violation") || contains(norm, "healthy"))
        return false;
    if (contains(norm, "incident") || contains(norm, "violation") || contains(norm, "fault"))
        return true;
    return std::nullopt;
}

inline bool component_matches(const std::string& answer, const std::string& canonical,
                              const std::vector<std::string>& aliases) {
    if (canonical.empty()) return false;
    std::string norm_answer = normalize_text(answer);
    std::vector<std::string> answer_tokens = split_words(norm_answer);

    std::vector<std::string> targets{canonical};
    targets.insert(targets.end(), aliases.begin(), aliases.end());
    for (const auto& target : targets) {
        std::string norm_target = normalize_text(target);
        if (norm_target.empty()) continue;
        if (norm_answer == norm_target) return true;
        std::vector<std::string> target_tokens = split_words(norm_target);
        if (target_tokens.size() == 1) {
            for (const auto& tok : answer_tokens)
                if (tok == target_tokens.front()) return true;
        } else if (contains(norm_answer, norm_target)) {
            return true;
        }
    }
    return false;
}

inline bool fault_kind_matches(const std::string& answer, const std::string& kind) {
    if (kind.empty()) return false;
    std::string norm = normalize_text(answer);
    if (contains(norm, normalize_text(kind))) return true;
    std::string spaced = kind;
    for (char& c : spaced)
        if (c == '_') c = ' ';
    return contains(norm, normalize_text(spaced));
}

inline bool score(TaskType type, const std::optional<Solution>& solution,
                  const GroundTruth& gt, const std::vector<std::string>& aliases) {
    if (!solution || solution->task_type != type) return false;
    const std::string& answer = solution->answer;
    switch (type) {
        case TaskType::Detection: {
            auto said = detection_answer(answer);
            return said && *said == !gt.violated_properties.empty();
        }
        case TaskType::Localization:
            return component_matches(answer, gt.faulty_component, aliases);
        case TaskType::Analysis:
            return fault_kind_matches(answer, gt.root_cause) &&
                   component_matches(answer, gt.faulty_component, aliases);
    }
    return false;
}

// ---- task & reports ------------------------------------------------------

struct Task {
    std::string id;
    TaskType type = TaskType::Detection;
    std::string scenario_path;
    std::string expected;
};

inline Task make_task(const Scenario& scenario, const std::string& scenario_path) {
    Environment env = scenario.deploy_env();
    Task task;
    task.id = scenario.id;
    task.type = scenario.task_type;
    task.scenario_path = scenario_path;
    task.expected = expected_answer(scenario.task_type, scenario.effective_ground_truth(env));
    return task;
}

struct RunReport {
    std::string task_id;
    std::string agent;      // riva_k<k> or react
    std::string condition;  // none | get_logs | read_metrics | both
    std::size_t repetition = 0;
    std::string task_type;
    bool success = false;
    std::size_t steps = 0;
    std::int64_t max_context_tokens = 0;
    std::int64_t total_tokens = 0;
    std::string terminated_by;
    std::string prompt_hash;
    std::uint64_t seed = 0;
    std::string answer;
    std::string expected;
    std::string error;  // non-empty when the run raised instead of finishing

    json to_json() const {
        return json{{"task_id", task_id},
                    {"agent", agent},
                    {"condition", condition},
                    {"repetition", repetition},
                    {"task_type", task_type},
                    {"success", success},
                    {"steps", steps},
                    {"max_context_tokens", max_context_tokens},
                    {"total_tokens", total_tokens},
                    {"terminated_by", terminated_by},
                    {"prompt_hash", prompt_hash},
                    {"seed", seed},
                    {"answer", answer},
                    {"expected", expected},
                    {"error", error}};
    }

    static RunReport from_json(const json& j) {
        RunReport r;
        r.task_id = j.at("task_id").get<std::string>();
        r.agent = j.at("agent").get<std::string>();
        r.condition = j.at("condition").get<std::string>();
        r.repetition = j.at("repetition").get<std::size_t>();
        r.task_type = j.at("task_type").get<std::string>();
        r.success = j.at("success").get<bool>();
        r.steps = j.at("steps").get<std::size_t>();
        r.max_context_tokens = j.at("max_context_tokens").get<std::int64_t>();
        r.total_tokens = j.at("total_tokens").get<std::int64_t>();
        r.terminated_by = j.at("terminated_by").get<std::string>();
        r.prompt_hash = j.at("prompt_hash").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.answer = j.at("answer").get<std::string>();
        r.expected = j.at("expected").get<std::string>();
        r.error = j.at("error").get<std::string>();
        return r;
    }
};

struct CdfPoint {
    double value = 0.0;
    double cumulative_fraction = 0.0;

    bool operator==(const CdfPoint& o) const {
        return value == o.value && cumulative_fraction == o.cumulative_fraction;
    }
};

inline std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
    std::vector<CdfPoint> cdf;
    if (values.empty()) return cdf;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n && values[i + 1] == values[i]) continue;  // keep last of each run
        cdf.push_back(CdfPoint{values[i], static_cast<double>(i + 1) / static_cast<double>(n)});
    }
    return cdf;
}

struct GroupStats {
    std::string agent;
    std::string condition;
    std::string task_type;
    std::size_t runs = 0;
    std::size_t successes = 0;
    double success_rate_runs = 0.0;
    // Mean over tasks of each task's own success rate; differs from the
    // run-level rate when task counts are uneven.
    double success_rate_task_mean = 0.0;
    std::vector<CdfPoint> steps_cdf;
    std::vector<CdfPoint> tokens_cdf;

    json to_json() const {
        auto cdf_json = [](const std::vector<CdfPoint>& cdf) {
            json arr = json::array();
            for (const auto& p : cdf)
                arr.push_back(
                    json{{"value", p.value}, {"cumulative_fraction", p.cumulative_fraction}});
            return arr;
        };
        return json{{"agent", agent},
                    {"condition", condition},
                    {"task_type", task_type},
                    {"runs", runs},
                    {"successes", successes},
                    {"success_rate_runs", success_rate_runs},
                    {"success_rate_task_mean", success_rate_task_mean},
                    {"steps_cdf", cdf_json(steps_cdf)},
                    {"tokens_cdf", cdf_json(tokens_cdf)}};
    }

    static GroupStats from_json(const json& j) {
        GroupStats g;
        g.agent = j.at("agent").get<std::string>();
        g.condition = j.at("condition").get<std::string>();
        g.task_type = j.at("task_type").get<std::string>();
        g.runs = j.at("runs").get<std::size_t>();
        g.successes = j.at("successes").get<std::size_t>();
        g.success_rate_runs = j.at("success_rate_runs").get<double>();
        g.success_rate_task_mean = j.at("success_rate_task_mean").get<double>();
        auto parse_cdf = [](const json& arr) {
            std::vector<CdfPoint> cdf;
            for (const auto& p : arr)
                cdf.push_back(CdfPoint{p.at("value").get<double>(),
                                       p.at("cumulative_fraction").get<double>()});
            return cdf;
        };
        g.steps_cdf = parse_cdf(j.at("steps_cdf"));
        g.tokens_cdf = parse_cdf(j.at("tokens_cdf"));
        return g;
    }
};

struct AggregateReport {
    std::string suite_id;
    std::size_t repetitions = 0;
    std::vector<RunReport> runs;
    std::vector<GroupStats> groups;

    json to_json() const {
        json runs_json = json::array();
        for (const auto& r : runs) runs_json.push_back(r.to_json());
        json groups_json = json::array();
        for (const auto& g : groups) groups_json.push_back(g.to_json());
        return json{{"schema_version", kReportSchemaVersion},
                    {"suite_id", suite_id},
                    {"repetitions", repetitions},
                    {"runs", runs_json},
                    {"groups", groups_json}};
    }

    static AggregateReport from_json(const json& j) {
        if (j.at("schema_version").get<std::string>() != kReportSchemaVersion)
            throw std::runtime_error("unsupported report schema version");
        AggregateReport report;
        report.suite_id = j.at("suite_id").get<std::string>();
        report.repetitions = j.at("repetitions").get<std::size_t>();
        for (const auto& rj : j.at("runs")) report.runs.push_back(RunReport::from_json(rj));
        for (const auto& gj : j.at("groups"))
            report.groups.push_back(GroupStats::from_json(gj));
        return report;
    }
};

// ---- run execution -------------------------------------------------------

struct RunArtifacts {
    RunReport report;
    json trajectory;
    json history;
};

// One isolated run: fresh environment, fresh history, scripted or live
// backend. Exceptions are captured in the report, never propagated.
inline RunArtifacts run_task(const Scenario& scenario, const AgentSpec& agent,
                             FaultCondition condition, std::size_t repetition,
                             std::uint64_t rep_seed, std::size_t max_steps,
                             ChatBackend& backend) {
    RunArtifacts artifacts;
    RunReport& report = artifacts.report;
    report.task_id = scenario.id;
    report.agent = agent.label();
    report.condition = to_string(condition);
    report.repetition = repetition;
    report.task_type = to_string(scenario.task_type);
    report.prompt_hash = prompt_template_hash();
    report.seed = rep_seed;
    artifacts.trajectory = json::object();
    artifacts.history = json::object();

    try {
        Environment env = scenario.deploy_env();
        ToolRegistry registry = default_registry();
        ToolFaultConfig faults = fault_config_for(registry, condition);
        OrchestratorConfig config;
        config.k = agent.k;
        config.max_steps = max_steps;

        RunOutcome outcome =
            agent.kind == "riva"
                ? run_riva(scenario.spec, scenario.question, scenario.task_type, env,
                           registry, faults, backend, backend, config)
                : run_react(scenario.spec, scenario.question, scenario.task_type, env,
                            registry, faults, backend, config);

        GroundTruth gt = scenario.effective_ground_truth(env);
        report.expected = expected_answer(scenario.task_type, gt);
        report.answer = outcome.solution ? outcome.solution->answer : std::string{};
        report.terminated_by = to_string(outcome.trajectory.terminated_by);
        report.steps = outcome.trajectory.counted_steps();
        UsageSummary usage = outcome.trajectory.usage();
        report.max_context_tokens = usage.max_context_tokens;
        report.total_tokens = usage.total.total_tokens;
        report.success = outcome.trajectory.terminated_by == RunEnd::Submit &&
                         score(scenario.task_type, outcome.solution, gt, scenario.aliases);

        json verdicts = json::object();
        for (const auto& [id, verdict] : outcome.verdicts) {
            json evidence = json::array();
            for (std::size_t e : verdict.evidence) evidence.push_back(e);
            verdicts[id] = json{{"value", to_string(verdict.value)},
                                {"rationale", verdict.rationale},
                                {"evidence", evidence}};
        }
        artifacts.trajectory = outcome.trajectory.to_json();
        artifacts.trajectory["verdicts"] = verdicts;
        artifacts.history = outcome.history.snapshot();
    } catch (const std::exception& e) {
        report.error = e.what();
        report.success = false;
        if (report.terminated_by.empty()) report.terminated_by = "error";
    }
    return artifacts;
}

inline std::string run_directory(const std::string& base, const RunReport& report) {
    return base + "/runs/" + report.task_id + "/" + report.agent + "/" + report.condition +
           "/" + std::to_string(report.repetition);
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline void write_run_artifacts(const std::string& base, const RunArtifacts& artifacts) {
    std::string dir = run_directory(base, artifacts.report);
    std::filesystem::create_directories(dir);
    write_json_file(dir + "/trajectory.json", artifacts.trajectory);
    write_json_file(dir + "/history.json", artifacts.history);
    write_json_file(dir + "/report.json", artifacts.report.to_json());
}

// ---- suite evaluation ----------------------------------------------------

struct EvalOptions {
    std::size_t workers = 1;
    std::string out_dir;  // empty: no per-run artifacts written
};

namespace detail {

struct RunJob {
    const Scenario* scenario = nullptr;
    const AgentSpec* agent = nullptr;
    FaultCondition condition = FaultCondition::None;
    std::size_t repetition = 0;
    std::uint64_t rep_seed = 0;
};

inline RunArtifacts execute_job(const RunJob& job, std::size_t max_steps,
                                const std::string& out_dir) {
    ScriptedBackend backend =
        ScriptedBackend::load(job.scenario->script_path(job.agent->script_set));
    RunArtifacts artifacts = run_task(*job.scenario, *job.agent, job.condition,
                                      job.repetition, job.rep_seed, max_steps, backend);
    if (!out_dir.empty()) write_run_artifacts(out_dir, artifacts);
    return artifacts;
}

}  // namespace detail

inline AggregateReport aggregate(const std::string& suite_id, std::size_t repetitions,
                                 std::vector<RunReport> runs) {
    AggregateReport report;
    report.suite_id = suite_id;
    report.repetitions = repetitions;
    report.runs = std::move(runs);

    // (agent, condition, task_type) -> per-task success tallies
    std::map<std::tuple<std::string, std::string, std::string>,
             std::map<std::string, std::pair<std::size_t, std::size_t>>>
        tallies;
    std::map<std::tuple<std::string, std::string, std::string>,
             std::pair<std::vector<double>, std::vector<double>>>
        samples;
    for (const auto& run : report.runs) {
        auto key = std::make_tuple(run.agent, run.condition, run.task_type);
        auto& per_task = tallies[key][run.task_id];
        per_task.first += run.success ? 1 : 0;
        per_task.second += 1;
        samples[key].first.push_back(static_cast<double>(run.steps));
        samples[key].second.push_back(static_cast<double>(run.total_tokens));
    }

    for (const auto& [key, per_task] : tallies) {
        GroupStats group;
        group.agent = std::get<0>(key);
        group.condition = std::get<1>(key);
        group.task_type = std::get<2>(key);
        double task_rate_sum = 0.0;
        for (const auto& [task_id, tally] : per_task) {
            group.successes += tally.first;
            group.runs += tally.second;
            task_rate_sum +=
                static_cast<double>(tally.first) / static_cast<double>(tally.second);
        }
        group.success_rate_runs =
            static_cast<double>(group.successes) / static_cast<double>(group.runs);
        group.success_rate_task_mean = task_rate_sum / static_cast<double>(per_task.size());
        group.steps_cdf = empirical_cdf(samples[key].first);
        group.tokens_cdf = empirical_cdf(samples[key].second);
        report.groups.push_back(std::move(group));
    }
    return report;
}

inline AggregateReport evaluate(const Suite& suite, const EvalOptions& options = {}) {
    std::vector<detail::RunJob> jobs;
    for (const auto& scenario : suite.tasks)
        for (const auto& agent : suite.agents)
            for (FaultCondition condition : suite.conditions)
                for (std::size_t rep = 0; rep < suite.repetitions; ++rep)
                    jobs.push_back(detail::RunJob{&scenario, &agent, condition, rep,
                                                  suite.seeds[rep]});

    std::vector<RunReport> reports(jobs.size());
    std::size_t workers = std::max<std::size_t>(1, options.workers);
    workers = std::min(workers, jobs.size());

    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i)
            reports[i] =
                detail::execute_job(jobs[i], suite.max_steps, options.out_dir).report;
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                reports[i] =
                    detail::execute_job(jobs[i], suite.max_steps, options.out_dir).report;
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return aggregate(suite.id, suite.repetitions, std::move(reports));
}

// ---- export ----------------------------------------------------------------

inline std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline std::string format_fraction(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

inline void export_report(const AggregateReport& report, const std::string& format,
                          std::ostream& out) {
    if (format == "json") {
        out << report.to_json().dump(2) << "\n";
        return;
    }
    if (format == "csv") {
        out << "task_id,agent,condition,repetition,task_type,success,steps,"
               "max_context_tokens,total_tokens,terminated_by,seed\n";
        for (const auto& r : report.runs) {
            out << csv_escape(r.task_id) << "," << csv_escape(r.agent) << ","
                << csv_escape(r.condition) << "," << r.repetition << ","
                << csv_escape(r.task_type) << "," << (r.success ? "true" : "false") << ","
                << r.steps << "," << r.max_context_tokens << "," << r.total_tokens << ","
                << csv_escape(r.terminated_by) << "," << r.seed << "\n";
        }
        return;
    }
    if (format == "cdf-csv") {
        out << "metric,value,cumulative_fraction\n";
        for (const auto& g : report.groups) {
            std::string prefix = g.agent + "/" + g.condition + "/" + g.task_type + "/";
            for (const auto& p : g.steps_cdf)
                out << csv_escape(prefix + "steps") << "," << format_fraction(p.value) << ","
                    << format_fraction(p.cumulative_fraction) << "\n";
            for (const auto& p : g.tokens_cdf)
                out << csv_escape(prefix + "tokens") << "," << format_fraction(p.value)
                    << "," << format_fraction(p.cumulative_fraction) << "\n";
        }
        return;
    }
    throw std::invalid_argument("unknown export format '" + format +
                                "' (expected json, csv, or cdf-csv)");
}

}  // namespace riva
