// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario and suite definition files. A scenario bundles a spec document,
// an environment seed, the injected drift faults, the task question, and
// the scripted replies for each agent kind; a suite is the cross-product
// description the evaluation harness executes.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "riva/env.hpp"
#include "riva/orchestrator.hpp"
#include "riva/spec.hpp"
#include "riva/toolkit.hpp"
#include "riva/util.hpp"

namespace riva {

struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base_dir,
                                const std::string& relative) {
    std::filesystem::path p(relative);
    if (p.is_absolute()) return p.string();
    return (base_dir / p).lexically_normal().string();
}

inline DriftFault parse_fault(const json& j) {
    DriftFault fault;
    std::string phase = j.value("phase", std::string("post_deployment"));
    if (phase == "provisioning")
        fault.phase = FaultPhase::Provisioning;
    else if (phase == "post_deployment")
        fault.phase = FaultPhase::PostDeployment;
    else
        throw ScenarioError("unknown fault phase '" + phase + "'");

    std::string kind = j.at("kind").get<std::string>();
    if (kind == "attribute_drift") {
        AttributeDrift f;
        f.resource = j.at("resource").get<std::string>();
        f.attribute = j.at("attribute").get<std::string>();
        f.new_value = value_from_json(j.at("value"));
        fault.kind = f;
    } else if (kind == "service_down") {
        fault.kind = ServiceDown{j.at("resource").get<std::string>(),
                                 j.at("service").get<std::string>()};
    } else if (kind == "stale_mapping") {
        fault.kind = StaleMapping{j.at("logical_id").get<std::string>(),
                                  j.at("wrong_target").get<std::string>()};
    } else if (kind == "metric_anomaly") {
        fault.kind = MetricAnomaly{j.at("resource").get<std::string>(),
                                   j.at("metric").get<std::string>(),
                                   j.at("multiplier").get<double>()};
    } else if (kind == "log_error_burst") {
        fault.kind = LogErrorBurst{j.at("resource").get<std::string>(),
                                   j.at("pattern").get<std::string>()};
    } else {
        throw ScenarioError("unknown fault kind '" + kind + "'");
    }
    return fault;
}

}  // namespace detail

struct Scenario {
    std::string id;
    std::string spec_path;
    Specification spec;
    std::uint64_t seed = 0;
    TaskType task_type = TaskType::Detection;
    std::string question;
    std::vector<DriftFault> faults;
    std::size_t surfaces_per_property = 2;
    std::vector<std::string> aliases;
    // Canonical observation call per tool, used by the detectability checks.
    std::map<std::string, std::map<std::string, Value>> probes;
    // Script set name (riva, riva_k3, react, ...) -> script file path.
    std::map<std::string, std::string> scripts;
    std::optional<json> ground_truth_overrides;

    Environment deploy_env() const {
        Environment env = Environment::deploy(spec, seed);
        for (const auto& fault : faults) env.inject_drift(fault);
        return env;
    }

    GroundTruth effective_ground_truth(const Environment& env) const {
        GroundTruth gt = env.ground_truth();
        if (ground_truth_overrides) {
            const json& o = *ground_truth_overrides;
            if (o.contains("faulty_component"))
                gt.faulty_component = o["faulty_component"].get<std::string>();
            if (o.contains("root_cause")) gt.root_cause = o["root_cause"].get<std::string>();
            if (o.contains("violated_properties")) {
                gt.violated_properties.clear();
                for (const auto& p : o["violated_properties"])
                    gt.violated_properties.insert(p.get<std::string>());
            }
        }
        return gt;
    }

    std::string script_path(const std::string& set_name) const {
        auto it = scripts.find(set_name);
        if (it == scripts.end())
            throw ScenarioError("scenario '" + id + "' has no script set '" + set_name + "'");
        return it->second;
    }
};

// The answer a perfect agent would submit, derived from ground truth alone.
inline std::string expected_answer(TaskType type, const GroundTruth& gt) {
    switch (type) {
        case TaskType::Detection:
            return gt.violated_properties.empty() ? "no" : "yes";
        case TaskType::Localization:
            return gt.faulty_component;
        case TaskType::Analysis:
            return gt.root_cause + " on " + gt.faulty_component;
    }
    return {};
}

inline Scenario load_scenario(const std::string& path) {
    json j = json::parse(read_text_file(path));
    std::filesystem::path base = std::filesystem::path(path).parent_path();

    Scenario s;
    s.id = j.at("id").get<std::string>();
    s.spec_path = detail::resolve_path(base, j.at("spec_path").get<std::string>());
    s.spec = parse_spec(read_text_file(s.spec_path));
    s.seed = j.at("seed").get<std::uint64_t>();
    auto type = task_type_from_string(j.at("task_type").get<std::string>());
    if (!type) throw ScenarioError("unknown task_type in scenario '" + s.id + "'");
    s.task_type = *type;
    s.question = j.at("question").get<std::string>();
    for (const auto& fj : j.value("faults", json::array()))
        s.faults.push_back(detail::parse_fault(fj));
    s.surfaces_per_property = j.at("surfaces_per_property").get<std::size_t>();
    for (const auto& a : j.value("aliases", json::array()))
        s.aliases.push_back(a.get<std::string>());
    const json probes = j.value("probes", json::object());
    for (const auto& [tool, args] : probes.items()) {
        std::map<std::string, Value> parsed;
        for (const auto& [name, value] : args.items())
            parsed.emplace(name, value_from_json(value));
        s.probes.emplace(tool, std::move(parsed));
    }
    const json scripts = j.value("scripts", json::object());
    for (const auto& [set_name, script] : scripts.items())
        s.scripts.emplace(set_name, detail::resolve_path(base, script.get<std::string>()));
    if (j.contains("ground_truth_overrides"))
        s.ground_truth_overrides = j["ground_truth_overrides"];
    return s;
}

struct AgentSpec {
    std::string kind;  // riva | react
    std::size_t k = 2;
    std::string script_set;  // defaults to kind

    std::string label() const {
        if (kind == "riva") return "riva_k" + std::to_string(k);
        return kind;
    }
};

struct Suite {
    std::string id;
    std::vector<Scenario> tasks;
    std::vector<AgentSpec> agents;
    std::vector<FaultCondition> conditions;
    std::size_t repetitions = 5;
    std::vector<std::uint64_t> seeds;  // one per repetition, distinct
    std::size_t max_steps = 45;
};

inline Suite load_suite(const std::string& path) {
    json j = json::parse(read_text_file(path));
    std::filesystem::path base = std::filesystem::path(path).parent_path();

    Suite suite;
    suite.id = j.at("id").get<std::string>();
    for (const auto& task : j.at("tasks"))
        suite.tasks.push_back(
            load_scenario(detail::resolve_path(base, task.get<std::string>())));
    if (suite.tasks.empty()) throw ScenarioError("suite lists no tasks");

    for (const auto& aj : j.at("agents")) {
        AgentSpec agent;
        agent.kind = aj.at("kind").get<std::string>();
        if (agent.kind != "riva" && agent.kind != "react")
            throw ScenarioError("unknown agent kind '" + agent.kind + "'");
        agent.k = aj.value("k", std::size_t{2});
        if (agent.k == 0) throw ScenarioError("k must be >= 1");
        agent.script_set = aj.value("script_set", agent.kind);
        suite.agents.push_back(agent);
    }
    if (suite.agents.empty()) throw ScenarioError("suite lists no agents");

    for (const auto& cj : j.at("conditions")) {
        auto condition = fault_condition_from_string(cj.get<std::string>());
        if (!condition)
            throw ScenarioError("unknown fault condition '" + cj.get<std::string>() + "'");
        suite.conditions.push_back(*condition);
    }
    if (suite.conditions.empty()) throw ScenarioError("suite lists no conditions");

    suite.repetitions = j.value("repetitions", std::size_t{5});
    if (suite.repetitions == 0) throw ScenarioError("repetitions must be >= 1");
    if (j.contains("seeds")) {
        for (const auto& sj : j["seeds"]) suite.seeds.push_back(sj.get<std::uint64_t>());
    } else {
        for (std::size_t i = 1; i <= suite.repetitions; ++i) suite.seeds.push_back(i);
    }
    if (suite.seeds.size() != suite.repetitions)
        throw ScenarioError("seeds must list one seed per repetition");
    std::set<std::uint64_t> unique(suite.seeds.begin(), suite.seeds.end());
    if (unique.size() != suite.seeds.size())
        throw ScenarioError("repetition seeds must be distinct");

    suite.max_steps = j.value("max_steps", std::size_t{45});
    if (suite.max_steps == 0) throw ScenarioError("max_steps must be >= 1");
    return suite;
}

}  // namespace riva
