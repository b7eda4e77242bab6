// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run loops for the two agent configurations. The verifier and the tool
// generation agent share one step budget and one ToolHistory; every backend
// reply costs a step, history bookkeeping is free. The ReAct baseline uses
// the same environment, tools, fault handling, and step accounting.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riva/actions.hpp"
#include "riva/backend.hpp"
#include "riva/env.hpp"
#include "riva/history.hpp"
#include "riva/prompts.hpp"
#include "riva/spec.hpp"
#include "riva/toolkit.hpp"

namespace riva {

enum class TaskType { Detection, Localization, Analysis };

inline std::string to_string(TaskType t) {
    switch (t) {
        case TaskType::Detection: return "detection";
        case TaskType::Localization: return "localization";
        case TaskType::Analysis: return "analysis";
    }
    return "detection";
}

inline std::optional<TaskType> task_type_from_string(const std::string& s) {
    if (s == "detection") return TaskType::Detection;
    if (s == "localization") return TaskType::Localization;
    if (s == "analysis") return TaskType::Analysis;
    return std::nullopt;
}

enum class Actor { Verifier, ToolGen, React };

inline std::string to_string(Actor a) {
    switch (a) {
        case Actor::Verifier: return "verifier";
        case Actor::ToolGen: return "toolgen";
        case Actor::React: return "react";
    }
    return "react";
}

enum class StepKind { Reasoning, ToolInvocation, HistoryMutation, Submission };

inline std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::Reasoning: return "reasoning";
        case StepKind::ToolInvocation: return "tool_invocation";
        case StepKind::HistoryMutation: return "history_mutation";
        case StepKind::Submission: return "submission";
    }
    return "reasoning";
}

inline json usage_to_json(const TokenUsage& u) {
    return json{{"prompt_tokens", u.prompt_tokens},
                {"completion_tokens", u.completion_tokens},
                {"total_tokens", u.total_tokens},
                {"estimated", u.estimated}};
}

struct Step {
    Actor actor = Actor::React;
    StepKind kind = StepKind::Reasoning;
    json payload;
    TokenUsage usage;
    bool counts_against_budget = false;

    json to_json() const {
        return json{{"actor", to_string(actor)},
                    {"kind", to_string(kind)},
                    {"counted", counts_against_budget},
                    {"payload", payload},
                    {"usage", usage_to_json(usage)}};
    }
};

enum class RunEnd { Submit, StepCapReached };

inline std::string to_string(RunEnd e) {
    return e == RunEnd::Submit ? "submit" : "step_cap_reached";
}

struct Trajectory {
    std::vector<Step> steps;
    RunEnd terminated_by = RunEnd::StepCapReached;

    std::size_t counted_steps() const {
        std::size_t n = 0;
        for (const auto& s : steps)
            if (s.counts_against_budget) ++n;
        return n;
    }

    std::vector<Actor> counted_actors() const {
        std::vector<Actor> actors;
        for (const auto& s : steps)
            if (s.counts_against_budget) actors.push_back(s.actor);
        return actors;
    }

    UsageSummary usage() const {
        std::vector<TokenUsage> counted;
        for (const auto& s : steps)
            if (s.counts_against_budget) counted.push_back(s.usage);
        return summarize_usage(counted);
    }

    json to_json() const {
        json steps_json = json::array();
        for (const auto& s : steps) steps_json.push_back(s.to_json());
        return json{{"terminated_by", to_string(terminated_by)},
                    {"counted_steps", counted_steps()},
                    {"steps", steps_json}};
    }
};

struct Solution {
    TaskType task_type = TaskType::Detection;
    std::string answer;

    json to_json() const {
        return json{{"task_type", to_string(task_type)}, {"answer", answer}};
    }
};

struct OrchestratorConfig {
    std::size_t k = 2;
    std::size_t max_steps = 45;
    bool record_exploratory = false;
    std::size_t toolgen_retry_limit = 3;

    void validate() const {
        if (k == 0) throw std::invalid_argument("k must be >= 1");
        if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
        if (toolgen_retry_limit == 0)
            throw std::invalid_argument("toolgen_retry_limit must be >= 1");
    }
};

struct RunOutcome {
    Trajectory trajectory;
    ToolHistory history{1};
    std::optional<Solution> solution;
    std::map<PropertyId, Verdict> verdicts;
};

namespace detail {

struct StepLog {
    Trajectory trajectory;
    std::size_t max_steps = 0;
    std::size_t counted = 0;

    bool exhausted() const { return counted >= max_steps; }

    void add_counted(Actor actor, StepKind kind, json payload, const TokenUsage& usage) {
        trajectory.steps.push_back(Step{actor, kind, std::move(payload), usage, true});
        ++counted;
    }

    void add_free(Actor actor, StepKind kind, json payload) {
        trajectory.steps.push_back(Step{actor, kind, std::move(payload), TokenUsage{}, false});
    }
};

enum class GenOutcome { Appended, ProbeOnly, Starved, CapHit };

struct GenResult {
    GenOutcome outcome;
    std::string message;  // tool name, probe summary, or last rejection reason
};

// One generation request: propose (with bounded corrections), execute,
// analyze, and append. Every toolgen reply costs a step.
inline GenResult run_generation_exchange(const Specification& spec,
                                         const PropertyId& property_id,
                                         ToolHistory& history, Environment& env,
                                         const ToolRegistry& registry,
                                         const ToolFaultConfig& faults,
                                         ChatBackend& toolgen,
                                         const OrchestratorConfig& config, StepLog& log) {
    std::vector<ChatMessage> conv{
        {Role::System, kToolGenSystemPrompt},
        {Role::User,
         render_generation_request(spec, property_id, history, registry.manifest())}};

    std::string last_problem;
    for (std::size_t attempt = 0; attempt < config.toolgen_retry_limit; ++attempt) {
        if (log.exhausted()) return {GenOutcome::CapHit, {}};
        ChatReply reply = toolgen.chat(conv);
        conv.push_back({Role::Assistant, reply.text});
        ParsedAction parsed = parse_toolgen_proposal(reply.text);

        if (const auto* fail = std::get_if<ParseFailure>(&parsed)) {
            log.add_counted(Actor::ToolGen, StepKind::Reasoning,
                            json{{"reply", reply.text}, {"rejected", fail->message}},
                            reply.usage);
            last_problem = fail->message;
            conv.push_back({Role::User, "Rejected: " + fail->message +
                                            ". Reply with a single JSON object naming the "
                                            "tool call."});
            continue;
        }

        const auto& proposal = std::get<ProposeToolAction>(parsed);
        bool will_record = !proposal.exploratory || config.record_exploratory;

        if (will_record) {
            bool duplicate = false;
            for (const auto& used : history.used_tools(property_id))
                if (used == proposal.call.tool_name) duplicate = true;
            if (duplicate) {
                last_problem =
                    "tool '" + proposal.call.tool_name + "' was already used on this goal";
                log.add_counted(Actor::ToolGen, StepKind::Reasoning,
                                json{{"reply", reply.text}, {"rejected", last_problem}},
                                reply.usage);
                conv.push_back({Role::User, "Rejected: " + last_problem +
                                                "; records must come from distinct tools. "
                                                "Pick a different tool (JSON only)."});
                continue;
            }
        }

        ToolOutcome result = invoke(registry, proposal.call, env, faults);
        if (!result.ok()) {
            last_problem = result.message;
            log.add_counted(Actor::ToolGen, StepKind::Reasoning,
                            json{{"reply", reply.text}, {"rejected", last_problem}},
                            reply.usage);
            conv.push_back({Role::User, "Rejected: " + result.message +
                                            ". Propose a corrected call (JSON only)."});
            continue;
        }

        log.add_counted(Actor::ToolGen, StepKind::Reasoning, json{{"reply", reply.text}},
                        reply.usage);
        log.add_free(Actor::ToolGen, StepKind::ToolInvocation,
                     json{{"call", proposal.call.to_json()},
                          {"output", result.output},
                          {"exploratory", proposal.exploratory}});

        conv.push_back(
            {Role::User, render_analysis_request(property_id, proposal.call, result.output)});
        std::string analysis = "(analysis unavailable)";
        for (std::size_t retry = 0; retry < config.toolgen_retry_limit; ++retry) {
            if (log.exhausted()) return {GenOutcome::CapHit, {}};
            ChatReply areply = toolgen.chat(conv);
            conv.push_back({Role::Assistant, areply.text});
            ParsedAction aparsed = parse_toolgen_analysis(areply.text);
            if (const auto* afail = std::get_if<ParseFailure>(&aparsed)) {
                log.add_counted(Actor::ToolGen, StepKind::Reasoning,
                                json{{"reply", areply.text}, {"rejected", afail->message}},
                                areply.usage);
                conv.push_back({Role::User, "Rejected: " + afail->message +
                                                ". Reply as {\"analysis\": \"...\"}."});
                continue;
            }
            analysis = std::get<AnalysisAction>(aparsed).analysis;
            log.add_counted(Actor::ToolGen, StepKind::Reasoning, json{{"reply", areply.text}},
                            areply.usage);
            break;
        }

        if (!will_record)
            return {GenOutcome::ProbeOnly,
                    proposal.call.display() + " -> " +
                        (result.output.empty() ? "(empty)" : result.output)};

        history.record(property_id,
                       ToolExecutionRecord{proposal.call, result.output, analysis});
        log.add_free(Actor::ToolGen, StepKind::HistoryMutation,
                     json{{"event", "record_appended"},
                          {"property", property_id},
                          {"tool", proposal.call.tool_name}});
        return {GenOutcome::Appended, proposal.call.tool_name};
    }
    return {GenOutcome::Starved, last_problem};
}

}  // namespace detail

inline RunOutcome run_riva(const Specification& spec, const std::string& task_question,
                           TaskType task_type, Environment& env,
                           const ToolRegistry& registry, const ToolFaultConfig& faults,
                           ChatBackend& verifier, ChatBackend& toolgen,
                           const OrchestratorConfig& config) {
    config.validate();
    ToolHistory history(config.k);
    for (const auto& prop : spec.properties) history.add_goal(prop.id, GoalOrigin::FromSpec);

    detail::StepLog log;
    log.max_steps = config.max_steps;

    std::vector<ChatMessage> conv{{Role::System, kVerifierSystemPrompt}};
    std::string notice;
    std::map<PropertyId, Verdict> verdicts;
    std::optional<Solution> solution;

    while (!log.exhausted()) {
        conv.push_back(
            {Role::User, render_verifier_turn(spec, task_question, history, verdicts, notice)});
        notice.clear();
        ChatReply reply = verifier.chat(conv);
        conv.push_back({Role::Assistant, reply.text});
        ParsedAction parsed = parse_verifier_action(reply.text);

        if (const auto* fail = std::get_if<ParseFailure>(&parsed)) {
            log.add_counted(Actor::Verifier, StepKind::Reasoning,
                            json{{"reply", reply.text}, {"rejected", fail->message}},
                            reply.usage);
            notice = "Your previous reply was rejected (" + fail->message +
                     "). Respond with a single JSON action object.";
            continue;
        }

        if (const auto* submit = std::get_if<SubmitAction>(&parsed)) {
            log.add_counted(Actor::Verifier, StepKind::Submission,
                            json{{"reply", reply.text}, {"answer", submit->answer}},
                            reply.usage);
            solution = Solution{task_type, submit->answer};
            log.trajectory.terminated_by = RunEnd::Submit;
            break;
        }

        log.add_counted(Actor::Verifier, StepKind::Reasoning, json{{"reply", reply.text}},
                        reply.usage);

        if (const auto* req = std::get_if<RequestGenerationAction>(&parsed)) {
            if (!history.has_goal(req->property_id)) {
                notice = "No goal named '" + req->property_id +
                         "'. Use add_goal first or one of the listed goals.";
                continue;
            }
            const GoalEntry& goal = history.goal(req->property_id);
            if (goal.status == GoalStatus::Abandoned) {
                notice = "Goal " + req->property_id +
                         " is abandoned; no more evidence may be gathered for it.";
                continue;
            }
            if (goal.records.size() >= config.k) {
                notice = "Goal " + req->property_id + " already holds " +
                         std::to_string(config.k) + " records; conclude it instead.";
                continue;
            }
            detail::GenResult gen = detail::run_generation_exchange(
                spec, req->property_id, history, env, registry, faults, toolgen, config, log);
            switch (gen.outcome) {
                case detail::GenOutcome::Appended:
                    notice = "A record from tool '" + gen.message + "' was appended to goal " +
                             req->property_id + ".";
                    break;
                case detail::GenOutcome::ProbeOnly:
                    notice = "Exploratory probe (not recorded): " + gen.message;
                    break;
                case detail::GenOutcome::Starved:
                    notice = "Generation for goal " + req->property_id + " starved after " +
                             std::to_string(config.toolgen_retry_limit) +
                             " rejected proposals" +
                             (gen.message.empty() ? std::string{}
                                                  : " (last problem: " + gen.message + ")") +
                             ". You may request again, abandon the goal, or conclude it "
                             "inconclusive.";
                    break;
                case detail::GenOutcome::CapHit:
                    break;
            }
            continue;
        }

        if (const auto* con = std::get_if<ConcludeAction>(&parsed)) {
            auto verdict = verdict_from_string(con->verdict);
            if (!verdict) {
                notice = "Unknown verdict '" + con->verdict +
                         "'; use satisfied, violated, or inconclusive.";
                continue;
            }
            if (!history.has_goal(con->property_id)) {
                notice = "No goal named '" + con->property_id + "'.";
                continue;
            }
            std::vector<std::size_t> evidence = con->evidence;
            if (*verdict != VerdictValue::Inconclusive) {
                const GoalEntry& goal = history.goal(con->property_id);
                if (goal.status == GoalStatus::Abandoned) {
                    notice = "Goal " + con->property_id +
                             " is abandoned; only an inconclusive verdict is allowed.";
                    continue;
                }
                if (!history.is_conclusive(con->property_id)) {
                    notice = "Goal " + con->property_id + " holds " +
                             std::to_string(goal.records.size()) + "/" +
                             std::to_string(config.k) +
                             " records; satisfied or violated requires " +
                             std::to_string(config.k) + " records from distinct tools.";
                    continue;
                }
                if (!con->evidence_given) {
                    evidence.clear();
                    for (std::size_t i = 0; i < config.k; ++i) evidence.push_back(i);
                } else {
                    bool valid = evidence.size() == config.k;
                    for (std::size_t i = 0; valid && i < evidence.size(); ++i) {
                        if (evidence[i] >= goal.records.size()) valid = false;
                        for (std::size_t j = i + 1; valid && j < evidence.size(); ++j)
                            if (evidence[i] == evidence[j]) valid = false;
                    }
                    if (!valid) {
                        notice = "Evidence must list exactly " + std::to_string(config.k) +
                                 " distinct record indexes of goal " + con->property_id + ".";
                        continue;
                    }
                }
            }
            verdicts[con->property_id] = Verdict{*verdict, con->rationale, evidence};
            log.add_free(Actor::Verifier, StepKind::HistoryMutation,
                         json{{"event", "verdict_recorded"},
                              {"property", con->property_id},
                              {"verdict", to_string(*verdict)}});
            notice = "Verdict for " + con->property_id + " recorded as " +
                     to_string(*verdict) + ".";
            continue;
        }

        if (const auto* add = std::get_if<AddGoalAction>(&parsed)) {
            try {
                history.add_goal(add->property_id, GoalOrigin::AgentAdded);
                log.add_free(Actor::Verifier, StepKind::HistoryMutation,
                             json{{"event", "goal_added"}, {"property", add->property_id}});
                notice = "Goal " + add->property_id + " added.";
            } catch (const HistoryError& e) {
                notice = e.what();
            }
            continue;
        }

        if (const auto* drop = std::get_if<AbandonGoalAction>(&parsed)) {
            try {
                history.abandon_goal(drop->property_id);
                log.add_free(
                    Actor::Verifier, StepKind::HistoryMutation,
                    json{{"event", "goal_abandoned"}, {"property", drop->property_id}});
                notice = "Goal " + drop->property_id +
                         " abandoned; it can no longer be concluded satisfied or violated.";
            } catch (const HistoryError& e) {
                notice = e.what();
            }
            continue;
        }
    }

    for (const auto& prop : spec.properties)
        if (verdicts.find(prop.id) == verdicts.end())
            verdicts.emplace(prop.id,
                             Verdict{VerdictValue::Inconclusive,
                                     "no conclusion reached before the run ended",
                                     {}});

    RunOutcome outcome;
    outcome.trajectory = std::move(log.trajectory);
    outcome.history = std::move(history);
    outcome.solution = std::move(solution);
    outcome.verdicts = std::move(verdicts);
    return outcome;
}

inline RunOutcome run_react(const Specification& spec, const std::string& task_question,
                            TaskType task_type, Environment& env,
                            const ToolRegistry& registry, const ToolFaultConfig& faults,
                            ChatBackend& backend, const OrchestratorConfig& config) {
    config.validate();
    detail::StepLog log;
    log.max_steps = config.max_steps;

    std::vector<ChatMessage> conv{{Role::System, kReactSystemPrompt}};
    json manifest = registry.manifest();
    std::string transcript;
    std::string notice;
    std::optional<Solution> solution;

    while (!log.exhausted()) {
        conv.push_back({Role::User,
                        render_react_turn(spec, task_question, manifest, transcript, notice)});
        notice.clear();
        ChatReply reply = backend.chat(conv);
        conv.push_back({Role::Assistant, reply.text});
        ParsedAction parsed = parse_react_action(reply.text);

        if (const auto* fail = std::get_if<ParseFailure>(&parsed)) {
            log.add_counted(Actor::React, StepKind::Reasoning,
                            json{{"reply", reply.text}, {"rejected", fail->message}},
                            reply.usage);
            notice = "Your previous reply was rejected (" + fail->message +
                     "). Respond with a single JSON action object.";
            continue;
        }

        if (const auto* submit = std::get_if<SubmitAction>(&parsed)) {
            log.add_counted(Actor::React, StepKind::Submission,
                            json{{"reply", reply.text}, {"answer", submit->answer}},
                            reply.usage);
            solution = Solution{task_type, submit->answer};
            log.trajectory.terminated_by = RunEnd::Submit;
            break;
        }

        const auto& proposal = std::get<ProposeToolAction>(parsed);
        log.add_counted(Actor::React, StepKind::Reasoning, json{{"reply", reply.text}},
                        reply.usage);
        ToolOutcome result = invoke(registry, proposal.call, env, faults);
        log.add_free(Actor::React, StepKind::ToolInvocation,
                     json{{"call", proposal.call.to_json()},
                          {"status", result.ok() ? "success" : "interface_error"},
                          {"output", result.ok() ? result.output : result.message}});
        std::string body = result.ok()
                               ? (result.output.empty() ? "(empty output)" : result.output)
                               : "interface error: " + result.message;
        transcript += "> " + proposal.call.display() + "\n" + body + "\n";
    }

    RunOutcome outcome;
    outcome.trajectory = std::move(log.trajectory);
    outcome.history = ToolHistory(config.k);
    outcome.solution = std::move(solution);
    return outcome;
}

}  // namespace riva
