// SPDX-License-Identifier: Apache-2.0
#pragma once

// Prompt templates for the three agent roles and the textual rendering of
// the shared history that is injected into every verifier turn. Templates
// are hashed into run reports so result files are traceable to the exact
// wording that produced them.

#include <map>
#include <sstream>
#include <string>

#include "riva/history.hpp"
#include "riva/spec.hpp"
#include "riva/util.hpp"

namespace riva {

inline const char* kVerifierSystemPrompt = R"(You are the verifier agent of an infrastructure verification team.
You are given a specification of a deployed environment and a task question.
Your job is to decide, for each specification property, whether the live
environment satisfies it, and then answer the task question.

You never call tools yourself. To gather evidence for a property you request
the tool generation agent, which issues one tool call per request and appends
the outcome to a shared history. A property may only be concluded once its
goal holds the required number of records, each produced by a different tool.
Cross-checking different tools guards against a faulty tool silently lying to
you; if two tools disagree, trust the more specific evidence and prefer
substantive non-empty output over empty output.

Work through the properties in the order listed in the specification.
Respond with exactly one JSON object per turn, no prose around it:
  {"action": "request_generation", "property": "<id>"}
  {"action": "conclude", "property": "<id>", "verdict": "satisfied" | "violated" | "inconclusive", "rationale": "<why>", "evidence": [<record indexes>]}
  {"action": "add_goal", "property": "<id>", "description": "<what to check>"}
  {"action": "abandon_goal", "property": "<id>"}
  {"action": "submit", "answer": "<final answer to the task question>"}

Abandon a goal only when further evidence cannot change the outcome you will
report. Submit once you can answer the task question.)";

inline const char* kToolGenSystemPrompt = R"(You are the tool generation agent of an infrastructure verification team.
The verifier asks you to gather evidence for one specification property at a
time. You see the tool manifest and the goal's history so far.

On a generation request, reply with exactly one JSON object naming the tool
call to issue:
  {"tool": "<name>", "args": {"<param>": <value>, ...}}
The tool must not have been used before on this goal; pick the surface most
likely to independently confirm or refute the property. Optionally set
"exploratory": true for a probe that should not count as goal evidence.

After the call executes you receive its output and reply with exactly one
JSON object assessing it:
  {"analysis": "<one or two sentences: what the output shows for the property>"}
If a reply of yours is rejected, correct it and answer with JSON only.)";

inline const char* kReactSystemPrompt = R"(You are an infrastructure verification agent. You are given a specification
of a deployed environment and a task question. Interact with the environment
through the listed tools, reason about what you observe, and answer the task
question.

Respond with exactly one JSON object per turn, no prose around it:
  {"thought": "<optional reasoning>", "action": "tool", "tool": "<name>", "args": {"<param>": <value>, ...}}
  {"action": "submit", "answer": "<final answer to the task question>"})";

// Stable fingerprint over every template, recorded in run reports.
inline std::string prompt_template_hash() {
    std::string all;
    all += kVerifierSystemPrompt;
    all += kToolGenSystemPrompt;
    all += kReactSystemPrompt;
    return hex64(fnv1a64(all));
}

inline std::string render_tool_manifest(const json& manifest) {
    std::ostringstream out;
    out << "Available tools:\n";
    for (const auto& tool : manifest.at("tools")) {
        out << "  " << tool.at("name").get<std::string>() << "(";
        bool first = true;
        for (const auto& p : tool.at("params")) {
            if (!first) out << ", ";
            first = false;
            out << p.at("name").get<std::string>() << ": "
                << p.at("type").get<std::string>();
            if (!p.at("required").get<bool>()) out << "?";
        }
        out << ") - " << tool.at("description").get<std::string>() << "\n";
    }
    return out.str();
}

inline std::string render_history(const ToolHistory& history) {
    std::ostringstream out;
    out << "Shared tool call history (K=" << history.k() << "):\n";
    for (const auto& [id, goal] : history.goals()) {
        out << "goal " << id << " [" << to_string(goal.status) << ", records "
            << goal.records.size() << "/" << history.k() << "]";
        if (!goal.records.empty()) {
            out << " tools used:";
            for (const auto& rec : goal.records) out << " " << rec.command.tool_name;
        }
        out << "\n";
        size_t index = 0;
        for (const auto& rec : goal.records) {
            out << "  [" << index++ << "] " << rec.command.display() << "\n";
            out << "      result: " << (rec.result.empty() ? "(empty)" : rec.result)
                << "\n";
            out << "      analysis: " << rec.analysis << "\n";
        }
    }
    return out.str();
}

inline std::string render_spec_for_prompt(const Specification& spec) {
    std::ostringstream out;
    out << "Specification:\n";
    for (const auto& res : spec.resources) {
        out << "  resource " << res.name;
        if (!res.services.empty()) {
            out << " services=[";
            bool first = true;
            for (const auto& svc : res.services) {
                if (!first) out << ", ";
                first = false;
                out << svc;
            }
            out << "]";
        }
        for (const auto& [key, value] : res.attributes)
            out << " " << key << "=" << value_to_string(value);
        out << "\n";
    }
    out << "Properties, in order:\n";
    for (const auto& prop : spec.properties)
        out << "  " << prop.id << ": " << predicate_to_string(prop.predicate) << " on "
            << prop.subject << "\n";
    return out.str();
}

inline std::string render_verdicts(const std::map<PropertyId, Verdict>& verdicts) {
    if (verdicts.empty()) return "Recorded verdicts: (none yet)\n";
    std::ostringstream out;
    out << "Recorded verdicts:";
    for (const auto& [id, verdict] : verdicts) out << " " << id << "=" << to_string(verdict.value);
    out << "\n";
    return out.str();
}

inline std::string render_verifier_turn(const Specification& spec,
                                        const std::string& task_question,
                                        const ToolHistory& history,
                                        const std::map<PropertyId, Verdict>& verdicts,
                                        const std::string& notice) {
    std::ostringstream out;
    out << render_spec_for_prompt(spec) << "\nTask question: " << task_question << "\n\n"
        << render_history(history) << "\n"
        << render_verdicts(verdicts);
    if (!notice.empty()) out << "\n" << notice << "\n";
    out << "\nYour next action (JSON only):";
    return out.str();
}

inline std::string render_generation_request(const Specification& spec,
                                             const std::string& property_id,
                                             const ToolHistory& history,
                                             const json& manifest) {
    std::ostringstream out;
    const Property* prop = spec.find_property(property_id);
    out << "Generation request for property " << property_id;
    if (prop != nullptr)
        out << " (" << predicate_to_string(prop->predicate) << " on " << prop->subject
            << ")";
    out << "\n\n" << render_tool_manifest(manifest) << "\n";
    if (history.has_goal(property_id) && !history.goal(property_id).records.empty()) {
        const GoalEntry& goal = history.goal(property_id);
        out << "Evidence so far on this goal:\n";
        for (const auto& rec : goal.records) {
            out << "  " << rec.command.display() << " -> "
                << (rec.result.empty() ? "(empty)" : rec.result) << "\n";
        }
        out << "Already used on this goal:";
        for (const auto& name : history.used_tools(property_id)) out << " " << name;
        out << "\n";
    }
    out << "\nPropose the next tool call (JSON only):";
    return out.str();
}

inline std::string render_analysis_request(const std::string& property_id,
                                           const ToolCall& call,
                                           const std::string& result) {
    std::ostringstream out;
    out << "Tool call " << call.display() << " for property " << property_id
        << " returned:\n"
        << (result.empty() ? "(empty output)" : result)
        << "\n\nYour analysis (JSON only):";
    return out.str();
}

inline std::string render_react_turn(const Specification& spec,
                                     const std::string& task_question,
                                     const json& manifest,
                                     const std::string& transcript,
                                     const std::string& notice) {
    std::ostringstream out;
    out << render_spec_for_prompt(spec) << "\nTask question: " << task_question << "\n\n"
        << render_tool_manifest(manifest);
    if (!transcript.empty()) out << "\nObservations so far:\n" << transcript;
    if (!notice.empty()) out << "\n" << notice << "\n";
    out << "\nYour next action (JSON only):";
    return out.str();
}

}  // namespace riva
