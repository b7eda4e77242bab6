// SPDX-License-Identifier: Apache-2.0
#pragma once

// Parsing of agent replies into typed actions. Replies must be a single
// JSON object, either bare or inside the first fenced code block; anything
// else is a parse failure the orchestrator reprompts once for.

#include <optional>
#include <string>
#include <variant>

#include "riva/tool_call.hpp"
#include "riva/util.hpp"

namespace riva {

struct RequestGenerationAction {
    std::string property_id;
};

struct ConcludeAction {
    std::string property_id;
    std::string verdict;  // satisfied | violated | inconclusive
    std::string rationale;
    std::vector<std::size_t> evidence;
    bool evidence_given = false;
};

struct AddGoalAction {
    std::string property_id;
    std::string description;
};

struct AbandonGoalAction {
    std::string property_id;
};

struct SubmitAction {
    std::string answer;
};

struct ProposeToolAction {
    ToolCall call;
    bool exploratory = false;
};

struct AnalysisAction {
    std::string analysis;
};

struct ParseFailure {
    std::string message;
};

using ParsedAction = std::variant<RequestGenerationAction, ConcludeAction, AddGoalAction,
                                  AbandonGoalAction, SubmitAction, ProposeToolAction,
                                  AnalysisAction, ParseFailure>;

namespace detail {

// Extracts the JSON payload: first fenced code block if present, otherwise
// the whole reply. Returns nullopt when neither yields an object.
inline std::optional<json> extract_json(const std::string& reply) {
    std::string body = trim(reply);
    auto fence = body.find("```");
    if (fence != std::string::npos) {
        auto start = body.find('\n', fence);
        if (start == std::string::npos) return std::nullopt;
        auto end = body.find("```", start);
        if (end == std::string::npos) return std::nullopt;
        body = trim(body.substr(start + 1, end - start - 1));
    }
    if (body.empty() || body.front() != '{') return std::nullopt;
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

}  // namespace detail

inline ParsedAction parse_verifier_action(const std::string& reply) {
    auto j = detail::extract_json(reply);
    if (!j) return ParseFailure{"reply is not a single JSON object"};
    if (!j->contains("action") || !(*j)["action"].is_string())
        return ParseFailure{"missing \"action\" field"};
    std::string action = (*j)["action"].get<std::string>();
    try {
        if (action == "request_generation")
            return RequestGenerationAction{j->at("property").get<std::string>()};
        if (action == "conclude") {
            ConcludeAction act;
            act.property_id = j->at("property").get<std::string>();
            act.verdict = to_lower(j->at("verdict").get<std::string>());
            act.rationale = j->value("rationale", std::string{});
            if (j->contains("evidence")) {
                act.evidence_given = true;
                for (const auto& e : (*j)["evidence"])
                    act.evidence.push_back(e.get<std::size_t>());
            }
            return act;
        }
        if (action == "add_goal")
            return AddGoalAction{j->at("property").get<std::string>(),
                                 j->value("description", std::string{})};
        if (action == "abandon_goal")
            return AbandonGoalAction{j->at("property").get<std::string>()};
        if (action == "submit") return SubmitAction{j->at("answer").get<std::string>()};
    } catch (const json::exception& e) {
        return ParseFailure{std::string("malformed action: ") + e.what()};
    }
    return ParseFailure{"unknown action \"" + action + "\""};
}

inline ParsedAction parse_toolgen_proposal(const std::string& reply) {
    auto j = detail::extract_json(reply);
    if (!j) return ParseFailure{"reply is not a single JSON object"};
    if (!j->contains("tool") || !(*j)["tool"].is_string())
        return ParseFailure{"missing \"tool\" field"};
    try {
        ProposeToolAction act;
        json call;
        call["tool"] = (*j)["tool"];
        call["args"] = j->value("args", json::object());
        act.call = ToolCall::from_json(call);
        act.exploratory = j->value("exploratory", false);
        return act;
    } catch (const std::exception& e) {
        return ParseFailure{std::string("malformed tool proposal: ") + e.what()};
    }
}

inline ParsedAction parse_toolgen_analysis(const std::string& reply) {
    auto j = detail::extract_json(reply);
    if (!j) return ParseFailure{"reply is not a single JSON object"};
    if (!j->contains("analysis") || !(*j)["analysis"].is_string())
        return ParseFailure{"missing \"analysis\" field"};
    return AnalysisAction{(*j)["analysis"].get<std::string>()};
}

inline ParsedAction parse_react_action(const std::string& reply) {
    auto j = detail::extract_json(reply);
    if (!j) return ParseFailure{"reply is not a single JSON object"};
    if (!j->contains("action") || !(*j)["action"].is_string())
        return ParseFailure{"missing \"action\" field"};
    std::string action = (*j)["action"].get<std::string>();
    try {
        if (action == "tool") {
            ProposeToolAction act;
            json call;
            call["tool"] = j->at("tool");
            call["args"] = j->value("args", json::object());
            act.call = ToolCall::from_json(call);
            return act;
        }
        if (action == "submit") return SubmitAction{j->at("answer").get<std::string>()};
    } catch (const std::exception& e) {
        return ParseFailure{std::string("malformed action: ") + e.what()};
    }
    return ParseFailure{"unknown action \"" + action + "\""};
}

}  // namespace riva
