// SPDX-License-Identifier: Apache-2.0
#pragma once

// The Tool Call History: the shared structure both agents collaborate
// through. Maps each property identifier to at most K execution records,
// each made with a distinct tool. Records are append-only; abandoned
// goals keep their records but can never become conclusive again.

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "riva/spec.hpp"
#include "riva/tool_call.hpp"

namespace riva {

// One verification attempt: the command, the raw tool output and a short
// interpretation of what the output says about the property. An empty
// result string is valid; under the silent fault model it is exactly what
// a broken tool produces.
struct ToolExecutionRecord {
    ToolCall command;
    std::string result;
    std::string analysis;
};

enum class GoalStatus { Open, Abandoned };
enum class GoalOrigin { FromSpec, AgentAdded };

inline std::string to_string(GoalStatus s) {
    return s == GoalStatus::Open ? "open" : "abandoned";
}
inline std::string to_string(GoalOrigin o) {
    return o == GoalOrigin::FromSpec ? "from_spec" : "agent_added";
}

struct GoalEntry {
    std::vector<ToolExecutionRecord> records;
    GoalStatus status = GoalStatus::Open;
    GoalOrigin origin = GoalOrigin::FromSpec;
};

struct GoalStatusView {
    PropertyId property_id;
    std::size_t record_count = 0;
    std::vector<std::string> used_tool_names;  // insertion order
    bool conclusive = false;                   // record_count == k && Open
    GoalStatus status = GoalStatus::Open;
};

struct HistoryError : std::runtime_error {
    enum class Code {
        UnknownGoal,
        DuplicateTool,
        GoalFull,
        GoalAbandoned,
        GoalExists,
        AlreadyAbandoned,
    };
    Code code;
    PropertyId property_id;

    HistoryError(Code c, PropertyId id, const std::string& msg)
        : std::runtime_error(msg), code(c), property_id(std::move(id)) {}
};

class ToolHistory {
public:
    explicit ToolHistory(std::size_t k) : k_(k) {
        if (k == 0) throw std::invalid_argument("k must be >= 1");
    }

    std::size_t k() const { return k_; }

    bool has_goal(const PropertyId& id) const { return goals_.count(id) != 0; }

    void add_goal(const PropertyId& id, GoalOrigin origin) {
        if (goals_.count(id))
            throw HistoryError(HistoryError::Code::GoalExists, id,
                               "goal '" + id + "' already exists");
        goals_.emplace(id, GoalEntry{{}, GoalStatus::Open, origin});
        notify();
    }

    void record(const PropertyId& id, ToolExecutionRecord rec) {
        GoalEntry& goal = require(id);
        if (goal.status == GoalStatus::Abandoned)
            throw HistoryError(HistoryError::Code::GoalAbandoned, id,
                               "goal '" + id + "' is abandoned");
        if (goal.records.size() >= k_)
            throw HistoryError(HistoryError::Code::GoalFull, id,
                               "goal '" + id + "' already holds " + std::to_string(k_) +
                                   " records");
        for (const auto& existing : goal.records) {
            if (existing.command.tool_name == rec.command.tool_name)
                throw HistoryError(HistoryError::Code::DuplicateTool, id,
                                   "tool '" + rec.command.tool_name +
                                       "' was already used for goal '" + id + "'");
        }
        goal.records.push_back(std::move(rec));
        notify();
    }

    void abandon_goal(const PropertyId& id) {
        GoalEntry& goal = require(id);
        if (goal.status == GoalStatus::Abandoned)
            throw HistoryError(HistoryError::Code::AlreadyAbandoned, id,
                               "goal '" + id + "' is already abandoned");
        goal.status = GoalStatus::Abandoned;
        notify();
    }

    std::vector<std::string> used_tools(const PropertyId& id) const {
        const GoalEntry& goal = require(id);
        std::vector<std::string> names;
        names.reserve(goal.records.size());
        for (const auto& rec : goal.records) names.push_back(rec.command.tool_name);
        return names;
    }

    bool is_conclusive(const PropertyId& id) const {
        const GoalEntry& goal = require(id);
        return goal.records.size() == k_ && goal.status == GoalStatus::Open;
    }

    const GoalEntry& goal(const PropertyId& id) const { return require(id); }

    const std::map<PropertyId, GoalEntry>& goals() const { return goals_; }

    GoalStatusView status_view(const PropertyId& id) const {
        const GoalEntry& goal = require(id);
        GoalStatusView view;
        view.property_id = id;
        view.record_count = goal.records.size();
        view.used_tool_names = used_tools(id);
        view.status = goal.status;
        view.conclusive = goal.records.size() == k_ && goal.status == GoalStatus::Open;
        return view;
    }

    // Snapshot schema is an external interface; field names are fixed by
    // golden tests.
    json snapshot() const {
        json goals = json::object();
        for (const auto& [id, goal] : goals_) {
            json records = json::array();
            for (const auto& rec : goal.records) {
                json args = json::object();
                for (const auto& [k, v] : rec.command.arguments) args[k] = value_to_json(v);
                records.push_back(json{{"tool", rec.command.tool_name},
                                       {"args", args},
                                       {"result", rec.result},
                                       {"analysis", rec.analysis}});
            }
            goals[id] = json{{"status", to_string(goal.status)},
                             {"origin", to_string(goal.origin)},
                             {"records", records}};
        }
        return json{{"k", k_}, {"goals", goals}};
    }

    // Invoked after every successful mutation; used for snapshot logging.
    void set_mutation_hook(std::function<void(const ToolHistory&)> hook) {
        hook_ = std::move(hook);
    }

private:
    GoalEntry& require(const PropertyId& id) {
        auto it = goals_.find(id);
        if (it == goals_.end())
            throw HistoryError(HistoryError::Code::UnknownGoal, id,
                               "unknown goal '" + id + "'");
        return it->second;
    }

    const GoalEntry& require(const PropertyId& id) const {
        auto it = goals_.find(id);
        if (it == goals_.end())
            throw HistoryError(HistoryError::Code::UnknownGoal, id,
                               "unknown goal '" + id + "'");
        return it->second;
    }

    void notify() {
        if (hook_) hook_(*this);
    }

    std::size_t k_;
    std::map<PropertyId, GoalEntry> goals_;
    std::function<void(const ToolHistory&)> hook_;
};

}  // namespace riva
