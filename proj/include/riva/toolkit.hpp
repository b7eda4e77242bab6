// SPDX-License-Identifier: Apache-2.0
#pragma once

// Tool registry binding named tools to environment observations, plus the
// silent-fault wrapper. A faulted tool returns Success("") for calls that
// would have succeeded; calls that violate the interface (unknown tool,
// bad arguments, unknown target) produce the same InterfaceError whether
// the tool is faulted or not.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "riva/env.hpp"
#include "riva/tool_call.hpp"

namespace riva {

enum class ParamType { String, Integer, Number, Boolean, Scalar };

inline std::string to_string(ParamType t) {
    switch (t) {
        case ParamType::String: return "string";
        case ParamType::Integer: return "integer";
        case ParamType::Number: return "number";
        case ParamType::Boolean: return "boolean";
        case ParamType::Scalar: return "scalar";
    }
    return "string";
}

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::String;
    bool required = true;
};

struct ToolDescriptor {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<ObservationRequest(const std::map<std::string, Value>&)> binding;
};

struct ToolOutcome {
    enum class Status { Success, InterfaceError };
    Status status = Status::Success;
    std::string output;   // valid only for Success; may legitimately be empty
    std::string message;  // valid only for InterfaceError

    bool ok() const { return status == Status::Success; }

    static ToolOutcome success(std::string out) {
        return ToolOutcome{Status::Success, std::move(out), {}};
    }
    static ToolOutcome error(std::string msg) {
        return ToolOutcome{Status::InterfaceError, {}, std::move(msg)};
    }
};

struct ToolFaultConfig {
    std::set<std::string> faulted_tools;
    // EmptyString is the only fault mode in scope; stale or corrupted
    // output modes would slot in here.

    bool faulted(const std::string& tool) const { return faulted_tools.count(tool) != 0; }
};

class ToolRegistry {
public:
    void register_tool(ToolDescriptor descriptor) {
        if (tools_.count(descriptor.name))
            throw std::invalid_argument("duplicate tool name '" + descriptor.name + "'");
        order_.push_back(descriptor.name);
        tools_.emplace(descriptor.name, std::move(descriptor));
    }

    bool has(const std::string& name) const { return tools_.count(name) != 0; }

    const ToolDescriptor* find(const std::string& name) const {
        auto it = tools_.find(name);
        return it == tools_.end() ? nullptr : &it->second;
    }

    std::vector<std::string> list_tools() const { return order_; }

    // Manifest embedded in agent prompts; schema fixed by golden tests.
    json manifest() const {
        json tools = json::array();
        for (const auto& name : order_) {
            const auto& d = tools_.at(name);
            json params = json::array();
            for (const auto& p : d.params)
                params.push_back(json{{"name", p.name},
                                      {"type", to_string(p.type)},
                                      {"required", p.required}});
            tools.push_back(json{{"name", d.name},
                                 {"description", d.description},
                                 {"params", params}});
        }
        return json{{"tools", tools}};
    }

private:
    std::map<std::string, ToolDescriptor> tools_;
    std::vector<std::string> order_;  // registration order, for prompts
};

// Validates the faulted names and returns the merged config. Idempotent.
inline ToolFaultConfig apply_fault(const ToolRegistry& registry, ToolFaultConfig current,
                                   const std::set<std::string>& faulted) {
    for (const auto& name : faulted) {
        if (!registry.has(name))
            throw std::invalid_argument("cannot fault unknown tool '" + name + "'");
        current.faulted_tools.insert(name);
    }
    return current;
}

namespace detail {

inline bool type_matches(ParamType t, const Value& v) {
    switch (t) {
        case ParamType::String: return std::holds_alternative<std::string>(v);
        case ParamType::Integer: return std::holds_alternative<std::int64_t>(v);
        case ParamType::Number:
            return std::holds_alternative<double>(v) ||
                   std::holds_alternative<std::int64_t>(v);
        case ParamType::Boolean: return std::holds_alternative<bool>(v);
        case ParamType::Scalar: return true;
    }
    return false;
}

inline std::optional<std::string> validate_args(const ToolDescriptor& descriptor,
                                                const ToolCall& call) {
    for (const auto& p : descriptor.params) {
        auto it = call.arguments.find(p.name);
        if (it == call.arguments.end()) {
            if (p.required)
                return "missing required argument '" + p.name + "' for tool '" +
                       descriptor.name + "'";
            continue;
        }
        if (!type_matches(p.type, it->second))
            return "argument '" + p.name + "' of tool '" + descriptor.name +
                   "' has the wrong type (expected " + to_string(p.type) + ")";
    }
    for (const auto& [name, v] : call.arguments) {
        bool known = false;
        for (const auto& p : descriptor.params)
            if (p.name == name) known = true;
        if (!known)
            return "unknown argument '" + name + "' for tool '" + descriptor.name + "'";
    }
    return std::nullopt;
}

}  // namespace detail

// All failure paths are encoded in the outcome; nothing escapes as an
// exception. Argument and target validation run before the fault check,
// so invalid calls behave identically with and without faults.
inline ToolOutcome invoke(const ToolRegistry& registry, const ToolCall& call,
                          Environment& env, const ToolFaultConfig& faults) {
    const ToolDescriptor* descriptor = registry.find(call.tool_name);
    if (descriptor == nullptr)
        return ToolOutcome::error("unknown tool '" + call.tool_name + "'");
    if (auto err = detail::validate_args(*descriptor, call)) return ToolOutcome::error(*err);

    ObservationRequest request = descriptor->binding(call.arguments);
    try {
        env.validate(request);
    } catch (const EnvError& e) {
        return ToolOutcome::error(e.what());
    }
    if (faults.faulted(call.tool_name)) return ToolOutcome::success("");
    return ToolOutcome::success(env.observe(request));
}

namespace detail {

inline std::string arg_string(const std::map<std::string, Value>& args,
                              const std::string& name) {
    auto it = args.find(name);
    return it == args.end() ? std::string{} : value_to_string(it->second);
}

}  // namespace detail

// The six tools every scenario exposes: the three observability wrappers,
// remote exec, and the two node probes.
inline ToolRegistry default_registry() {
    ToolRegistry registry;
    registry.register_tool(ToolDescriptor{
        "get_logs",
        "Fetch the log lines of a service or node.",
        {{"service", ParamType::String, true}},
        [](const auto& args) {
            return ObservationRequest{Surface::Logs, detail::arg_string(args, "service")};
        }});
    registry.register_tool(ToolDescriptor{
        "read_metrics",
        "Read metric series for a service or node; optionally a single metric.",
        {{"service", ParamType::String, true}, {"metric", ParamType::String, false}},
        [](const auto& args) {
            ObservationRequest req{Surface::Metrics, detail::arg_string(args, "service")};
            req.metric = detail::arg_string(args, "metric");
            return req;
        }});
    registry.register_tool(ToolDescriptor{
        "read_traces",
        "Read recent trace spans for a service or node.",
        {{"service", ParamType::String, true}},
        [](const auto& args) {
            return ObservationRequest{Surface::Traces, detail::arg_string(args, "service")};
        }});
    registry.register_tool(ToolDescriptor{
        "exec",
        "Run a whitelisted command on a node: hostname, ps, config, "
        "or cat /var/log/syslog.",
        {{"target", ParamType::Scalar, true}, {"command", ParamType::String, true}},
        [](const auto& args) {
            ObservationRequest req{Surface::Exec, detail::arg_string(args, "target")};
            req.command = detail::arg_string(args, "command");
            return req;
        }});
    registry.register_tool(ToolDescriptor{
        "ping_node",
        "Ping a node by logical id or name through the address table.",
        {{"id", ParamType::Scalar, true}},
        [](const auto& args) {
            ObservationRequest req{Surface::Ping, detail::arg_string(args, "id")};
            req.message_probe = false;
            return req;
        }});
    registry.register_tool(ToolDescriptor{
        "send_message",
        "Send an application-level echo message to a node or service and "
        "report who acknowledged it.",
        {{"id", ParamType::Scalar, true}},
        [](const auto& args) {
            ObservationRequest req{Surface::Ping, detail::arg_string(args, "id")};
            req.message_probe = true;
            return req;
        }});
    return registry;
}

// The fault conditions of the evaluation protocol.
enum class FaultCondition { None, GetLogs, ReadMetrics, Both };

inline std::string to_string(FaultCondition c) {
    switch (c) {
        case FaultCondition::None: return "none";
        case FaultCondition::GetLogs: return "get_logs";
        case FaultCondition::ReadMetrics: return "read_metrics";
        case FaultCondition::Both: return "both";
    }
    return "none";
}

inline std::optional<FaultCondition> fault_condition_from_string(const std::string& s) {
    if (s == "none") return FaultCondition::None;
    if (s == "get_logs") return FaultCondition::GetLogs;
    if (s == "read_metrics") return FaultCondition::ReadMetrics;
    if (s == "both") return FaultCondition::Both;
    return std::nullopt;
}

inline ToolFaultConfig fault_config_for(const ToolRegistry& registry, FaultCondition c) {
    std::set<std::string> names;
    if (c == FaultCondition::GetLogs || c == FaultCondition::Both) names.insert("get_logs");
    if (c == FaultCondition::ReadMetrics || c == FaultCondition::Both)
        names.insert("read_metrics");
    return apply_fault(registry, ToolFaultConfig{}, names);
}

}  // namespace riva
