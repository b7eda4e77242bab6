// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "riva/util.hpp"

namespace riva {

// A named tool invocation with scalar arguments. Serializable so it can
// travel inside the agent message protocol and history snapshots.
struct ToolCall {
    std::string tool_name;
    std::map<std::string, Value> arguments;

    bool operator==(const ToolCall&) const = default;

    json to_json() const {
        json args = json::object();
        for (const auto& [k, v] : arguments) args[k] = value_to_json(v);
        return json{{"tool", tool_name}, {"args", args}};
    }

    static ToolCall from_json(const json& j) {
        ToolCall c;
        c.tool_name = j.at("tool").get<std::string>();
        if (j.contains("args")) {
            for (const auto& [k, v] : j.at("args").items())
                c.arguments[k] = value_from_json(v);
        }
        return c;
    }

    std::string display() const {
        std::string out = tool_name + "(";
        bool first = true;
        for (const auto& [k, v] : arguments) {
            if (!first) out += ", ";
            first = false;
            out += k + "=";
            if (std::holds_alternative<std::string>(v))
                out += "\"" + std::get<std::string>(v) + "\"";
            else
                out += value_to_string(v);
        }
        out += ")";
        return out;
    }
};

}  // namespace riva
