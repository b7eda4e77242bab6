// SPDX-License-Identifier: Apache-2.0
#pragma once

// Chat backends driving the agents. The scripted backend is a pure
// function of the message list (first matching rule wins) and makes every
// run reproducible without a model; the HTTP backend speaks the common
// chat-completions wire protocol with bounded retries.

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "riva/util.hpp"

namespace riva {

enum class Role { System, User, Assistant };

inline std::string to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t total_tokens = 0;
    bool estimated = false;  // provider reported no usage; counted as ceil(chars/4)
};

struct UsageSummary {
    TokenUsage total;
    std::int64_t max_context_tokens = 0;  // largest prompt of any step
};

// Exact sums over a finalized sequence of per-step usages.
template <typename Range>
UsageSummary summarize_usage(const Range& usages) {
    UsageSummary s;
    for (const TokenUsage& u : usages) {
        s.total.prompt_tokens += u.prompt_tokens;
        s.total.completion_tokens += u.completion_tokens;
        s.total.estimated = s.total.estimated || u.estimated;
        if (u.prompt_tokens > s.max_context_tokens) s.max_context_tokens = u.prompt_tokens;
    }
    s.total.total_tokens = s.total.prompt_tokens + s.total.completion_tokens;
    return s;
}

struct BackendError : std::runtime_error {
    enum class Code { BackendUnavailable, MalformedProviderResponse };
    Code code;

    BackendError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct ChatReply {
    std::string text;
    TokenUsage usage;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    // messages must be non-empty and start with a System message.
    virtual ChatReply chat(const std::vector<ChatMessage>& messages) = 0;

    virtual std::string name() const = 0;
};

inline std::int64_t estimate_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

inline void check_chat_precondition(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw std::invalid_argument("chat requires at least one message");
    if (messages.front().role != Role::System)
        throw std::invalid_argument("first chat message must be the system prompt");
}

// One rule of a scripted conversation: all `match` substrings must appear
// in the latest message (or the single regex must match) for the canned
// response to fire.
struct ScriptRule {
    std::vector<std::string> match;
    bool is_regex = false;
    std::string response;
};

class ScriptedBackend : public ChatBackend {
public:
    ScriptedBackend() = default;
    ScriptedBackend(std::vector<ScriptRule> rules, std::string default_response)
        : rules_(std::move(rules)), default_(std::move(default_response)) {}

    static ScriptedBackend from_json(const json& j) {
        ScriptedBackend backend;
        backend.default_ = j.value("default", std::string{});
        for (const auto& rj : j.value("rules", json::array())) {
            ScriptRule rule;
            const auto& m = rj.at("match");
            if (m.is_array())
                for (const auto& s : m) rule.match.push_back(s.get<std::string>());
            else
                rule.match.push_back(m.get<std::string>());
            rule.is_regex = rj.value("regex", false);
            rule.response = rj.at("response").get<std::string>();
            backend.rules_.push_back(std::move(rule));
        }
        return backend;
    }

    static ScriptedBackend load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open script file: " + path);
        json j = json::parse(in);
        return from_json(j);
    }

    ChatReply chat(const std::vector<ChatMessage>& messages) override {
        check_chat_precondition(messages);
        const std::string& latest = messages.back().content;
        std::string reply = default_;
        for (const auto& rule : rules_) {
            if (matches(rule, latest)) {
                reply = rule.response;
                break;
            }
        }
        ChatReply out;
        out.text = reply;
        std::int64_t prompt = 0;
        for (const auto& m : messages) prompt += estimate_tokens(m.content);
        out.usage.prompt_tokens = prompt;
        out.usage.completion_tokens = estimate_tokens(reply);
        out.usage.total_tokens = out.usage.prompt_tokens + out.usage.completion_tokens;
        out.usage.estimated = true;
        return out;
    }

    std::string name() const override { return "scripted"; }

private:
    static bool matches(const ScriptRule& rule, const std::string& text) {
        if (rule.is_regex) {
            if (rule.match.empty()) return false;
            return std::regex_search(text, std::regex(rule.match.front()));
        }
        for (const auto& needle : rule.match)
            if (!contains(text, needle)) return false;
        return !rule.match.empty();
    }

    std::vector<ScriptRule> rules_;
    std::string default_;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080/v1
    std::string model;
    double temperature = 0.0;
    std::string auth_env_var = "RIVA_API_KEY";  // credential read from env, never from flags
    int max_retries = 2;                        // transient transport retries
    int timeout_seconds = 60;
    std::optional<std::uint64_t> request_seed;  // repetition seed, forwarded to the provider
};

}  // namespace riva

// The HTTP implementation lives behind a separate include so unit tests
// that never talk to a server do not pay for httplib.
#ifndef RIVA_NO_HTTP_BACKEND
#include <httplib.h>

namespace riva {

class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
        split_url(config_.base_url, host_, path_prefix_);
    }

    ChatReply chat(const std::vector<ChatMessage>& messages) override {
        check_chat_precondition(messages);
        json body;
        body["model"] = config_.model;
        body["temperature"] = config_.temperature;
        if (config_.request_seed) body["seed"] = *config_.request_seed;
        json msgs = json::array();
        for (const auto& m : messages)
            msgs.push_back(json{{"role", to_string(m.role)}, {"content", m.content}});
        body["messages"] = msgs;

        httplib::Headers headers;
        if (const char* key = std::getenv(config_.auth_env_var.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);

        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            httplib::Client client(host_);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                                   "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {  // transient server-side failure
                last_error = "server returned status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendError(BackendError::Code::BackendUnavailable,
                                   "server returned status " + std::to_string(res->status));
            return parse_response(res->body, messages);
        }
        throw BackendError(BackendError::Code::BackendUnavailable,
                           "backend unavailable after " +
                               std::to_string(config_.max_retries + 1) + " attempts: " +
                               last_error);
    }

    std::string name() const override { return "http:" + config_.model; }

private:
    ChatReply parse_response(const std::string& body,
                             const std::vector<ChatMessage>& messages) const {
        json j = json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
            j["choices"].empty())
            throw BackendError(BackendError::Code::MalformedProviderResponse,
                               "response is not a chat completion object");
        const json& choice = j["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content"))
            throw BackendError(BackendError::Code::MalformedProviderResponse,
                               "choice has no message content");
        ChatReply reply;
        reply.text = choice["message"]["content"].is_null()
                         ? std::string{}
                         : choice["message"]["content"].get<std::string>();
        if (j.contains("usage") && j["usage"].contains("prompt_tokens")) {
            reply.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            reply.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
            reply.usage.total_tokens =
                reply.usage.prompt_tokens + reply.usage.completion_tokens;
            reply.usage.estimated = false;
        } else {
            std::int64_t prompt = 0;
            for (const auto& m : messages) prompt += estimate_tokens(m.content);
            reply.usage.prompt_tokens = prompt;
            reply.usage.completion_tokens = estimate_tokens(reply.text);
            reply.usage.total_tokens =
                reply.usage.prompt_tokens + reply.usage.completion_tokens;
            reply.usage.estimated = true;
        }
        return reply;
    }

    static void split_url(const std::string& url, std::string& host, std::string& path) {
        auto scheme_end = url.find("://");
        size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto path_start = url.find('/', host_start);
        if (path_start == std::string::npos) {
            host = url;
            path.clear();
        } else {
            host = url.substr(0, path_start);
            path = url.substr(path_start);
            while (!path.empty() && path.back() == '/') path.pop_back();
        }
    }

    HttpBackendConfig config_;
    std::string host_;
    std::string path_prefix_;
};

}  // namespace riva
#endif  // RIVA_NO_HTTP_BACKEND
