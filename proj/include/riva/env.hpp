// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic simulated infrastructure. deploy() materializes a
// Specification into live state with generated telemetry on five
// surfaces (logs, metrics, traces, exec, ping); inject_drift() mutates
// that state so every surface reflects the fault consistently.
//
// Determinism contract: identical (spec, seed, injected faults) produce
// byte-identical observation text for the same request. The logical
// clock only orders observations, it never leaks into their content.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "riva/spec.hpp"

namespace riva {

enum class Surface { Logs, Metrics, Traces, Exec, Ping };

inline std::string to_string(Surface s) {
    switch (s) {
        case Surface::Logs: return "logs";
        case Surface::Metrics: return "metrics";
        case Surface::Traces: return "traces";
        case Surface::Exec: return "exec";
        case Surface::Ping: return "ping";
    }
    return "logs";
}

struct ObservationRequest {
    Surface surface = Surface::Logs;
    std::string target;          // resource name, service name, or logical node id
    std::string command;         // exec only; whitelisted
    std::string metric;          // metrics only; optional filter
    bool message_probe = false;  // ping only; application-level echo instead of icmp
};

struct AttributeDrift {
    std::string resource;
    std::string attribute;
    Value new_value;
};

struct ServiceDown {
    std::string resource;
    std::string service;
};

struct StaleMapping {
    std::string logical_id;    // node whose address mapping went stale
    std::string wrong_target;  // node the mapping now points at
};

struct MetricAnomaly {
    std::string resource;
    std::string metric;
    double multiplier = 1.0;
};

struct LogErrorBurst {
    std::string resource;
    std::string pattern;
};

using DriftFaultKind =
    std::variant<AttributeDrift, ServiceDown, StaleMapping, MetricAnomaly, LogErrorBurst>;

enum class FaultPhase { Provisioning, PostDeployment };

struct DriftFault {
    DriftFaultKind kind;
    FaultPhase phase = FaultPhase::PostDeployment;
};

inline std::string fault_kind_name(const DriftFaultKind& kind) {
    struct Namer {
        std::string operator()(const AttributeDrift&) const { return "attribute_drift"; }
        std::string operator()(const ServiceDown&) const { return "service_down"; }
        std::string operator()(const StaleMapping&) const { return "stale_mapping"; }
        std::string operator()(const MetricAnomaly&) const { return "metric_anomaly"; }
        std::string operator()(const LogErrorBurst&) const { return "log_error_burst"; }
    };
    return std::visit(Namer{}, kind);
}

// Component an operator would name as "where the fault is".
inline std::string fault_component(const DriftFaultKind& kind) {
    struct Namer {
        std::string operator()(const AttributeDrift& f) const { return f.resource; }
        std::string operator()(const ServiceDown& f) const { return f.service; }
        std::string operator()(const StaleMapping& f) const { return f.logical_id; }
        std::string operator()(const MetricAnomaly& f) const { return f.resource; }
        std::string operator()(const LogErrorBurst& f) const { return f.resource; }
    };
    return std::visit(Namer{}, kind);
}

struct GroundTruth {
    std::set<PropertyId> violated_properties;
    std::string faulty_component;  // empty when healthy
    std::string root_cause;        // fault kind name, empty when healthy
};

struct EnvError : std::runtime_error {
    enum class Code { UnknownTarget, UnsupportedCommand };
    Code code;

    EnvError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

namespace detail {

struct LiveResource {
    std::string name;
    std::map<std::string, Value> attributes;
    std::vector<std::string> services;
    std::set<std::string> running;
    std::vector<std::string> log_lines;
    // (service, metric) -> fixed-length series
    std::map<std::string, std::map<std::string, std::vector<double>>> metrics;
    std::vector<std::string> traces;
    double ping_ms = 0.3;
};

}  // namespace detail

class Environment {
public:
    static Environment deploy(const Specification& spec, std::uint64_t seed) {
        Environment env;
        env.spec_ = spec;
        env.seed_ = seed;
        for (const auto& decl : spec.resources) env.materialize(decl);
        return env;
    }

    const Specification& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t clock() const { return clock_; }
    const std::vector<DriftFault>& injected() const { return injected_; }

    void inject_drift(const DriftFault& fault) {
        std::visit([&](const auto& f) { apply(f, fault.phase); }, fault.kind);
        injected_.push_back(fault);
    }

    // Throws EnvError for targets or commands observe() would reject,
    // without generating output or advancing the clock. The tool layer
    // needs interface errors to surface identically for faulted and
    // healthy tools.
    void validate(const ObservationRequest& req) const {
        switch (req.surface) {
            case Surface::Logs:
            case Surface::Traces:
                resolve_resource_or_host(req.target);
                return;
            case Surface::Metrics: {
                const auto& res = resolve_resource_or_host(req.target);
                if (!req.metric.empty() && !has_metric(res, req.target, req.metric))
                    throw EnvError(EnvError::Code::UnknownTarget,
                                   "no metric '" + req.metric + "' on '" + req.target + "'");
                return;
            }
            case Surface::Exec: {
                resolve_logical(req.target);
                if (req.command != "hostname" && req.command != "ps" &&
                    req.command != "config" && req.command != "cat /var/log/syslog")
                    throw EnvError(EnvError::Code::UnsupportedCommand,
                                   "command not in exec whitelist: '" + req.command + "'");
                return;
            }
            case Surface::Ping:
                if (find_service_host(req.target) == nullptr) resolve_logical(req.target);
                return;
        }
    }

    std::string observe(const ObservationRequest& req) {
        validate(req);
        ++clock_;
        switch (req.surface) {
            case Surface::Logs: return render_logs(req.target);
            case Surface::Metrics: return render_metrics(req.target, req.metric);
            case Surface::Traces: return render_traces(req.target);
            case Surface::Exec: return render_exec(req.target, req.command);
            case Surface::Ping: return render_ping(req.target, req.message_probe);
        }
        return {};
    }

    // Mechanical evaluation of one property against current live state.
    bool evaluate_property(const Property& prop) const {
        struct Eval {
            const Environment& env;
            const Property& prop;

            bool operator()(const ReachablePredicate&) const {
                if (const auto* host = env.find_service_host(prop.subject)) {
                    return env.route(host->name) == host->name &&
                           host->running.count(prop.subject) != 0;
                }
                const auto& res = env.resolve_resource(prop.subject);
                return env.route(res.name) == res.name;
            }
            bool operator()(const ServiceRunningPredicate&) const {
                const auto* host = env.find_service_host(prop.subject);
                if (host == nullptr) return false;
                return host->running.count(prop.subject) != 0;
            }
            bool operator()(const AttributeEqualsPredicate& p) const {
                const auto& res = env.resolve_resource_or_host(prop.subject);
                auto it = res.attributes.find(p.attribute);
                return it != res.attributes.end() && it->second == p.expected;
            }
            bool operator()(const LogsCleanPredicate& p) const {
                const auto& res = env.resolve_resource_or_host(prop.subject);
                for (const auto& line : res.log_lines)
                    if (contains(line, p.pattern)) return false;
                return true;
            }
            bool operator()(const MetricInRangePredicate& p) const {
                const auto& res = env.resolve_resource_or_host(prop.subject);
                bool found = false;
                for (const auto& [svc, by_name] : res.metrics) {
                    if (env.find_service_host(prop.subject) != nullptr && svc != prop.subject)
                        continue;
                    auto it = by_name.find(p.metric);
                    if (it == by_name.end()) continue;
                    found = true;
                    for (double v : it->second)
                        if (v < p.lo || v > p.hi) return false;
                }
                return found;
            }
        };
        return std::visit(Eval{*this, prop}, prop.predicate);
    }

    GroundTruth ground_truth() const {
        GroundTruth gt;
        for (const auto& prop : spec_.properties)
            if (!evaluate_property(prop)) gt.violated_properties.insert(prop.id);
        if (!injected_.empty()) {
            gt.faulty_component = fault_component(injected_.front().kind);
            gt.root_cause = fault_kind_name(injected_.front().kind);
        }
        return gt;
    }

    const std::map<std::string, detail::LiveResource>& resources() const {
        return resources_;
    }
    const std::map<std::string, std::string>& ping_table() const { return ping_table_; }

private:
    void materialize(const ResourceDecl& decl) {
        detail::LiveResource res;
        res.name = decl.name;
        res.attributes = decl.attributes;
        res.services = decl.services;
        SplitMix64 rng(seed_ ^ fnv1a64(decl.name));
        res.ping_ms = 0.2 + static_cast<double>(rng.below(8)) / 10.0;

        std::string svc_list;
        for (size_t i = 0; i < decl.services.size(); ++i) {
            if (i) svc_list += ", ";
            svc_list += decl.services[i];
        }
        res.log_lines.push_back("[boot] " + decl.name + " up, services: " +
                                (svc_list.empty() ? "(none)" : svc_list));

        for (const auto& svc : decl.services) {
            res.running.insert(svc);
            res.log_lines.push_back("INFO " + svc + ": heartbeat ok (seq " +
                                    std::to_string(100 + rng.below(900)) + ")");
            res.log_lines.push_back("INFO " + svc + ": serving requests, queue depth " +
                                    std::to_string(rng.below(8)));

            auto& by_name = res.metrics[svc];
            double lat_base = 12.0 + static_cast<double>(rng.below(25));
            double rps_base = 60.0 + static_cast<double>(rng.below(80));
            double err_base = rng.range1(0.0, 0.4);
            for (int i = 0; i < 6; ++i) {
                by_name["latency_ms"].push_back(rng.range1(lat_base * 0.92, lat_base * 1.08));
                by_name["requests_per_sec"].push_back(
                    rng.range1(rps_base * 0.9, rps_base * 1.1));
                by_name["error_rate"].push_back(rng.range1(0.0, err_base));
            }

            for (int i = 0; i < 3; ++i) {
                double dur = rng.range1(lat_base * 0.9, lat_base * 1.2);
                res.traces.push_back("trace " + hex_short(rng.next()) + " span=" + svc +
                                     ".handle_request duration_ms=" + format_fixed1(dur) +
                                     " status=OK");
            }
        }

        // Logical ping keys: the resource name and, when declared, its
        // node_id attribute (the Appendix-style id-to-node table).
        ping_table_[decl.name] = decl.name;
        auto it = decl.attributes.find("node_id");
        if (it != decl.attributes.end())
            ping_table_[value_to_string(it->second)] = decl.name;

        resources_.emplace(decl.name, std::move(res));
    }

    void apply(const AttributeDrift& f, FaultPhase phase) {
        auto& res = resolve_resource_mut(f.resource);
        res.attributes[f.attribute] = f.new_value;
        std::string rendered = value_to_string(f.new_value);
        if (phase == FaultPhase::Provisioning)
            res.log_lines.push_back("NOTICE cloud-init: applied " + f.attribute + "=" +
                                    rendered + " on " + f.resource);
        else
            res.log_lines.push_back("WARN config-agent: " + f.attribute + " changed to " +
                                    rendered + " outside the managed workflow");
    }

    void apply(const ServiceDown& f, FaultPhase) {
        auto& res = resolve_resource_mut(f.resource);
        if (!res.running.count(f.service) && !has_service(res, f.service))
            throw EnvError(EnvError::Code::UnknownTarget,
                           "no service '" + f.service + "' on '" + f.resource + "'");
        res.running.erase(f.service);
        res.log_lines.push_back("ERROR " + f.service + ": terminated unexpectedly (exit 137)");
        res.log_lines.push_back("WARN supervisor: " + f.service + " not running");
        for (auto& [name, series] : res.metrics[f.service])
            for (double& v : series) v = 0.0;
        std::vector<std::string> kept;
        for (const auto& t : res.traces)
            if (!contains(t, "span=" + f.service + ".")) kept.push_back(t);
        res.traces = std::move(kept);
    }

    void apply(const StaleMapping& f, FaultPhase) {
        std::string old_target = resolve_logical(f.logical_id);
        std::string new_target = resolve_logical(f.wrong_target);
        for (auto& [key, target] : ping_table_)
            if (target == old_target) target = new_target;
    }

    void apply(const MetricAnomaly& f, FaultPhase) {
        auto& res = resolve_resource_mut(f.resource);
        bool found = false;
        for (auto& [svc, by_name] : res.metrics) {
            auto it = by_name.find(f.metric);
            if (it == by_name.end()) continue;
            found = true;
            for (double& v : it->second) v = std::round(v * f.multiplier * 10.0) / 10.0;
        }
        if (!found)
            throw EnvError(EnvError::Code::UnknownTarget,
                           "no metric '" + f.metric + "' on '" + f.resource + "'");
        if (f.metric == "latency_ms") {
            for (auto& line : res.traces) {
                auto pos = line.find("duration_ms=");
                if (pos == std::string::npos) continue;
                auto end = line.find(' ', pos);
                double dur = std::stod(line.substr(pos + 12, end - pos - 12));
                dur = std::round(dur * f.multiplier * 10.0) / 10.0;
                line = line.substr(0, pos) + "duration_ms=" + format_fixed1(dur) +
                       line.substr(end);
            }
        }
    }

    void apply(const LogErrorBurst& f, FaultPhase) {
        auto& res = resolve_resource_mut(f.resource);
        for (int i = 1; i <= 3; ++i)
            res.log_lines.push_back("ERROR " + f.pattern + " (burst " + std::to_string(i) +
                                    "/3)");
        if (!res.services.empty()) {
            const std::string& svc = res.services.front();
            res.traces.push_back("trace " + hex_short(fnv1a64(f.pattern)) + " span=" + svc +
                                 ".handle_request duration_ms=0.0 status=ERROR error=\"" +
                                 f.pattern + "\"");
        }
    }

    std::string render_logs(const std::string& target) const {
        const auto& res = resolve_resource_or_host(target);
        std::string out;
        for (const auto& line : res.log_lines) {
            out += line;
            out += "\n";
        }
        return out;
    }

    std::string render_metrics(const std::string& target, const std::string& metric) const {
        const auto& res = resolve_resource_or_host(target);
        bool service_scope = find_service_host(target) != nullptr;
        std::string out;
        for (const auto& [svc, by_name] : res.metrics) {
            if (service_scope && svc != target) continue;
            for (const auto& [name, series] : by_name) {
                if (!metric.empty() && name != metric) continue;
                double sum = 0.0;
                std::string points;
                for (size_t i = 0; i < series.size(); ++i) {
                    if (i) points += ", ";
                    points += format_fixed1(series[i]);
                    sum += series[i];
                }
                double avg = series.empty() ? 0.0 : sum / static_cast<double>(series.size());
                out += "metric " + name + " on " + svc + "@" + res.name + ": [" + points +
                       "] avg=" + format_fixed1(avg) + "\n";
            }
        }
        return out;
    }

    std::string render_traces(const std::string& target) const {
        const auto& res = resolve_resource_or_host(target);
        bool service_scope = find_service_host(target) != nullptr;
        std::string out;
        for (const auto& line : res.traces) {
            if (service_scope && !contains(line, "span=" + target + ".")) continue;
            out += line;
            out += "\n";
        }
        if (out.empty()) out = "no spans recorded for " + target + "\n";
        return out;
    }

    std::string render_exec(const std::string& target, const std::string& command) const {
        // Remote execution connects through the same logical address table
        // the ping tool uses, so a stale mapping reroutes it too.
        const auto& res = resolve_resource(route(resolve_logical(target)));
        if (command == "hostname") return res.name + "\n";
        if (command == "ps") {
            std::string out = "PID   CMD\n";
            int pid = 200;
            for (const auto& svc : res.services) {
                if (res.running.count(svc))
                    out += std::to_string(pid) + "   " + svc + "\n";
                pid += 7;
            }
            return out;
        }
        if (command == "config") {
            std::string out;
            for (const auto& [k, v] : res.attributes)
                out += k + " = " + value_to_string(v) + "\n";
            return out;
        }
        // cat /var/log/syslog: the direct-file-read alternative to get_logs
        std::string out;
        for (const auto& line : res.log_lines) {
            out += line;
            out += "\n";
        }
        return out;
    }

    std::string render_ping(const std::string& target, bool message_probe) const {
        if (const auto* host = find_service_host(target)) {
            if (host->running.count(target) == 0)
                return message_probe ? "no ack from " + target + " (timeout)\n"
                                     : "request timeout for " + target + "\n";
            const auto& routed = resolve_resource(route(host->name));
            return service_reply(target, routed, message_probe);
        }
        const auto& routed = resolve_resource(route(resolve_logical(target)));
        if (message_probe)
            return "message delivered: ack from " + routed.name + " (" + ip_of(routed) +
                   ")\n";
        return "reply from " + ip_of(routed) + ": bytes=64 time=" +
               format_fixed1(routed.ping_ms) + " ms ttl=64\n";
    }

    std::string service_reply(const std::string& svc, const detail::LiveResource& routed,
                              bool message_probe) const {
        if (message_probe)
            return "message delivered: ack from " + svc + "@" + routed.name + " (" +
                   ip_of(routed) + ")\n";
        return "reply from " + ip_of(routed) + ": bytes=64 time=" +
               format_fixed1(routed.ping_ms) + " ms ttl=64\n";
    }

    std::string ip_of(const detail::LiveResource& res) const {
        auto it = res.attributes.find("ip");
        return it == res.attributes.end() ? "0.0.0.0" : value_to_string(it->second);
    }

    static std::string hex_short(std::uint64_t v) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%04x", static_cast<unsigned>(v & 0xffff));
        return buf;
    }

    static bool has_service(const detail::LiveResource& res, const std::string& svc) {
        for (const auto& s : res.services)
            if (s == svc) return true;
        return false;
    }

    bool has_metric(const detail::LiveResource& res, const std::string& target,
                    const std::string& metric) const {
        bool service_scope = find_service_host(target) != nullptr;
        for (const auto& [svc, by_name] : res.metrics) {
            if (service_scope && svc != target) continue;
            if (by_name.count(metric)) return true;
        }
        return false;
    }

    const detail::LiveResource* find_service_host(const std::string& svc) const {
        for (const auto& [name, res] : resources_)
            if (has_service(res, svc)) return &res;
        return nullptr;
    }

    const detail::LiveResource& resolve_resource(const std::string& name) const {
        auto it = resources_.find(name);
        if (it == resources_.end())
            throw EnvError(EnvError::Code::UnknownTarget, "unknown resource '" + name + "'");
        return it->second;
    }

    detail::LiveResource& resolve_resource_mut(const std::string& name) {
        auto it = resources_.find(name);
        if (it == resources_.end())
            throw EnvError(EnvError::Code::UnknownTarget, "unknown resource '" + name + "'");
        return it->second;
    }

    // Resource by name, or host resource of a service target.
    const detail::LiveResource& resolve_resource_or_host(const std::string& target) const {
        auto it = resources_.find(target);
        if (it != resources_.end()) return it->second;
        if (const auto* host = find_service_host(target)) return *host;
        throw EnvError(EnvError::Code::UnknownTarget, "unknown target '" + target + "'");
    }

    // Logical ping key (resource name or node_id value) -> resource name.
    std::string resolve_logical(const std::string& id) const {
        if (resources_.count(id)) return id;
        for (const auto& [name, res] : resources_) {
            auto it = res.attributes.find("node_id");
            if (it != res.attributes.end() && value_to_string(it->second) == id) return name;
        }
        throw EnvError(EnvError::Code::UnknownTarget, "unknown node '" + id + "'");
    }

    std::string route(const std::string& resource_name) const {
        auto it = ping_table_.find(resource_name);
        return it == ping_table_.end() ? resource_name : it->second;
    }

    Specification spec_;
    std::uint64_t seed_ = 0;
    std::uint64_t clock_ = 0;
    std::map<std::string, detail::LiveResource> resources_;
    std::map<std::string, std::string> ping_table_;
    std::vector<DriftFault> injected_;
};

}  // namespace riva
