// SPDX-License-Identifier: Apache-2.0
#pragma once

// Declarative infrastructure specifications. A spec document declares
// resources with attributes and a list of verifiable properties; the
// property is the unit every other component works on.
//
// Document format (line oriented, '#' starts a comment):
//
//   spec <id>
//   meta <key> = <value>
//   resource <name> {
//     <attr> = <value>
//     services = "a, b"        # declares service processes on the resource
//   }
//   property <id>: <predicate> on <subject>
//   property: <predicate> on <subject>     # id defaults to the line number
//
// Predicates:
//   reachable
//   service_running
//   attr_equals <name> <value>
//   logs_clean <pattern>
//   metric_in_range <name> <lo> <hi>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "riva/util.hpp"

namespace riva {

using PropertyId = std::string;

struct ReachablePredicate {
    bool operator==(const ReachablePredicate&) const = default;
};

struct ServiceRunningPredicate {
    bool operator==(const ServiceRunningPredicate&) const = default;
};

struct AttributeEqualsPredicate {
    std::string attribute;
    Value expected;
    bool operator==(const AttributeEqualsPredicate&) const = default;
};

struct LogsCleanPredicate {
    std::string pattern;
    bool operator==(const LogsCleanPredicate&) const = default;
};

struct MetricInRangePredicate {
    std::string metric;
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const MetricInRangePredicate&) const = default;
};

using PropertyPredicate = std::variant<ReachablePredicate,
                                       ServiceRunningPredicate,
                                       AttributeEqualsPredicate,
                                       LogsCleanPredicate,
                                       MetricInRangePredicate>;

struct Property {
    PropertyId id;
    std::string subject;  // resource or service declared in the same spec
    PropertyPredicate predicate;
    std::string description;

    bool operator==(const Property&) const = default;
};

struct ResourceDecl {
    std::string name;
    std::map<std::string, Value> attributes;
    std::vector<std::string> services;

    bool operator==(const ResourceDecl&) const = default;
};

struct Specification {
    std::string id = "spec";
    std::vector<ResourceDecl> resources;
    std::vector<Property> properties;
    std::map<std::string, std::string> metadata;

    bool operator==(const Specification&) const = default;

    const ResourceDecl* find_resource(const std::string& name) const {
        for (const auto& r : resources)
            if (r.name == name) return &r;
        return nullptr;
    }

    const Property* find_property(const PropertyId& id) const {
        for (const auto& p : properties)
            if (p.id == id) return &p;
        return nullptr;
    }

    // First resource (document order) hosting the named service.
    const ResourceDecl* find_service_host(const std::string& service) const {
        for (const auto& r : resources)
            for (const auto& s : r.services)
                if (s == service) return &r;
        return nullptr;
    }

    bool subject_known(const std::string& subject) const {
        return find_resource(subject) != nullptr || find_service_host(subject) != nullptr;
    }
};

enum class VerdictValue { Satisfied, Violated, Inconclusive };

inline std::string to_string(VerdictValue v) {
    switch (v) {
        case VerdictValue::Satisfied: return "satisfied";
        case VerdictValue::Violated: return "violated";
        case VerdictValue::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline std::optional<VerdictValue> verdict_from_string(const std::string& s) {
    if (s == "satisfied") return VerdictValue::Satisfied;
    if (s == "violated") return VerdictValue::Violated;
    if (s == "inconclusive") return VerdictValue::Inconclusive;
    return std::nullopt;
}

// Satisfied/Violated verdicts must reference exactly K history records;
// the orchestrator enforces this before accepting one.
struct Verdict {
    VerdictValue value = VerdictValue::Inconclusive;
    std::string rationale;
    std::vector<std::size_t> evidence;  // record indices within the goal
};

struct SpecParseError : std::runtime_error {
    enum class Kind { Syntax, DuplicatePropertyId, UnknownSubject };
    Kind kind;
    int line;

    SpecParseError(Kind k, int ln, const std::string& msg)
        : std::runtime_error("line " + std::to_string(ln) + ": " + msg), kind(k), line(ln) {}
};

namespace detail {

// Strips a trailing comment, honoring double quotes.
inline std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (c == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

inline bool parse_number(const std::string& tok, Value& out) {
    if (tok.empty()) return false;
    bool has_dot = tok.find('.') != std::string::npos;
    size_t idx = 0;
    try {
        if (has_dot) {
            double d = std::stod(tok, &idx);
            if (idx != tok.size()) return false;
            out = d;
        } else {
            std::int64_t i = std::stoll(tok, &idx);
            if (idx != tok.size()) return false;
            out = i;
        }
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

// Reads one scalar token from `s` starting at `pos`: a quoted string or a
// bare word. Advances pos past the token.
inline Value parse_scalar(const std::string& s, size_t& pos, int line_no) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos >= s.size())
        throw SpecParseError(SpecParseError::Kind::Syntax, line_no, "expected a value");
    if (s[pos] == '"') {
        std::string out;
        ++pos;
        while (pos < s.size() && s[pos] != '"') {
            if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
            out.push_back(s[pos++]);
        }
        if (pos >= s.size())
            throw SpecParseError(SpecParseError::Kind::Syntax, line_no, "unterminated string");
        ++pos;  // closing quote
        return out;
    }
    size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    std::string tok = s.substr(start, pos - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    Value num;
    if (parse_number(tok, num)) return num;
    return tok;
}

inline std::string parse_word(const std::string& s, size_t& pos, int line_no,
                              const char* what) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos)
        throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                             std::string("expected ") + what);
    return s.substr(start, pos - start);
}

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

}  // namespace detail

inline PropertyPredicate parse_predicate(const std::string& expr, int line_no) {
    size_t pos = 0;
    std::string kind = detail::parse_word(expr, pos, line_no, "predicate");
    if (kind == "reachable") return ReachablePredicate{};
    if (kind == "service_running") return ServiceRunningPredicate{};
    if (kind == "attr_equals") {
        AttributeEqualsPredicate p;
        p.attribute = detail::parse_word(expr, pos, line_no, "attribute name");
        p.expected = detail::parse_scalar(expr, pos, line_no);
        return p;
    }
    if (kind == "logs_clean") {
        LogsCleanPredicate p;
        Value v = detail::parse_scalar(expr, pos, line_no);
        p.pattern = std::holds_alternative<std::string>(v) ? std::get<std::string>(v)
                                                           : value_to_string(v);
        return p;
    }
    if (kind == "metric_in_range") {
        MetricInRangePredicate p;
        p.metric = detail::parse_word(expr, pos, line_no, "metric name");
        auto num = [&](const char* what) -> double {
            Value v = detail::parse_scalar(expr, pos, line_no);
            if (std::holds_alternative<double>(v)) return std::get<double>(v);
            if (std::holds_alternative<std::int64_t>(v))
                return static_cast<double>(std::get<std::int64_t>(v));
            throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                 std::string("expected numeric ") + what);
        };
        p.lo = num("lower bound");
        p.hi = num("upper bound");
        if (p.lo > p.hi)
            throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                 "metric_in_range requires lo <= hi");
        return p;
    }
    throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                         "unknown predicate '" + kind + "'");
}

inline std::string predicate_to_string(const PropertyPredicate& p) {
    struct Printer {
        std::string operator()(const ReachablePredicate&) const { return "reachable"; }
        std::string operator()(const ServiceRunningPredicate&) const { return "service_running"; }
        std::string operator()(const AttributeEqualsPredicate& a) const {
            std::string v = std::holds_alternative<std::string>(a.expected)
                                ? "\"" + std::get<std::string>(a.expected) + "\""
                                : value_to_string(a.expected);
            return "attr_equals " + a.attribute + " " + v;
        }
        std::string operator()(const LogsCleanPredicate& l) const {
            return "logs_clean \"" + l.pattern + "\"";
        }
        std::string operator()(const MetricInRangePredicate& m) const {
            return "metric_in_range " + m.metric + " " + format_fixed1(m.lo) + " " +
                   format_fixed1(m.hi);
        }
    };
    return std::visit(Printer{}, p);
}

inline Specification parse_spec(const std::string& text) {
    Specification spec;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    ResourceDecl* open_resource = nullptr;
    bool saw_spec_line = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(detail::strip_comment(raw));
        if (line.empty()) continue;

        if (open_resource != nullptr) {
            if (line == "}") {
                open_resource = nullptr;
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "expected '<attr> = <value>' or '}'");
            std::string key = trim(line.substr(0, eq));
            std::string rest = trim(line.substr(eq + 1));
            if (key.empty())
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "empty attribute name");
            size_t pos = 0;
            Value v = detail::parse_scalar(rest, pos, line_no);
            if (key == "services") {
                std::string csv = std::holds_alternative<std::string>(v)
                                      ? std::get<std::string>(v)
                                      : value_to_string(v);
                open_resource->services = detail::split_csv(csv);
            } else {
                open_resource->attributes[key] = v;
            }
            continue;
        }

        if (line.rfind("spec ", 0) == 0) {
            if (saw_spec_line)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "duplicate spec line");
            spec.id = trim(line.substr(5));
            saw_spec_line = true;
            continue;
        }

        if (line.rfind("meta ", 0) == 0) {
            std::string rest = line.substr(5);
            size_t eq = rest.find('=');
            if (eq == std::string::npos)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "expected 'meta <key> = <value>'");
            std::string key = trim(rest.substr(0, eq));
            size_t pos = 0;
            std::string tail = trim(rest.substr(eq + 1));
            Value v = detail::parse_scalar(tail, pos, line_no);
            spec.metadata[key] = std::holds_alternative<std::string>(v)
                                     ? std::get<std::string>(v)
                                     : value_to_string(v);
            continue;
        }

        if (line.rfind("resource ", 0) == 0) {
            std::string rest = trim(line.substr(9));
            if (rest.size() < 2 || rest.back() != '{')
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "expected 'resource <name> {'");
            std::string name = trim(rest.substr(0, rest.size() - 1));
            if (name.empty() || name.find(' ') != std::string::npos)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "invalid resource name");
            if (spec.find_resource(name) != nullptr)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "duplicate resource '" + name + "'");
            spec.resources.push_back(ResourceDecl{name, {}, {}});
            open_resource = &spec.resources.back();
            continue;
        }

        if (line.rfind("property", 0) == 0) {
            std::string rest = trim(line.substr(8));
            size_t colon = rest.find(':');
            if (colon == std::string::npos)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "expected 'property [<id>]: <predicate> on <subject>'");
            std::string id = trim(rest.substr(0, colon));
            if (id.empty()) id = std::to_string(line_no);  // line number as default id
            std::string body = trim(rest.substr(colon + 1));
            size_t on = body.rfind(" on ");
            if (on == std::string::npos)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "missing 'on <subject>'");
            std::string expr = trim(body.substr(0, on));
            std::string subject = trim(body.substr(on + 4));
            if (subject.empty() || subject.find(' ') != std::string::npos)
                throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                                     "invalid subject");
            Property prop;
            prop.id = id;
            prop.subject = subject;
            prop.predicate = parse_predicate(expr, line_no);
            prop.description = "property " + id + ": " + expr + " on " + subject;
            if (spec.find_property(id) != nullptr)
                throw SpecParseError(SpecParseError::Kind::DuplicatePropertyId, line_no,
                                     "duplicate property id '" + id + "'");
            spec.properties.push_back(std::move(prop));
            continue;
        }

        throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                             "unrecognized line '" + line + "'");
    }

    if (open_resource != nullptr)
        throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                             "unterminated resource block");
    if (spec.properties.empty())
        throw SpecParseError(SpecParseError::Kind::Syntax, line_no,
                             "specification declares no properties");
    for (const auto& p : spec.properties) {
        if (!spec.subject_known(p.subject))
            throw SpecParseError(SpecParseError::Kind::UnknownSubject, 0,
                                 "unknown subject '" + p.subject + "' in property '" +
                                     p.id + "'");
    }
    return spec;
}

inline std::string serialize_value(const Value& v) {
    if (std::holds_alternative<std::string>(v)) {
        std::string out = "\"";
        for (char c : std::get<std::string>(v)) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    }
    if (std::holds_alternative<double>(v)) return format_fixed1(std::get<double>(v));
    return value_to_string(v);
}

inline std::string serialize_spec(const Specification& spec) {
    std::ostringstream out;
    out << "spec " << spec.id << "\n";
    for (const auto& [k, v] : spec.metadata) out << "meta " << k << " = \"" << v << "\"\n";
    for (const auto& r : spec.resources) {
        out << "\nresource " << r.name << " {\n";
        for (const auto& [k, v] : r.attributes)
            out << "  " << k << " = " << serialize_value(v) << "\n";
        if (!r.services.empty()) {
            out << "  services = \"";
            for (size_t i = 0; i < r.services.size(); ++i) {
                if (i) out << ", ";
                out << r.services[i];
            }
            out << "\"\n";
        }
        out << "}\n";
    }
    if (!spec.properties.empty()) out << "\n";
    for (const auto& p : spec.properties)
        out << "property " << p.id << ": " << predicate_to_string(p.predicate) << " on "
            << p.subject << "\n";
    return out.str();
}

// Structural equality ignoring derived description text.
inline bool structurally_equal(const Specification& a, const Specification& b) {
    if (a.id != b.id || a.metadata != b.metadata || a.resources != b.resources) return false;
    if (a.properties.size() != b.properties.size()) return false;
    for (size_t i = 0; i < a.properties.size(); ++i) {
        const auto& pa = a.properties[i];
        const auto& pb = b.properties[i];
        if (pa.id != pb.id || pa.subject != pb.subject || pa.predicate != pb.predicate)
            return false;
    }
    return true;
}

}  // namespace riva
