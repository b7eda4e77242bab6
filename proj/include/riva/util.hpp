// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace riva {

using json = nlohmann::json;

// Scalar value used for resource attributes, predicate operands and tool
// call arguments.
using Value = std::variant<std::string, std::int64_t, double, bool>;

inline json value_to_json(const Value& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

inline Value value_from_json(const json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    return j.get<std::string>();
}

// Fixed one-decimal rendering keeps generated telemetry byte-stable.
inline std::string format_fixed1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

inline std::string value_to_string(const Value& v) {
    struct Printer {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_fixed1(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    };
    return std::visit(Printer{}, v);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// splitmix64: tiny, platform-stable generator for simulated telemetry.
// std::mt19937 distributions are not guaranteed identical across
// implementations, so we avoid them everywhere determinism matters.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    // Uniform-ish in [lo, hi] with one decimal of precision.
    double range1(double lo, double hi) {
        double t = static_cast<double>(next() % 10001) / 10000.0;
        double v = lo + t * (hi - lo);
        return std::round(v * 10.0) / 10.0;
    }

private:
    std::uint64_t state_;
};

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Lowercase, punctuation stripped, whitespace collapsed to single spaces.
inline std::string normalize_text(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '_' || c == '-' || c == '.') {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

inline std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> words;
    std::istringstream is(s);
    std::string w;
    while (is >> w) words.push_back(w);
    return words;
}

inline bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

}  // namespace riva
