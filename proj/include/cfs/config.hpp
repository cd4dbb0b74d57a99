#pragma once

#include "cfs/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace cfs {

/// Invalid run configuration; `field` names the offending key.
struct ConfigError : Error {
    std::string field, message;
    ConfigError(std::string f, std::string msg)
        : Error("config", f + ": " + msg), field(std::move(f)), message(std::move(msg)) {}
};

struct RunConfig {
    std::string metric = "minkowski";
    std::map<std::string, double> params;
    double mass = 1.0;
    std::vector<double> eps{1e-2};
    int order = 1;
    int pairs = 10;
    unsigned seed = 1;
    double scale = 0.045;
    /// regularizing field sign switch: +1, -1, or 0 for the per-command default
    int sign = 0;
    int sdw_nodes = 8;
    double cutoff = 40.0;
    bool scale_with_eps = true;
    double taper = 0.5;
    double rel_tol = 1e-5;
    std::string out;
    std::string format = "csv";
    std::vector<int> suite;

    bool operator==(const RunConfig&) const = default;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

inline double parse_real(const std::string& field, const std::string& v) {
    try {
        size_t n = 0;
        const double d = std::stod(v, &n);
        if (n != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + v + "'");
    }
}

inline long parse_int(const std::string& field, const std::string& v) {
    const double d = parse_real(field, v);
    if (d != std::floor(d)) throw ConfigError(field, "expected an integer, got '" + v + "'");
    return long(d);
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_floating_point_v<T>)
            s += format_double(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace detail

inline const std::vector<std::string>& known_metrics() {
    static const std::vector<std::string> m{"minkowski", "desitter", "flrw", "schwarzschild", "ultrastatic"};
    return m;
}

/// Sets one dotted key; the same keys appear in the echo block.
inline void set_key(RunConfig& c, const std::string& key, const std::string& raw) {
    using detail::parse_int;
    using detail::parse_real;
    const std::string v = detail::trim(raw);
    if (key == "metric")
        c.metric = v;
    else if (key.rfind("param.", 0) == 0 && key.size() > 6)
        c.params[key.substr(6)] = parse_real(key, v);
    else if (key == "mass")
        c.mass = parse_real(key, v);
    else if (key == "eps") {
        c.eps.clear();
        for (const auto& s : detail::split(v, ',')) c.eps.push_back(parse_real(key, s));
    } else if (key == "order")
        c.order = int(parse_int(key, v));
    else if (key == "pairs")
        c.pairs = int(parse_int(key, v));
    else if (key == "seed") {
        const long s = parse_int(key, v);
        if (s < 0) throw ConfigError(key, "must be non-negative");
        c.seed = unsigned(s);
    } else if (key == "scale")
        c.scale = parse_real(key, v);
    else if (key == "regfield.sign")
        c.sign = int(parse_int(key, v));
    else if (key == "quad.sdw_nodes")
        c.sdw_nodes = int(parse_int(key, v));
    else if (key == "quad.cutoff")
        c.cutoff = parse_real(key, v);
    else if (key == "quad.scale_with_eps") {
        if (v != "true" && v != "false") throw ConfigError(key, "expected true or false");
        c.scale_with_eps = v == "true";
    } else if (key == "quad.taper")
        c.taper = parse_real(key, v);
    else if (key == "quad.rel_tol")
        c.rel_tol = parse_real(key, v);
    else if (key == "out")
        c.out = v;
    else if (key == "format")
        c.format = v;
    else if (key == "suite") {
        c.suite.clear();
        if (!v.empty())
            for (const auto& s : detail::split(v, ',')) c.suite.push_back(int(parse_int(key, s)));
    } else
        throw ConfigError(key, "unknown key");
}

inline void validate(const RunConfig& c) {
    if (std::find(known_metrics().begin(), known_metrics().end(), c.metric) == known_metrics().end())
        throw ConfigError("metric", "unknown metric '" + c.metric + "'");
    if (!(c.mass > 0)) throw ConfigError("mass", "must be > 0");
    if (c.eps.empty()) throw ConfigError("eps", "needs at least one value");
    for (size_t i = 0; i < c.eps.size(); ++i) {
        if (!(c.eps[i] > 0)) throw ConfigError("eps", "values must be > 0");
        if (i && !(c.eps[i] > c.eps[i - 1])) throw ConfigError("eps", "values must be strictly increasing");
    }
    if (c.order < 0 || c.order > 2) throw ConfigError("order", "must lie in [0, 2]");
    if (c.pairs < 1) throw ConfigError("pairs", "must be >= 1");
    if (!(c.scale > 0)) throw ConfigError("scale", "must be > 0");
    if (c.sign < -1 || c.sign > 1) throw ConfigError("regfield.sign", "must be +1, -1 or 0");
    if (c.sdw_nodes != 8 && c.sdw_nodes != 16 && c.sdw_nodes != 32)
        throw ConfigError("quad.sdw_nodes", "must be 8, 16 or 32");
    if (!(c.cutoff > 0)) throw ConfigError("quad.cutoff", "must be > 0");
    if (!(c.taper > 0 && c.taper <= 1)) throw ConfigError("quad.taper", "must lie in (0, 1]");
    if (!(c.rel_tol > 0)) throw ConfigError("quad.rel_tol", "must be > 0");
    if (c.format != "csv" && c.format != "json") throw ConfigError("format", "must be csv or json");
    for (int s : c.suite)
        if (s < 1 || s > 12) throw ConfigError("suite", "ids must lie in [1, 12]");
}

/// key = value lines in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> e{{"metric", c.metric}};
    for (const auto& [k, v] : c.params) e.emplace_back("param." + k, format_double(v));
    e.emplace_back("mass", format_double(c.mass));
    e.emplace_back("eps", detail::join(c.eps));
    e.emplace_back("order", std::to_string(c.order));
    e.emplace_back("pairs", std::to_string(c.pairs));
    e.emplace_back("seed", std::to_string(c.seed));
    e.emplace_back("scale", format_double(c.scale));
    e.emplace_back("regfield.sign", std::to_string(c.sign));
    e.emplace_back("quad.sdw_nodes", std::to_string(c.sdw_nodes));
    e.emplace_back("quad.cutoff", format_double(c.cutoff));
    e.emplace_back("quad.scale_with_eps", c.scale_with_eps ? "true" : "false");
    e.emplace_back("quad.taper", format_double(c.taper));
    e.emplace_back("quad.rel_tol", format_double(c.rel_tol));
    e.emplace_back("out", c.out);
    e.emplace_back("format", c.format);
    e.emplace_back("suite", detail::join(c.suite));
    return e;
}

/// Echo block, one "# key = value" line each.
inline std::string echo_config(const RunConfig& c) {
    std::string s;
    for (const auto& [k, v] : config_entries(c)) s += "# " + k + " = " + v + "\n";
    return s;
}

/// Parses key = value text. A leading '#' is stripped, so an echo block (or a whole CSV file) reparses;
/// lines without '=' are skipped.
inline RunConfig parse_config(const std::string& text, RunConfig c = {}) {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::string t = detail::trim(line);
        if (!t.empty() && t[0] == '#') t = detail::trim(t.substr(1));
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        set_key(c, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
    }
    return c;
}

}  // namespace cfs
