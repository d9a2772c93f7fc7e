#pragma once

// Plain-text problem configuration: one `key = value` per line, `#` starts a
// comment. Catalog entries take parameters as `name k=v k=v`, e.g.
//   flux = figure1 k=1.5
//   u0   = gaussian amp=1 width=1

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pmelab/solver.hpp"

namespace pmelab::config {

using Entries = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "n",   "L",      "N",        "alpha",     "p0",  "flux",
        "u0",  "boundary", "t0",     "t_end",     "cfl", "max_steps",
        "boundary_mass_threshold", "snapshots", "snapshot_count", "snapshot_spacing"};
    return keys;
}

inline void check_key(const std::string& key) {
    if (!known_keys().count(key)) throw ConfigError("unknown configuration key '" + key + "'");
}

/// Parses `key = value` lines. Later duplicates are rejected.
inline Entries parse_text(std::string_view text) {
    Entries out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + body + "'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        check_key(key);
        if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        if (!out.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

inline Entries load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

/// Applies `key=value` overrides; unknown keys are rejected.
inline void apply_overrides(Entries& e, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form key=value");
        const std::string key = trim(std::string_view(o).substr(0, eq));
        check_key(key);
        e[key] = trim(std::string_view(o).substr(eq + 1));
    }
}

/// Canonical text of the entries; stable input for output stamps.
inline std::string canonical(const Entries& e) {
    std::string s;
    for (const auto& [k, v] : e) s += k + "=" + v + "\n";
    return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw ConfigError("value '" + v + "' for '" + key + "' is not a number");
    return d;
}

inline long parse_long(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long d = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw ConfigError("value '" + v + "' for '" + key + "' is not an integer");
    return d;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
}

/// Catalog entry: a name followed by `param=value` tokens.
struct CatalogSpec {
    std::string name;
    std::map<std::string, double> params;
};

inline CatalogSpec parse_catalog(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    CatalogSpec spec;
    in >> spec.name;
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ConfigError("'" + key + "' parameter '" + tok + "' is not name=value");
        spec.params[tok.substr(0, eq)] = parse_double(key + "." + tok.substr(0, eq), tok.substr(eq + 1));
    }
    return spec;
}

namespace detail {

inline double take(CatalogSpec& s, const std::string& param, double fallback) {
    const auto it = s.params.find(param);
    if (it == s.params.end()) return fallback;
    const double v = it->second;
    s.params.erase(it);
    return v;
}

inline void ensure_consumed(const CatalogSpec& s, const std::string& key) {
    if (!s.params.empty()) {
        throw ConfigError("unknown parameter '" + s.params.begin()->first + "' for " + key + " '" + s.name + "'");
    }
}

}  // namespace detail

inline FluxModel make_flux(CatalogSpec s, int n) {
    FluxModel f;
    if (s.name == "zero") {
        f = flux::zero(n);
    } else if (s.name == "linear") {
        f = flux::linear(n, detail::take(s, "c", 1.0));
    } else if (s.name == "burgers") {
        f = flux::burgers(n);
    } else if (s.name == "figure1") {
        f = flux::figure1(n, detail::take(s, "k", 1.5));
    } else {
        throw ConfigError("unknown flux '" + s.name + "' (zero, linear, burgers, figure1)");
    }
    detail::ensure_consumed(s, "flux");
    return f;
}

inline InitialDatum make_datum(CatalogSpec s, int n, double alpha, double t0) {
    InitialDatum d;
    if (s.name == "zero") {
        d = initial::zero();
    } else if (s.name == "constant") {
        d = initial::constant(detail::take(s, "value", 1.0));
    } else if (s.name == "gaussian") {
        const double amp = detail::take(s, "amp", 1.0);
        const double width = detail::take(s, "width", 1.0);
        d = initial::gaussian(amp, width, detail::take(s, "center", 0.0));
    } else if (s.name == "odd_gaussian") {
        const double amp = detail::take(s, "amp", 1.0);
        d = initial::odd_gaussian(amp, detail::take(s, "width", 1.0));
    } else if (s.name == "box") {
        const double amp = detail::take(s, "amp", 1.0);
        d = initial::box(amp, detail::take(s, "halfwidth", 1.0));
    } else if (s.name == "barenblatt") {
        const double C = detail::take(s, "C", 1.0);
        const double t = detail::take(s, "t", t0 > 0.0 ? t0 : 1.0);
        d = initial::barenblatt(BarenblattProfile(n, alpha, C), t);
    } else {
        throw ConfigError("unknown u0 '" + s.name + "' (zero, constant, gaussian, odd_gaussian, box, barenblatt)");
    }
    detail::ensure_consumed(s, "u0");
    return d;
}

struct RunConfig {
    Problem problem;
    SchemeConfig scheme;
};

inline std::string get(const Entries& e, const std::string& key, const std::string& fallback) {
    const auto it = e.find(key);
    return it == e.end() ? fallback : it->second;
}

/// Builds the problem and scheme; missing keys take documented defaults.
inline RunConfig build(const Entries& e) {
    for (const auto& [k, v] : e) check_key(k);
    const int n = static_cast<int>(parse_long("n", get(e, "n", "1")));
    const double L = parse_double("L", get(e, "L", "10"));
    const int N = static_cast<int>(parse_long("N", get(e, "N", "400")));
    const double alpha = parse_double("alpha", get(e, "alpha", "1"));
    const double p0 = parse_double("p0", get(e, "p0", "1"));
    const double t0 = parse_double("t0", get(e, "t0", "0"));
    const std::string boundary = get(e, "boundary", "zero_flux");
    BoundaryPolicy bp;
    if (boundary == "zero_flux") {
        bp = BoundaryPolicy::zero_flux;
    } else if (boundary == "dirichlet_zero") {
        bp = BoundaryPolicy::dirichlet_zero;
    } else {
        throw ConfigError("boundary must be zero_flux or dirichlet_zero, got '" + boundary + "'");
    }

    try {
        Problem p{Grid(n, L, N),
                  alpha,
                  p0,
                  make_flux(parse_catalog("flux", get(e, "flux", "zero")), n),
                  make_datum(parse_catalog("u0", get(e, "u0", "gaussian")), n, alpha, t0),
                  bp,
                  t0};
        p.validate();

        SchemeConfig c;
        c.t_end = parse_double("t_end", get(e, "t_end", "1"));
        c.cfl_safety = parse_double("cfl", get(e, "cfl", "0.9"));
        c.max_steps = parse_long("max_steps", get(e, "max_steps", "10000000"));
        c.boundary_mass_threshold = parse_double("boundary_mass_threshold", get(e, "boundary_mass_threshold", "1e-8"));
        if (e.count("snapshots") && e.count("snapshot_count")) {
            throw ConfigError("give either 'snapshots' or 'snapshot_count', not both");
        }
        if (e.count("snapshots")) {
            c.snapshot_times = parse_list("snapshots", e.at("snapshots"));
        } else {
            const int count = static_cast<int>(parse_long("snapshot_count", get(e, "snapshot_count", "11")));
            const std::string spacing = get(e, "snapshot_spacing", "linear");
            if (spacing == "linear") {
                c.snapshot_times = linspace_times(t0, c.t_end, count);
            } else if (spacing == "log") {
                if (!(t0 > 0.0)) throw ConfigError("snapshot_spacing = log needs t0 > 0");
                c.snapshot_times = logspace_times(t0, c.t_end, count);
            } else {
                throw ConfigError("snapshot_spacing must be linear or log");
            }
        }
        pmelab::detail::resolve_snapshot_times(c, t0);
        return {std::move(p), std::move(c)};
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ConfigError(std::string("invalid configuration: ") + err.what());
    }
}

}  // namespace pmelab::config
