#pragma once

// Command-line front end. dispatch() is kept in a header so tests can drive
// the commands in-process; tools/pmelab.cpp only forwards argv.
//
// Exit status: 0 success with all audits passing, 1 audit failure or
// numerical failure (reports still written), 2 usage or configuration error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmelab/barenblatt.hpp"
#include "pmelab/config.hpp"
#include "pmelab/exponents.hpp"
#include "pmelab/harness.hpp"
#include "pmelab/report.hpp"

namespace pmelab::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kOk = 0;
inline constexpr int kAuditFailed = 1;
inline constexpr int kUsage = 2;

/// Error tagged with the pipeline stage that raised it.
struct StageError {
    std::string stage;
    std::string message;
    int code;
};

/// Settings shared by every command.
struct Common {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
};

/// Writes <out>/<command>_<stamp>.<ext> and reports the path.
class Outputs {
   public:
    Outputs(const std::string& dir, const std::string& command, const std::string& canonical_input, std::ostream& log)
        : dir_(dir), stem_(command + "_" + report::fnv1a_hex(command + "\n" + canonical_input)), log_(log) {}

    std::filesystem::path path(const std::string& suffix) const { return dir_ / (stem_ + suffix); }

    void write(const std::string& suffix, const std::string& content) {
        const auto p = path(suffix);
        report::write_file(p, content);
        log_ << "wrote " << p.string() << "\n";
    }

    const std::string& stem() const noexcept { return stem_; }

   private:
    std::filesystem::path dir_;
    std::string stem_;
    std::ostream& log_;
};

namespace detail {

inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json series_json(const std::vector<std::pair<double, double>>& s, std::size_t max_points = 2001) {
    Json arr = Json::array();
    if (s.empty()) return arr;
    const std::size_t stride = std::max<std::size_t>(1, (s.size() + max_points - 2) / (max_points - 1));
    for (std::size_t i = 0; i < s.size(); i += stride) arr.push_back(Json::array({num(s[i].first), num(s[i].second)}));
    if ((s.size() - 1) % stride != 0) arr.push_back(Json::array({num(s.back().first), num(s.back().second)}));
    return arr;
}

inline Json run_json(const RunResult& r) {
    Json j;
    j["step_count"] = r.step_count;
    j["min_dt"] = num(r.min_dt);
    j["max_dt"] = num(r.max_dt);
    j["boundary_mass_max"] = num(r.boundary_mass_max);
    j["boundary_flagged"] = r.boundary_flagged;
    j["mass_series"] = series_json(r.mass_series);
    return j;
}

inline std::string q_label(double q) { return std::isinf(q) ? "inf" : report::num(q); }

inline config::Entries load_entries(const Common& c, const config::Entries& defaults) {
    config::Entries e = defaults;
    if (!c.config_path.empty()) {
        for (const auto& [k, v] : config::load_file(c.config_path)) e[k] = v;
    }
    config::apply_overrides(e, c.overrides);
    return e;
}

inline std::string options_text(const std::map<std::string, std::string>& opts) {
    std::string s;
    for (const auto& [k, v] : opts) s += "--" + k + "=" + v + "\n";
    return s;
}

inline double max_abs(const State& s) { return lq_norm(s, kInfNorm); }

/// Lq monotonicity applies only when the flux passes the sign condition.
inline Json monotonicity_json(const Problem& p, const RunResult& r, bool& passed) {
    const double M = std::max(max_abs(r.initial), 1e-12);
    const auto div = check_divergence_condition(p.flux, p.grid, {-M, M}, 64, r.snapshots.back().time);
    Json j;
    j["divergence_condition_satisfied"] = div.satisfied;
    j["divergence_worst_violation"] = num(div.worst_violation);
    Json rows = Json::array();
    for (const auto& e : audit_lq_monotonicity(r, {1.0, 2.0, 4.0, kInfNorm})) {
        Json row;
        row["q"] = q_label(e.q);
        row["max_uptick"] = num(e.max_uptick);
        row["passed"] = div.satisfied ? e.passed : true;
        row["applies"] = div.satisfied;
        if (div.satisfied && !e.passed) passed = false;
        rows.push_back(row);
    }
    j["lq_monotonicity"] = rows;
    return j;
}

}  // namespace detail

// --------------------------------------------------------------- commands

inline int cmd_run(const Common& c, std::ostream& out) {
    const auto entries = detail::load_entries(c, {});
    const auto cfg = config::build(entries);
    Outputs files(c.out_dir, "run", config::canonical(entries), out);

    const RunResult r = run(cfg.problem, cfg.scheme);
    bool passed = !r.boundary_flagged;
    Json j;
    j["command"] = "run";
    j["config"] = entries;
    j["run"] = detail::run_json(r);
    j["audits"] = detail::monotonicity_json(cfg.problem, r, passed);
    j["passed"] = passed;

    files.write(".csv", report::state_table(r.snapshots.back()).str());
    report::CsvTable all("snapshots", cfg.problem.grid.dimension() == 2
                                          ? std::vector<std::string>{"t", "x", "y", "u"}
                                          : std::vector<std::string>{"t", "x", "u"});
    for (const auto& s : r.snapshots) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            const Point x = s.grid.center(i);
            if (s.grid.dimension() == 2)
                all.add_row({s.time, x[0], x[1], s.values[i]});
            else
                all.add_row({s.time, x[0], s.values[i]});
        }
    }
    files.write("_snapshots.csv", all.str());
    files.write(".json", j.dump(2) + "\n");
    if (cfg.problem.grid.dimension() == 1) {
        files.write(".svg", report::initial_final_svg(r.initial, r.snapshots.back(), "run: " + cfg.problem.flux.name));
    }
    out << "run: " << r.step_count << " steps, boundary_mass_max=" << report::num(r.boundary_mass_max)
        << (passed ? ", audits passed\n" : ", AUDIT FAILED\n");
    return passed ? kOk : kAuditFailed;
}

inline config::Entries figure1_defaults() {
    return {{"n", "1"},      {"L", "10"},         {"N", "400"},           {"alpha", "0.5"},
            {"p0", "1"},     {"flux", "figure1 k=1.5"}, {"u0", "gaussian amp=1 width=1"},
            {"t_end", "5"},  {"snapshot_count", "6"}};
}

inline int cmd_figure1(const Common& c, std::ostream& out) {
    const auto entries = detail::load_entries(c, figure1_defaults());
    const auto cfg = config::build(entries);
    Outputs files(c.out_dir, "figure1", config::canonical(entries), out);

    const Figure1Result res = figure1_experiment(cfg.problem, cfg.scheme);
    const bool passed = res.l1_relative_drift <= 0.005;
    Json j;
    j["command"] = "figure1";
    j["config"] = entries;
    j["run"] = detail::run_json(res.run);
    j["l1_relative_drift"] = detail::num(res.l1_relative_drift);
    j["max_change"] = detail::num(res.max_change);
    j["l1_fit"] = {{"t_lo", res.l1_record.t_lo},
                   {"t_hi", res.l1_record.t_hi},
                   {"slope", detail::num(res.l1_record.fitted_slope)},
                   {"intercept", detail::num(res.l1_record.fitted_intercept)},
                   {"r_squared", detail::num(res.l1_record.r_squared)}};
    j["sup_norm_series"] = detail::series_json(norm_series(res.run, kInfNorm));
    j["passed"] = passed;

    report::CsvTable t("figure1 t=" + report::num(res.run.snapshots.back().time), {"x", "u0", "u"});
    for (std::size_t i = 0; i < res.run.initial.values.size(); ++i) {
        t.add_row({res.run.initial.grid.center(i)[0], res.run.initial.values[i], res.run.snapshots.back().values[i]});
    }
    files.write(".csv", t.str());
    files.write(".json", j.dump(2) + "\n");
    files.write(".svg", report::initial_final_svg(res.run.initial, res.run.snapshots.back(),
                                                  "u0 (dashed) and u(., t_end) (solid)"));
    out << "figure1: L1 drift " << report::num(res.l1_relative_drift) << ", max |u(T)-u0| "
        << report::num(res.max_change) << (passed ? "\n" : " AUDIT FAILED\n");
    return passed ? kOk : kAuditFailed;
}

struct BarenblattOptions {
    int n = 1;
    double alpha = 1.0;
    double C = 1.0;
    double L = 20.0;
    double t0 = 1.0;
    double t1 = 2.0;
    std::vector<int> Ns{100, 200, 400, 800};
};

struct RefinementRow {
    int N;
    double interior_residual;
    double global_residual;
    double l1_error;
    double order;  ///< NaN for the first row
};

/// Residual and solver-error refinement study against the exact profile.
inline std::vector<RefinementRow> barenblatt_refinement(const BarenblattOptions& o) {
    const BarenblattProfile prof(o.n, o.alpha, o.C);
    std::vector<RefinementRow> rows;
    for (int N : o.Ns) {
        const Grid g(o.n, o.L, N);
        const auto res = residual_check(prof, g, o.t0);
        Problem p{g, o.alpha, 1.0, flux::zero(o.n), initial::barenblatt(prof, o.t0), BoundaryPolicy::zero_flux, o.t0};
        SchemeConfig sc;
        sc.t_end = o.t1;
        const RunResult r = run(p, sc);
        const State exact = sample_barenblatt(prof, g, o.t1);
        double err = 0.0;
        for (std::size_t i = 0; i < exact.values.size(); ++i) err += std::abs(r.snapshots.back().values[i] - exact.values[i]);
        err *= g.cell_volume();
        double order = std::numeric_limits<double>::quiet_NaN();
        if (!rows.empty()) order = std::log(rows.back().l1_error / err) / std::log(double(N) / rows.back().N);
        rows.push_back({N, res.interior, res.global, err, order});
    }
    return rows;
}

inline int cmd_barenblatt(const Common& c, const BarenblattOptions& o, std::ostream& out) {
    if (!c.config_path.empty() || !c.overrides.empty()) {
        throw ConfigError("barenblatt-validate takes flags only, not --config/--set");
    }
    std::ostringstream key;
    key << "n=" << o.n << " alpha=" << report::num(o.alpha) << " C=" << report::num(o.C) << " L=" << report::num(o.L)
        << " t0=" << report::num(o.t0) << " t1=" << report::num(o.t1) << " Ns=";
    for (int N : o.Ns) key << N << ",";
    Outputs files(c.out_dir, "barenblatt-validate", key.str(), out);

    const auto rows = barenblatt_refinement(o);
    report::CsvTable t("barenblatt-refinement", {"N", "interior_residual", "global_residual", "l1_error", "observed_order"});
    bool passed = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.add_row({double(rows[i].N), rows[i].interior_residual, rows[i].global_residual, rows[i].l1_error, rows[i].order});
        if (i > 0) {
            if (!(rows[i].interior_residual <= 0.5 * rows[i - 1].interior_residual)) passed = false;
            if (!(rows[i].l1_error < rows[i - 1].l1_error)) passed = false;
        }
    }
    if (rows.size() >= 2 && !(rows.back().order >= 0.9)) passed = false;
    Json j;
    j["command"] = "barenblatt-validate";
    j["parameters"] = key.str();
    Json arr = Json::array();
    for (const auto& r : rows) {
        arr.push_back({{"N", r.N},
                       {"interior_residual", detail::num(r.interior_residual)},
                       {"global_residual", detail::num(r.global_residual)},
                       {"l1_error", detail::num(r.l1_error)},
                       {"observed_order", detail::num(r.order)}});
    }
    j["rows"] = arr;
    j["passed"] = passed;
    out << t.str();
    files.write(".csv", t.str());
    files.write(".json", j.dump(2) + "\n");
    return passed ? kOk : kAuditFailed;
}

struct DecayOptions {
    std::vector<double> alphas{1.0};
    std::optional<double> window_lo;
    std::optional<double> window_hi;
    double tolerance = 0.03;
};

inline config::Entries decay_defaults() {
    return {{"n", "1"}, {"L", "20"}, {"N", "800"}, {"p0", "1"}, {"flux", "zero"}, {"u0", "gaussian"}, {"t_end", "50"}};
}

struct DecayOutcome {
    double alpha;
    DecayRecord record;
    double expected;
    RunResult run;
};

inline int cmd_decay(const Common& c, const DecayOptions& o, std::ostream& out) {
    auto entries = detail::load_entries(c, decay_defaults());
    std::map<std::string, std::string> opts;
    std::string alist;
    for (double a : o.alphas) alist += report::num(a) + ",";
    opts["alphas"] = alist;
    opts["tolerance"] = report::num(o.tolerance);
    if (o.window_lo) opts["window-lo"] = report::num(*o.window_lo);
    if (o.window_hi) opts["window-hi"] = report::num(*o.window_hi);
    Outputs files(c.out_dir, "decay-study", config::canonical(entries) + detail::options_text(opts), out);
    const bool custom_snapshots = entries.count("snapshots") || entries.count("snapshot_count");

    // Independent runs fan out; results are gathered in input order so the
    // written files do not depend on scheduling.
    std::vector<std::future<DecayOutcome>> jobs;
    for (double a : o.alphas) {
        config::Entries e = entries;
        e["alpha"] = report::num(a);
        auto cfg = config::build(e);
        if (!custom_snapshots) {
            const double t0 = cfg.problem.t_start;
            std::vector<double> ts{t0};
            for (double t : logspace_times(std::max(cfg.scheme.t_end / 100.0, t0 > 0 ? t0 : 1e-300), cfg.scheme.t_end, 41))
                if (t > t0) ts.push_back(t);
            cfg.scheme.snapshot_times = ts;
        }
        jobs.push_back(std::async(std::launch::async, [cfg = std::move(cfg), a, o]() {
            RunResult r = run(cfg.problem, cfg.scheme);
            std::optional<std::pair<double, double>> window;
            if (o.window_lo || o.window_hi) {
                window = std::pair{o.window_lo.value_or(cfg.scheme.t_end / 10.0), o.window_hi.value_or(cfg.scheme.t_end)};
            }
            DecayRecord rec = decay_record(r, kInfNorm, window);
            const double expected =
                -exponents::smoothing_exponents(cfg.problem.grid.dimension(), cfg.problem.p0, a).gamma0;
            return DecayOutcome{a, std::move(rec), expected, std::move(r)};
        }));
    }
    std::vector<DecayOutcome> results;
    for (auto& f : jobs) results.push_back(f.get());

    bool passed = true;
    report::CsvTable t("decay-study", {"alpha", "fitted_slope", "expected_slope", "abs_error", "r_squared", "t_lo", "t_hi"});
    report::CsvTable series("decay-series", {"alpha", "t", "sup_norm"});
    Json arr = Json::array();
    std::vector<report::Curve> curves;
    report::PlotOptions po;
    po.title = "sup-norm decay (log-log)";
    po.x_label = "t";
    po.y_label = "||u(t)||_inf";
    po.log_x = po.log_y = true;
    for (const auto& d : results) {
        const auto& rec = d.record;
        const double err = std::abs(rec.fitted_slope - d.expected);
        const bool ok = err <= o.tolerance && !d.run.boundary_flagged;
        passed = passed && ok;
        t.add_row({d.alpha, rec.fitted_slope, d.expected, err, rec.r_squared, rec.t_lo, rec.t_hi});
        report::Curve pts{"alpha=" + report::num(d.alpha), {}, report::CurveStyle::markers};
        for (const auto& [tt, v] : rec.series) {
            series.add_row({d.alpha, tt, v});
            if (tt > 0.0 && v > 0.0) pts.points.emplace_back(tt, v);
        }
        curves.push_back(pts);
        curves.push_back({"fit alpha=" + report::num(d.alpha),
                          {{rec.t_lo, std::exp(rec.fitted_intercept) * std::pow(rec.t_lo, rec.fitted_slope)},
                           {rec.t_hi, std::exp(rec.fitted_intercept) * std::pow(rec.t_hi, rec.fitted_slope)}},
                          report::CurveStyle::solid});
        char buf[160];
        std::snprintf(buf, sizeof buf, "alpha=%g: slope %.4f (expected %.4f)", d.alpha, rec.fitted_slope, d.expected);
        po.annotations.push_back(buf);
        arr.push_back({{"alpha", d.alpha},
                       {"fitted_slope", detail::num(rec.fitted_slope)},
                       {"expected_slope", detail::num(d.expected)},
                       {"abs_error", detail::num(err)},
                       {"r_squared", detail::num(rec.r_squared)},
                       {"window", {rec.t_lo, rec.t_hi}},
                       {"boundary_mass_max", detail::num(d.run.boundary_mass_max)},
                       {"passed", ok}});
    }
    Json j;
    j["command"] = "decay-study";
    j["config"] = entries;
    j["tolerance"] = o.tolerance;
    j["studies"] = arr;
    j["passed"] = passed;
    files.write(".csv", t.str());
    files.write("_series.csv", series.str());
    files.write(".json", j.dump(2) + "\n");
    files.write(".svg", report::render_svg(curves, po));
    out << t.str();
    return passed ? kOk : kAuditFailed;
}

struct MoserOptions {
    double q = 1.0;
    int n = 1;
    double alpha = 1.0;
    int m = 40;
    double C = 2.0;
    double p0 = 1.0;
};

inline report::CsvTable moser_table(const MoserOptions& o) {
    report::CsvTable t("moser-table q=" + report::num(o.q) + " n=" + std::to_string(o.n) + " alpha=" + report::num(o.alpha),
                       {"m", "A_m", "S_m", "A_limit_gap", "S_limit_gap"});
    const double a_lim = exponents::moser_A_limit(o.q, o.n, o.alpha);
    const double s_lim = exponents::moser_sum_limit(o.q, o.n, o.alpha);
    for (int m = 1; m <= o.m; ++m) {
        const double A = exponents::moser_A(m, o.q, o.n, o.alpha);
        const double S = exponents::moser_exponent_sum(m, o.q, o.n, o.alpha);
        t.add_row({double(m), A, S, A - a_lim, S - s_lim});
    }
    return t;
}

inline int cmd_moser(const Common& c, const MoserOptions& o, std::ostream& out) {
    if (!c.config_path.empty() || !c.overrides.empty()) throw ConfigError("moser-table takes flags only");
    if (o.m < 1) throw ConfigError("--m must be >= 1");
    std::map<std::string, std::string> opts{{"q", report::num(o.q)},
                                            {"n", std::to_string(o.n)},
                                            {"alpha", report::num(o.alpha)},
                                            {"m", std::to_string(o.m)},
                                            {"C", report::num(o.C)},
                                            {"p0", report::num(o.p0)}};
    Outputs files(c.out_dir, "moser-table", detail::options_text(opts), out);
    const auto table = moser_table(o);
    const auto set = exponents::exponent_set(o.n, o.q, o.alpha);
    Json j;
    j["command"] = "moser-table";
    j["parameters"] = opts;
    j["A_limit"] = exponents::moser_A_limit(o.q, o.n, o.alpha);
    j["S_limit"] = exponents::moser_sum_limit(o.q, o.n, o.alpha);
    j["delta0"] = set.delta0;
    j["gamma0"] = set.gamma0;
    j["halving"] = {{"delta", set.delta}, {"kappa", set.kappa}, {"theta", set.theta}, {"beta", set.beta}, {"gamma", set.gamma}};
    j["halving_needs_flag"] = exponents::halving_needs_flag(o.q, o.p0);
    j["j0"] = exponents::moser_j0(o.q, o.n, o.alpha);
    if (o.q * 2.0 > 1.0) {
        j["log_constant_product"] = detail::num(exponents::moser_constant_log_sum(o.m, o.q, o.n, o.alpha, o.C));
    }
    j["passed"] = true;
    out << table.str();
    files.write(".csv", table.str());
    files.write(".json", j.dump(2) + "\n");
    return kOk;
}

struct CheckFluxOptions {
    std::string flux = "burgers";
    std::optional<double> k;
    std::optional<double> c;
    double u_min = -1.0;
    double u_max = 1.0;
    int samples = 64;
    double T = 1.0;
};

inline int cmd_check_flux(const Common& c, const CheckFluxOptions& o, std::ostream& out) {
    auto entries = detail::load_entries(c, {{"n", "1"}, {"L", "10"}, {"N", "200"}});
    std::string flux_spec = o.flux;
    if (o.k) flux_spec += " k=" + report::num(*o.k);
    if (o.c) flux_spec += " c=" + report::num(*o.c);
    entries["flux"] = flux_spec;
    std::map<std::string, std::string> opts{{"u-min", report::num(o.u_min)},
                                            {"u-max", report::num(o.u_max)},
                                            {"samples", std::to_string(o.samples)},
                                            {"T", report::num(o.T)}};
    const auto cfg = config::build(entries);
    if (!(o.u_max > o.u_min)) throw ConfigError("--u-max must exceed --u-min");
    if (o.samples < 1) throw ConfigError("--samples must be >= 1");
    if (!(o.T > 0.0)) throw ConfigError("--T must be > 0");
    Outputs files(c.out_dir, "check-flux", config::canonical(entries) + detail::options_text(opts), out);

    const auto& fm = cfg.problem.flux;
    const auto& g = cfg.problem.grid;
    const auto div = check_divergence_condition(fm, g, {o.u_min, o.u_max}, o.samples, o.T);
    const double M = std::max(std::abs(o.u_min), std::abs(o.u_max));
    const auto lip = check_lipschitz_in_u(fm, g, M, o.T, std::max(o.samples, 257));
    const auto cons = check_flux_consistency(fm, g, o.u_min, o.u_max, o.T, 1000);
    const bool passed = div.satisfied && cons.consistent;
    const int n = g.dimension();
    auto point = [n](const Point& x) { return n == 2 ? Json::array({x[0], x[1]}) : Json::array({x[0]}); };
    Json j;
    j["command"] = "check-flux";
    j["flux"] = flux_spec;
    j["divergence_condition"] = {{"satisfied", div.satisfied},
                                 {"worst_violation", detail::num(div.worst_violation)},
                                 {"witness", {{"x", point(div.x)}, {"t", div.t}, {"u", div.u}}}};
    j["lipschitz"] = {{"M", M}, {"T", o.T}, {"C_f", detail::num(lip.C_f)}};
    j["consistency"] = {{"consistent", cons.consistent}, {"worst_error", detail::num(cons.worst_error)}, {"kind", cons.worst_kind}};
    j["passed"] = passed;
    files.write(".json", j.dump(2) + "\n");
    out << "check-flux " << flux_spec << ": satisfied=" << (div.satisfied ? "true" : "false")
        << " worst_violation=" << report::num(div.worst_violation) << " witness x=" << report::num(div.x[0])
        << " t=" << report::num(div.t) << " u=" << report::num(div.u) << " C_f=" << report::num(lip.C_f) << "\n";
    return passed ? kOk : kAuditFailed;
}

struct SandwichOptions {
    std::vector<double> eps{0.1, 0.01, 0.001};
    double psi_width = 1.0;
};

inline config::Entries sandwich_defaults() {
    return {{"n", "1"},     {"L", "10"},    {"N", "400"},         {"alpha", "1"}, {"p0", "1"},
            {"flux", "burgers"}, {"u0", "odd_gaussian"}, {"t_end", "2"}, {"snapshot_count", "11"}};
}

inline int cmd_sandwich(const Common& c, const SandwichOptions& o, std::ostream& out) {
    const auto entries = detail::load_entries(c, sandwich_defaults());
    std::string elist;
    for (double e : o.eps) elist += report::num(e) + ",";
    Outputs files(c.out_dir, "sandwich",
                  config::canonical(entries) + detail::options_text({{"eps", elist}, {"psi-width", report::num(o.psi_width)}}),
                  out);
    const auto cfg = config::build(entries);
    const InitialDatum psi = initial::gaussian(1.0, o.psi_width);

    std::vector<double> eps = o.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    report::CsvTable t("sandwich", {"eps", "lower_violation", "upper_violation", "envelope"});
    Json arr = Json::array();
    bool passed = true;
    double prev_env = std::numeric_limits<double>::infinity();
    std::optional<SandwichReport> last;
    for (double e : eps) {
        SandwichReport rep = run_sandwich(cfg.problem, e, psi, cfg.scheme);
        const bool ok = rep.max_lower_violation >= -1e-12 && rep.max_upper_violation >= -1e-12;
        const bool mono = rep.envelope < prev_env;
        passed = passed && ok && mono;
        prev_env = rep.envelope;
        t.add_row({e, rep.max_lower_violation, rep.max_upper_violation, rep.envelope});
        arr.push_back({{"eps", e},
                       {"lower_violation", detail::num(rep.max_lower_violation)},
                       {"upper_violation", detail::num(rep.max_upper_violation)},
                       {"envelope", detail::num(rep.envelope)},
                       {"ordered", ok},
                       {"envelope_decreased", mono}});
        last = std::move(rep);
    }
    Json j;
    j["command"] = "sandwich";
    j["config"] = entries;
    j["psi"] = "exp(-|x|^2/" + report::num(o.psi_width) + "^2)";
    j["runs"] = arr;
    j["passed"] = passed;
    files.write(".csv", t.str());
    files.write(".json", j.dump(2) + "\n");
    if (last && cfg.problem.grid.dimension() == 1) {
        report::PlotOptions po;
        po.title = "w <= u <= v at t_end, eps = " + report::num(last->epsilon);
        files.write(".svg", report::render_svg({{"w", report::profile_points(last->lower.snapshots.back()), report::CurveStyle::dashed},
                                                {"u", report::profile_points(last->middle.snapshots.back()), report::CurveStyle::solid},
                                                {"v", report::profile_points(last->upper.snapshots.back()), report::CurveStyle::dashed}},
                                               po));
    }
    out << t.str();
    return passed ? kOk : kAuditFailed;
}

// --------------------------------------------------------------- dispatch

/// Parses args (without the program name) and runs one command.
inline int dispatch(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"pmelab: degenerate diffusion with advection, decay audits", "pmelab"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "key = value problem file");
        sub->add_option("--out", common.out_dir, "output directory (created if absent)");
        sub->add_option("--set", common.overrides, "key=value override (repeatable)");
    };

    auto* run_cmd = app.add_subcommand("run", "integrate a configured problem and audit L^q monotonicity");
    add_common(run_cmd);
    auto* fig_cmd = app.add_subcommand("figure1", "advection with f(x) = -tanh x, alpha = 0.5, k = 1.5");
    add_common(fig_cmd);

    BarenblattOptions bo;
    auto* bar_cmd = app.add_subcommand("barenblatt-validate", "refinement table against the exact Barenblatt profile");
    add_common(bar_cmd);
    bar_cmd->add_option("--n", bo.n);
    bar_cmd->add_option("--alpha", bo.alpha);
    bar_cmd->add_option("--C", bo.C);
    bar_cmd->add_option("--L", bo.L);
    bar_cmd->add_option("--t0", bo.t0);
    bar_cmd->add_option("--t1", bo.t1);
    bar_cmd->add_option("--Ns", bo.Ns)->delimiter(',');

    DecayOptions dopt;
    double wlo = 0.0, whi = 0.0;
    auto* dec_cmd = app.add_subcommand("decay-study", "fit sup-norm decay exponents over an alpha sweep");
    add_common(dec_cmd);
    dec_cmd->add_option("--alphas", dopt.alphas)->delimiter(',');
    auto* wlo_opt = dec_cmd->add_option("--window-lo", wlo);
    auto* whi_opt = dec_cmd->add_option("--window-hi", whi);
    dec_cmd->add_option("--tolerance", dopt.tolerance);

    MoserOptions mo;
    auto* mos_cmd = app.add_subcommand("moser-table", "Moser iteration exponents A_m, S_m and their limits");
    add_common(mos_cmd);
    mos_cmd->add_option("--q", mo.q);
    mos_cmd->add_option("--n", mo.n);
    mos_cmd->add_option("--alpha", mo.alpha);
    mos_cmd->add_option("--m", mo.m);
    mos_cmd->add_option("--C", mo.C, "stand-in interpolation constant for the K_j bound");
    mos_cmd->add_option("--p0", mo.p0, "integrability of the data; q < 2 p0 raises halving_needs_flag");

    CheckFluxOptions fo;
    double k = 0.0, cc = 0.0;
    auto* chk_cmd = app.add_subcommand("check-flux", "sample the flux sign condition and Lipschitz constant");
    add_common(chk_cmd);
    chk_cmd->add_option("--flux", fo.flux)->check(CLI::IsMember({"zero", "linear", "burgers", "figure1"}));
    auto* k_opt = chk_cmd->add_option("--k", k);
    auto* c_opt = chk_cmd->add_option("--c", cc);
    chk_cmd->add_option("--u-min", fo.u_min);
    chk_cmd->add_option("--u-max", fo.u_max);
    chk_cmd->add_option("--samples", fo.samples);
    chk_cmd->add_option("--T", fo.T);

    SandwichOptions so;
    auto* san_cmd = app.add_subcommand("sandwich", "sign-splitting comparison w <= u <= v");
    add_common(san_cmd);
    san_cmd->add_option("--eps", so.eps)->delimiter(',');
    san_cmd->add_option("--psi-width", so.psi_width);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error [usage]: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    if (*wlo_opt) dopt.window_lo = wlo;
    if (*whi_opt) dopt.window_hi = whi;
    if (*k_opt) fo.k = k;
    if (*c_opt) fo.c = cc;

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "run") return cmd_run(common, out);
        if (name == "figure1") return cmd_figure1(common, out);
        if (name == "barenblatt-validate") return cmd_barenblatt(common, bo, out);
        if (name == "decay-study") return cmd_decay(common, dopt, out);
        if (name == "moser-table") return cmd_moser(common, mo, out);
        if (name == "check-flux") return cmd_check_flux(common, fo, out);
        if (name == "sandwich") return cmd_sandwich(common, so, out);
    } catch (const ConfigError& e) {
        err << "error [" << name << "/config]: " << e.what() << "\n";
        return kUsage;
    } catch (const ParameterError& e) {
        err << "error [" << name << "/parameters]: " << e.what() << "\n";
        return kUsage;
    } catch (const BlowUpError& e) {
        err << "error [" << name << "/solve]: " << e.what() << "\n";
        return kAuditFailed;
    } catch (const Error& e) {
        err << "error [" << name << "/compute]: " << e.what() << "\n";
        return kAuditFailed;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error [" << name << "/write]: " << e.what() << "\n";
        return kAuditFailed;
    }
    err << "error [usage]: unknown command\n";
    return kUsage;
}

}  // namespace pmelab::cli
