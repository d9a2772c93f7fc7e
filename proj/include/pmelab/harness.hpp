#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmelab/exponents.hpp"
#include "pmelab/kirchhoff.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Discrete L^q norm (sum |u_i|^q dx^n)^(1/q); grid max for q = inf.
inline double lq_norm(const State& s, double q) {
    if (!(q >= 1.0)) throw ParameterError("lq_norm needs q >= 1");
    if (std::isinf(q)) {
        double m = 0.0;
        for (double v : s.values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (q == 1.0) {
        for (double v : s.values) acc += std::abs(v);
        return acc * s.grid.cell_volume();
    }
    if (q == 2.0) {
        for (double v : s.values) acc += v * v;
        return std::sqrt(acc * s.grid.cell_volume());
    }
    for (double v : s.values) acc += std::pow(std::abs(v), q);
    return std::pow(acc * s.grid.cell_volume(), 1.0 / q);
}

using Series = std::vector<std::pair<double, double>>;

struct Fit {
    double slope;
    double intercept;
    double r_squared;
    std::size_t points;
};

/// Ordinary least squares of log(norm) against log(t) over t in [lo, hi].
inline Fit fit_decay(const Series& series, double t_lo, double t_hi) {
    std::vector<double> xs, ys;
    for (const auto& [t, v] : series) {
        if (t < t_lo || t > t_hi) continue;
        if (!(v > 0.0) || !(t > 0.0)) {
            throw FitError("non-positive value in fit window at t = " + std::to_string(t));
        }
        xs.push_back(std::log(t));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 5) {
        throw FitError("fit window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "] holds " +
                       std::to_string(xs.size()) + " points; need >= 5");
    }
    const double cnt = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= cnt;
    my /= cnt;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("fit window has no spread in t");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (intercept + slope * xs[i]);
        ss_res += e * e;
    }
    double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    r2 = std::clamp(r2, 0.0, 1.0);
    return {slope, intercept, r2, xs.size()};
}

struct DecayRecord {
    double q;  ///< kInfNorm for the sup norm
    Series series;
    double t_lo;
    double t_hi;
    double fitted_slope;
    double fitted_intercept;
    double r_squared;
};

/// All states of a run in time order, initial state first.
inline std::vector<const State*> timeline(const RunResult& r) {
    std::vector<const State*> v{&r.initial};
    for (const auto& s : r.snapshots)
        if (s.time > v.back()->time) v.push_back(&s);
    return v;
}

inline Series norm_series(const RunResult& r, double q) {
    Series s;
    for (const State* st : timeline(r)) s.emplace_back(st->time, lq_norm(*st, q));
    return s;
}

/// Fits the q-norm decay; the default window is the last decade of time.
inline DecayRecord decay_record(const RunResult& r, double q, std::optional<std::pair<double, double>> window = {}) {
    DecayRecord rec{q, norm_series(r, q), 0.0, 0.0, 0.0, 0.0, 0.0};
    const double t_last = rec.series.back().first;
    rec.t_lo = window ? window->first : t_last / 10.0;
    rec.t_hi = window ? window->second : t_last;
    const Fit f = fit_decay(rec.series, rec.t_lo, rec.t_hi);
    rec.fitted_slope = f.slope;
    rec.fitted_intercept = f.intercept;
    rec.r_squared = f.r_squared;
    return rec;
}

struct MonotonicityEntry {
    double q;
    double max_uptick;  ///< relative to the initial norm
    bool passed;
};

/// ||u(t)||_q must be nonincreasing along the snapshots.
inline std::vector<MonotonicityEntry> audit_lq_monotonicity(const RunResult& r, const std::vector<double>& q_list,
                                                            double tolerance = 1e-8) {
    std::vector<MonotonicityEntry> out;
    const auto states = timeline(r);
    for (double q : q_list) {
        const double ref = lq_norm(*states.front(), q);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < states.size(); ++i) {
            const double up = lq_norm(*states[i], q) - lq_norm(*states[i - 1], q);
            worst = std::max(worst, ref > 0.0 ? up / ref : up);
        }
        if (states.size() < 2) worst = 0.0;
        out.push_back({q, worst, worst <= tolerance});
    }
    return out;
}

struct EnergyAudit {
    double gamma;
    double q;
    double t0;
    double t;
    double lhs_norm_term;         ///< (t - t0)^gamma ||u(t)||_q^q
    double lhs_dissipation_term;  ///< q(q-1) int (tau-t0)^gamma int |u|^{q-2+alpha} |grad u|^2
    double rhs_term;              ///< gamma int (tau-t0)^{gamma-1} ||u||_q^q + window start term
    double window_start_term;     ///< (a - t0)^gamma ||u(a)||_q^q, a = first audited time
    double margin;                ///< rhs - lhs
    bool passed;
};

namespace detail {

/// int |u|^{q-2+alpha} |grad u|^2 dx from face differences, using
/// grad G . grad(|u|^{q-2} u) = (q-1) |u|^{q-2+alpha} |grad u|^2.
/// Wall faces carry nothing.
inline double weighted_dissipation(const State& s, double q, double alpha) {
    const Grid& g = s.grid;
    const int N = g.cells_per_axis();
    const double dx = g.spacing();
    std::vector<double> G(s.values.size()), P(s.values.size());
    for (std::size_t c = 0; c < s.values.size(); ++c) {
        const double u = s.values[c];
        G[c] = kirchhoff(u, alpha);
        P[c] = u == 0.0 ? 0.0 : std::pow(std::abs(u), q - 2.0) * u;
    }
    double acc = 0.0;
    const int rows = g.dimension() == 2 ? N : 1;
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < N; ++i) {
            const std::size_t c = static_cast<std::size_t>(i + N * j);
            if (i + 1 < N) acc += (G[c + 1] - G[c]) * (P[c + 1] - P[c]);
            if (g.dimension() == 2 && j + 1 < N) {
                const std::size_t up = c + static_cast<std::size_t>(N);
                acc += (G[up] - G[c]) * (P[up] - P[c]);
            }
        }
    }
    return acc * g.cell_volume() / (dx * dx * (q - 1.0));
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return acc;
}

}  // namespace detail

/// Weighted energy inequality over the run's snapshots in [t0, t_last].
/// Pass iff margin >= -slack * rhs.
inline EnergyAudit audit_energy_inequality(const RunResult& r, double q, double gamma, double t0, double alpha,
                                           double slack = 0.05) {
    if (!(gamma > 1.0)) throw ParameterError("energy audit needs gamma > 1");
    if (!(q >= 2.0)) throw ParameterError("energy audit needs q >= 2");
    std::vector<const State*> states;
    for (const State* s : timeline(r))
        if (s->time >= t0) states.push_back(s);
    if (states.size() < 20) {
        throw AuditError("energy audit needs >= 20 snapshots in [t0, t]; got " + std::to_string(states.size()));
    }
    std::vector<double> ts, norm_w, diss_w;
    for (const State* s : states) {
        const double tau = s->time - t0;
        const double nq = std::pow(lq_norm(*s, q), q);
        ts.push_back(s->time);
        norm_w.push_back(gamma * std::pow(tau, gamma - 1.0) * nq);
        diss_w.push_back(std::pow(tau, gamma) * detail::weighted_dissipation(*s, q, alpha));
    }
    const State& last = *states.back();
    const State& first = *states.front();
    EnergyAudit a{};
    a.gamma = gamma;
    a.q = q;
    a.t0 = t0;
    a.t = last.time;
    a.lhs_norm_term = std::pow(last.time - t0, gamma) * std::pow(lq_norm(last, q), q);
    a.lhs_dissipation_term = q * (q - 1.0) * detail::trapezoid(ts, diss_w);
    a.window_start_term = std::pow(first.time - t0, gamma) * std::pow(lq_norm(first, q), q);
    a.rhs_term = detail::trapezoid(ts, norm_w) + a.window_start_term;
    a.margin = a.rhs_term - (a.lhs_norm_term + a.lhs_dissipation_term);
    a.passed = a.margin >= -slack * a.rhs_term;
    return a;
}

struct SmoothingAudit {
    Series ratio_series;  ///< (t, ||u(t)||_inf t^gamma0 / ||u0||_p0^delta0)
    double sup_ratio;
    double last_decade_variation;  ///< max/min - 1 over t >= t_last/10
    bool passed;
};

/// Boundedness of the rescaled sup norm. Time is measured on the problem's
/// clock, so self-similar data started at t_start > 0 keep their origin.
inline SmoothingAudit audit_smoothing(const RunResult& r, double p0, double alpha, int n,
                                      double max_variation = 0.5) {
    const auto e = exponents::smoothing_exponents(n, p0, alpha);
    const double base = lq_norm(r.initial, p0);
    if (!(base > 0.0)) throw AuditError("smoothing audit needs a nonzero initial datum");
    SmoothingAudit a{{}, 0.0, 0.0, false};
    for (const State* s : timeline(r)) {
        if (!(s->time > 0.0)) continue;
        const double ratio = lq_norm(*s, kInfNorm) * std::pow(s->time, e.gamma0) / std::pow(base, e.delta0);
        a.ratio_series.emplace_back(s->time, ratio);
        a.sup_ratio = std::max(a.sup_ratio, ratio);
    }
    if (a.ratio_series.empty()) throw AuditError("smoothing audit needs snapshots with t > 0");
    const double t_last = a.ratio_series.back().first;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [t, v] : a.ratio_series) {
        if (t < t_last / 10.0) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    a.last_decade_variation = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
    a.passed = std::isfinite(a.sup_ratio) && a.last_decade_variation < max_variation;
    return a;
}

/// Relative spread max/min - 1 of a series over [t_lo, t_hi].
inline double series_variation(const Series& s, double t_lo, double t_hi) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [t, v] : s) {
        if (t < t_lo || t > t_hi) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
}

struct SandwichReport {
    double epsilon;
    std::string psi_name;
    double max_lower_violation;  ///< most negative u - w, or 0
    double max_upper_violation;  ///< most negative v - u, or 0
    /// max{||u0^- + eps psi||_q^delta, ||u0^+ + eps psi||_q^delta}, q = p0,
    /// delta = 2q/(2q + n alpha).
    double envelope;
    RunResult lower;
    RunResult middle;
    RunResult upper;
};

/// Runs the data -u0^- - eps psi, u0, u0^+ + eps psi in lockstep and records
/// the worst violation of w <= u <= v over every cell after every step.
inline SandwichReport run_sandwich(const Problem& p, double eps, const InitialDatum& psi, const SchemeConfig& c) {
    if (!(eps > 0.0)) throw ParameterError("sandwich needs eps > 0");
    const State u0 = sample_initial(p);
    std::vector<double> lower(u0.values.size()), upper(u0.values.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const double ps = psi.eval(p.grid.center(i));
        if (!(ps > 0.0) || !std::isfinite(ps)) {
            throw ParameterError("psi must be strictly positive and finite on the grid");
        }
        const double v = u0.values[i];
        lower[i] = -std::max(-v, 0.0) - eps * ps;
        upper[i] = std::max(v, 0.0) + eps * ps;
    }
    const double q = p.p0;
    const int n = p.grid.dimension();
    const double delta = 2.0 * q / (2.0 * q + n * p.alpha);
    const State lo_state(p.grid, u0.time, lower), up_state(p.grid, u0.time, upper);
    const double envelope = std::max(std::pow(lq_norm(lo_state, q), delta), std::pow(lq_norm(up_state, q), delta));

    double low_v = 0.0, up_v = 0.0;
    auto check = [&](std::span<const State> s) {
        for (std::size_t i = 0; i < s[0].values.size(); ++i) {
            low_v = std::min(low_v, s[1].values[i] - s[0].values[i]);
            up_v = std::min(up_v, s[2].values[i] - s[1].values[i]);
        }
    };
    std::vector<State> init{lo_state, u0, up_state};
    check(init);
    std::vector<RunResult> rs;
    try {
        rs = run_coupled(p, std::move(init), c, check);
    } catch (const BlowUpError& e) {
        throw BlowUpError(std::string("sandwich branch blew up: ") + e.what(), e.step(), e.cell(), e.time());
    }
    return {eps, psi.name, low_v, up_v, envelope, std::move(rs[0]), std::move(rs[1]), std::move(rs[2])};
}

struct Figure1Settings {
    double half_width = 10.0;
    int cells = 400;
    double alpha = 0.5;
    double k = 1.5;
    double t_end = 5.0;
    InitialDatum u0 = initial::gaussian(1.0, 1.0);
    BoundaryPolicy boundary = BoundaryPolicy::zero_flux;
    double cfl = 0.9;
    int snapshot_count = 6;  ///< evenly spaced, includes 0 and t_end
};

struct Figure1Result {
    Problem problem;
    RunResult run;
    DecayRecord l1_record;
    double l1_relative_drift;  ///< max over steps of (||u(t)||_1 - ||u0||_1)/||u0||_1
    double max_change;         ///< sup |u(t_end) - u0|
};

inline Problem figure1_problem(const Figure1Settings& s) {
    Problem p{Grid(1, s.half_width, s.cells), s.alpha, 1.0, flux::figure1(1, s.k), s.u0, s.boundary, 0.0};
    p.validate();
    return p;
}

/// Runs a configured advection problem and records L^1 drift and decay.
inline Figure1Result figure1_experiment(Problem p, const SchemeConfig& c) {
    if (c.snapshot_times.size() < 6) throw ParameterError("figure1 needs at least 6 snapshot times");
    RunResult r = run(p, c);
    const double m0 = r.mass_series.front().second;
    double drift = 0.0;
    for (const auto& [t, m] : r.mass_series) drift = std::max(drift, std::abs(m0 > 0.0 ? (m - m0) / m0 : m - m0));
    double change = 0.0;
    const State& last = r.snapshots.back();
    for (std::size_t i = 0; i < last.values.size(); ++i)
        change = std::max(change, std::abs(last.values[i] - r.initial.values[i]));
    // The L^1 fit uses every snapshot after the first; with six evenly
    // spaced snapshots from 0 that is t = 1..5.
    DecayRecord rec = decay_record(r, 1.0, std::pair{r.snapshots[1].time, c.t_end});
    return {std::move(p), std::move(r), std::move(rec), drift, change};
}

/// u_t + (-tanh(x) |u|^k u)_x = (|u|^alpha u_x)_x from a positive bump.
inline Figure1Result figure1_experiment(const Figure1Settings& s = {}) {
    if (s.snapshot_count < 6) throw ParameterError("figure1 needs snapshot_count >= 6");
    SchemeConfig c;
    c.cfl_safety = s.cfl;
    c.t_end = s.t_end;
    c.snapshot_times = linspace_times(0.0, s.t_end, s.snapshot_count);
    return figure1_experiment(figure1_problem(s), c);
}

}  // namespace pmelab
