#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmelab/kirchhoff.hpp"
#include "pmelab/problem.hpp"

namespace pmelab {

struct SchemeConfig {
    double cfl_safety = 0.9;
    double t_end = 1.0;
    long max_steps = 10'000'000;
    /// Largest admissible (outer-layer L^1 mass) / (initial L^1 mass).
    double boundary_mass_threshold = 1e-8;
    /// Sorted output times; empty means {t_end}.
    std::vector<double> snapshot_times;
};

struct RunResult {
    State initial;
    std::vector<State> snapshots;
    long step_count = 0;
    double min_dt = std::numeric_limits<double>::infinity();
    double max_dt = 0.0;
    double boundary_mass_max = 0.0;
    bool boundary_flagged = false;
    /// (t, L^1 norm) after every step, starting with the initial state.
    std::vector<std::pair<double, double>> mass_series;
};

namespace detail {

constexpr double kDenominatorGuard = 1e-300;

/// Local Lax-Friedrichs speed and flux for direction d at face point xf.
struct FaceFlux {
    double flux;
    double speed;
};

inline FaceFlux llf(const FluxModel& fm, int d, const Point& xf, double t, double ul, double ur) {
    const double fl = fm.f(xf, t, ul)[d];
    const double fr = fm.f(xf, t, ur)[d];
    const double lam = std::max(std::abs(fm.df_du(xf, t, ul)[d]), std::abs(fm.df_du(xf, t, ur)[d]));
    return {0.5 * (fl + fr) - 0.5 * lam * (ur - ul), lam};
}

/// Visits every face of every grid line along direction d. The callback gets
/// (face index k in 0..N, face point, index of the cell left of the face or
/// -1, index right of the face or -1).
template <class Visit>
void for_each_face(const Grid& g, int d, Visit&& visit) {
    const int N = g.cells_per_axis();
    const std::ptrdiff_t stride = d == 0 ? 1 : N;
    const int lines = g.dimension() == 1 ? 1 : N;
    for (int line = 0; line < lines; ++line) {
        const std::ptrdiff_t base = g.dimension() == 1 ? 0 : (d == 0 ? std::ptrdiff_t(line) * N : line);
        Point xf{0.0, 0.0};
        if (g.dimension() == 2) xf[1 - d] = g.center_coord(line);
        for (int k = 0; k <= N; ++k) {
            xf[d] = g.face_coord(k);
            const std::ptrdiff_t left = k == 0 ? -1 : base + (k - 1) * stride;
            const std::ptrdiff_t right = k == N ? -1 : base + k * stride;
            visit(k, xf, left, right);
        }
    }
}

/// Sum over directions of the largest face LLF speed.
inline double advective_speed(const State& s, const Problem& p) {
    const auto& g = s.grid;
    double total = 0.0;
    for (int d = 0; d < g.dimension(); ++d) {
        double dmax = 0.0;
        for_each_face(g, d, [&](int, const Point& xf, std::ptrdiff_t l, std::ptrdiff_t r) {
            if ((l < 0 || r < 0) && p.boundary == BoundaryPolicy::zero_flux) return;
            const double ul = l < 0 ? 0.0 : s.values[static_cast<std::size_t>(l)];
            const double ur = r < 0 ? 0.0 : s.values[static_cast<std::size_t>(r)];
            const double lam = std::max(std::abs(p.flux.df_du(xf, s.time, ul)[d]),
                                        std::abs(p.flux.df_du(xf, s.time, ur)[d]));
            dmax = std::max(dmax, lam);
        });
        total += dmax;
    }
    return total;
}

inline double outer_layer_mass(const State& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (s.grid.is_outer(i)) acc += std::abs(s.values[i]);
    return acc * s.grid.cell_volume();
}

}  // namespace detail

/// Largest explicit step that keeps the update monotone:
///   dt = cfl / (2 Lambda_adv / dx + 2 n Lambda_diff / dx^2),
/// with Lambda_adv the direction-summed largest face speed and
/// Lambda_diff = max |u|^alpha; capped by the time left to t_end.
inline double stable_dt(const State& s, const Problem& p, const SchemeConfig& c) {
    const double dx = s.grid.spacing();
    const double lam_adv = detail::advective_speed(s, p);
    double lam_diff = 0.0;
    for (double v : s.values) lam_diff = std::max(lam_diff, diffusivity(v, p.alpha));
    if (!std::isfinite(lam_adv) || !std::isfinite(lam_diff)) {
        throw StepSizeError("wave speed or diffusivity is not finite at t = " + std::to_string(s.time));
    }
    const double den = 2.0 * lam_adv / dx + 2.0 * s.grid.dimension() * lam_diff / (dx * dx);
    const double dt = c.cfl_safety / (den + detail::kDenominatorGuard);
    if (!(dt > std::numeric_limits<double>::min())) {
        throw StepSizeError("stable time step underflows at t = " + std::to_string(s.time));
    }
    const double remaining = c.t_end - s.time;
    return remaining > 0.0 ? std::min(dt, remaining) : dt;
}

/// One conservative forward-Euler step:
///   u_i <- u_i - dt/dx sum_d (H_{i+1/2} - H_{i-1/2}),
///   H = LLF advective flux - (G_right - G_left)/dx,  G = kirchhoff(u).
/// Zero-flux walls set H = 0 on the boundary; Dirichlet walls use a zero
/// ghost cell.
inline State step(const State& s, const Problem& p, double dt) {
    const Grid& g = s.grid;
    const int N = g.cells_per_axis();
    const double dx = g.spacing();
    const double r = dt / dx;
    std::vector<double> G(s.values.size());
    for (std::size_t i = 0; i < G.size(); ++i) G[i] = kirchhoff(s.values[i], p.alpha);

    std::vector<double> out = s.values;
    std::vector<double> H(static_cast<std::size_t>(N) + 1);
    for (int d = 0; d < g.dimension(); ++d) {
        const std::ptrdiff_t stride = d == 0 ? 1 : N;
        std::ptrdiff_t first = 0;
        detail::for_each_face(g, d, [&](int k, const Point& xf, std::ptrdiff_t l, std::ptrdiff_t rgt) {
            if (k == 0) first = rgt;
            const bool wall = l < 0 || rgt < 0;
            if (wall && p.boundary == BoundaryPolicy::zero_flux) {
                H[static_cast<std::size_t>(k)] = 0.0;
            } else {
                const double ul = l < 0 ? 0.0 : s.values[static_cast<std::size_t>(l)];
                const double ur = rgt < 0 ? 0.0 : s.values[static_cast<std::size_t>(rgt)];
                const double Gl = l < 0 ? 0.0 : G[static_cast<std::size_t>(l)];
                const double Gr = rgt < 0 ? 0.0 : G[static_cast<std::size_t>(rgt)];
                H[static_cast<std::size_t>(k)] = detail::llf(p.flux, d, xf, s.time, ul, ur).flux - (Gr - Gl) / dx;
            }
            if (k == N) {
                for (int i = 0; i < N; ++i) {
                    out[static_cast<std::size_t>(first + i * stride)] -=
                        r * (H[static_cast<std::size_t>(i) + 1] - H[static_cast<std::size_t>(i)]);
                }
            }
        });
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i])) {
            throw BlowUpError("solution blew up in cell " + std::to_string(i) + " at t = " +
                                  std::to_string(s.time + dt),
                              -1, i, s.time + dt);
        }
    }
    return State(g, s.time + dt, std::move(out));
}

/// Called after every accepted step with the current states.
using StepObserver = std::function<void(std::span<const State>)>;

namespace detail {

inline std::vector<double> resolve_snapshot_times(const SchemeConfig& c, double t_start) {
    if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) throw ParameterError("cfl_safety must lie in (0, 1]");
    if (!(c.t_end > t_start)) throw ParameterError("t_end must exceed the start time");
    if (c.max_steps < 1) throw ParameterError("max_steps must be positive");
    std::vector<double> times = c.snapshot_times;
    if (times.empty()) times.push_back(c.t_end);
    if (!std::is_sorted(times.begin(), times.end())) throw ParameterError("snapshot_times must be sorted");
    if (times.front() < t_start || times.back() > c.t_end) {
        throw ParameterError("snapshot_times must lie in [t_start, t_end]");
    }
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

}  // namespace detail

/// Advances several initial states of one problem with a shared dt sequence:
/// each step uses the smallest stable dt over all members. This is the
/// lockstep driver behind both run() and the sign-splitting experiment.
inline std::vector<RunResult> run_coupled(const Problem& p, std::vector<State> states, const SchemeConfig& c,
                                          const StepObserver& observe = {}) {
    p.validate();
    if (states.empty()) throw ParameterError("run_coupled needs at least one state");
    const double t0 = states.front().time;
    for (const auto& s : states) {
        if (s.time != t0 || !(s.grid == p.grid)) throw ParameterError("coupled states must share grid and time");
        if (!s.all_finite()) throw ParameterError("initial state is not finite");
    }
    const std::vector<double> times = detail::resolve_snapshot_times(c, t0);

    std::vector<RunResult> results;
    std::vector<double> mass0;
    for (const auto& s : states) {
        RunResult r{s, {}, 0, std::numeric_limits<double>::infinity(), 0.0, 0.0, false, {}};
        mass0.push_back(l1_mass(s));
        r.mass_series.emplace_back(s.time, mass0.back());
        const double outer = detail::outer_layer_mass(s);
        r.boundary_mass_max = mass0.back() > 0.0 ? outer / mass0.back() : 0.0;
        results.push_back(std::move(r));
    }

    std::size_t next = 0;
    auto emit_due = [&]() {
        while (next < times.size() && times[next] <= states.front().time) {
            for (std::size_t m = 0; m < states.size(); ++m) results[m].snapshots.push_back(states[m]);
            ++next;
        }
    };
    emit_due();

    long steps = 0;
    double t = t0;
    while (t < c.t_end) {
        if (steps >= c.max_steps) {
            throw BudgetError("step budget of " + std::to_string(c.max_steps) + " exhausted at t = " +
                              std::to_string(t));
        }
        double dt = std::numeric_limits<double>::infinity();
        for (const auto& s : states) dt = std::min(dt, stable_dt(s, p, c));
        const double target = next < times.size() ? times[next] : c.t_end;
        bool land = false;
        if (t + dt >= target - 1e-12 * std::max(1.0, std::abs(target))) {
            dt = target - t;
            land = true;
        }
        for (auto& s : states) {
            try {
                s = step(s, p, dt);
            } catch (const BlowUpError& e) {
                throw BlowUpError(std::string(e.what()) + " (step " + std::to_string(steps + 1) + ")",
                                  steps + 1, e.cell(), e.time());
            }
            if (land) s.time = target;
        }
        t = states.front().time;
        ++steps;
        for (std::size_t m = 0; m < states.size(); ++m) {
            auto& r = results[m];
            r.step_count = steps;
            r.min_dt = std::min(r.min_dt, dt);
            r.max_dt = std::max(r.max_dt, dt);
            r.mass_series.emplace_back(t, l1_mass(states[m]));
            if (mass0[m] > 0.0) {
                r.boundary_mass_max = std::max(r.boundary_mass_max, detail::outer_layer_mass(states[m]) / mass0[m]);
            }
        }
        if (observe) observe(std::span<const State>(states));
        emit_due();
    }
    for (auto& r : results) {
        r.boundary_flagged = r.boundary_mass_max > c.boundary_mass_threshold;
        if (r.step_count == 0) r.min_dt = 0.0;
    }
    return results;
}

/// Integrates the problem from its start time to config.t_end.
inline RunResult run(const Problem& p, const SchemeConfig& c, const StepObserver& observe = {}) {
    std::vector<State> init{sample_initial(p)};
    return std::move(run_coupled(p, std::move(init), c, observe).front());
}

/// n evenly spaced output times covering [t0, t1] inclusive.
inline std::vector<double> linspace_times(double t0, double t1, int count) {
    if (count < 2) return {t1};
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (count - 1);
    v.back() = t1;
    return v;
}

/// Log-spaced output times in [t0, t1], t0 > 0.
inline std::vector<double> logspace_times(double t0, double t1, int count) {
    if (!(t0 > 0.0)) throw ParameterError("logspace_times needs t0 > 0");
    if (count < 2) return {t1};
    std::vector<double> v(static_cast<std::size_t>(count));
    const double a = std::log(t0), b = std::log(t1);
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
    v.front() = t0;
    v.back() = t1;
    return v;
}

}  // namespace pmelab
