#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "pmelab/barenblatt.hpp"
#include "pmelab/flux.hpp"
#include "pmelab/grid.hpp"

namespace pmelab {

struct InitialDatum {
    std::string name;
    std::function<double(const Point&)> eval;
};

namespace initial {

inline InitialDatum zero() {
    return {"zero", [](const Point&) { return 0.0; }};
}

inline InitialDatum constant(double value) {
    return {"constant", [=](const Point&) { return value; }};
}

/// amp * exp(-|x - center|^2 / width^2); center shifts the first axis.
inline InitialDatum gaussian(double amp = 1.0, double width = 1.0, double center = 0.0) {
    if (!(width > 0.0)) throw ParameterError("gaussian width must be positive");
    return {"gaussian", [=](const Point& x) {
                const double d0 = x[0] - center;
                return amp * std::exp(-(d0 * d0 + x[1] * x[1]) / (width * width));
            }};
}

/// amp * x_1 * exp(-|x|^2 / width^2): sign changing, odd in x_1.
inline InitialDatum odd_gaussian(double amp = 1.0, double width = 1.0) {
    if (!(width > 0.0)) throw ParameterError("odd_gaussian width must be positive");
    return {"odd_gaussian", [=](const Point& x) {
                return amp * x[0] * std::exp(-(x[0] * x[0] + x[1] * x[1]) / (width * width));
            }};
}

inline InitialDatum box(double amp = 1.0, double half_width = 1.0) {
    return {"box", [=](const Point& x) {
                return (std::abs(x[0]) <= half_width && std::abs(x[1]) <= half_width) ? amp : 0.0;
            }};
}

inline InitialDatum barenblatt(const BarenblattProfile& p, double t) {
    if (!(t > 0.0)) throw DomainError("Barenblatt datum needs t > 0");
    return {"barenblatt", [=](const Point& x) { return p.evaluate(x, t); }};
}

}  // namespace initial

/// One Cauchy problem truncated to [-L, L]^n.
struct Problem {
    Grid grid;
    double alpha = 1.0;
    double p0 = 1.0;
    FluxModel flux = flux::zero();
    InitialDatum u0 = initial::zero();
    BoundaryPolicy boundary = BoundaryPolicy::zero_flux;
    /// Time attached to u0; lets self-similar data carry their own clock.
    double t_start = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be > 0");
        if (!(p0 >= 1.0) || !std::isfinite(p0)) throw ParameterError("p0 must be >= 1 and finite");
        if (flux.n != grid.dimension()) throw ParameterError("flux dimension does not match grid");
        if (!flux.f || !flux.df_du || !flux.div_x_f) throw ParameterError("flux model is incomplete");
        if (!u0.eval) throw ParameterError("initial datum is missing");
        if (!(t_start >= 0.0)) throw ParameterError("t_start must be >= 0");
    }
};

inline std::string describe_point(const Point& x, int n) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x[0];
    if (n == 2) os << ", " << x[1];
    os << ")";
    return os.str();
}

/// Samples u0 at the cell centres.
inline State sample_initial(const Problem& p) {
    p.validate();
    std::vector<double> v(p.grid.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point x = p.grid.center(i);
        v[i] = p.u0.eval(x);
        if (!std::isfinite(v[i])) {
            throw SamplingError("initial datum '" + p.u0.name + "' is not finite at x = " +
                                describe_point(x, p.grid.dimension()));
        }
    }
    return State(p.grid, p.t_start, std::move(v));
}

struct UInterval {
    double lo;
    double hi;
};

struct DivergenceReport {
    bool satisfied = true;
    double worst_violation = 0.0;
    Point x{};
    double t = 0.0;
    double u = 0.0;
};

/// Samples sum_j df_j/dx_j (x, t, u) * u >= 0 over cell centres, at least 64
/// uniform u values in u_range and t in {0, T/2, T}.
inline DivergenceReport check_divergence_condition(const FluxModel& fm, const Grid& g, UInterval range,
                                                   int samples, double T = 1.0) {
    if (samples < 1) throw ParameterError("samples must be >= 1");
    if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || range.hi < range.lo) {
        throw ParameterError("u_range must be a bounded interval");
    }
    const int nu = std::max(samples, 64);
    const double times[3] = {0.0, 0.5 * T, T};
    DivergenceReport rep;
    rep.worst_violation = std::numeric_limits<double>::infinity();
    for (double t : times) {
        for (std::size_t idx = 0; idx < g.cell_count(); ++idx) {
            const Point x = g.center(idx);
            for (int k = 0; k < nu; ++k) {
                const double u = range.lo + (range.hi - range.lo) * k / (nu - 1);
                const double d = fm.div_x_f(x, t, u);
                if (!std::isfinite(d)) {
                    throw EvaluationError("div_x_f of '" + fm.name + "' is not finite at x = " +
                                          describe_point(x, g.dimension()) +
                                          ", t = " + std::to_string(t) + ", u = " + std::to_string(u));
                }
                const double v = d * u;
                if (v < rep.worst_violation) {
                    rep.worst_violation = v;
                    rep.x = x;
                    rep.t = t;
                    rep.u = u;
                }
            }
        }
    }
    rep.satisfied = rep.worst_violation >= -1e-12;
    return rep;
}

struct LipschitzReport {
    double C_f = 0.0;
    Point x{};
    double t = 0.0;
    double u = 0.0;
};

/// Empirical Lipschitz constant of u -> f(x, t, u) on |u| <= M, 0 <= t <= T.
/// Difference quotients of consecutive lattice pairs plus their v -> u limit
/// |df_du| at the lattice points; componentwise supremum.
inline LipschitzReport check_lipschitz_in_u(const FluxModel& fm, const Grid& g, double M, double T,
                                            int samples = 257) {
    if (!(M > 0.0) || !(T > 0.0)) throw ParameterError("M and T must be positive");
    const int nu = std::max(samples, 64);
    const double times[3] = {0.0, 0.5 * T, T};
    const int n = g.dimension();
    LipschitzReport rep;
    auto fail = [&](const Point& x, double t, double u) {
        throw EvaluationError("flux '" + fm.name + "' is not finite at x = " + describe_point(x, n) +
                              ", t = " + std::to_string(t) + ", u = " + std::to_string(u));
    };
    auto take = [&](double c, const Point& x, double t, double u) {
        if (c > rep.C_f) {
            rep.C_f = c;
            rep.x = x;
            rep.t = t;
            rep.u = u;
        }
    };
    for (double t : times) {
        for (std::size_t idx = 0; idx < g.cell_count(); ++idx) {
            const Point x = g.center(idx);
            double u_prev = -M;
            Vec f_prev = fm.f(x, t, u_prev);
            for (int k = 0; k < nu; ++k) {
                const double u = -M + 2.0 * M * k / (nu - 1);
                const Vec fu = fm.f(x, t, u);
                const Vec d = fm.df_du(x, t, u);
                for (int j = 0; j < n; ++j) {
                    if (!std::isfinite(fu[j]) || !std::isfinite(d[j])) fail(x, t, u);
                    take(std::abs(d[j]), x, t, u);
                    if (k > 0) take(std::abs(fu[j] - f_prev[j]) / (u - u_prev), x, t, u);
                }
                u_prev = u;
                f_prev = fu;
            }
        }
    }
    return rep;
}

}  // namespace pmelab
