#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "pmelab/grid.hpp"

namespace pmelab {

/// Flux value or u-derivative; only the first n components are meaningful.
using Vec = std::array<double, 2>;

/// Evaluator bundle for the advective flux f(x, t, u) of
///   u_t + div f(x, t, u) = div(|u|^alpha grad u).
struct FluxModel {
    std::string name;
    int n = 1;
    std::function<Vec(const Point&, double, double)> f;
    std::function<Vec(const Point&, double, double)> df_du;
    /// sum_j d f_j / d x_j at frozen u.
    std::function<double(const Point&, double, double)> div_x_f;
};

namespace flux {

inline FluxModel zero(int n = 1) {
    return FluxModel{"zero", n,
                     [](const Point&, double, double) { return Vec{0.0, 0.0}; },
                     [](const Point&, double, double) { return Vec{0.0, 0.0}; },
                     [](const Point&, double, double) { return 0.0; }};
}

/// f_j(u) = c u in every active direction.
inline FluxModel linear(int n, double c) {
    auto mask = [n](double v) { return Vec{v, n == 2 ? v : 0.0}; };
    return FluxModel{"linear", n,
                     [=](const Point&, double, double u) { return mask(c * u); },
                     [=](const Point&, double, double) { return mask(c); },
                     [](const Point&, double, double) { return 0.0; }};
}

/// f_j(u) = u^2 / 2 in every active direction.
inline FluxModel burgers(int n = 1) {
    auto mask = [n](double v) { return Vec{v, n == 2 ? v : 0.0}; };
    return FluxModel{"burgers", n,
                     [=](const Point&, double, double u) { return mask(0.5 * u * u); },
                     [=](const Point&, double, double u) { return mask(u); },
                     [](const Point&, double, double) { return 0.0; }};
}

/// f_j(x, u) = -tanh(x_j) |u|^k u. Violates the sign condition everywhere.
inline FluxModel figure1(int n = 1, double k = 1.5) {
    if (!(k >= 0.0)) throw ParameterError("figure1 flux needs k >= 0");
    auto f = [=](const Point& x, double, double u) {
        const double w = std::pow(std::abs(u), k) * u;
        Vec r{-std::tanh(x[0]) * w, 0.0};
        if (n == 2) r[1] = -std::tanh(x[1]) * w;
        return r;
    };
    auto df = [=](const Point& x, double, double u) {
        const double w = (k + 1.0) * std::pow(std::abs(u), k);
        Vec r{-std::tanh(x[0]) * w, 0.0};
        if (n == 2) r[1] = -std::tanh(x[1]) * w;
        return r;
    };
    auto div = [=](const Point& x, double, double u) {
        const double w = std::pow(std::abs(u), k) * u;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double c = std::cosh(x[j]);
            acc -= w / (c * c);
        }
        return acc;
    };
    return FluxModel{"figure1", n, f, df, div};
}

}  // namespace flux

struct ConsistencyReport {
    bool consistent = true;
    double worst_error = 0.0;  ///< scaled by max(1, |analytic|)
    std::string worst_kind;    ///< "df_du" or "div_x_f"
    Point x{};
    double t = 0.0;
    double u = 0.0;
};

/// Finite-difference audit of df_du and div_x_f at random (x, t, u) samples.
/// Central differences with step 1e-6 * max(1, |arg|); the tolerance is
/// relative with a unit floor.
inline ConsistencyReport check_flux_consistency(const FluxModel& fm, const Grid& g, double u_lo,
                                                double u_hi, double T, int samples,
                                                double tol = 1e-5, std::uint64_t seed = 20190246) {
    std::mt19937_64 rng(seed);
    const double L = g.half_width();
    std::uniform_real_distribution<double> ux(-L, L), uu(u_lo, u_hi), ut(0.0, T);
    ConsistencyReport rep;
    auto note = [&](double err, const char* kind, const Point& x, double t, double u) {
        if (err > rep.worst_error) {
            rep.worst_error = err;
            rep.worst_kind = kind;
            rep.x = x;
            rep.t = t;
            rep.u = u;
        }
    };
    for (int s = 0; s < samples; ++s) {
        Point x{ux(rng), g.dimension() == 2 ? ux(rng) : 0.0};
        const double t = ut(rng);
        const double u = uu(rng);

        const double hu = 1e-6 * std::max(1.0, std::abs(u));
        const Vec fp = fm.f(x, t, u + hu), fmn = fm.f(x, t, u - hu), d = fm.df_du(x, t, u);
        for (int j = 0; j < g.dimension(); ++j) {
            const double fd = (fp[j] - fmn[j]) / (2.0 * hu);
            note(std::abs(fd - d[j]) / std::max(1.0, std::abs(d[j])), "df_du", x, t, u);
        }

        double div_fd = 0.0;
        for (int j = 0; j < g.dimension(); ++j) {
            const double hx = 1e-6 * std::max(1.0, std::abs(x[j]));
            Point xp = x, xm = x;
            xp[j] += hx;
            xm[j] -= hx;
            div_fd += (fm.f(xp, t, u)[j] - fm.f(xm, t, u)[j]) / (2.0 * hx);
        }
        const double div = fm.div_x_f(x, t, u);
        note(std::abs(div_fd - div) / std::max(1.0, std::abs(div)), "div_x_f", x, t, u);
    }
    rep.consistent = rep.worst_error <= tol;
    return rep;
}

}  // namespace pmelab
