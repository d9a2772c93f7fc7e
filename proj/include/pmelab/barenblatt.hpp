#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "pmelab/grid.hpp"
#include "pmelab/kirchhoff.hpp"

namespace pmelab {

/// Source-type self-similar solution of u_t = div(|u|^alpha grad u).
///
/// With s = t / (alpha + 1) the equation becomes the standard porous medium
/// equation v_s = Laplacian(v^(alpha+1)), whose Barenblatt solution is
///
///   U(x, t) = s^-k (C - b |x|^2 s^(-2k/n))_+^(1/alpha),
///   k = n / (n alpha + 2),   b = k alpha / (2 (alpha + 1) n).
///
/// sup_x U(., t) = s^-k C^(1/alpha) decays like t^-k, and k equals the
/// smoothing exponent gamma0(n, p0 = 1, alpha).
class BarenblattProfile {
   public:
    BarenblattProfile(int n, double alpha, double C) : n_(n), alpha_(alpha), C_(C) {
        if (n_ < 1) throw ParameterError("Barenblatt profile needs n >= 1");
        if (!(alpha_ > 0.0)) throw ParameterError("Barenblatt profile needs alpha > 0");
        if (!(C_ > 0.0)) throw ParameterError("Barenblatt profile needs C > 0");
    }

    int dimension() const noexcept { return n_; }
    double alpha() const noexcept { return alpha_; }
    double constant() const noexcept { return C_; }
    double pme_exponent() const noexcept { return alpha_ + 1.0; }
    double k_exp() const noexcept { return n_ / (n_ * alpha_ + 2.0); }
    double b_coef() const noexcept { return k_exp() * alpha_ / (2.0 * (alpha_ + 1.0) * n_); }

    double evaluate(const Point& x, double t) const {
        const double s = rescaled(t);
        double r2 = x[0] * x[0];
        if (n_ >= 2) r2 += x[1] * x[1];
        const double inner = C_ - b_coef() * r2 * std::pow(s, -2.0 * k_exp() / n_);
        if (inner <= 0.0) return 0.0;
        return std::pow(s, -k_exp()) * std::pow(inner, 1.0 / alpha_);
    }

    double sup(double t) const { return std::pow(rescaled(t), -k_exp()) * std::pow(C_, 1.0 / alpha_); }

    double support_radius(double t) const {
        return std::sqrt(C_ / b_coef()) * std::pow(rescaled(t), k_exp() / n_);
    }

    /// L^1 norm at time t by composite Simpson quadrature. The support is
    /// mapped by r = R sin(theta), which removes the endpoint singularity.
    double mass_at(double t, int intervals = 20000) const {
        if (n_ > 2) throw ParameterError("mass quadrature supports n <= 2");
        const double R = support_radius(t);
        const double lo = n_ == 1 ? -std::numbers::pi / 2 : 0.0;
        const double hi = std::numbers::pi / 2;
        auto integrand = [&](double th) {
            const double r = R * std::sin(th);
            const double u = evaluate(Point{r, 0.0}, t);
            const double jac = R * std::cos(th);
            return n_ == 1 ? u * jac : 2.0 * std::numbers::pi * r * u * jac;
        };
        if (intervals % 2) ++intervals;
        const double h = (hi - lo) / intervals;
        double acc = integrand(lo) + integrand(hi);
        for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(lo + i * h);
        return acc * h / 3.0;
    }

    /// Mass is time independent; reported at t = 1.
    double mass() const { return mass_at(1.0); }

   private:
    double rescaled(double t) const {
        if (!(t > 0.0)) throw DomainError("Barenblatt profile is defined for t > 0 only");
        return t / (alpha_ + 1.0);
    }

    int n_;
    double alpha_;
    double C_;
};

/// Samples U(., t) at the cell centres.
inline State sample_barenblatt(const BarenblattProfile& p, const Grid& g, double t) {
    if (p.dimension() != g.dimension()) throw ParameterError("profile/grid dimension mismatch");
    std::vector<double> v(g.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = p.evaluate(g.center(i), t);
    return State(g, t, std::move(v));
}

struct ResidualReport {
    double global = 0.0;    ///< L^1 residual over the whole grid
    double interior = 0.0;  ///< L^1 residual over {U > 0.01 sup U}
    double dt = 0.0;
};

/// Discrete residual (U(t+dt) - U(t))/dt - D_h U(t) with dt = dx^2 and D_h
/// the solver's diffusion operator (second difference of G(U)).
/// The interior norm keeps cells whose stencil stays in {U > 0.01 sup U}.
inline ResidualReport residual_check(const BarenblattProfile& p, const Grid& g, double t) {
    const double dx = g.spacing();
    const double dt = dx * dx;
    if (p.support_radius(t + dt) >= g.half_width() - dx) {
        throw DomainError("Barenblatt support overflows the grid at t = " + std::to_string(t + dt));
    }
    const State now = sample_barenblatt(p, g, t);
    const State next = sample_barenblatt(p, g, t + dt);
    const int N = g.cells_per_axis();
    const double alpha = p.alpha();
    std::vector<double> G(now.values.size());
    for (std::size_t i = 0; i < G.size(); ++i) G[i] = kirchhoff(now.values[i], alpha);
    auto at = [&](int i, int j) -> double {
        if (i < 0 || i >= N || j < 0 || j >= N) return 0.0;
        return G[static_cast<std::size_t>(i + N * j)];
    };

    // Interior: the whole stencil sits where U > 0.01 sup U, so no
    // difference straddles the free boundary.
    const double threshold = 0.01 * p.sup(t);
    auto above = [&](int i, int j) {
        return i >= 0 && i < N && j >= 0 && j < N && now.values[static_cast<std::size_t>(i + N * j)] > threshold;
    };
    ResidualReport rep;
    rep.dt = dt;
    for (std::size_t idx = 0; idx < G.size(); ++idx) {
        const int i = static_cast<int>(idx % N);
        const int j = g.dimension() == 2 ? static_cast<int>(idx / N) : 0;
        double lap = at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j);
        if (g.dimension() == 2) lap += at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1);
        lap /= dx * dx;
        const double r = std::abs((next.values[idx] - now.values[idx]) / dt - lap);
        rep.global += r;
        bool inside = above(i, j) && above(i - 1, j) && above(i + 1, j);
        if (g.dimension() == 2) inside = inside && above(i, j - 1) && above(i, j + 1);
        if (inside) rep.interior += r;
    }
    rep.global *= g.cell_volume();
    rep.interior *= g.cell_volume();
    return rep;
}

}  // namespace pmelab
