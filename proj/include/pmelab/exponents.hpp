#pragma once

// Decay exponents and Moser-iteration constants for the smoothing estimate
//   ||u(t)||_inf <= K ||u0||_{p0}^delta0 t^-gamma0.
// Powers of two are applied with ldexp so m = 40 stays exact.

#include <cmath>
#include <string>
#include <vector>

#include "pmelab/error.hpp"

namespace pmelab::exponents {

namespace detail {

inline void require(int n, double q, double alpha, const char* who) {
    if (n < 1) throw ParameterError(std::string(who) + ": n must be >= 1");
    if (!(q >= 1.0) || !std::isfinite(q)) throw ParameterError(std::string(who) + ": q must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError(std::string(who) + ": alpha must be > 0");
}

}  // namespace detail

struct Smoothing {
    double delta0;
    double gamma0;
};

/// delta0 = 2p0/(2p0 + n alpha), gamma0 = n/(2p0 + n alpha).
inline Smoothing smoothing_exponents(int n, double p0, double alpha) {
    detail::require(n, p0, alpha, "smoothing_exponents");
    const double den = 2.0 * p0 + n * alpha;
    return {2.0 * p0 / den, n / den};
}

struct Halving {
    double delta;
    double kappa;
};

/// L^{q/2} -> L^q step: delta = (2q + n alpha)/(2q + 2n alpha), kappa = n/(2q + 2n alpha).
inline Halving halving_exponents(int n, double q, double alpha) {
    detail::require(n, q, alpha, "halving_exponents");
    const double den = 2.0 * q + 2.0 * n * alpha;
    return {(2.0 * q + n * alpha) / den, n / den};
}

/// The halving estimate is stated for q >= 2 p0; smaller q needs an extra
/// integrability assumption on u(t0) in L^{q/2}.
inline bool halving_needs_flag(double q, double p0) { return q < 2.0 * p0; }

/// Every constant of the L^{q/2} -> L^q step for given (n, q, alpha).
struct ExponentSet {
    int n;
    double q;
    double alpha;
    double delta0;
    double gamma0;
    double delta;
    double kappa;
    double theta;  ///< interpolation exponent n(q+alpha)/(nq + 2q + 2n alpha)
    double beta;   ///< 2q/(q+alpha)
    double gamma;  ///< time weight 2/(2 - theta beta), > 1
};

inline ExponentSet exponent_set(int n, double q, double alpha) {
    detail::require(n, q, alpha, "exponent_set");
    const auto s = smoothing_exponents(n, q, alpha);
    const auto h = halving_exponents(n, q, alpha);
    const double theta = n * (q + alpha) / (n * q + 2.0 * q + 2.0 * n * alpha);
    const double beta = 2.0 * q / (q + alpha);
    return {n, q, alpha, s.delta0, s.gamma0, h.delta, h.kappa, theta, beta, 2.0 / (2.0 - theta * beta)};
}

/// log K_q of the halving estimate for a stand-in interpolation constant C.
/// Needs q > 1.
inline double halving_constant_log(int n, double q, double alpha, double C) {
    detail::require(n, q, alpha, "halving_constant_log");
    if (!(q > 1.0)) throw ParameterError("halving_constant_log: q must be > 1");
    if (!(C > 0.0)) throw ParameterError("halving_constant_log: C must be > 0");
    const auto e = exponent_set(n, q, alpha);
    const double tb = e.theta * e.beta;
    return (1.0 / q) * (2.0 / (2.0 - tb)) * (e.beta * std::log(C) + std::log(e.gamma)) +
           (1.0 / q) * std::log((2.0 - tb) / 2.0) +
           (1.0 / q) * (tb / (2.0 - tb)) * std::log(tb * (q + alpha) * (q + alpha) / (4.0 * q * (q - 1.0)));
}

/// A_m = prod_{j=1}^m (2^j 2q + n alpha)/(2^j 2q + 2n alpha)
///     = (2q + n alpha 2^-m)/(2q + n alpha).
inline double moser_A(int m, double q, int n, double alpha) {
    detail::require(n, q, alpha, "moser_A");
    if (m < 1) throw ParameterError("moser_A: m must be >= 1");
    const double na = n * alpha;
    return (2.0 * q + std::ldexp(na, -m)) / (2.0 * q + na);
}

/// B_j = prod_{k=0}^{j-1} (2^{m-k} 2q + n alpha)/(2^{m-k} 2q + 2n alpha)
///     = (2q + n alpha 2^-m)/(2q + n alpha 2^{j-m}),  B_0 = 1.
inline double moser_B(int j, int m, double q, int n, double alpha) {
    detail::require(n, q, alpha, "moser_B");
    if (j < 0 || j > m) {
        throw ParameterError("moser_B: index j = " + std::to_string(j) + " outside 0.." + std::to_string(m));
    }
    if (j == 0) return 1.0;
    const double na = n * alpha;
    return (2.0 * q + std::ldexp(na, -m)) / (2.0 * q + std::ldexp(na, j - m));
}

/// S_m = sum_{j=1}^m (-n/(2^j 2q + 2n alpha)) B_{m-j}
///     = -(2n(2q + n alpha/2^m)/2q) [1/(4q + 2n alpha) - 1/(2^m 4q + 2n alpha)].
inline double moser_exponent_sum(int m, double q, int n, double alpha) {
    detail::require(n, q, alpha, "moser_exponent_sum");
    if (m < 1) throw ParameterError("moser_exponent_sum: m must be >= 1");
    const double na = n * alpha;
    const double lead = 2.0 * n * (2.0 * q + std::ldexp(na, -m)) / (2.0 * q);
    return -lead * (1.0 / (4.0 * q + 2.0 * na) - 1.0 / (std::ldexp(4.0 * q, m) + 2.0 * na));
}

inline double moser_A_limit(double q, int n, double alpha) { return 2.0 * q / (2.0 * q + n * alpha); }
inline double moser_sum_limit(double q, int n, double alpha) { return -n / (2.0 * q + n * alpha); }

/// t_0 = 2^-m t, t_j = t_0 + (1 - 2^-j) t for j = 1..m; t_m = t.
inline std::vector<double> moser_time_grid(int m, double t) {
    if (m < 1) throw ParameterError("moser_time_grid: m must be >= 1");
    if (!(t > 0.0)) throw ParameterError("moser_time_grid: t must be > 0");
    std::vector<double> v(static_cast<std::size_t>(m) + 1);
    v[0] = std::ldexp(t, -m);
    for (int j = 1; j <= m; ++j) v[static_cast<std::size_t>(j)] = v[0] + (t - std::ldexp(t, -j));
    v.back() = t;
    return v;
}

/// log of the bound on the j-th iterate constant
///   K_j <= C^{(n+2)/(2^j 2q) + 2n alpha/(2^{2j} q)}
///          ((2^j q + alpha)^2 / (2^j 4q (2^j q - 1)))^{n/(2^j 2q)}.
inline double moser_Kj_log_bound(int j, double q, int n, double alpha, double C) {
    detail::require(n, q, alpha, "moser_Kj_log_bound");
    if (j < 1) throw ParameterError("moser_Kj_log_bound: j must be >= 1");
    if (!(C > 0.0)) throw ParameterError("moser_Kj_log_bound: C must be > 0");
    const double pq = std::ldexp(q, j);  // 2^j q
    if (!(pq > 1.0)) throw ParameterError("moser_Kj_log_bound: needs 2^j q > 1");
    const double c_exp = (n + 2.0) / (2.0 * pq) + 2.0 * n * alpha / (std::ldexp(1.0, j) * pq);
    const double log_factor = 2.0 * std::log(pq + alpha) - std::log(4.0 * pq) - std::log(pq - 1.0);
    return c_exp * std::log(C) + (n / (2.0 * pq)) * log_factor;
}

/// Smallest j >= 1 with 2n alpha/(2^j q) < 1, alpha/(2^j (2q-1)) < 1 and
/// alpha^2/(2^{2j} 2q (2q-1)) < 1.
inline int moser_j0(double q, int n, double alpha) {
    detail::require(n, q, alpha, "moser_j0");
    for (int j = 1; j < 1100; ++j) {
        const double p = std::ldexp(1.0, j);
        if (2.0 * n * alpha / (p * q) < 1.0 && alpha / (p * (2.0 * q - 1.0)) < 1.0 &&
            alpha * alpha / (p * p * 2.0 * q * (2.0 * q - 1.0)) < 1.0) {
            return j;
        }
    }
    throw ParameterError("moser_j0: no threshold found");
}

/// Sum_{j=1}^m B_{m-j} log K_j-bound: log of the iterated constant product.
inline double moser_constant_log_sum(int m, double q, int n, double alpha, double C) {
    double acc = 0.0;
    for (int j = 1; j <= m; ++j) acc += moser_B(m - j, m, q, n, alpha) * moser_Kj_log_bound(j, q, n, alpha, C);
    return acc;
}

struct MoserTrace {
    double q;
    int n;
    double alpha;
    int m;
    std::vector<double> A;  ///< A_1..A_m
    std::vector<double> B;  ///< B_0..B_m
    std::vector<double> S;  ///< S_1..S_m
    double K_bound;         ///< exp of moser_constant_log_sum at m
};

inline MoserTrace moser_trace(int m, double q, int n, double alpha, double C) {
    MoserTrace tr{q, n, alpha, m, {}, {}, {}, 0.0};
    for (int i = 1; i <= m; ++i) {
        tr.A.push_back(moser_A(i, q, n, alpha));
        tr.S.push_back(moser_exponent_sum(i, q, n, alpha));
    }
    for (int j = 0; j <= m; ++j) tr.B.push_back(moser_B(j, m, q, n, alpha));
    tr.K_bound = std::exp(moser_constant_log_sum(m, q, n, alpha, C));
    return tr;
}

}  // namespace pmelab::exponents
