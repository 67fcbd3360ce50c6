#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>

namespace econosim {

namespace detail {

/// Euler-Maclaurin tail of sum_{n >= N} (n + a)^{-s}: boundary terms plus
/// Bernoulli corrections up to B8. With 1000 direct terms the truncation
/// error is far below 1e-10 for every s > 1.
inline double euler_maclaurin_tail(double s, double base) {
    const double b1 = std::pow(base, 1.0 - s) / (s - 1.0);
    const double b2 = 0.5 * std::pow(base, -s);
    double term = s * std::pow(base, -s - 1.0);
    double corr = term * (1.0 / 12.0);                       // B2/2!
    term *= (s + 1.0) * (s + 2.0) / (base * base);
    corr += term * (-1.0 / 720.0);                           // B4/4!
    term *= (s + 3.0) * (s + 4.0) / (base * base);
    corr += term * (1.0 / 30240.0);                          // B6/6!
    term *= (s + 5.0) * (s + 6.0) / (base * base);
    corr += term * (-1.0 / 1209600.0);                       // B8/8!
    return b1 + b2 + corr;
}

}  // namespace detail

/// Riemann zeta for s > 1, absolute error <= 1e-10.
inline double riemann_zeta(double s) {
    if (!(s > 1.0))
        throw std::domain_error("riemann_zeta: requires s > 1");
    constexpr std::size_t direct_terms = 1000;
    double sum = 0.0;
    for (std::size_t n = 1; n <= direct_terms; ++n)
        sum += std::pow(static_cast<double>(n), -s);
    return sum + detail::euler_maclaurin_tail(
                     s, static_cast<double>(direct_terms + 1));
}

/// Hurwitz zeta: sum_{n >= 0} (n + a)^{-s} for s > 1, a > 0.
inline double hurwitz_zeta(double s, double a) {
    if (!(s > 1.0))
        throw std::domain_error("hurwitz_zeta: requires s > 1");
    if (!(a > 0.0))
        throw std::domain_error("hurwitz_zeta: requires a > 0");
    constexpr std::size_t direct_terms = 1000;
    double sum = 0.0;
    for (std::size_t n = 0; n < direct_terms; ++n)
        sum += std::pow(static_cast<double>(n) + a, -s);
    return sum + detail::euler_maclaurin_tail(
                     s, a + static_cast<double>(direct_terms));
}

/// Critical leverage level: omega = q * zeta(2*gamma - 1)^(1/gamma).
/// At this omega the expected number of secondary collapses per collapse
/// equals one for an ideal degree distribution P(k) = q k^-gamma.
inline double critical_omega(double gamma, double q) {
    if (!(gamma > 1.0))
        throw std::invalid_argument("critical_omega: requires gamma > 1");
    if (!(q > 0.0))
        throw std::invalid_argument("critical_omega: requires q > 0");
    return q * std::pow(riemann_zeta(2.0 * gamma - 1.0), 1.0 / gamma);
}

/// u_th = (omega - 1) / (omega + 1); inverse of threshold_to_omega.
inline double omega_to_threshold(double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("omega_to_threshold: requires omega > 0");
    return (omega - 1.0) / (omega + 1.0);
}

/// omega = (1 + u) / (1 - u) for u in (-1, 1).
inline double threshold_to_omega(double u) {
    if (!(u > -1.0 && u < 1.0))
        throw std::invalid_argument("threshold_to_omega: requires |u| < 1");
    return (1.0 + u) / (1.0 - u);
}

/// Avalanche CCDF exponent from the degree exponent: m = 3/2 gamma - 1.
inline double exponent_map(double gamma) { return 1.5 * gamma - 1.0; }

/// Degree exponent from the avalanche exponent: gamma = 2 (m + 1) / 3.
inline double inverse_exponent_map(double m) { return 2.0 * (m + 1.0) / 3.0; }

/// The geometric bounds: gamma in (2, 3) maps to m in (2, 7/2).
inline bool gamma_in_bounds(double gamma) { return gamma > 2.0 && gamma < 3.0; }
inline bool m_in_bounds(double m) { return m > 2.0 && m < 3.5; }

/// Expected number of neighbor collapses triggered by one collapse,
/// sum_k k P(k) q (omega k)^-gamma, evaluated on a degree histogram whose
/// values are taken literally as P(k) weights (an empirical histogram
/// should be normalized by the caller; the ideal law P(k) = q k^-gamma is
/// passed unnormalized). Degree-0 entries carry no collapse risk.
template <typename Map>
inline double expected_branching(const Map& degree_hist, double omega,
                                 double q, double gamma) {
    if (!(omega > 0.0))
        throw std::invalid_argument("expected_branching: requires omega > 0");
    double total = 0.0;
    for (const auto& [degree, weight] : degree_hist) {
        const double k = static_cast<double>(degree);
        if (k < 1.0) continue;
        total += k * static_cast<double>(weight) *
                 q * std::pow(omega * k, -gamma);
    }
    return total;
}

/// Closed-form critical state for given gamma and q.
struct CriticalPoint {
    double gamma;
    double q;
    double omega;
    double u_th;
    double m;
    bool gamma_in_bounds;
    bool m_in_bounds;
};

inline CriticalPoint critical_point(double gamma, double q) {
    CriticalPoint p{};
    p.gamma = gamma;
    p.q = q;
    p.omega = critical_omega(gamma, q);
    p.u_th = omega_to_threshold(p.omega);
    p.m = exponent_map(gamma);
    p.gamma_in_bounds = econosim::gamma_in_bounds(gamma);
    p.m_in_bounds = econosim::m_in_bounds(p.m);
    return p;
}

}  // namespace econosim
