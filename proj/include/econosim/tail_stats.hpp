#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "econosim/criticality.hpp"
#include "econosim/errors.hpp"

namespace econosim {

/// r_t = ln(p_{t+1} / p_t). Rejects nonpositive prices.
inline std::vector<double> log_returns(const std::vector<double>& prices) {
    if (prices.size() < 2)
        throw std::invalid_argument("log_returns: need at least 2 prices");
    std::vector<double> r;
    r.reserve(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !(prices[i + 1] > 0.0))
            throw std::invalid_argument(
                "log_returns: nonpositive price at index " + std::to_string(i));
        r.push_back(std::log(prices[i + 1] / prices[i]));
    }
    return r;
}

/// A maximal run of same-sign returns.
struct Event {
    std::size_t start = 0;
    std::size_t length = 0;
    int sign = 0;  // +1 or -1
    double cumulative_return = 0.0;
};

struct EventSeries {
    std::vector<Event> events;
};

/// Splits a return series into maximal monotone runs: a new event starts
/// whenever the sign of the return flips. Zero returns extend the current
/// event (leading zeros attach to the first signed one), which keeps the
/// sign alternation strict. An all-zero series degenerates to a single
/// zero-size positive event.
inline EventSeries segment_events(const std::vector<double>& returns) {
    EventSeries series;
    Event cur;
    bool open = false;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        const double r = returns[i];
        const int s = (r > 0.0) - (r < 0.0);
        if (!open) {
            cur = Event{0, i + 1, s, r};
            open = (s != 0);  // leading zeros stay pending
            continue;
        }
        if (s == 0 || s == cur.sign) {
            ++cur.length;
            cur.cumulative_return += r;
        } else {
            series.events.push_back(cur);
            cur = Event{i, 1, s, r};
        }
    }
    if (cur.length > 0) {
        if (cur.sign == 0) cur.sign = +1;  // all-zero input
        series.events.push_back(cur);
    }
    return series;
}

enum class SizeMetric { cum_return, run_length };

/// Avalanche sizes of the requested sign: |cumulative log return| of each
/// event (or its run length). Negative sign selects the crises.
inline std::vector<double> extract_avalanches(
    const EventSeries& series, int sign,
    SizeMetric metric = SizeMetric::cum_return) {
    std::vector<double> sizes;
    for (const Event& e : series.events) {
        if (e.sign != sign) continue;
        sizes.push_back(metric == SizeMetric::cum_return
                            ? std::fabs(e.cumulative_return)
                            : static_cast<double>(e.length));
    }
    return sizes;
}

/// Empirical complementary CDF: (s, fraction of samples >= s), one point
/// per distinct value, ascending. Starts at 1 and is non-increasing.
inline std::vector<std::pair<double, double>> ccdf(std::vector<double> samples) {
    std::vector<std::pair<double, double>> out;
    if (samples.empty()) return out;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::size_t i = 0;
    while (i < samples.size()) {
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        out.emplace_back(samples[i],
                         static_cast<double>(samples.size() - i) / n);
        i = j;
    }
    return out;
}

struct TailFit {
    double exponent = 0.0;  // CCDF exponent m: P(X >= s) ~ s^-m
    double xmin = 0.0;
    double ks_stat = 0.0;
    std::size_t n_tail = 0;
    bool in_bounds = false;  // m inside the (2, 7/2) band
    bool good_fit = false;   // KS below the 1% critical line
};

struct XminPolicy {
    bool scan_all = true;
    double fixed_value = 0.0;
    static XminPolicy fixed(double x) { return {false, x}; }
    static XminPolicy scan() { return {true, 0.0}; }
};

inline constexpr std::size_t min_tail_samples = 50;

namespace detail {

inline double hill_exponent(const std::vector<double>& sorted,
                            std::size_t from,
                            const std::vector<double>& suffix_ln) {
    const std::size_t m = sorted.size() - from;
    const double lx = std::log(sorted[from]);
    const double s = suffix_ln[from] - static_cast<double>(m) * lx;
    return s > 0.0 ? static_cast<double>(m) / s
                   : std::numeric_limits<double>::infinity();
}

inline double ks_distance(const std::vector<double>& sorted, std::size_t from,
                          double xmin, double exponent) {
    const std::size_t m = sorted.size() - from;
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double model_cdf =
            1.0 - std::pow(sorted[from + j] / xmin, -exponent);
        const double lo = static_cast<double>(j) / static_cast<double>(m);
        const double hi = static_cast<double>(j + 1) / static_cast<double>(m);
        d = std::max(d, std::fabs(lo - model_cdf));
        d = std::max(d, std::fabs(hi - model_cdf));
    }
    return d;
}

}  // namespace detail

/// Continuous maximum-likelihood (Hill) estimate of the CCDF exponent.
/// With the scan policy, xmin is chosen to minimize the Kolmogorov-Smirnov
/// distance over sample quantiles, keeping at least min_tail_samples above
/// the cutoff.
inline TailFit fit_tail_exponent(const std::vector<double>& samples,
                                 const XminPolicy& policy) {
    std::vector<double> sorted;
    sorted.reserve(samples.size());
    for (double x : samples)
        if (x > 0.0) sorted.push_back(x);
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    if (n < min_tail_samples)
        throw InsufficientTailError(
            "fit_tail_exponent: " + std::to_string(n) +
            " positive samples, need " + std::to_string(min_tail_samples));

    std::vector<double> suffix_ln(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;)
        suffix_ln[i] = suffix_ln[i + 1] + std::log(sorted[i]);

    TailFit best;
    bool found = false;

    auto evaluate = [&](std::size_t from) {
        if (n - from < min_tail_samples) return;
        const double xmin = sorted[from];
        if (from > 0 && sorted[from - 1] == xmin) return;  // duplicate cutoff
        const double m = detail::hill_exponent(sorted, from, suffix_ln);
        if (!std::isfinite(m)) return;
        const double ks = detail::ks_distance(sorted, from, xmin, m);
        if (!found || ks < best.ks_stat) {
            best.exponent = m;
            best.xmin = xmin;
            best.ks_stat = ks;
            best.n_tail = n - from;
            found = true;
        }
    };

    if (policy.scan_all) {
        // Candidate cutoffs sit at distinct sample values (first index of
        // each run of ties); subsample if there are very many.
        std::vector<std::size_t> starts;
        starts.push_back(0);
        for (std::size_t i = 1; i < n; ++i)
            if (sorted[i] != sorted[i - 1]) starts.push_back(i);
        const std::size_t max_candidates = 256;
        const std::size_t stride =
            std::max<std::size_t>(1, starts.size() / max_candidates);
        for (std::size_t c = 0; c < starts.size(); c += stride)
            evaluate(starts[c]);
    } else {
        if (!(policy.fixed_value > 0.0))
            throw std::invalid_argument("fit_tail_exponent: xmin must be > 0");
        const std::size_t from = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), policy.fixed_value) -
            sorted.begin());
        if (n - from < min_tail_samples)
            throw InsufficientTailError(
                "fit_tail_exponent: fewer than " +
                std::to_string(min_tail_samples) + " samples above xmin");
        // Anchor the model at the requested cutoff, not at the smallest
        // surviving sample.
        const std::size_t mtail = n - from;
        const double s =
            suffix_ln[from] - static_cast<double>(mtail) * std::log(policy.fixed_value);
        best.exponent = static_cast<double>(mtail) / s;
        best.xmin = policy.fixed_value;
        best.ks_stat =
            detail::ks_distance(sorted, from, policy.fixed_value, best.exponent);
        best.n_tail = mtail;
        found = true;
    }

    if (!found)
        throw InsufficientTailError("fit_tail_exponent: no viable cutoff");
    best.in_bounds = m_in_bounds(best.exponent);
    best.good_fit =
        best.ks_stat * std::sqrt(static_cast<double>(best.n_tail)) <= 1.63;
    return best;
}

struct DegreeFit {
    double gamma = 0.0;
    std::size_t kmin = 1;
    double ks_stat = 0.0;
    std::size_t n_tail = 0;
};

/// Discrete power-law MLE for a degree histogram: for each candidate kmin,
/// gamma maximizes -gamma * sum(c_k ln k) - n ln zeta(gamma, kmin)
/// (golden-section search); kmin is the candidate minimizing the KS
/// distance between the empirical tail and the fitted law.
inline DegreeFit fit_degree_exponent_detail(
    const std::map<std::size_t, std::size_t>& hist) {
    std::vector<std::pair<std::size_t, std::size_t>> bins;
    std::size_t total = 0;
    for (const auto& [k, c] : hist) {
        if (k < 1 || c == 0) continue;
        bins.emplace_back(k, c);
        total += c;
    }
    if (total < min_tail_samples || bins.size() < 3)
        throw InsufficientTailError(
            "fit_degree_exponent: histogram too small or degenerate");

    auto mle_gamma = [&](std::size_t first_bin, std::size_t kmin) {
        double n = 0.0, slnk = 0.0;
        for (std::size_t b = first_bin; b < bins.size(); ++b) {
            n += static_cast<double>(bins[b].second);
            slnk += static_cast<double>(bins[b].second) *
                    std::log(static_cast<double>(bins[b].first));
        }
        auto neg_loglik = [&](double g) {
            return g * slnk +
                   n * std::log(hurwitz_zeta(g, static_cast<double>(kmin)));
        };
        double lo = 1.05, hi = 8.0;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = neg_loglik(x1), f2 = neg_loglik(x2);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = neg_loglik(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = neg_loglik(x2);
            }
        }
        return 0.5 * (lo + hi);
    };

    auto ks_for = [&](std::size_t first_bin, std::size_t kmin, double gamma,
                      double n_tail) {
        const double z0 = hurwitz_zeta(gamma, static_cast<double>(kmin));
        double seen = 0.0, d = 0.0;
        for (std::size_t b = first_bin; b < bins.size(); ++b) {
            seen += static_cast<double>(bins[b].second);
            const double emp_cdf = seen / n_tail;
            const double model_ccdf =
                hurwitz_zeta(gamma, static_cast<double>(bins[b].first) + 1.0) /
                z0;
            d = std::max(d, std::fabs(emp_cdf - (1.0 - model_ccdf)));
        }
        return d;
    };

    DegreeFit best;
    bool found = false;
    const std::size_t stride = std::max<std::size_t>(1, bins.size() / 40);
    for (std::size_t first_bin = 0; first_bin < bins.size();
         first_bin += stride) {
        double n_tail = 0.0;
        for (std::size_t b = first_bin; b < bins.size(); ++b)
            n_tail += static_cast<double>(bins[b].second);
        if (n_tail < min_tail_samples || bins.size() - first_bin < 3) break;
        const std::size_t kmin = bins[first_bin].first;
        const double gamma = mle_gamma(first_bin, kmin);
        const double ks = ks_for(first_bin, kmin, gamma, n_tail);
        if (!found || ks < best.ks_stat) {
            best.gamma = gamma;
            best.kmin = kmin;
            best.ks_stat = ks;
            best.n_tail = static_cast<std::size_t>(n_tail);
            found = true;
        }
    }
    if (!found)
        throw InsufficientTailError("fit_degree_exponent: no viable kmin");
    return best;
}

inline double fit_degree_exponent(
    const std::map<std::size_t, std::size_t>& hist) {
    return fit_degree_exponent_detail(hist).gamma;
}

/// Excess kurtosis (0 for a Gaussian).
inline double excess_kurtosis(const std::vector<double>& xs) {
    if (xs.size() < 4) throw std::invalid_argument("excess_kurtosis: too few");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(xs.size());
    m4 /= static_cast<double>(xs.size());
    return m4 / (m2 * m2) - 3.0;
}

}  // namespace econosim
