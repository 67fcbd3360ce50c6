#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "econosim/errors.hpp"
#include "econosim/rng.hpp"
#include "econosim/tail_stats.hpp"
#include "econosim/trade_dynamics.hpp"

namespace econosim {

/// One banking-reading scenario: the collapse threshold acts as the
/// regulatory minimum capital level, L is the operating-neighborhood size.
/// Near-critical runs are strongly history-dependent, so a scenario can
/// pool several replicate runs (derived seeds): omega is the replicate
/// mean, the tail fit uses the pooled avalanche sizes.
struct ScenarioResult {
    double c_th = 0.0;
    std::size_t L = 0;
    double omega_level = 0.0;  // business level per bank, units of W
    double u_mean = 0.0;       // mean overall product over the window
    TailFit tail;              // CCDF fit of bankruptcy-avalanche link counts
    std::size_t n_avalanches = 0;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    std::vector<double> avalanche_sizes;  // pooled destroyed-link counts
};

/// Average business level per bank: mean of U_T over the trailing `window`
/// entries, divided by L.
inline double business_level(const std::vector<double>& u_series,
                             std::size_t L, std::size_t window) {
    if (u_series.empty() || L == 0 || window == 0)
        throw std::invalid_argument("business_level: empty input");
    window = std::min(window, u_series.size());
    double sum = 0.0;
    for (std::size_t i = u_series.size() - window; i < u_series.size(); ++i)
        sum += u_series[i];
    return sum / static_cast<double>(window) / static_cast<double>(L);
}

inline std::uint64_t scenario_seed(double c_th, std::size_t L,
                                   std::uint64_t base_seed) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(c_th));
    __builtin_memcpy(&bits, &c_th, sizeof(bits));
    return seed_combine(seed_combine(base_seed, bits),
                        static_cast<std::uint64_t>(L));
}

/// One scenario under (c_th, L), optionally pooled over replicate runs.
/// Runs are length-matched: steps and warmup come from the base config
/// regardless of L, and the measurement window T_S is the final half of
/// the recorded series. The avalanche tail is fitted on destroyed-link
/// counts.
inline ScenarioResult run_scenario(double c_th, std::size_t L,
                                   const SimConfig& base,
                                   std::size_t replicates = 1) {
    if (L < 100)
        throw std::invalid_argument("run_scenario: L must be >= 100");
    if (!(c_th > -1.0 && c_th < 1.0))
        throw std::invalid_argument("run_scenario: c_th must be in (-1, 1)");
    if (replicates < 1)
        throw std::invalid_argument("run_scenario: replicates must be >= 1");

    ScenarioResult res;
    res.c_th = c_th;
    res.L = L;
    res.replicates = replicates;
    res.seed = scenario_seed(c_th, L, base.seed);

    double omega_sum = 0.0, u_sum = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        SimConfig cfg = base;
        cfg.n = L;
        cfg.c_th = c_th;
        cfg.seed = scenario_seed(c_th, L, base.seed + 1000 * r);
        SimulationOutput out = run(cfg);

        const std::size_t window =
            std::max<std::size_t>(1, out.u_total.size() / 2);
        omega_sum += business_level(out.u_total, L, window);
        double sum = 0.0;
        for (std::size_t i = out.u_total.size() - window;
             i < out.u_total.size(); ++i)
            sum += out.u_total[i];
        u_sum += sum / static_cast<double>(window);

        res.n_avalanches += out.avalanches.size();
        for (const AvalancheRecord& a : out.avalanches)
            if (a.links_destroyed > 0)
                res.avalanche_sizes.push_back(
                    static_cast<double>(a.links_destroyed));
    }
    res.omega_level = omega_sum / static_cast<double>(replicates);
    res.u_mean = u_sum / static_cast<double>(replicates);
    res.tail = fit_tail_exponent(res.avalanche_sizes, XminPolicy::scan());
    return res;
}

/// Grid of scenarios with the exponent normalized to [0, 1] over the grid.
struct SweepSurface {
    std::vector<double> c_th_grid;
    std::vector<std::size_t> L_grid;
    std::vector<ScenarioResult> cells;  // row-major: c_th outer, L inner
    std::vector<double> m_normalized;

    const ScenarioResult& at(std::size_t i_cth, std::size_t i_L) const {
        return cells[i_cth * L_grid.size() + i_L];
    }
};

/// Independent scenarios over the (c_th, L) grid, run on a bounded worker
/// pool. Cell seeds derive from (c_th, L, base seed), so results do not
/// depend on evaluation order or thread count.
inline SweepSurface sweep(const std::vector<double>& c_th_grid,
                          const std::vector<std::size_t>& L_grid,
                          const SimConfig& base, std::size_t parallelism = 0,
                          std::size_t replicates = 1) {
    SweepSurface surface;
    surface.c_th_grid = c_th_grid;
    surface.L_grid = L_grid;
    const std::size_t n_cells = c_th_grid.size() * L_grid.size();
    surface.cells.resize(n_cells);
    if (n_cells == 0) return surface;

    if (parallelism == 0)
        parallelism = std::max(1u, std::thread::hardware_concurrency());
    parallelism = std::min(parallelism, n_cells);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_cells) return;
            const double c_th = c_th_grid[i / L_grid.size()];
            const std::size_t L = L_grid[i % L_grid.size()];
            surface.cells[i] = run_scenario(c_th, L, base, replicates);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < parallelism; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    double lo = surface.cells.front().tail.exponent;
    double hi = lo;
    for (const ScenarioResult& r : surface.cells) {
        lo = std::min(lo, r.tail.exponent);
        hi = std::max(hi, r.tail.exponent);
    }
    surface.m_normalized.reserve(n_cells);
    for (const ScenarioResult& r : surface.cells)
        surface.m_normalized.push_back(
            hi > lo ? (r.tail.exponent - lo) / (hi - lo) : 0.0);
    return surface;
}

inline constexpr double omega_match_tolerance = 0.05;  // relative

/// Follows the isoline of constant business level: finds L such that the
/// scenario at c_th_target matches the reference Omega within 5% relative,
/// by bisection on L in [100, 10 * L_ref]. Omega falls with L at fixed
/// parameters (the per-bank share of the drive shrinks), which orients the
/// bracket.
inline ScenarioResult constant_omega_path(double c_th_target,
                                          const ScenarioResult& reference,
                                          const SimConfig& base,
                                          std::size_t replicates = 1) {
    if (c_th_target == reference.c_th) return reference;

    const double target = reference.omega_level;
    auto relative_gap = [&](const ScenarioResult& r) {
        return (r.omega_level - target) / target;
    };

    ScenarioResult probe =
        run_scenario(c_th_target, reference.L, base, replicates);
    if (std::fabs(relative_gap(probe)) <= omega_match_tolerance) return probe;

    // Omega decreases in L; walk toward the target to bracket it.
    std::size_t lo = 100;
    std::size_t hi = 10 * reference.L;
    ScenarioResult lo_res, hi_res;
    bool have_lo = false, have_hi = false;
    if (relative_gap(probe) < 0.0) {
        hi = reference.L;
        hi_res = probe;
        have_hi = true;
    } else {
        lo = reference.L;
        lo_res = probe;
        have_lo = true;
    }
    if (!have_lo) {
        lo_res = run_scenario(c_th_target, lo, base, replicates);
        if (std::fabs(relative_gap(lo_res)) <= omega_match_tolerance)
            return lo_res;
        if (relative_gap(lo_res) < 0.0)
            throw NoSolutionError(
                "constant_omega_path: Omega below target over the whole "
                "bracket");
    }
    if (!have_hi) {
        hi_res = run_scenario(c_th_target, hi, base, replicates);
        if (std::fabs(relative_gap(hi_res)) <= omega_match_tolerance)
            return hi_res;
        if (relative_gap(hi_res) > 0.0)
            throw NoSolutionError(
                "constant_omega_path: Omega above target over the whole "
                "bracket");
    }

    for (int it = 0; it < 40 && hi - lo > 1; ++it) {
        const std::size_t mid = lo + (hi - lo) / 2;
        ScenarioResult mid_res =
            run_scenario(c_th_target, mid, base, replicates);
        if (std::fabs(relative_gap(mid_res)) <= omega_match_tolerance)
            return mid_res;
        if (relative_gap(mid_res) > 0.0) {
            lo = mid;
            lo_res = mid_res;
        } else {
            hi = mid;
            hi_res = mid_res;
        }
    }
    throw NoSolutionError(
        "constant_omega_path: bisection exhausted without a 5% match "
        "(Omega plateau)");
}

}  // namespace econosim
