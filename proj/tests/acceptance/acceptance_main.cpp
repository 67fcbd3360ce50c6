// Acceptance suite: one check per criterion, each printing a PASS/FAIL
// line with the measured numbers. Exit code is the number of failures.
//
// The runs are seeded and deterministic; tolerances are fixed below and
// match the statements of the criteria.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <econosim/econosim.hpp>

using namespace econosim;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", ok ? "PASS" : "FAIL", id,
                name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

// --------------------------------------------------------------------------
// 1. Critical-relation closure: expected branching on the ideal degree law
//    equals one at the computed critical omega, within 1e-6.
void criterion_1() {
    bool ok = true;
    std::string detail;
    for (double gamma : {2.2, 2.5, 3.0}) {
        const double q = 1.0;
        const double omega = critical_omega(gamma, q);
        std::map<std::size_t, double> hist;
        for (std::size_t k = 1; k <= 1000000; ++k)
            hist[k] = q * std::pow(static_cast<double>(k), -gamma);
        const double b = expected_branching(hist, omega, q, gamma);
        detail += fmt("gamma=%.1f: %.9f  ", gamma, b);
        if (std::fabs(b - 1.0) > 1e-6) ok = false;
    }
    report(1, "critical-relation closure", ok, detail);
}

// --------------------------------------------------------------------------
// 2. Exponent map bounds and round-trip identity.
void criterion_2() {
    bool ok = exponent_map(2.0) == 2.0 && exponent_map(3.0) == 3.5;
    double worst = 0.0;
    for (double g = 2.0; g <= 3.5; g += 1e-3) {
        const double back = inverse_exponent_map(exponent_map(g));
        worst = std::max(worst, std::fabs(back - g));
    }
    if (worst > 1e-12) ok = false;
    report(2, "exponent map and bounds", ok,
           fmt("m(2)=%g m(3)=%g max roundtrip err=%.2e", exponent_map(2.0),
               exponent_map(3.0), worst));
}

// --------------------------------------------------------------------------
// 3. Otter oracle: mean-one Galton-Watson tree sizes have density exponent
//    3/2, i.e. a CCDF exponent of 1/2, recovered within 0.15.
void criterion_3() {
    Rng rng(2024);
    std::uint64_t bits = 0;
    int nbits = 0;
    auto offspring = [&]() {
        std::size_t g = 0;
        for (;;) {
            if (nbits == 0) {
                bits = rng();
                nbits = 64;
            }
            const bool one = bits & 1;
            bits >>= 1;
            --nbits;
            if (!one) return g;
            ++g;
        }
    };
    const std::size_t cap = 10000000;
    std::vector<double> sizes;
    sizes.reserve(1000000);
    std::size_t censored = 0;
    for (int t = 0; t < 1000000; ++t) {
        std::size_t alive = 1, size = 0;
        while (alive > 0 && size < cap) {
            alive += offspring();
            --alive;
            ++size;
        }
        if (alive > 0) {
            ++censored;  // ran past the cap; drop the censored tree
            continue;
        }
        sizes.push_back(static_cast<double>(size));
    }
    TailFit fit = fit_tail_exponent(sizes, XminPolicy::scan());
    const double density = fit.exponent + 1.0;
    const bool ok = std::fabs(density - 1.5) <= 0.15;
    report(3, "Otter oracle (Galton-Watson)", ok,
           fmt("density exponent %.4f (target 1.5+-0.15), trees=%zu "
               "censored=%zu",
               density, sizes.size(), censored));
}

// --------------------------------------------------------------------------
// 4/5. Reference desk-scale run: N=1000, q=1, W=1, 2e5 post-warmup steps
//      at the calibrated critical threshold (default configuration).
void criteria_4_and_5() {
    SimConfig cfg;  // defaults: n=1000, q=1, c_th=-0.64, steps 210000,
                    // warmup 10000, seed 25
    SimulationOutput out = run(cfg);

    std::vector<double> sizes;
    for (const AvalancheRecord& a : out.avalanches)
        if (a.links_destroyed > 0)
            sizes.push_back(static_cast<double>(a.links_destroyed));
    TailFit fit = fit_tail_exponent(sizes, XminPolicy::scan());
    const double kurt = excess_kurtosis(out.returns);

    const bool m_in_band = fit.exponent >= 2.0 && fit.exponent <= 3.5;
    const bool m_near_ref = std::fabs(fit.exponent - 2.51) <= 0.3;
    const bool heavy = kurt > 1.0;
    report(4, "desk-scale reference-figure reproduction",
           m_in_band && m_near_ref && heavy,
           fmt("m=%.4f (in [2,3.5]=%d, |m-2.51|<=0.3=%d), excess "
               "kurtosis=%.1f, avalanches=%zu",
               fit.exponent, m_in_band, m_near_ref, kurt,
               out.avalanches.size()));

    const double gamma = fit_degree_exponent(out.in_degree_hist);
    const double predicted = exponent_map(gamma);
    const double gap = std::fabs(fit.exponent - predicted);
    report(5, "structure-dynamics consistency", gap <= 0.3,
           fmt("m=%.4f gamma_fit=%.4f 3g/2-1=%.4f |gap|=%.4f (tol 0.3)",
               fit.exponent, gamma, predicted, gap));
}

// --------------------------------------------------------------------------
// 6. Conservation suite along a 1e5-step run of the default model.
void criterion_6() {
    SimConfig cfg;
    cfg.steps = 110000;
    cfg.warmup = 10000;
    Simulator sim(cfg);
    const TradeParams& p = sim.params();

    double worst_exact = 0.0;
    bool meanfield_ok = true, safety_ok = true;
    for (std::int64_t t = 0; t < cfg.steps; ++t) {
        sim.step();
        if (t % 1000 != 999) continue;
        const EconomyNetwork& net = sim.network();
        double exact = 0.0, mean = 0.0;
        for (AgentId i = 0; i < net.n_agents(); ++i) {
            exact += agent_energy_exact(net, i, p);
            mean += agent_energy_meanfield(net.k_out(i), net.k_in(i), 1.0);
        }
        worst_exact = std::max(
            worst_exact,
            std::fabs(exact) / static_cast<double>(net.edge_count()));
        if (mean != 0.0) meanfield_ok = false;
        for (AgentId i = 0; i < net.n_agents(); ++i) {
            if (net.k_in(i) == 0) continue;
            if (capital(net.k_out(i), net.k_in(i), p.turnover_mode) < p.c_th)
                safety_ok = false;
        }
    }
    const bool ok = worst_exact <= 1e-9 && meanfield_ok && safety_ok;
    report(6, "conservation suite", ok,
           fmt("max |sum U_i|/|edges| = %.2e (tol 1e-9), mean-field sum "
               "exact=%d, post-cascade safety=%d",
               worst_exact, meanfield_ok, safety_ok));
}

// --------------------------------------------------------------------------
// 7. Banking directional claims at L = 2000, c_th raised from -0.71 to
//    -0.69. Scenarios pool 4 replicate runs; the exponent comparison uses
//    a common cutoff (90th percentile of the pooled sizes) so the two
//    fits see the same tail window.
double hill_at(const std::vector<double>& sizes, double xmin) {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : sizes)
        if (x >= xmin) {
            s += std::log(x / xmin);
            ++n;
        }
    return n >= 30 && s > 0.0 ? static_cast<double>(n) / s : 0.0;
}

void criterion_7() {
    SimConfig base;  // length-matched runs: steps 210000, warmup 10*L
    base.warmup = -1;
    const std::size_t reps = 4;

    ScenarioResult f0 = run_scenario(-0.71, 2000, base, reps);
    ScenarioResult fl = run_scenario(-0.69, 2000, base, reps);

    std::vector<double> pooled = f0.avalanche_sizes;
    pooled.insert(pooled.end(), fl.avalanche_sizes.begin(),
                  fl.avalanche_sizes.end());
    std::sort(pooled.begin(), pooled.end());
    const double cut = pooled[static_cast<std::size_t>(0.9 * pooled.size())];
    const double m0 = hill_at(f0.avalanche_sizes, cut);
    const double ml = hill_at(fl.avalanche_sizes, cut);

    const bool omega_decreases = fl.omega_level < f0.omega_level;
    const bool m_increases = ml > m0;

    bool l_in_window = false;
    bool dm_small = false;
    std::string iso_detail;
    try {
        ScenarioResult fo = constant_omega_path(-0.69, f0, base, reps);
        const double mo = hill_at(fo.avalanche_sizes, cut);
        l_in_window = fo.L >= 1200 && fo.L <= 1800;
        dm_small = std::fabs(mo - m0) <= 0.25;
        iso_detail = fmt("L*=%zu Omega*=%.3f m*=%.3f |dm|=%.3f", fo.L,
                         fo.omega_level, mo, std::fabs(mo - m0));
    } catch (const NoSolutionError& e) {
        iso_detail = std::string("isoline unsolved: ") + e.what();
    }

    const bool ok = omega_decreases && m_increases && l_in_window && dm_small;
    report(7, "banking directional claims", ok,
           fmt("Omega %.3f->%.3f (dec=%d); m@cut%.0f %.3f->%.3f (inc=%d); "
               "%s (L in [1200,1800]=%d, |dm|<=0.25=%d)",
               f0.omega_level, fl.omega_level, omega_decreases, cut, m0, ml,
               m_increases, iso_detail.c_str(), l_in_window, dm_small));
}

// --------------------------------------------------------------------------
// 8. Estimator calibration: synthetic Pareto and the zeta spot value.
void criterion_8() {
    Rng rng(1);
    std::vector<double> xs;
    xs.reserve(100000);
    for (int i = 0; i < 100000; ++i)
        xs.push_back(std::pow(uniform_unit(rng) + 1e-300, -1.0 / 2.5));
    TailFit fit = fit_tail_exponent(xs, XminPolicy::fixed(1.0));
    const double zeta_err =
        std::fabs(riemann_zeta(2.0) - 1.6449340668482264);
    const bool ok = std::fabs(fit.exponent - 2.5) <= 0.05 && zeta_err <= 1e-10;
    report(8, "estimator calibration", ok,
           fmt("pareto m=%.4f (target 2.5+-0.05), |zeta(2)-pi^2/6|=%.1e",
               fit.exponent, zeta_err));
}

// --------------------------------------------------------------------------
// 9. Geometry bounds on a simulated trade network plus the clique family.
void criterion_9() {
    SimConfig cfg;  // default run; geometry measured on the final network
    Simulator sim(cfg);
    for (std::int64_t t = 0; t < cfg.steps; ++t) sim.step();
    FractalEstimate est = fractal_dimensions(sim.network(), 2, 7);
    const double gamma_fit =
        fit_degree_exponent(sim.network().degree_histogram(Direction::by_in));

    std::vector<double> nodes, links;
    for (int j = 3; j <= 8; ++j) {
        const double z = static_cast<double>(1 << j);
        nodes.push_back(z);
        links.push_back(z * (z - 1.0) / 2.0);
    }
    const double clique_gamma = regular_family_gamma(nodes, links, 2);

    const bool in_band = est.gamma_geo >= 1.8 && est.gamma_geo <= 3.4;
    const bool agrees = std::fabs(est.gamma_geo - gamma_fit) <= 0.4;
    const bool clique_ok = std::fabs(clique_gamma - 2.0) <= 0.3;
    report(9, "geometry bounds", in_band && agrees && clique_ok,
           fmt("gamma_geo=%.3f (d_B=%.2f d_k=%.2f r2=%.2f) vs fit=%.3f "
               "(|diff|<=0.4=%d); clique family=%.3f (2+-0.3=%d)",
               est.gamma_geo, est.d_B, est.d_k, est.r2, gamma_fit, agrees,
               clique_gamma, clique_ok));
}

}  // namespace

int main() {
    std::printf("econosim acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_and_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf(
        "note: the optional daily-close index check (analyze on user-supplied "
        "data, m within (2, 3.5)) requires external data and is not bundled.\n");
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
