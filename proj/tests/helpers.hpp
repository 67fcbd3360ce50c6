#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <econosim/economy_graph.hpp>
#include <econosim/rng.hpp>

namespace testutil {

/// Upper chi-square quantile via the Wilson-Hilferty approximation
/// (relative error well below 1% for df >= 10).
inline double chi_square_critical(double df, double z) {
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

inline constexpr double z_999 = 3.090232306167814;  // Phi^-1(0.999)

/// Pareto sample with CCDF exponent m and cutoff xmin = 1.
inline std::vector<double> pareto_samples(std::size_t n, double m,
                                          econosim::Rng& rng) {
    std::vector<double> xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        xs.push_back(std::pow(econosim::uniform_unit(rng) + 1e-300, -1.0 / m));
    return xs;
}

/// Recounts degrees from the raw edge multiset (independent of the cached
/// bookkeeping inside EconomyNetwork).
struct DegreeCount {
    std::vector<std::size_t> k_in;
    std::vector<std::size_t> k_out;
    std::size_t edges = 0;
};

inline DegreeCount recount(const econosim::EconomyNetwork& net) {
    DegreeCount d;
    d.k_in.assign(net.n_agents(), 0);
    d.k_out.assign(net.n_agents(), 0);
    net.for_each_edge([&](econosim::AgentId p, econosim::AgentId c) {
        ++d.k_out[p];
        ++d.k_in[c];
        ++d.edges;
    });
    return d;
}

/// Random multigraph where every agent keeps k_in >= 1.
inline econosim::EconomyNetwork random_multigraph(std::size_t n,
                                                  std::size_t extra_edges,
                                                  econosim::Rng& rng) {
    econosim::EconomyNetwork net(n);
    for (econosim::AgentId i = 0; i < n; ++i) {
        econosim::AgentId p;
        do {
            p = static_cast<econosim::AgentId>(econosim::bounded_u64(rng, n));
        } while (p == i);
        net.add_edge(p, i);
    }
    for (std::size_t e = 0; e < extra_edges; ++e) {
        econosim::AgentId p, c;
        do {
            p = static_cast<econosim::AgentId>(econosim::bounded_u64(rng, n));
            c = static_cast<econosim::AgentId>(econosim::bounded_u64(rng, n));
        } while (p == c);
        net.add_edge(p, c);
    }
    return net;
}

}  // namespace testutil
