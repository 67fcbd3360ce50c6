#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "econosim/economy_graph.hpp"
#include "econosim/errors.hpp"
#include "econosim/rng.hpp"

namespace econosim {

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares line through (ln x, ln y).
inline LogLogFit loglog_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("loglog_fit: need >= 2 matched points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    LogLogFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    const double ss_res = ss_tot - f.slope * (sxy - sx * sy / n);
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

/// Simple undirected projection of the largest weakly connected component:
/// parallel edges collapsed, direction dropped. Keeps the original
/// multigraph total degree (k_in + k_out) per surviving node for hub
/// statistics.
struct UndirectedView {
    std::vector<std::vector<std::uint32_t>> adj;
    std::vector<double> multi_degree;

    std::size_t n() const { return adj.size(); }
};

inline UndirectedView undirected_projection(const EconomyNetwork& net) {
    const std::size_t n = net.n_agents();
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        const AgentId a = static_cast<AgentId>(i);
        net.for_each_out_edge(a, [&](std::uint32_t, AgentId c) {
            adj[a].push_back(c);
            adj[c].push_back(a);
        });
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    // Largest weakly connected component.
    std::vector<std::int32_t> comp(n, -1);
    std::int32_t n_comp = 0;
    std::vector<std::uint32_t> stack, comp_size;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::uint32_t size = 0;
        stack.push_back(static_cast<std::uint32_t>(s));
        comp[s] = n_comp;
        while (!stack.empty()) {
            std::uint32_t v = stack.back();
            stack.pop_back();
            ++size;
            for (std::uint32_t u : adj[v])
                if (comp[u] < 0) {
                    comp[u] = n_comp;
                    stack.push_back(u);
                }
        }
        comp_size.push_back(size);
        ++n_comp;
    }
    const std::int32_t big = static_cast<std::int32_t>(
        std::max_element(comp_size.begin(), comp_size.end()) -
        comp_size.begin());

    std::vector<std::uint32_t> local(n, UINT32_MAX);
    UndirectedView view;
    for (std::size_t i = 0; i < n; ++i)
        if (comp[i] == big) {
            local[i] = static_cast<std::uint32_t>(view.adj.size());
            view.adj.emplace_back();
            view.multi_degree.push_back(static_cast<double>(
                net.k_in(static_cast<AgentId>(i)) +
                net.k_out(static_cast<AgentId>(i))));
        }
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] != big) continue;
        for (std::uint32_t u : adj[i])
            view.adj[local[i]].push_back(local[u]);
    }
    return view;
}

namespace detail {

/// One greedy compact-box covering pass: nodes are claimed in `order`; a
/// box grows from its seed by absorbing candidates that stay within
/// undirected distance < l_B of every current member (enforced by a
/// depth-limited BFS from each absorbed node). Returns the boxes.
class BoxCoverer {
public:
    explicit BoxCoverer(const UndirectedView& view)
        : view_(view),
          covered_(view.n(), 0),
          stamp_(view.n(), 0),
          depth_(view.n(), 0),
          epoch_(0) {}

    std::vector<std::vector<std::uint32_t>> cover(
        const std::vector<std::uint32_t>& order, std::size_t l_B) {
        std::fill(covered_.begin(), covered_.end(), 0);
        std::vector<std::vector<std::uint32_t>> boxes;
        const std::size_t radius = l_B - 1;
        for (std::uint32_t seed : order) {
            if (covered_[seed]) continue;
            std::vector<std::uint32_t> box{seed};
            covered_[seed] = 1;
            std::vector<std::uint32_t> cand = reachable_uncovered(seed, radius);
            while (!cand.empty()) {
                const std::uint32_t next = cand.front();
                box.push_back(next);
                covered_[next] = 1;
                // Keep only candidates still compatible with `next`.
                mark_ball(next, radius);
                std::vector<std::uint32_t> kept;
                kept.reserve(cand.size());
                for (std::uint32_t c : cand)
                    if (c != next && !covered_[c] && stamp_[c] == epoch_)
                        kept.push_back(c);
                cand.swap(kept);
            }
            boxes.push_back(std::move(box));
        }
        return boxes;
    }

private:
    /// BFS ball of the given radius around `from`; stamps reached nodes.
    void mark_ball(std::uint32_t from, std::size_t radius) {
        ++epoch_;
        bfs_.clear();
        bfs_.push_back(from);
        stamp_[from] = epoch_;
        depth_[from] = 0;
        for (std::size_t head = 0; head < bfs_.size(); ++head) {
            const std::uint32_t v = bfs_[head];
            if (depth_[v] == radius) continue;
            for (std::uint32_t u : view_.adj[v]) {
                if (stamp_[u] == epoch_) continue;
                stamp_[u] = epoch_;
                depth_[u] = depth_[v] + 1;
                bfs_.push_back(u);
            }
        }
    }

    std::vector<std::uint32_t> reachable_uncovered(std::uint32_t from,
                                                   std::size_t radius) {
        mark_ball(from, radius);
        std::vector<std::uint32_t> out;
        for (std::uint32_t v : bfs_)
            if (!covered_[v] && v != from) out.push_back(v);
        return out;
    }

    const UndirectedView& view_;
    std::vector<std::uint8_t> covered_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::uint32_t> depth_;
    std::vector<std::uint32_t> bfs_;
    std::uint32_t epoch_;
};

}  // namespace detail

inline constexpr int box_cover_restarts = 10;

/// Minimum box count over `box_cover_restarts` greedy coverings (the first
/// pass claims nodes in index order, the rest in random order). Boxes
/// guarantee pairwise distance < l_B. Optionally returns the best covering.
inline std::size_t box_cover(const UndirectedView& view, std::size_t l_B,
                             Rng& rng,
                             std::vector<std::vector<std::uint32_t>>* best_out =
                                 nullptr) {
    if (l_B < 1) throw std::invalid_argument("box_cover: l_B must be >= 1");
    detail::BoxCoverer coverer(view);
    std::vector<std::uint32_t> order(view.n());
    std::iota(order.begin(), order.end(), 0);

    std::size_t best = SIZE_MAX;
    for (int r = 0; r < box_cover_restarts; ++r) {
        if (r > 0) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[bounded_u64(rng, i)]);
        }
        auto boxes = coverer.cover(order, l_B);
        if (boxes.size() < best) {
            best = boxes.size();
            if (best_out) *best_out = std::move(boxes);
        }
    }
    return best;
}

/// Convenience overload on the raw network (largest component is
/// extracted internally).
inline std::size_t box_cover(const EconomyNetwork& net, std::size_t l_B,
                             Rng& rng) {
    UndirectedView view = undirected_projection(net);
    return box_cover(view, l_B, rng);
}

struct FractalEstimate {
    double d_B = 0.0;
    double d_k = 0.0;
    int ell = 2;  // 1 directed, 2 undirected
    double gamma_geo = 0.0;
    double r2 = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> boxes;  // (l_B, count)
};

/// Box-counting dimensions over l_B in [2, 8]: d_B from the decay of the
/// box count; d_k from the growth of the mass-weighted box hub degree
/// (every node contributes the largest total degree inside its box, so the
/// typical node's renormalized hub is measured, not the typical box's).
/// The factor 2 converts the hub-growth slope to the pair-state convention
/// of the undirected projection the distances are measured on.
/// gamma_geo = 1 + ell * d_B / d_k. Scales where the covering has
/// collapsed to a single box are dropped from the regressions.
inline FractalEstimate fractal_dimensions(const EconomyNetwork& net,
                                          int ell = 2,
                                          std::uint64_t seed = 7) {
    UndirectedView view = undirected_projection(net);
    if (view.n() < 100)
        throw DisconnectedInputError(
            "fractal_dimensions: largest connected component has fewer than "
            "100 nodes");
    Rng rng(seed);

    FractalEstimate est;
    est.ell = ell;
    std::vector<double> ls, counts, hub_means;
    for (std::size_t l_B = 2; l_B <= 8; ++l_B) {
        std::vector<std::vector<std::uint32_t>> boxes;
        const std::size_t n_boxes = box_cover(view, l_B, rng, &boxes);
        est.boxes.emplace_back(l_B, n_boxes);
        if (n_boxes <= 1) continue;

        double weighted_hub = 0.0;
        for (const auto& box : boxes) {
            double hub = 0.0;
            for (std::uint32_t v : box)
                hub = std::max(hub, view.multi_degree[v]);
            weighted_hub += hub * static_cast<double>(box.size());
        }
        ls.push_back(static_cast<double>(l_B));
        counts.push_back(static_cast<double>(n_boxes));
        hub_means.push_back(weighted_hub / static_cast<double>(view.n()));
    }
    if (ls.size() < 3)
        throw std::invalid_argument(
            "fractal_dimensions: not enough usable scales (network too "
            "small or too dense)");

    const LogLogFit fb = loglog_fit(ls, counts);
    const LogLogFit fh = loglog_fit(ls, hub_means);
    est.d_B = -fb.slope;
    est.d_k = 2.0 * fh.slope;
    est.r2 = fb.r2;
    est.gamma_geo = 1.0 + static_cast<double>(ell) * est.d_B / est.d_k;
    return est;
}

/// Dimension ratio for a regular family (one network per generation, e.g.
/// cliques of doubling size): d_B tracks node growth, d_k link growth,
/// gamma = 1 + ell * d_B / d_k.
inline double regular_family_gamma(const std::vector<double>& node_counts,
                                   const std::vector<double>& link_counts,
                                   int ell) {
    if (node_counts.size() != link_counts.size() || node_counts.size() < 2)
        throw std::invalid_argument("regular_family_gamma: need >= 2 sizes");
    std::vector<double> gen(node_counts.size());
    for (std::size_t j = 0; j < gen.size(); ++j)
        gen[j] = std::exp(static_cast<double>(j));  // uniform ln-spacing
    const double d_B = loglog_fit(gen, node_counts).slope;
    const double d_k = loglog_fit(gen, link_counts).slope;
    return 1.0 + static_cast<double>(ell) * d_B / d_k;
}

}  // namespace econosim
