#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "econosim/errors.hpp"
#include "econosim/rng.hpp"

namespace econosim {

using AgentId = std::uint32_t;

enum class Direction { by_in, by_out };

/// Binary indexed tree over per-agent integer weights. Supports O(log n)
/// point update and O(log n) sampling proportional to weight.
class FenwickTree {
public:
    explicit FenwickTree(std::size_t n) : tree_(n + 1, 0) {
        highest_bit_ = 1;
        while (highest_bit_ * 2 < tree_.size()) highest_bit_ *= 2;
    }

    void add(std::size_t i, std::int64_t delta) {
        for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1))
            tree_[j] += delta;
    }

    std::int64_t prefix_sum(std::size_t count) const {
        std::int64_t s = 0;
        for (std::size_t j = count; j > 0; j -= j & (~j + 1)) s += tree_[j];
        return s;
    }

    std::int64_t total() const { return prefix_sum(tree_.size() - 1); }

    /// Index i such that prefix_sum(i) <= r < prefix_sum(i+1).
    std::size_t find(std::int64_t r) const {
        std::size_t pos = 0;
        std::size_t mask = highest_bit_;
        while (mask > 0) {
            std::size_t next = pos + mask;
            if (next < tree_.size() && tree_[next] <= r) {
                pos = next;
                r -= tree_[next];
            }
            mask >>= 1;
        }
        return pos;
    }

private:
    std::vector<std::int64_t> tree_;
    std::size_t highest_bit_ = 0;
};

/// A just-removed edge. The id refers to a recycled storage slot and is
/// only meaningful until the next add_edge call (incremental bookkeeping
/// consumes it immediately).
struct RemovedEdge {
    std::uint32_t id;
    AgentId producer;
    AgentId consumer;
};

/// Directed trade multigraph over a fixed set of agents. Edges run from
/// producer to consumer; parallel edges are allowed, self-loops are not.
/// Preferential sampling uses add-one smoothed weights (degree + 1) so
/// zero-degree agents stay reachable.
class EconomyNetwork {
public:
    explicit EconomyNetwork(std::size_t n_agents)
        : out_edges_(n_agents),
          in_edges_(n_agents),
          weight_in_(n_agents),
          weight_out_(n_agents) {
        for (std::size_t i = 0; i < n_agents; ++i) {
            weight_in_.add(i, 1);   // smoothed weight k_in + 1
            weight_out_.add(i, 1);  // smoothed weight k_out + 1
        }
    }

    std::size_t n_agents() const { return out_edges_.size(); }
    std::size_t edge_count() const { return live_edges_; }

    std::size_t k_out(AgentId i) const { return out_edges_[i].size(); }
    std::size_t k_in(AgentId i) const { return in_edges_[i].size(); }

    std::size_t add_edge(AgentId producer, AgentId consumer) {
        if (producer == consumer)
            throw SelfLoopError("self-loop rejected: agent " +
                                std::to_string(producer));
        std::size_t id;
        if (!free_slots_.empty()) {
            id = free_slots_.back();
            free_slots_.pop_back();
        } else {
            id = edges_.size();
            edges_.push_back({});
        }
        EdgeRec& e = edges_[id];
        e.producer = producer;
        e.consumer = consumer;
        e.seq = next_seq_++;
        e.pos_out = static_cast<std::uint32_t>(out_edges_[producer].size());
        e.pos_in = static_cast<std::uint32_t>(in_edges_[consumer].size());
        out_edges_[producer].push_back(static_cast<std::uint32_t>(id));
        in_edges_[consumer].push_back(static_cast<std::uint32_t>(id));
        weight_out_.add(producer, 1);
        weight_in_.add(consumer, 1);
        ++live_edges_;
        return id;
    }

    /// Removes all but the `keep` most recently created incoming edges of
    /// `agent`. Returns the removed edges, oldest first, so callers can
    /// propagate the producers' out-degree losses. No-op when k_in <= keep.
    std::vector<RemovedEdge> remove_incoming(AgentId agent, std::size_t keep) {
        std::vector<RemovedEdge> removed;
        const auto& ids = in_edges_[agent];
        if (ids.size() <= keep) return removed;

        std::vector<std::uint32_t> doomed(ids.begin(), ids.end());
        std::sort(doomed.begin(), doomed.end(),
                  [this](std::uint32_t a, std::uint32_t b) {
                      return edges_[a].seq < edges_[b].seq;
                  });
        doomed.resize(doomed.size() - keep);  // newest `keep` survive

        removed.reserve(doomed.size());
        for (std::uint32_t id : doomed) {
            removed.push_back({id, edges_[id].producer, edges_[id].consumer});
            erase_edge(id);
        }
        return removed;
    }

    /// Removes every edge incident to `agent` (both directions). Used when
    /// a collapsed agent is replaced by a fresh one.
    std::vector<RemovedEdge> remove_all_edges(AgentId agent) {
        std::vector<RemovedEdge> removed;
        removed.reserve(in_edges_[agent].size() + out_edges_[agent].size());
        while (!in_edges_[agent].empty()) {
            std::uint32_t id = in_edges_[agent].back();
            removed.push_back({id, edges_[id].producer, edges_[id].consumer});
            erase_edge(id);
        }
        while (!out_edges_[agent].empty()) {
            std::uint32_t id = out_edges_[agent].back();
            removed.push_back({id, edges_[id].producer, edges_[id].consumer});
            erase_edge(id);
        }
        return removed;
    }

    /// Draws an agent with probability (k_dir + 1) / sum_j (k_dir(j) + 1).
    AgentId sample_preferential(Direction dir, Rng& rng) const {
        const FenwickTree& w = (dir == Direction::by_in) ? weight_in_ : weight_out_;
        std::int64_t total = w.total();
        std::int64_t r = static_cast<std::int64_t>(
            bounded_u64(rng, static_cast<std::uint64_t>(total)));
        return static_cast<AgentId>(w.find(r));
    }

    /// Same draw restricted to agents [0, first_m). Used by the sequential
    /// growth of init_network.
    AgentId sample_preferential_prefix(Direction dir, std::size_t first_m,
                                       Rng& rng) const {
        const FenwickTree& w = (dir == Direction::by_in) ? weight_in_ : weight_out_;
        std::int64_t total = w.prefix_sum(first_m);
        std::int64_t r = static_cast<std::int64_t>(
            bounded_u64(rng, static_cast<std::uint64_t>(total)));
        return static_cast<AgentId>(w.find(r));
    }

    std::map<std::size_t, std::size_t> degree_histogram(Direction dir) const {
        std::map<std::size_t, std::size_t> hist;
        for (std::size_t i = 0; i < n_agents(); ++i)
            ++hist[dir == Direction::by_in ? k_in(static_cast<AgentId>(i))
                                           : k_out(static_cast<AgentId>(i))];
        return hist;
    }

    template <typename F>
    void for_each_out_edge(AgentId i, F&& f) const {
        for (std::uint32_t id : out_edges_[i]) f(id, edges_[id].consumer);
    }

    template <typename F>
    void for_each_in_edge(AgentId i, F&& f) const {
        for (std::uint32_t id : in_edges_[i]) f(id, edges_[id].producer);
    }

    template <typename F>
    void for_each_edge(F&& f) const {
        for (std::size_t i = 0; i < n_agents(); ++i)
            for (std::uint32_t id : out_edges_[i])
                f(edges_[id].producer, edges_[id].consumer);
    }

    std::size_t edge_capacity() const { return edges_.size(); }
    AgentId edge_producer(std::size_t id) const { return edges_[id].producer; }
    AgentId edge_consumer(std::size_t id) const { return edges_[id].consumer; }

    /// Recounts degrees and sampling weights from the edge multiset and
    /// compares against the cached bookkeeping. Test/debug hook.
    bool consistent() const {
        std::vector<std::size_t> kin(n_agents(), 0), kout(n_agents(), 0);
        std::size_t live = 0;
        for (std::size_t i = 0; i < n_agents(); ++i) {
            for (std::uint32_t id : out_edges_[i]) {
                if (edges_[id].producer != i) return false;
                ++kout[i];
                ++live;
            }
            for (std::uint32_t id : in_edges_[i]) {
                if (edges_[id].consumer != i) return false;
                ++kin[i];
            }
        }
        if (live != live_edges_) return false;
        std::size_t in_total = 0;
        for (std::size_t i = 0; i < n_agents(); ++i) {
            if (kin[i] != k_in(static_cast<AgentId>(i))) return false;
            if (kout[i] != k_out(static_cast<AgentId>(i))) return false;
            in_total += kin[i];
        }
        if (in_total != live_edges_) return false;
        if (weight_in_.total() !=
            static_cast<std::int64_t>(live_edges_ + n_agents()))
            return false;
        if (weight_out_.total() !=
            static_cast<std::int64_t>(live_edges_ + n_agents()))
            return false;
        return true;
    }

private:
    struct EdgeRec {
        AgentId producer = 0;
        AgentId consumer = 0;
        std::uint64_t seq = 0;
        std::uint32_t pos_out = 0;
        std::uint32_t pos_in = 0;
    };

    void erase_edge(std::uint32_t id) {
        const EdgeRec e = edges_[id];
        auto& out = out_edges_[e.producer];
        out[e.pos_out] = out.back();
        edges_[out[e.pos_out]].pos_out = e.pos_out;
        out.pop_back();
        auto& in = in_edges_[e.consumer];
        in[e.pos_in] = in.back();
        edges_[in[e.pos_in]].pos_in = e.pos_in;
        in.pop_back();
        weight_out_.add(e.producer, -1);
        weight_in_.add(e.consumer, -1);
        --live_edges_;
        free_slots_.push_back(id);
    }

    std::vector<EdgeRec> edges_;
    std::vector<std::uint32_t> free_slots_;
    std::vector<std::vector<std::uint32_t>> out_edges_;
    std::vector<std::vector<std::uint32_t>> in_edges_;
    FenwickTree weight_in_;
    FenwickTree weight_out_;
    std::size_t live_edges_ = 0;
    std::uint64_t next_seq_ = 0;
};

/// Builds the initial trade network: agents arrive one by one and each
/// wires exactly k0 production links to already-present agents, consumers
/// drawn preferentially on current in-degree (weight k_in + 1). Agent 0 has
/// no predecessors, so its k0 links are drawn last over the grown network.
/// Out-degrees end delta-distributed at k0; in-degrees approach a power law
/// for large n.
inline EconomyNetwork init_network(std::size_t n, std::size_t k0,
                                   std::uint64_t rng_seed) {
    if (n < 10)
        throw std::invalid_argument("init_network: need n >= 10, got " +
                                    std::to_string(n));
    if (k0 < 1 || k0 >= n)
        throw std::invalid_argument("init_network: need 1 <= k0 < n");

    EconomyNetwork net(n);
    Rng rng(rng_seed);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t e = 0; e < k0; ++e) {
            AgentId consumer =
                net.sample_preferential_prefix(Direction::by_in, i, rng);
            net.add_edge(static_cast<AgentId>(i), consumer);
        }
    }
    for (std::size_t e = 0; e < k0; ++e) {
        AgentId consumer;
        do {
            consumer = net.sample_preferential(Direction::by_in, rng);
        } while (consumer == 0);
        net.add_edge(0, consumer);
    }
    return net;
}

}  // namespace econosim
