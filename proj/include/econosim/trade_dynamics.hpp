#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "econosim/economy_graph.hpp"
#include "econosim/errors.hpp"
#include "econosim/rng.hpp"

namespace econosim {

enum class TurnoverMode { in_only, total };

inline const char* to_string(TurnoverMode m) {
    return m == TurnoverMode::in_only ? "in_only" : "total";
}

inline TurnoverMode turnover_mode_from_string(const std::string& s) {
    if (s == "in_only") return TurnoverMode::in_only;
    if (s == "total") return TurnoverMode::total;
    throw std::invalid_argument("unknown turnover_mode: " + s);
}

/// What happens to a collapsed agent after its chain resolves.
///
/// minimal_reset: the agent continues with its production links and the
/// single retained consumption link; if it lost its last production link
/// it draws one fresh outgoing connection so it can re-enter the economy.
/// This is the only policy with a stationary active phase.
///
/// fresh_agent: every remaining link is torn down and the agent re-enters
/// with one preferentially drawn incoming and one outgoing connection.
enum class ReplacementPolicy { minimal_reset, fresh_agent };

inline const char* to_string(ReplacementPolicy p) {
    return p == ReplacementPolicy::minimal_reset ? "minimal_reset"
                                                 : "fresh_agent";
}

inline ReplacementPolicy replacement_policy_from_string(const std::string& s) {
    if (s == "minimal_reset") return ReplacementPolicy::minimal_reset;
    if (s == "fresh_agent") return ReplacementPolicy::fresh_agent;
    throw std::invalid_argument("unknown replacement policy: " + s);
}

/// Model parameters of the exchange/collapse dynamics. Defaults are the
/// reference configuration: alpha_max = 2, delta = 1, unit labor,
/// consumption-side turnover, threshold at the calibrated critical level
/// -0.64 (the point where the desk-scale avalanche statistics reproduce
/// the reference heavy-tail exponent).
struct TradeParams {
    double alpha_max = 2.0;
    double delta = 1.0;  // absorbing length of the exchange-rate step
    double c_th = -0.64;
    double q = 1.0;  // connection creation rate per event-time
    double w = 1.0;  // labor unit
    TurnoverMode turnover_mode = TurnoverMode::in_only;
    ReplacementPolicy replacement = ReplacementPolicy::minimal_reset;
};

/// Exchange rate of labor on a producer->consumer link: a logistic step in
/// the degree difference, alpha_max / (1 + exp(-(k_out_i - k_in_j)/delta)).
/// Equals alpha_max/2 for matched degrees and saturates at 0 / alpha_max.
inline double exchange_rate(std::size_t k_out_i, std::size_t k_in_j,
                            double alpha_max, double delta) {
    const double z = (static_cast<double>(k_out_i) -
                      static_cast<double>(k_in_j)) / delta;
    return alpha_max / (1.0 + std::exp(-z));
}

inline double exchange_rate(std::size_t k_out_i, std::size_t k_in_j,
                            const TradeParams& p) {
    return exchange_rate(k_out_i, k_in_j, p.alpha_max, p.delta);
}

/// Memoized exchange rate over the integer degree difference. The logistic
/// saturates, so only the window where it is not flat needs storing.
class ExchangeRateTable {
public:
    ExchangeRateTable(double alpha_max, double delta)
        : alpha_max_(alpha_max) {
        saturation_ = static_cast<std::int64_t>(std::ceil(46.0 * delta));
        saturation_ = std::max<std::int64_t>(saturation_, 4);
        table_.resize(static_cast<std::size_t>(2 * saturation_ + 1));
        for (std::int64_t d = -saturation_; d <= saturation_; ++d)
            table_[static_cast<std::size_t>(d + saturation_)] =
                alpha_max / (1.0 + std::exp(-static_cast<double>(d) / delta));
    }

    double alpha(std::size_t k_out_i, std::size_t k_in_j) const {
        const std::int64_t d = static_cast<std::int64_t>(k_out_i) -
                               static_cast<std::int64_t>(k_in_j);
        if (d > saturation_) return alpha_max_;
        if (d < -saturation_) return 0.0;
        return table_[static_cast<std::size_t>(d + saturation_)];
    }

    double contribution(std::size_t k_out_i, std::size_t k_in_j,
                        double w) const {
        return w * (1.0 - alpha(k_out_i, k_in_j));
    }

private:
    double alpha_max_;
    std::int64_t saturation_;
    std::vector<double> table_;
};

/// Degree-based capital (leverage ratio) of an agent. Turnover is either
/// the consumption side alone or the total connectivity.
inline double capital(std::size_t k_out, std::size_t k_in, TurnoverMode mode) {
    if (k_in == 0)
        throw UndefinedCapitalError("capital undefined for k_in = 0");
    const double o = static_cast<double>(k_out);
    const double i = static_cast<double>(k_in);
    if (mode == TurnoverMode::in_only) return o / i - 1.0;
    return (o - i) / (o + i);
}

/// True iff agent i is below the collapse threshold. Agents with no
/// incoming connection have undefined capital (limit value +1, the safe
/// side) and never trigger; the growth dynamics restore k_in >= 1.
inline bool collapse_check(const EconomyNetwork& net, AgentId i,
                           const TradeParams& p) {
    const std::size_t k_in = net.k_in(i);
    if (k_in == 0) return false;
    return capital(net.k_out(i), k_in, p.turnover_mode) < p.c_th;
}

/// Exact per-agent balance: sum over production links of W(1 - alpha) plus
/// sum over consumption links of W(alpha - 1).
inline double agent_energy_exact(const EconomyNetwork& net, AgentId i,
                                 const TradeParams& p) {
    double u = 0.0;
    const std::size_t k_out_i = net.k_out(i);
    net.for_each_out_edge(i, [&](std::uint32_t, AgentId consumer) {
        u += p.w * (1.0 - exchange_rate(k_out_i, net.k_in(consumer), p));
    });
    const std::size_t k_in_i = net.k_in(i);
    net.for_each_in_edge(i, [&](std::uint32_t, AgentId producer) {
        u += p.w * (exchange_rate(net.k_out(producer), k_in_i, p) - 1.0);
    });
    return u;
}

/// Mean-field balance U_i = beta (k_out - k_in).
inline double agent_energy_meanfield(std::size_t k_out, std::size_t k_in,
                                     double beta) {
    return beta * (static_cast<double>(k_out) - static_cast<double>(k_in));
}

/// Overall product: the outgoing-side sum W(1 - alpha_ij) over every edge.
inline double total_energy(const EconomyNetwork& net, const TradeParams& p) {
    double u = 0.0;
    for (std::size_t i = 0; i < net.n_agents(); ++i) {
        const AgentId a = static_cast<AgentId>(i);
        const std::size_t k_out_a = net.k_out(a);
        net.for_each_out_edge(a, [&](std::uint32_t, AgentId consumer) {
            u += p.w * (1.0 - exchange_rate(k_out_a, net.k_in(consumer), p));
        });
    }
    return u;
}

/// One collapse chain: event time, agents lost (r), links destroyed (K_T).
struct AvalancheRecord {
    std::int64_t t = 0;
    std::size_t agents_lost = 0;
    std::size_t links_destroyed = 0;
};

namespace detail {

/// Incremental tracker of the overall product. Keeps one cached
/// contribution per live edge; every mutation reports the removed edge ids
/// and the agents whose degree changed, whose incident edges are then
/// re-evaluated. Periodically rebuilt from scratch so float drift cannot
/// accumulate over long runs.
class EnergyLedger {
public:
    explicit EnergyLedger(const TradeParams& p)
        : w_(p.w), table_(p.alpha_max, p.delta) {}

    double total() const { return u_; }

    void rebuild(const EconomyNetwork& net) {
        contrib_.assign(net.edge_capacity(), 0.0);
        u_ = 0.0;
        for (std::size_t i = 0; i < net.n_agents(); ++i) {
            const AgentId a = static_cast<AgentId>(i);
            const std::size_t k_out_a = net.k_out(a);
            net.for_each_out_edge(a, [&](std::uint32_t id, AgentId consumer) {
                const double c =
                    table_.contribution(k_out_a, net.k_in(consumer), w_);
                contrib_[id] = c;
                u_ += c;
            });
        }
        ops_since_rebuild_ = 0;
    }

    void on_edge_removed(std::uint32_t id) {
        u_ -= contrib_[id];
        contrib_[id] = 0.0;
        ++ops_since_rebuild_;
    }

    /// Re-evaluates the production-side edges of `a` (its out-degree
    /// changed). Fresh edges enter here: their cached contribution is zero,
    /// so the first refresh adds them in full.
    void refresh_out(const EconomyNetwork& net, AgentId a) {
        const std::size_t k_out_a = net.k_out(a);
        net.for_each_out_edge(a, [&](std::uint32_t id, AgentId consumer) {
            update(id, table_.contribution(k_out_a, net.k_in(consumer), w_));
        });
    }

    /// Re-evaluates the consumption-side edges of `a` (its in-degree
    /// changed).
    void refresh_in(const EconomyNetwork& net, AgentId a) {
        const std::size_t k_in_a = net.k_in(a);
        net.for_each_in_edge(a, [&](std::uint32_t id, AgentId producer) {
            update(id, table_.contribution(net.k_out(producer), k_in_a, w_));
        });
    }

    void grow(std::size_t capacity) {
        if (contrib_.size() < capacity) contrib_.resize(capacity, 0.0);
    }

    bool wants_rebuild() const { return ops_since_rebuild_ > (1u << 16); }

private:
    void update(std::uint32_t id, double value) {
        u_ += value - contrib_[id];
        contrib_[id] = value;
        ++ops_since_rebuild_;
    }

    double w_;
    ExchangeRateTable table_;
    std::vector<double> contrib_;
    double u_ = 0.0;
    std::uint64_t ops_since_rebuild_ = 0;
};

/// Reusable per-step buffers: dead flags with a dirty list for O(1) reset,
/// the chain queue and the replacement queue.
struct CascadeScratch {
    std::vector<std::uint8_t> dead;
    std::vector<AgentId> dirty;
    std::deque<AgentId> queue;
    std::vector<AgentId> reseed;

    void ensure(std::size_t n) {
        if (dead.size() < n) dead.resize(n, 0);
    }
    void mark_dead(AgentId a) {
        dead[a] = 1;
        dirty.push_back(a);
    }
    void clear_dead() {
        for (AgentId a : dirty) dead[a] = 0;
        dirty.clear();
    }
};

/// Breadth-first collapse propagation from `seed` (which must violate the
/// threshold). The collapsed agent keeps only its newest incoming edge;
/// each removed edge costs its producer one production link, and any
/// producer pushed below threshold is enqueued exactly once. The
/// mean-field bookkeeping U_i += beta k_in, T_i -= k_in, U_j -= beta,
/// T_j -= 1 is implied by these degree updates, since capital is
/// degree-defined. Agents flagged dead (already collapsed at this event
/// time, awaiting replacement) never re-enter a chain. Collapsed agents
/// are appended to scratch.reseed for the caller to replace.
inline AvalancheRecord cascade_impl(EconomyNetwork& net, AgentId seed,
                                    const TradeParams& p, EnergyLedger* ledger,
                                    CascadeScratch& scratch) {
    AvalancheRecord rec;
    scratch.queue.clear();
    scratch.queue.push_back(seed);
    scratch.mark_dead(seed);

    while (!scratch.queue.empty()) {
        const AgentId a = scratch.queue.front();
        scratch.queue.pop_front();
        auto removed = net.remove_incoming(a, 1);
        ++rec.agents_lost;
        rec.links_destroyed += removed.size();
        scratch.reseed.push_back(a);

        if (ledger && !removed.empty()) {
            for (const RemovedEdge& e : removed) ledger->on_edge_removed(e.id);
            ledger->refresh_in(net, a);
            for (const RemovedEdge& e : removed)
                ledger->refresh_out(net, e.producer);
        }
        // Oldest-first removal order keeps the chain deterministic.
        for (const RemovedEdge& e : removed) {
            if (!scratch.dead[e.producer] &&
                collapse_check(net, e.producer, p)) {
                scratch.queue.push_back(e.producer);
                scratch.mark_dead(e.producer);
            }
        }
    }
    return rec;
}

}  // namespace detail

/// Standalone cascade entry point: runs one collapse chain to completion
/// and returns (r, K_T). The caller is responsible for replacing the
/// collapsed agents afterwards (see Simulator::step).
inline AvalancheRecord cascade(EconomyNetwork& net, AgentId seed,
                               const TradeParams& p) {
    detail::CascadeScratch scratch;
    scratch.ensure(net.n_agents());
    return detail::cascade_impl(net, seed, p, nullptr, scratch);
}

/// Everything produced by one event-time step.
struct StepOutcome {
    double u_total = 0.0;
    std::size_t edges_added = 0;
    std::vector<AvalancheRecord> avalanches;
};

/// Full run configuration (model parameters plus run control).
struct SimConfig {
    std::size_t n = 1000;
    std::size_t k0 = 1;
    double q = 1.0;
    double c_th = -0.64;
    double alpha_max = 2.0;
    double delta = 1.0;
    double w = 1.0;
    TurnoverMode turnover_mode = TurnoverMode::in_only;
    ReplacementPolicy replacement = ReplacementPolicy::minimal_reset;
    std::int64_t steps = 210000;
    std::int64_t warmup = -1;  // negative: default to 10 * n
    std::uint64_t seed = 25;

    std::int64_t resolved_warmup() const {
        return warmup >= 0 ? warmup : static_cast<std::int64_t>(10 * n);
    }

    TradeParams trade_params() const {
        TradeParams p;
        p.alpha_max = alpha_max;
        p.delta = delta;
        p.c_th = c_th;
        p.q = q;
        p.w = w;
        p.turnover_mode = turnover_mode;
        p.replacement = replacement;
        return p;
    }

    void validate() const {
        if (n < 10) throw std::invalid_argument("config: n must be >= 10");
        if (k0 < 1 || k0 >= n)
            throw std::invalid_argument("config: need 1 <= k0 < n");
        if (!(q > 0.0)) throw std::invalid_argument("config: q must be > 0");
        if (!(c_th > -1.0 && c_th < 1.0))
            throw std::invalid_argument("config: c_th must be in (-1, 1)");
        if (!(alpha_max > 0.0))
            throw std::invalid_argument("config: alpha_max must be > 0");
        if (!(delta > 0.0))
            throw std::invalid_argument("config: delta must be > 0");
        if (!(w > 0.0)) throw std::invalid_argument("config: w must be > 0");
        if (steps < resolved_warmup())
            throw std::invalid_argument("config: steps must cover the warmup");
    }
};

/// Recorded series and events of one run (warmup excluded).
struct SimulationOutput {
    SimConfig config;
    std::vector<double> u_total;
    std::vector<double> returns;  // (U(t) - U(t-1)) / U(t-1), 0 when prev == 0
    std::vector<AvalancheRecord> avalanches;
    std::map<std::size_t, std::size_t> in_degree_hist;
    std::map<std::size_t, std::size_t> out_degree_hist;
};

/// Event-time driver. One step adds floor(q) connections (plus one more
/// with probability q - floor(q)), each joining a producer drawn
/// preferentially by out-degree to an independently drawn consumer by
/// in-degree. Any agent the additions push below c_th seeds a collapse
/// chain; knock-on violations from the replacements are resolved before
/// the step ends, and everything that fell at this event time is recorded
/// as a single chain (one crisis per trigger). The overall product is
/// recorded once per step.
class Simulator {
public:
    explicit Simulator(const SimConfig& cfg)
        : cfg_((cfg.validate(), cfg)),
          params_(cfg.trade_params()),
          net_(init_network(cfg.n, cfg.k0, cfg.seed)),
          rng_(seed_combine(cfg.seed, 0x5ec1a57ULL)),
          ledger_(params_) {
        scratch_.ensure(net_.n_agents());
        ledger_.rebuild(net_);
    }

    const EconomyNetwork& network() const { return net_; }
    const TradeParams& params() const { return params_; }
    const SimConfig& config() const { return cfg_; }
    std::int64_t time() const { return t_; }
    double current_energy() const { return ledger_.total(); }

    StepOutcome step() {
        StepOutcome out;
        scratch_.clear_dead();
        scratch_.reseed.clear();

        std::size_t n_new = static_cast<std::size_t>(std::floor(params_.q));
        if (bernoulli(rng_, params_.q - std::floor(params_.q))) ++n_new;

        // Only capital-lowering events can create a new violation: a
        // consumer gaining an incoming link, or a producer losing an
        // outgoing one. Those are the agents audited below.
        pending_.clear();
        for (std::size_t e = 0; e < n_new; ++e) {
            AgentId producer, consumer;
            do {
                producer = net_.sample_preferential(Direction::by_out, rng_);
                consumer = net_.sample_preferential(Direction::by_in, rng_);
            } while (producer == consumer);
            add_edge_tracked(producer, consumer);
            pending_.push_back(consumer);
            ++out.edges_added;
        }

        AvalancheRecord chain;
        chain.t = t_;
        std::size_t rounds = 0;
        while (!pending_.empty()) {
            if (++rounds > 10000)
                throw std::runtime_error(
                    "step did not stabilize: threshold admits no steady "
                    "state at these parameters");
            for (AgentId a : pending_) {
                if (scratch_.dead[a]) continue;
                if (!collapse_check(net_, a, params_)) continue;
                AvalancheRecord rec =
                    detail::cascade_impl(net_, a, params_, &ledger_, scratch_);
                chain.agents_lost += rec.agents_lost;
                chain.links_destroyed += rec.links_destroyed;
            }
            pending_.clear();

            // Replacements; a replaced agent is not re-audited by its own
            // re-entry, only agents its new links touch are.
            fallen_.clear();
            fallen_.swap(scratch_.reseed);
            for (AgentId a : fallen_) {
                if (params_.replacement == ReplacementPolicy::minimal_reset) {
                    if (net_.k_out(a) == 0) {
                        AgentId consumer;
                        do {
                            consumer =
                                net_.sample_preferential(Direction::by_in, rng_);
                        } while (consumer == a);
                        add_edge_tracked(a, consumer);
                        pending_.push_back(consumer);
                    }
                } else {
                    auto removed = remove_all_edges_tracked(a);
                    for (const RemovedEdge& e : removed)
                        if (e.consumer == a) pending_.push_back(e.producer);
                    AgentId fresh_producer;
                    do {
                        fresh_producer =
                            net_.sample_preferential(Direction::by_out, rng_);
                    } while (fresh_producer == a);
                    add_edge_tracked(fresh_producer, a);
                    AgentId fresh_consumer;
                    do {
                        fresh_consumer =
                            net_.sample_preferential(Direction::by_in, rng_);
                    } while (fresh_consumer == a);
                    add_edge_tracked(a, fresh_consumer);
                    pending_.push_back(fresh_consumer);
                }
                scratch_.dead[a] = 0;
            }
        }
        if (chain.agents_lost > 0) out.avalanches.push_back(chain);

        if (ledger_.wants_rebuild()) ledger_.rebuild(net_);
        out.u_total = ledger_.total();
        ++t_;
        return out;
    }

private:
    void add_edge_tracked(AgentId producer, AgentId consumer) {
        net_.add_edge(producer, consumer);
        ledger_.grow(net_.edge_capacity());
        ledger_.refresh_out(net_, producer);
        ledger_.refresh_in(net_, consumer);
    }

    std::vector<RemovedEdge> remove_all_edges_tracked(AgentId a) {
        auto removed = net_.remove_all_edges(a);
        for (const RemovedEdge& e : removed) ledger_.on_edge_removed(e.id);
        for (const RemovedEdge& e : removed) {
            if (e.consumer == a)
                ledger_.refresh_out(net_, e.producer);
            else
                ledger_.refresh_in(net_, e.consumer);
        }
        return removed;
    }

    SimConfig cfg_;
    TradeParams params_;
    EconomyNetwork net_;
    Rng rng_;
    detail::EnergyLedger ledger_;
    detail::CascadeScratch scratch_;
    std::vector<AgentId> pending_;
    std::vector<AgentId> fallen_;
    std::int64_t t_ = 0;
};

/// Drives an already-constructed simulator through its configured steps;
/// deterministic for a given seed. The recorded series start after the
/// warmup. The simulator is left holding the final network.
inline SimulationOutput run(Simulator& sim) {
    const SimConfig& cfg = sim.config();
    SimulationOutput out;
    out.config = cfg;
    const std::int64_t warmup = cfg.resolved_warmup();
    const std::int64_t record_steps = cfg.steps - warmup;
    out.u_total.reserve(static_cast<std::size_t>(record_steps));

    for (std::int64_t t = 0; t < cfg.steps; ++t) {
        StepOutcome so = sim.step();
        if (t < warmup) continue;
        out.u_total.push_back(so.u_total);
        for (AvalancheRecord& rec : so.avalanches)
            out.avalanches.push_back(rec);
    }

    out.returns.reserve(out.u_total.empty() ? 0 : out.u_total.size() - 1);
    for (std::size_t i = 1; i < out.u_total.size(); ++i) {
        const double prev = out.u_total[i - 1];
        out.returns.push_back(
            prev == 0.0 ? 0.0 : (out.u_total[i] - prev) / prev);
    }
    out.in_degree_hist = sim.network().degree_histogram(Direction::by_in);
    out.out_degree_hist = sim.network().degree_histogram(Direction::by_out);
    return out;
}

inline SimulationOutput run(const SimConfig& cfg) {
    Simulator sim(cfg);
    return run(sim);
}

}  // namespace econosim
