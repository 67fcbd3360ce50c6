// econosim: trade-network simulator and heavy-tail analysis CLI.
//
// Subcommands: simulate, analyze, critical, sweep, geometry.
// Exit codes: 0 ok, 2 bad input, 3 insufficient data for a tail fit.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <econosim/econosim.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
    std::optional<std::size_t> n, k0;
    std::optional<double> q, c_th, alpha_max, delta, w;
    std::optional<std::string> turnover, replacement;
    std::optional<std::int64_t> steps, warmup;
    std::optional<std::uint64_t> seed;
};

void add_override_flags(CLI::App* cmd, Overrides& ov, bool with_cth = true) {
    cmd->add_option("--n", ov.n, "number of agents");
    cmd->add_option("--k0", ov.k0, "initial production links per agent");
    cmd->add_option("--q", ov.q, "connection creation rate");
    if (with_cth) cmd->add_option("--cth", ov.c_th, "collapse threshold c_th");
    cmd->add_option("--alpha-max", ov.alpha_max, "exchange rate ceiling");
    cmd->add_option("--delta", ov.delta, "absorbing length");
    cmd->add_option("--w", ov.w, "labor unit");
    cmd->add_option("--turnover", ov.turnover, "turnover mode: in_only|total");
    cmd->add_option("--replacement", ov.replacement,
                    "collapsed-agent policy: minimal_reset|fresh_agent");
    cmd->add_option("--steps", ov.steps, "total event-time steps");
    cmd->add_option("--warmup", ov.warmup, "steps discarded before recording");
    cmd->add_option("--seed", ov.seed, "rng seed");
}

econosim::SimConfig resolve_config(const std::string& config_path,
                                   const Overrides& ov) {
    econosim::SimConfig cfg;
    if (!config_path.empty()) cfg = econosim::read_config(config_path);
    if (ov.n) cfg.n = *ov.n;
    if (ov.k0) cfg.k0 = *ov.k0;
    if (ov.q) cfg.q = *ov.q;
    if (ov.c_th) cfg.c_th = *ov.c_th;
    if (ov.alpha_max) cfg.alpha_max = *ov.alpha_max;
    if (ov.delta) cfg.delta = *ov.delta;
    if (ov.w) cfg.w = *ov.w;
    if (ov.turnover)
        cfg.turnover_mode = econosim::turnover_mode_from_string(*ov.turnover);
    if (ov.replacement)
        cfg.replacement =
            econosim::replacement_policy_from_string(*ov.replacement);
    if (ov.steps) cfg.steps = *ov.steps;
    if (ov.warmup) cfg.warmup = *ov.warmup;
    if (ov.seed) cfg.seed = *ov.seed;
    cfg.validate();
    return cfg;
}

fs::path resolve_out_dir(const std::string& flag_value,
                         const std::string& fallback) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ECONOSIM_OUT")) return env;
    return fallback;
}

class WallClock {
public:
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

json tail_fit_or_error(const std::vector<double>& sizes,
                       const econosim::XminPolicy& policy) {
    try {
        return econosim::tail_fit_to_json(
            econosim::fit_tail_exponent(sizes, policy));
    } catch (const econosim::InsufficientTailError& e) {
        return json{{"error", "insufficient-tail"},
                    {"detail", e.what()},
                    {"n_samples", sizes.size()}};
    }
}

int cmd_simulate(const std::string& config_path, const Overrides& ov,
                 const std::string& out_flag) {
    WallClock clock;
    econosim::SimConfig cfg = resolve_config(config_path, ov);
    const fs::path out_dir = resolve_out_dir(out_flag, "econosim_out");

    econosim::Simulator sim(cfg);
    econosim::SimulationOutput out = econosim::run(sim);
    const std::int64_t first_t = cfg.resolved_warmup();

    std::vector<std::string> artifacts;
    auto track = [&](const fs::path& p) { artifacts.push_back(p.string()); };

    econosim::write_series_csv(out_dir / "u_total.csv", "u_total", first_t,
                               out.u_total);
    track(out_dir / "u_total.csv");
    econosim::write_series_csv(out_dir / "returns.csv", "return", first_t + 1,
                               out.returns);
    track(out_dir / "returns.csv");
    econosim::write_avalanches_csv(out_dir / "avalanches.csv", out.avalanches);
    track(out_dir / "avalanches.csv");
    econosim::write_degree_histogram_csv(out_dir / "degree_hist_in.csv",
                                         out.in_degree_hist);
    track(out_dir / "degree_hist_in.csv");
    econosim::write_degree_histogram_csv(out_dir / "degree_hist_out.csv",
                                         out.out_degree_hist);
    track(out_dir / "degree_hist_out.csv");
    econosim::write_edges_csv(out_dir / "network.csv", sim.network());
    track(out_dir / "network.csv");

    std::vector<double> link_sizes;
    for (const auto& a : out.avalanches)
        if (a.links_destroyed > 0)
            link_sizes.push_back(static_cast<double>(a.links_destroyed));
    {
        auto f = econosim::open_out(out_dir / "tailfit.json");
        json j = tail_fit_or_error(link_sizes, econosim::XminPolicy::scan());
        try {
            j["gamma_in"] = econosim::fit_degree_exponent(out.in_degree_hist);
        } catch (const econosim::InsufficientTailError&) {
        }
        f << j.dump(2) << "\n";
        track(out_dir / "tailfit.json");
    }

    // Index-style analysis of the overall-product series, identical to what
    // `analyze` computes on u_total.csv. Only meaningful while U_T stays
    // positive (log returns).
    bool positive = !out.u_total.empty();
    for (double u : out.u_total)
        if (!(u > 0.0)) positive = false;
    if (positive) {
        auto lr = econosim::log_returns(out.u_total);
        auto events = econosim::segment_events(lr);
        auto sizes = econosim::extract_avalanches(events, -1);
        auto f = econosim::open_out(out_dir / "index_tailfit.json");
        f << tail_fit_or_error(sizes, econosim::XminPolicy::scan()).dump(2)
          << "\n";
        track(out_dir / "index_tailfit.json");
    }

    econosim::write_manifest(out_dir, "simulate",
                             econosim::config_to_json(cfg), cfg.seed,
                             artifacts, clock.seconds());
    std::cout << "simulate: " << out.avalanches.size() << " avalanches, "
              << out.u_total.size() << " recorded steps -> "
              << out_dir.string() << "\n";
    return 0;
}

std::vector<double> load_close_series(const fs::path& path) {
    // Accepts the daily-close format (date,close) and the simulator's own
    // u_total.csv (t,u_total) so outputs can be re-analyzed directly.
    auto in = econosim::open_in(path);
    std::string header;
    if (!std::getline(in, header))
        throw std::invalid_argument("empty input: " + path.string());
    header = econosim::trim(header);
    if (header != "date,close" && header != "t,u_total")
        throw std::invalid_argument(
            "expected header 'date,close' or 't,u_total' in " + path.string());
    std::vector<double> closes;
    std::string line;
    while (std::getline(in, line)) {
        line = econosim::trim(line);
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("malformed line: " + line);
        closes.push_back(std::stod(line.substr(comma + 1)));
    }
    if (closes.size() < 2)
        throw std::invalid_argument("need at least 2 rows in " + path.string());
    return closes;
}

int cmd_analyze(const std::string& input, double xmin_flag,
                const std::string& metric_flag, const std::string& out_flag) {
    WallClock clock;
    const fs::path out_dir = resolve_out_dir(out_flag, "econosim_out");
    std::vector<double> closes = load_close_series(input);

    auto metric = metric_flag == "run_length"
                      ? econosim::SizeMetric::run_length
                      : econosim::SizeMetric::cum_return;
    auto returns = econosim::log_returns(closes);
    auto events = econosim::segment_events(returns);
    auto sizes = econosim::extract_avalanches(events, -1, metric);

    econosim::TailFit fit = econosim::fit_tail_exponent(
        sizes, xmin_flag > 0.0 ? econosim::XminPolicy::fixed(xmin_flag)
                               : econosim::XminPolicy::scan());

    std::vector<std::string> artifacts;
    econosim::write_ccdf_csv(out_dir / "ccdf.csv", econosim::ccdf(sizes));
    artifacts.push_back((out_dir / "ccdf.csv").string());
    {
        auto f = econosim::open_out(out_dir / "tailfit.json");
        json j = econosim::tail_fit_to_json(fit);
        j["n_events"] = events.events.size();
        j["n_crises"] = sizes.size();
        j["size_metric"] =
            metric == econosim::SizeMetric::run_length ? "run_length"
                                                       : "cum_return";
        f << j.dump(2) << "\n";
        artifacts.push_back((out_dir / "tailfit.json").string());
    }
    econosim::write_manifest(out_dir, "analyze",
                             json{{"input", input},
                                  {"xmin", xmin_flag},
                                  {"size_metric", metric_flag}},
                             0, artifacts, clock.seconds());
    std::cout << "analyze: m=" << econosim::format_double(fit.exponent)
              << " xmin=" << econosim::format_double(fit.xmin)
              << " n_tail=" << fit.n_tail
              << " in_bounds=" << (fit.in_bounds ? "true" : "false") << "\n";
    return 0;
}

int cmd_critical(double gamma, double q) {
    econosim::CriticalPoint p = econosim::critical_point(gamma, q);
    json j{{"gamma", p.gamma},
           {"q", p.q},
           {"omega", p.omega},
           {"u_th", p.u_th},
           {"m", p.m},
           {"gamma_in_bounds", p.gamma_in_bounds},
           {"m_in_bounds", p.m_in_bounds}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

std::vector<double> parse_range(const std::string& spec) {
    // "a:b:step" inclusive range, or a comma-separated list.
    std::vector<double> values;
    if (spec.find(':') != std::string::npos) {
        const auto c1 = spec.find(':');
        const auto c2 = spec.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw std::invalid_argument("range must be a:b:step, got " + spec);
        const double a = std::stod(spec.substr(0, c1));
        const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        const double step = std::stod(spec.substr(c2 + 1));
        if (!(step > 0.0))
            throw std::invalid_argument("range step must be > 0");
        for (double x = a; x <= b + 1e-12; x += step) values.push_back(x);
    } else {
        std::size_t pos = 0;
        while (pos < spec.size()) {
            auto comma = spec.find(',', pos);
            if (comma == std::string::npos) comma = spec.size();
            values.push_back(std::stod(spec.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (values.empty()) throw std::invalid_argument("empty range: " + spec);
    return values;
}

void write_sweep_csv(const fs::path& path,
                     const econosim::SweepSurface& surface) {
    auto out = econosim::open_out(path);
    out << "c_th,L,omega_level,m,m_normalized,n_avalanches\n";
    for (std::size_t i = 0; i < surface.cells.size(); ++i) {
        const auto& c = surface.cells[i];
        out << econosim::format_double(c.c_th) << "," << c.L << ","
            << econosim::format_double(c.omega_level) << ","
            << econosim::format_double(c.tail.exponent) << ","
            << econosim::format_double(surface.m_normalized[i]) << ","
            << c.n_avalanches << "\n";
    }
}

int cmd_sweep(const std::string& config_path, const Overrides& ov,
              const std::string& cth_spec, const std::string& L_spec,
              const std::string& mode, std::size_t parallel,
              std::size_t replicates, const std::string& out_flag) {
    WallClock clock;
    econosim::SimConfig base = resolve_config(config_path, ov);
    const fs::path out_dir = resolve_out_dir(out_flag, "econosim_out");

    std::vector<double> cths = parse_range(cth_spec);
    std::vector<std::size_t> Ls;
    for (double L : parse_range(L_spec))
        Ls.push_back(static_cast<std::size_t>(L));

    std::vector<std::string> artifacts;
    if (mode == "constant_L") {
        econosim::SweepSurface surface =
            econosim::sweep(cths, Ls, base, parallel, replicates);
        write_sweep_csv(out_dir / "sweep.csv", surface);
        artifacts.push_back((out_dir / "sweep.csv").string());
    } else if (mode == "constant_omega") {
        if (Ls.size() != 1)
            throw std::invalid_argument(
                "constant_omega mode expects a single reference L");
        econosim::ScenarioResult ref =
            econosim::run_scenario(cths.front(), Ls.front(), base, replicates);
        econosim::SweepSurface surface;
        surface.c_th_grid = cths;
        surface.L_grid = Ls;
        surface.cells.push_back(ref);
        auto iso = econosim::open_out(out_dir / "isoline.csv");
        iso << "c_th,L,omega_level,m,n_avalanches\n";
        auto emit = [&](const econosim::ScenarioResult& r) {
            iso << econosim::format_double(r.c_th) << "," << r.L << ","
                << econosim::format_double(r.omega_level) << ","
                << econosim::format_double(r.tail.exponent) << ","
                << r.n_avalanches << "\n";
        };
        emit(ref);
        for (std::size_t i = 1; i < cths.size(); ++i) {
            econosim::ScenarioResult r = econosim::constant_omega_path(
                cths[i], ref, base, replicates);
            emit(r);
            surface.cells.push_back(r);
        }
        artifacts.push_back((out_dir / "isoline.csv").string());
        // Normalize over the visited cells.
        double lo = surface.cells.front().tail.exponent, hi = lo;
        for (const auto& c : surface.cells) {
            lo = std::min(lo, c.tail.exponent);
            hi = std::max(hi, c.tail.exponent);
        }
        for (const auto& c : surface.cells)
            surface.m_normalized.push_back(
                hi > lo ? (c.tail.exponent - lo) / (hi - lo) : 0.0);
        write_sweep_csv(out_dir / "sweep.csv", surface);
        artifacts.push_back((out_dir / "sweep.csv").string());
    } else {
        throw std::invalid_argument("unknown sweep mode: " + mode);
    }

    json echo = econosim::config_to_json(base);
    echo["cth_grid"] = cth_spec;
    echo["L_grid"] = L_spec;
    echo["mode"] = mode;
    echo["replicates"] = replicates;
    econosim::write_manifest(out_dir, "sweep", echo, base.seed, artifacts,
                             clock.seconds());
    std::cout << "sweep: wrote " << artifacts.front() << "\n";
    return 0;
}

int cmd_geometry(const std::string& input, int ell, std::uint64_t seed,
                 const std::string& out_flag) {
    WallClock clock;
    const fs::path out_dir = resolve_out_dir(out_flag, "econosim_out");

    std::optional<econosim::EconomyNetwork> net;
    std::ifstream probe(input);
    if (!probe)
        throw std::invalid_argument("cannot open input file: " + input);
    std::string first_line;
    std::getline(probe, first_line);
    probe.close();
    if (econosim::trim(first_line) == "producer,consumer") {
        net = econosim::read_edges_csv(input);
    } else {
        econosim::SimConfig cfg = econosim::read_config(input);
        econosim::Simulator sim(cfg);
        for (std::int64_t t = 0; t < cfg.steps; ++t) sim.step();
        net = sim.network();
    }

    econosim::FractalEstimate est =
        econosim::fractal_dimensions(*net, ell, seed);
    json j{{"d_B", est.d_B},        {"d_k", est.d_k},
           {"ell", est.ell},        {"gamma_geo", est.gamma_geo},
           {"r2", est.r2},          {"boxes", json::array()}};
    for (const auto& [lb, count] : est.boxes)
        j["boxes"].push_back(json::array({lb, count}));
    {
        auto f = econosim::open_out(out_dir / "geometry.json");
        f << j.dump(2) << "\n";
    }
    econosim::write_manifest(out_dir, "geometry",
                             json{{"input", input}, {"ell", ell}}, seed,
                             {(out_dir / "geometry.json").string()},
                             clock.seconds());
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"econosim: trade-network simulator and heavy-tail analysis"};
    app.require_subcommand(1);

    Overrides sim_ov, sweep_ov;
    std::string sim_config, sim_out;
    auto* sim = app.add_subcommand("simulate", "run the agent model");
    sim->add_option("--config", sim_config, "key=value config file");
    sim->add_option("--out", sim_out, "output directory");
    add_override_flags(sim, sim_ov);

    std::string an_input, an_out, an_metric = "cum_return";
    double an_xmin = 0.0;
    auto* an = app.add_subcommand("analyze",
                                  "event analysis of a daily-close series");
    an->add_option("input", an_input, "CSV with header date,close")
        ->required();
    an->add_option("--xmin", an_xmin, "fixed tail cutoff (default: scan)");
    an->add_option("--size-metric", an_metric,
                   "avalanche size metric: cum_return|run_length");
    an->add_option("--out", an_out, "output directory");

    double cr_gamma = 2.5, cr_q = 1.0;
    auto* cr = app.add_subcommand("critical",
                                  "closed-form critical state for (gamma, q)");
    cr->add_option("--gamma", cr_gamma, "degree exponent")->required();
    cr->add_option("--q", cr_q, "connection creation rate");

    std::string sw_config, sw_out, sw_cth, sw_L, sw_mode = "constant_L";
    std::size_t sw_parallel = 0, sw_reps = 1;
    auto* sw = app.add_subcommand("sweep", "scenario sweep over (c_th, L)");
    sw->add_option("--config", sw_config, "base config file");
    sw->add_option("--cth", sw_cth, "c_th grid: a:b:step or list")->required();
    sw->add_option("--L", sw_L, "L grid: comma list")->required();
    sw->add_option("--mode", sw_mode, "constant_L | constant_omega");
    sw->add_option("--parallel", sw_parallel,
                   "worker threads (default: cores)");
    sw->add_option("--replicates", sw_reps, "runs pooled per scenario");
    sw->add_option("--out", sw_out, "output directory");
    add_override_flags(sw, sweep_ov, /*with_cth=*/false);

    std::string geo_input, geo_out;
    int geo_ell = 2;
    std::uint64_t geo_seed = 7;
    auto* geo = app.add_subcommand("geometry",
                                   "box-counting fractal dimensions");
    geo->add_option("input", geo_input, "edge CSV or config file")->required();
    geo->add_option("--ell", geo_ell, "1 directed, 2 undirected");
    geo->add_option("--seed", geo_seed, "covering rng seed");
    geo->add_option("--out", geo_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, sim_ov, sim_out);
        if (an->parsed())
            return cmd_analyze(an_input, an_xmin, an_metric, an_out);
        if (cr->parsed()) return cmd_critical(cr_gamma, cr_q);
        if (sw->parsed())
            return cmd_sweep(sw_config, sweep_ov, sw_cth, sw_L, sw_mode,
                             sw_parallel, sw_reps, sw_out);
        if (geo->parsed())
            return cmd_geometry(geo_input, geo_ell, geo_seed, geo_out);
    } catch (const econosim::InsufficientTailError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
