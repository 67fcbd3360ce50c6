#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "econosim/economy_graph.hpp"
#include "econosim/tail_stats.hpp"
#include "econosim/trade_dynamics.hpp"
#include "econosim/version.hpp"

namespace econosim {

/// Shortest-round-trip-safe decimal form of a double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open input file: " + path.string());
    return in;
}

// ---------------------------------------------------------------------------
// Series / histogram / event CSV

inline void write_series_csv(const std::filesystem::path& path,
                             const std::string& value_header,
                             std::int64_t first_t,
                             const std::vector<double>& values) {
    auto out = open_out(path);
    out << "t," << value_header << "\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << (first_t + static_cast<std::int64_t>(i)) << ","
            << format_double(values[i]) << "\n";
}

inline void write_avalanches_csv(const std::filesystem::path& path,
                                 const std::vector<AvalancheRecord>& recs) {
    auto out = open_out(path);
    out << "t,agents_lost,links_destroyed\n";
    for (const AvalancheRecord& r : recs)
        out << r.t << "," << r.agents_lost << "," << r.links_destroyed << "\n";
}

inline void write_degree_histogram_csv(
    const std::filesystem::path& path,
    const std::map<std::size_t, std::size_t>& hist) {
    auto out = open_out(path);
    out << "degree,count\n";
    for (const auto& [degree, count] : hist)
        out << degree << "," << count << "\n";
}

inline void write_edges_csv(const std::filesystem::path& path,
                            const EconomyNetwork& net) {
    auto out = open_out(path);
    out << "producer,consumer\n";
    net.for_each_edge([&](AgentId p, AgentId c) { out << p << "," << c << "\n"; });
}

inline EconomyNetwork read_edges_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "producer,consumer")
        throw std::invalid_argument("edge csv: expected header "
                                    "'producer,consumer' in " + path.string());
    std::vector<std::pair<AgentId, AgentId>> edges;
    AgentId max_id = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("edge csv: malformed line: " + line);
        const AgentId p = static_cast<AgentId>(std::stoul(line.substr(0, comma)));
        const AgentId c = static_cast<AgentId>(std::stoul(line.substr(comma + 1)));
        edges.emplace_back(p, c);
        max_id = std::max({max_id, p, c});
    }
    if (edges.empty())
        throw std::invalid_argument("edge csv: no edges in " + path.string());
    EconomyNetwork net(static_cast<std::size_t>(max_id) + 1);
    for (const auto& [p, c] : edges) net.add_edge(p, c);
    return net;
}

inline void write_ccdf_csv(const std::filesystem::path& path,
                           const std::vector<std::pair<double, double>>& pts) {
    auto out = open_out(path);
    out << "s,fraction_geq\n";
    for (const auto& [s, f] : pts)
        out << format_double(s) << "," << format_double(f) << "\n";
}

/// Daily-closure price series: header `date,close`, ISO dates.
struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<double> closes;
};

inline PriceSeries read_prices_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("price csv: empty file: " + path.string());
    if (trim(line) != "date,close")
        throw std::invalid_argument("price csv: expected header 'date,close' "
                                    "in " + path.string());
    PriceSeries ps;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("price csv: malformed line: " + line);
        ps.dates.push_back(line.substr(0, comma));
        ps.closes.push_back(std::stod(line.substr(comma + 1)));
    }
    if (ps.closes.size() < 2)
        throw std::invalid_argument("price csv: need at least 2 rows");
    return ps;
}

// ---------------------------------------------------------------------------
// Config file: plain key=value lines, '#' comments.

inline SimConfig parse_config_text(std::istream& in) {
    SimConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "n") cfg.n = std::stoull(value);
        else if (key == "k0") cfg.k0 = std::stoull(value);
        else if (key == "q") cfg.q = std::stod(value);
        else if (key == "c_th") cfg.c_th = std::stod(value);
        else if (key == "alpha_max") cfg.alpha_max = std::stod(value);
        else if (key == "delta") cfg.delta = std::stod(value);
        else if (key == "w") cfg.w = std::stod(value);
        else if (key == "turnover_mode")
            cfg.turnover_mode = turnover_mode_from_string(value);
        else if (key == "replacement")
            cfg.replacement = replacement_policy_from_string(value);
        else if (key == "steps") cfg.steps = std::stoll(value);
        else if (key == "warmup") cfg.warmup = std::stoll(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    }
    return cfg;
}

inline SimConfig read_config(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_config_text(in);
}

inline std::string serialize_config(const SimConfig& cfg) {
    std::ostringstream out;
    out << "n = " << cfg.n << "\n"
        << "k0 = " << cfg.k0 << "\n"
        << "q = " << format_double(cfg.q) << "\n"
        << "c_th = " << format_double(cfg.c_th) << "\n"
        << "alpha_max = " << format_double(cfg.alpha_max) << "\n"
        << "delta = " << format_double(cfg.delta) << "\n"
        << "w = " << format_double(cfg.w) << "\n"
        << "turnover_mode = " << to_string(cfg.turnover_mode) << "\n"
        << "replacement = " << to_string(cfg.replacement) << "\n"
        << "steps = " << cfg.steps << "\n"
        << "warmup = " << cfg.resolved_warmup() << "\n"
        << "seed = " << cfg.seed << "\n";
    return out.str();
}

inline nlohmann::json config_to_json(const SimConfig& cfg) {
    return nlohmann::json{{"n", cfg.n},
                          {"k0", cfg.k0},
                          {"q", cfg.q},
                          {"c_th", cfg.c_th},
                          {"alpha_max", cfg.alpha_max},
                          {"delta", cfg.delta},
                          {"w", cfg.w},
                          {"turnover_mode", to_string(cfg.turnover_mode)},
                          {"replacement", to_string(cfg.replacement)},
                          {"steps", cfg.steps},
                          {"warmup", cfg.resolved_warmup()},
                          {"seed", cfg.seed}};
}

inline nlohmann::json tail_fit_to_json(const TailFit& fit) {
    return nlohmann::json{{"exponent", fit.exponent}, {"xmin", fit.xmin},
                          {"ks_stat", fit.ks_stat},   {"n_tail", fit.n_tail},
                          {"in_bounds", fit.in_bounds},
                          {"good_fit", fit.good_fit}};
}

/// Every output directory gets exactly one manifest describing the command,
/// the fully resolved configuration and the artifacts written; re-running
/// the recorded command with the recorded config reproduces the outputs
/// bit-identically.
inline void write_manifest(const std::filesystem::path& out_dir,
                           const std::string& command,
                           const nlohmann::json& config_echo,
                           std::uint64_t seed,
                           const std::vector<std::string>& artifacts,
                           double wall_seconds) {
    nlohmann::json m{{"command", command},
                     {"config", config_echo},
                     {"seed", seed},
                     {"artifacts", artifacts},
                     {"wall_seconds", wall_seconds},
                     {"version", version_string}};
    auto out = open_out(out_dir / "manifest.json");
    out << m.dump(2) << "\n";
}

}  // namespace econosim
