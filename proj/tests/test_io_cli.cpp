#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <econosim/io.hpp>

using namespace econosim;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("econosim_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

#ifdef ECONOSIM_CLI_PATH
int run_cli(const std::string& args, const fs::path& stdout_to,
            const fs::path& stderr_to) {
    std::string cmd = std::string(ECONOSIM_CLI_PATH) + " " + args + " >" +
                      stdout_to.string() + " 2>" + stderr_to.string();
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
#endif

}  // namespace

TEST_CASE("config round trip") {
    SimConfig cfg;
    cfg.n = 1234;
    cfg.k0 = 3;
    cfg.q = 0.75;
    cfg.c_th = -0.123;
    cfg.alpha_max = 1.5;
    cfg.delta = 2.25;
    cfg.turnover_mode = TurnoverMode::total;
    cfg.replacement = ReplacementPolicy::fresh_agent;
    cfg.steps = 5000;
    cfg.warmup = 111;
    cfg.seed = 987654321;
    std::istringstream in(serialize_config(cfg));
    SimConfig back = parse_config_text(in);
    REQUIRE(back.n == cfg.n);
    REQUIRE(back.k0 == cfg.k0);
    REQUIRE(back.q == cfg.q);
    REQUIRE(back.c_th == cfg.c_th);
    REQUIRE(back.alpha_max == cfg.alpha_max);
    REQUIRE(back.delta == cfg.delta);
    REQUIRE(back.turnover_mode == cfg.turnover_mode);
    REQUIRE(back.replacement == cfg.replacement);
    REQUIRE(back.steps == cfg.steps);
    REQUIRE(back.warmup == cfg.warmup);
    REQUIRE(back.seed == cfg.seed);
}

TEST_CASE("config parser diagnostics") {
    std::istringstream ok("n = 100  # agents\n\nq=1.5\n");
    SimConfig cfg = parse_config_text(ok);
    REQUIRE(cfg.n == 100);
    REQUIRE(cfg.q == 1.5);
    REQUIRE(cfg.warmup == -1);
    REQUIRE(cfg.resolved_warmup() == 1000);

    std::istringstream bad_key("bogus = 3\n");
    REQUIRE_THROWS_AS(parse_config_text(bad_key), std::invalid_argument);
    std::istringstream bad_line("steps 100\n");
    REQUIRE_THROWS_AS(parse_config_text(bad_line), std::invalid_argument);
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 3.141592653589793, 1e-17, -2.51, 1.0 / 3.0,
                     12345678.987654321}) {
        REQUIRE(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("edge csv round trip") {
    fs::path dir = fresh_dir("edges");
    EconomyNetwork net = init_network(120, 2, 5);
    write_edges_csv(dir / "net.csv", net);
    EconomyNetwork back = read_edges_csv(dir / "net.csv");
    REQUIRE(back.n_agents() == net.n_agents());
    REQUIRE(back.edge_count() == net.edge_count());
    for (AgentId i = 0; i < net.n_agents(); ++i) {
        REQUIRE(back.k_in(i) == net.k_in(i));
        REQUIRE(back.k_out(i) == net.k_out(i));
    }
    REQUIRE_THROWS_AS(read_edges_csv(dir / "missing.csv"),
                      std::invalid_argument);
}

TEST_CASE("price csv ingestion") {
    fs::path dir = fresh_dir("prices");
    {
        std::ofstream out(dir / "good.csv");
        out << "date,close\n2001-01-01,100.5\n2001-01-02,101\n";
    }
    PriceSeries ps = read_prices_csv(dir / "good.csv");
    REQUIRE(ps.closes.size() == 2);
    REQUIRE(ps.closes[0] == Approx(100.5));
    REQUIRE(ps.dates[1] == "2001-01-02");
    {
        std::ofstream out(dir / "bad.csv");
        out << "time,value\n1,2\n";
    }
    REQUIRE_THROWS_AS(read_prices_csv(dir / "bad.csv"), std::invalid_argument);
}

#ifdef ECONOSIM_CLI_PATH

TEST_CASE("cli: critical prints the closed-form state") {
    fs::path dir = fresh_dir("cli_critical");
    const int rc = run_cli("critical --gamma 3 --q 1", dir / "out.json",
                           dir / "err.txt");
    REQUIRE(rc == 0);
    auto j = nlohmann::json::parse(slurp(dir / "out.json"));
    REQUIRE(j["omega"].get<double>() == Approx(1.012161).margin(1e-6));
    REQUIRE(j["m"].get<double>() == Approx(3.5));
}

TEST_CASE("cli: missing input names the path and exits 2") {
    fs::path dir = fresh_dir("cli_missing");
    const int rc = run_cli("analyze /no/such/file.csv", dir / "out.txt",
                           dir / "err.txt");
    REQUIRE(rc == 2);
    REQUIRE(slurp(dir / "err.txt").find("/no/such/file.csv") !=
            std::string::npos);
}

TEST_CASE("cli: a short series has too little tail data and exits 3") {
    fs::path dir = fresh_dir("cli_short");
    {
        std::ofstream out(dir / "prices.csv");
        out << "date,close\n";
        for (int i = 0; i < 12; ++i)
            out << "2001-01-" << (i + 1) << "," << 100 + (i % 3) << "\n";
    }
    const int rc = run_cli("analyze " + (dir / "prices.csv").string() +
                               " --out " + (dir / "out").string(),
                           dir / "out.txt", dir / "err.txt");
    REQUIRE(rc == 3);
}

TEST_CASE("cli: simulate then analyze its own overall product") {
    fs::path dir = fresh_dir("cli_roundtrip");
    // Quiet growth regime: the overall product stays positive, so the
    // index pipeline applies to it directly.
    const std::string sim_args =
        "simulate --n 300 --cth -0.8 --steps 25000 --warmup 3000 --seed 5 "
        "--out " + (dir / "sim").string();
    REQUIRE(run_cli(sim_args, dir / "sim_out.txt", dir / "sim_err.txt") == 0);
    REQUIRE(fs::exists(dir / "sim" / "u_total.csv"));
    REQUIRE(fs::exists(dir / "sim" / "returns.csv"));
    REQUIRE(fs::exists(dir / "sim" / "avalanches.csv"));
    REQUIRE(fs::exists(dir / "sim" / "network.csv"));
    REQUIRE(fs::exists(dir / "sim" / "manifest.json"));
    REQUIRE(fs::exists(dir / "sim" / "index_tailfit.json"));

    const std::string an_args =
        "analyze " + (dir / "sim" / "u_total.csv").string() + " --out " +
        (dir / "an").string();
    REQUIRE(run_cli(an_args, dir / "an_out.txt", dir / "an_err.txt") == 0);

    auto in_process =
        nlohmann::json::parse(slurp(dir / "sim" / "index_tailfit.json"));
    auto reanalyzed =
        nlohmann::json::parse(slurp(dir / "an" / "tailfit.json"));
    REQUIRE(reanalyzed["exponent"].get<double>() ==
            Approx(in_process["exponent"].get<double>()).margin(1e-9));
    REQUIRE(reanalyzed["xmin"].get<double>() ==
            Approx(in_process["xmin"].get<double>()).margin(1e-9));

    SECTION("re-running with the same seed reproduces the series") {
        const std::string again =
            "simulate --n 300 --cth -0.8 --steps 25000 --warmup 3000 "
            "--seed 5 --out " + (dir / "sim2").string();
        REQUIRE(run_cli(again, dir / "s2.txt", dir / "s2e.txt") == 0);
        REQUIRE(slurp(dir / "sim" / "u_total.csv") ==
                slurp(dir / "sim2" / "u_total.csv"));
        REQUIRE(slurp(dir / "sim" / "avalanches.csv") ==
                slurp(dir / "sim2" / "avalanches.csv"));
    }
}

TEST_CASE("cli: sweep writes the surface csv") {
    fs::path dir = fresh_dir("cli_sweep");
    const std::string args =
        "sweep --cth -0.64,-0.60 --L 100 --steps 6000 --warmup 1000 "
        "--parallel 2 --out " + (dir / "sw").string();
    REQUIRE(run_cli(args, dir / "out.txt", dir / "err.txt") == 0);
    std::string csv = slurp(dir / "sw" / "sweep.csv");
    REQUIRE(csv.find("c_th,L,omega_level,m,m_normalized,n_avalanches") !=
            std::string::npos);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2
}

TEST_CASE("cli: constant-omega sweep writes the isoline trace") {
    fs::path dir = fresh_dir("cli_iso");
    const std::string args =
        "sweep --cth -0.75,-0.73 --L 400 --mode constant_omega "
        "--steps 30000 --warmup 3000 --replicates 2 --out " +
        (dir / "sw").string();
    REQUIRE(run_cli(args, dir / "out.txt", dir / "err.txt") == 0);
    std::string iso = slurp(dir / "sw" / "isoline.csv");
    REQUIRE(iso.find("c_th,L,omega_level,m,n_avalanches") !=
            std::string::npos);
    REQUIRE(std::count(iso.begin(), iso.end(), '\n') == 3);  // header + 2
    REQUIRE(fs::exists(dir / "sw" / "sweep.csv"));
    REQUIRE(fs::exists(dir / "sw" / "manifest.json"));
}

TEST_CASE("cli: geometry from a config runs the model first") {
    fs::path dir = fresh_dir("cli_geo_cfg");
    {
        std::ofstream out(dir / "run.cfg");
        out << "n = 300\nsteps = 4000\nwarmup = 500\nseed = 21\n";
    }
    const int rc = run_cli("geometry " + (dir / "run.cfg").string() +
                               " --out " + (dir / "geo").string(),
                           dir / "out.txt", dir / "err.txt");
    REQUIRE(rc == 0);
    auto j = nlohmann::json::parse(slurp(dir / "geo" / "geometry.json"));
    REQUIRE(j["gamma_geo"].is_number());
}

TEST_CASE("cli: geometry on a dumped network") {
    fs::path dir = fresh_dir("cli_geo");
    EconomyNetwork net = init_network(300, 1, 21);
    write_edges_csv(dir / "net.csv", net);
    const int rc = run_cli("geometry " + (dir / "net.csv").string() +
                               " --out " + (dir / "geo").string(),
                           dir / "out.txt", dir / "err.txt");
    REQUIRE(rc == 0);
    auto j = nlohmann::json::parse(slurp(dir / "geo" / "geometry.json"));
    REQUIRE(j.contains("d_B"));
    REQUIRE(j.contains("d_k"));
    REQUIRE(j.contains("gamma_geo"));
    REQUIRE(j["ell"].get<int>() == 2);
    REQUIRE(j["boxes"].size() == 7);
}

#endif  // ECONOSIM_CLI_PATH
