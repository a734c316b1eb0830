#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <cqsim/cqsim.hpp>

using namespace cqsim;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_count(const std::string& text) {
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("a minimal config fills in recorded defaults", "[experiment]") {
    const auto cfg = parse_config(R"({"kind": "validate"})");
    REQUIRE(cfg.kind == ExperimentKind::validate);
    REQUIRE(cfg.hbar == 1.0);
    REQUIRE(cfg.grid.x_min == -8.0);
    REQUIRE(cfg.grid.x_max == 8.0);
    REQUIRE(cfg.grid.n == 321);
    REQUIRE(cfg.grid.padding == 0.25);
    REQUIRE(cfg.sde.dt == 1e-3);
    REQUIRE(cfg.omega.has_value());
    REQUIRE(cfg.s_coeffs == std::vector<double>{0.0, 0.0, 0.5});

    // Defaults are visible, not silent.
    auto has_default = [&](const std::string& want) {
        for (const auto& d : cfg.defaults_applied)
            if (d == want)
                return true;
        return false;
    };
    REQUIRE(has_default("sde.dt = 0.001"));
    REQUIRE(has_default("grid.n = 321"));
    REQUIRE_FALSE(cfg.defaults_applied.empty());

    // The bath block mirrors the top-level scale and seed.
    REQUIRE(cfg.bath.hbar == cfg.hbar);
    REQUIRE(cfg.bath.seed == cfg.master_seed);
    REQUIRE(cfg.sde.master_seed == cfg.master_seed);
}

TEST_CASE("unknown keys are rejected with their full path", "[experiment]") {
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "validate", "sde": {"dtt": 1}})"),
                        ContainsSubstring("sde.dtt"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kinds": "validate"})"),
                        ContainsSubstring("unknown key 'kinds'"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "validate", "grid": {"xmin": 0}})"),
                        ContainsSubstring("grid.xmin"));
}

TEST_CASE("malformed configs fail with clear messages", "[experiment]") {
    REQUIRE_THROWS_WITH(parse_config("{"), ContainsSubstring("parse error"));
    REQUIRE_THROWS_WITH(parse_config(R"({"hbar": 1})"), ContainsSubstring("kind"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "frobnicate"})"),
                        ContainsSubstring("unknown kind"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "validate", "hbar": -2})"),
                        ContainsSubstring("hbar"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "validate", "sde": {"dt": "fast"}})"),
                        ContainsSubstring("sde.dt"));
    REQUIRE_THROWS_WITH(
        parse_config(R"({"kind": "validate", "superpotential": {"omega": 1, "coeffs": [0]}})"),
        ContainsSubstring("exactly one"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "validate", "superpotential": {}})"),
                        ContainsSubstring("exactly one"));
    REQUIRE_THROWS_WITH(parse_config(R"({"kind": "validate", "initial_field": [1, 2]})"),
                        ContainsSubstring("initial_field"));
}

TEST_CASE("superpotential block accepts either form", "[experiment]") {
    const auto osc = parse_config(R"({"kind": "validate", "superpotential": {"omega": 2.5}})");
    REQUIRE(osc.omega.has_value());
    REQUIRE(*osc.omega == 2.5);
    REQUIRE(osc.s_coeffs == std::vector<double>{0.0, 0.0, 1.25});

    const auto quartic = parse_config(
        R"({"kind": "validate", "superpotential": {"coeffs": [0, 0, 0.5, 0, 0.05]}})");
    REQUIRE_FALSE(quartic.omega.has_value());
    REQUIRE(quartic.s_coeffs == std::vector<double>{0.0, 0.0, 0.5, 0.0, 0.05});
}

TEST_CASE("initial field coefficients parse as re/im pairs", "[experiment]") {
    const auto cfg =
        parse_config(R"({"kind": "spectrum", "initial_field": [[1, 0], [0.5, -2]]})");
    REQUIRE(cfg.initial_coeffs.size() == 2);
    REQUIRE(cfg.initial_coeffs[0] == complex(1.0, 0.0));
    REQUIRE(cfg.initial_coeffs[1] == complex(0.5, -2.0));
}

TEST_CASE("serialization round-trips to a fixed point", "[experiment]") {
    const auto cfg = parse_config(R"({
        "kind": "mc_vs_pde",
        "hbar": 0.5,
        "master_seed": 12345,
        "superpotential": {"coeffs": [0, 0, 0.5, 0, 0.05]},
        "initial_field": [[0, 0], [1, 0]],
        "starts": [-1, 0, 1.5]
    })");
    const std::string s1 = serialize_config(cfg);
    const auto cfg2 = parse_config(s1);
    REQUIRE(cfg2.defaults_applied.empty());  // everything explicit after one pass
    const std::string s2 = serialize_config(cfg2);
    REQUIRE(s1 == s2);
    REQUIRE(cfg2.hbar == 0.5);
    REQUIRE(cfg2.master_seed == 12345);
    REQUIRE(cfg2.starts == std::vector<double>{-1.0, 0.0, 1.5});
}

TEST_CASE("grid padding extends the span without moving the spacing", "[experiment]") {
    GridSpec spec;  // [-8, 8], 321 points, 25% padding
    const Grid1D g = padded_grid(spec);
    REQUIRE(g.n == 401);
    REQUIRE(g.x_min == -10.0);
    REQUIRE(g.x_max == 10.0);
    REQUIRE(std::abs(g.dx() - 0.05) < 1e-15);

    spec.padding = 0.0;
    const Grid1D g0 = padded_grid(spec);
    REQUIRE(g0.n == 321);
    REQUIRE(g0.x_min == -8.0);
}

TEST_CASE("path ensembles track the field evolution end to end", "[experiment]") {
    auto cfg = parse_config(R"({
        "kind": "mc_vs_pde",
        "master_seed": 4242,
        "out_dir": "exp_out/mc_mini",
        "superpotential": {"omega": 1},
        "initial_field": [[0, 0], [1, 0]],
        "grid": {"x_min": -6, "x_max": 6, "n": 121},
        "sde": {"dt": 0.005, "t_final": 0.2, "n_paths": 4000},
        "pde": {"dt": 0.001},
        "mc": {"write_endpoints": true},
        "starts": [0.5, -1.0]
    })");
    const auto res = run_experiment(cfg);
    REQUIRE(res.all_pass);
    // Two checks per start plus the escape-fraction row.
    REQUIRE(res.summary.rows.size() == 5);

    const std::string results = slurp("exp_out/mc_mini/results.csv");
    REQUIRE(line_count(results) == 3);  // header + one row per start
    REQUIRE(results.rfind("start,mc_u1,mc_u2,", 0) == 0);
    REQUIRE(std::filesystem::exists("exp_out/mc_mini/endpoints_start_0.5.csv"));
    REQUIRE(std::filesystem::exists("exp_out/mc_mini/endpoints_start_-1.csv"));
    REQUIRE(std::filesystem::exists("exp_out/mc_mini/summary.csv"));
    REQUIRE(std::filesystem::exists("exp_out/mc_mini/run.log"));
}

TEST_CASE("the two wave evolutions agree through the pipeline", "[experiment]") {
    auto cfg = parse_config(R"({
        "kind": "schrodinger_check",
        "out_dir": "exp_out/sch_mini",
        "superpotential": {"coeffs": [0, 0, 0.5, 0, 0.05]},
        "initial_field": [[1, 0], [1, 0]],
        "grid": {"x_min": -6, "x_max": 6, "n": 241},
        "pde": {"dt": 0.001, "t_final": 0.3}
    })");
    const auto res = run_experiment(cfg);
    REQUIRE(res.all_pass);
    REQUIRE(res.summary.rows.size() == 1);
    REQUIRE(res.summary.rows[0].check == "interior_l2_distance");
    REQUIRE(res.summary.rows[0].observed < 1e-4);

    const std::string pa = slurp("exp_out/sch_mini/psi_pair.csv");
    const std::string pb = slurp("exp_out/sch_mini/psi_schrodinger.csv");
    REQUIRE(line_count(pa) == line_count(pb));
    REQUIRE(pa.rfind("x,re_psi,im_psi", 0) == 0);
}

TEST_CASE("the spectrum pipeline finds the oscillator lines", "[experiment]") {
    auto cfg = parse_config(R"({
        "kind": "spectrum",
        "out_dir": "exp_out/spec_mini",
        "superpotential": {"omega": 1},
        "initial_field": [[1, 0], [1, 0], [1, 0]],
        "spectrum": {"t_record": 40, "dt_sample": 0.1}
    })");
    const auto res = run_experiment(cfg);
    REQUIRE(res.all_pass);

    const std::string spec = slurp("exp_out/spec_mini/spectrum.csv");
    REQUIRE(line_count(spec) == 4);  // header + three lines
    // The unshifted column is present because the oscillator form fixes omega.
    std::istringstream ss(spec);
    std::string line;
    std::getline(ss, line);
    REQUIRE(line == "energy_shifted,energy_unshifted,weight");
    std::getline(ss, line);
    REQUIRE(line.find(",,") == std::string::npos);

    const std::string corr = slurp("exp_out/spec_mini/correlation.csv");
    REQUIRE(line_count(corr) == 402);  // header + 401 samples
}

TEST_CASE("the bath pipeline writes lags and checks", "[experiment]") {
    auto cfg = parse_config(R"({
        "kind": "bath_correlation",
        "master_seed": 8,
        "out_dir": "exp_out/bath_mini",
        "bath": {"n_modes": 64, "d_omega": 0.25, "n_realizations": 400, "n_refs": 16},
        "correlation": {"tau_max": 0.5, "n_lags": 26,
                        "c0_tol": 0.1, "integral_tol": 0.3, "tail_bound": 0.6}
    })");
    const auto res = run_experiment(cfg);
    REQUIRE(res.all_pass);
    REQUIRE(res.summary.rows.size() == 3);  // no single-mode row for K > 1

    const std::string corr = slurp("exp_out/bath_mini/correlation.csv");
    REQUIRE(line_count(corr) == 27);
    std::istringstream ss(corr);
    std::string header, first;
    std::getline(ss, header);
    REQUIRE(header == "tau,c_hat,stderr,analytic");
    std::getline(ss, first);
    REQUIRE(first.back() == ',');  // analytic column empty for a multi-mode bath
}

TEST_CASE("pipelines demand compatible step counts", "[experiment]") {
    auto cfg = parse_config(R"({
        "kind": "mc_vs_pde",
        "initial_field": [[0, 0], [1, 0]],
        "sde": {"t_final": 0.25},
        "pde": {"dt": 0.1},
        "out_dir": "exp_out/badsteps",
        "starts": [0]
    })");
    REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);

    auto cfg2 = parse_config(R"({
        "kind": "mc_vs_pde",
        "out_dir": "exp_out/nostarts",
        "initial_field": [[0, 0], [1, 0]]
    })");
    REQUIRE_THROWS_WITH(run_experiment(cfg2), ContainsSubstring("starts"));
}

TEST_CASE("the invariant battery passes and its files are reproducible", "[experiment]") {
    auto cfg = parse_config(R"({
        "kind": "validate",
        "master_seed": 20260822,
        "out_dir": "exp_out/val_a"
    })");

    const char* saved = std::getenv("CQSIM_THREADS");
    const std::string saved_val = saved ? saved : "";
    setenv("CQSIM_THREADS", "1", 1);
    const auto a = run_experiment(cfg);
    cfg.out_dir = "exp_out/val_b";
    setenv("CQSIM_THREADS", "3", 1);
    const auto b = run_experiment(cfg);
    if (saved)
        setenv("CQSIM_THREADS", saved_val.c_str(), 1);
    else
        unsetenv("CQSIM_THREADS");

    for (const auto& r : a.summary.rows) {
        INFO(r.check << " observed=" << r.observed << " bound=" << r.bound);
        CHECK(r.pass);
    }
    REQUIRE(a.all_pass);
    REQUIRE(b.all_pass);
    REQUIRE(a.summary.rows.size() == b.summary.rows.size());

    // Every data file is byte-identical across worker counts; only run.log may
    // differ (it carries the timestamp).
    for (const char* f : {"summary.csv", "endpoints_sample.csv", "correlation_sample.csv"})
        REQUIRE(slurp(std::string("exp_out/val_a/") + f) ==
                slurp(std::string("exp_out/val_b/") + f));
}
