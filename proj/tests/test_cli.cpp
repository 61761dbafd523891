#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sdelab/cli.hpp"

using namespace sdelab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

fs::path work_dir() {
    fs::path d = fs::temp_directory_path() / "sdelab_cli_tests";
    fs::create_directories(d);
    return d;
}

RunConfig tiny_errors_config(const std::string& prefix) {
    RunConfig c;
    c.command = "errors";
    c.params = {-2.0, 10.0, 1.0, 1.0};
    c.schemes = {{SchemeKind::Milstein, 0.0, "milstein"}};
    c.T = 0.5;
    c.h = 0.05;
    c.out_times = {0.25, 0.5};
    c.paths = 300;
    c.master_seed = 11;
    c.couple_factor = 8;
    c.out_prefix = (work_dir() / prefix).string();
    return c;
}

}  // namespace

TEST_CASE("parse_config_json reads every field") {
    RunConfig c = parse_config_json(R"({
        "command": "errors",
        "model": "linear",
        "params": {"a": -1.5, "b": 2.0, "c": 0.5, "d": 0.25},
        "x0": 3.0,
        "schemes": [{"kind": "exact", "k": -0.5, "label": "x"}, {"kind": "euler"}],
        "T": 2.0, "h": 0.1,
        "out_times": [1.0, 2.0],
        "paths": 500, "seed": 9, "couple_factor": 16, "workers": 2,
        "bin_count": 50, "threshold": 0.4, "tolerance": 1e-6,
        "h_grid": [0.1, 0.2], "step_counts": [5, 10], "t": 1.5,
        "out": "run7"
    })");
    CHECK(c.command == "errors");
    CHECK(c.params.a == doctest::Approx(-1.5));
    CHECK(c.params.d == doctest::Approx(0.25));
    CHECK(c.x0 == doctest::Approx(3.0));
    REQUIRE(c.schemes.size() == 2);
    CHECK(c.schemes[0].kind == SchemeKind::ExactEuler);
    CHECK(c.schemes[0].k == doctest::Approx(-0.5));
    CHECK(c.schemes[0].label == "x");
    CHECK(c.schemes[1].label == "euler");  // label defaults to the kind
    CHECK(c.T == doctest::Approx(2.0));
    CHECK(c.out_times == std::vector<double>{1.0, 2.0});
    CHECK(c.paths == 500);
    CHECK(c.master_seed == 9);
    CHECK(c.couple_factor == 16);
    CHECK(c.workers == 2);
    CHECK(c.bin_count == 50);
    CHECK(c.threshold == doctest::Approx(0.4));
    CHECK(c.tolerance == doctest::Approx(1e-6));
    CHECK(c.h_grid == std::vector<double>{0.1, 0.2});
    CHECK(c.step_counts == std::vector<std::size_t>{5, 10});
    CHECK(c.t_eval == doctest::Approx(1.5));
    CHECK(c.out_prefix == "run7");

    CHECK_THROWS_AS(parse_config_json(R"({"schemes": [{"kind": "heun"}]})"),
                    std::invalid_argument);
    CHECK_THROWS(parse_config_json("not json"));
}

TEST_CASE("presets overlay before explicit keys") {
    RunConfig c = parse_config_json(R"({"preset": "fig1", "paths": 123})");
    CHECK(c.command == "errors");
    CHECK(c.params.b == doctest::Approx(10.0));
    CHECK(c.h == doctest::Approx(0.025));
    CHECK(c.schemes.size() == 4);
    CHECK(c.paths == 123);

    RunConfig c3;
    apply_preset(c3, "fig3");
    CHECK(c3.command == "convergence");
    CHECK(c3.step_counts == std::vector<std::size_t>{10, 20, 40, 80});
    RunConfig c4;
    apply_preset(c4, "fig4");
    CHECK(c4.command == "tv");
}

TEST_CASE("run_config rejects invalid configurations with exit code 1") {
    RunConfig c = tiny_errors_config("bad");
    SUBCASE("zero paths") { c.paths = 0; }
    SUBCASE("unknown command") { c.command = "frobnicate"; }
    SUBCASE("unknown model") { c.model = "cubic"; }
    SUBCASE("negative horizon") { c.T = -1.0; }
    SUBCASE("empty output prefix") { c.out_prefix = ""; }
    SUBCASE("tanh model with a linear-only command") {
        c.model = "tanh";
        c.command = "stability";
    }
    CHECK(run_config(c) == 1);
}

TEST_CASE("errors command writes csv, json and manifest") {
    RunConfig c = tiny_errors_config("err1");
    REQUIRE(run_config(c) == 0);

    std::string csv = slurp(c.out_prefix + ".csv");
    CHECK(csv.rfind("time,weak_err,weak_stderr,strong_l1,strong_l1_stderr,"
                    "strong_l2,strong_l2_stderr,failures\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + two rows

    json out = json::parse(slurp(c.out_prefix + ".json"));
    CHECK(out["command"] == "errors");
    REQUIRE(out["runs"].size() == 1);
    CHECK(out["runs"][0]["scheme"] == "milstein");
    CHECK(out["runs"][0]["times"].size() == 2);
    CHECK(out["runs"][0]["failures"].get<std::size_t>() == 0);

    json manifest = json::parse(slurp(c.out_prefix + ".manifest.json"));
    CHECK(manifest["tool"] == "sdelab");
    CHECK(manifest["config"]["paths"].get<std::size_t>() == 300);

    SUBCASE("manifest reproduces the run byte for byte") {
        RunConfig again = parse_config_json(slurp(c.out_prefix + ".manifest.json"));
        again.out_prefix = (work_dir() / "err1_replay").string();
        REQUIRE(run_config(again) == 0);
        CHECK(slurp(again.out_prefix + ".csv") == csv);
        CHECK(slurp(again.out_prefix + ".json") != "");
    }
    SUBCASE("output is independent of the worker count") {
        RunConfig par = c;
        par.workers = 4;
        par.out_prefix = (work_dir() / "err1_par").string();
        REQUIRE(run_config(par) == 0);
        CHECK(slurp(par.out_prefix + ".csv") == csv);
    }
}

TEST_CASE("multi-scheme errors run emits per-scheme files") {
    RunConfig c = tiny_errors_config("err2");
    c.schemes = {{SchemeKind::Euler, 0.0, "euler"},
                 {SchemeKind::ExactEuler, -1.0, "exact_kopt"}};
    REQUIRE(run_config(c) == 0);
    CHECK(fs::exists(c.out_prefix + "-euler.csv"));
    CHECK(fs::exists(c.out_prefix + "-exact_kopt.csv"));
    std::string combined = slurp(c.out_prefix + ".csv");
    CHECK(combined.rfind("scheme,time,", 0) == 0);
    CHECK(combined.find("exact_kopt,0.5,") != std::string::npos);
}

TEST_CASE("simulate command reports ensemble statistics") {
    RunConfig c = tiny_errors_config("sim1");
    c.command = "simulate";
    c.params = {-2.0, 3.0, 0.0, 0.0};
    c.schemes = {{SchemeKind::ExactEuler, 0.0, "exact"}};
    c.h = 0.005;
    c.out_times = {0.5};
    c.paths = 40;
    REQUIRE(run_config(c) == 0);
    json out = json::parse(slurp(c.out_prefix + ".json"));
    double mean = out["runs"][0]["mean"][0].get<double>();
    double sd = out["runs"][0]["sd"][0].get<double>();
    // deterministic flow toward b/(-a) = 1.5
    CHECK(mean == doctest::Approx(mean_curve(c.params, c.x0, 0.5)).epsilon(1e-2));
    CHECK(sd == doctest::Approx(0.0));
}

TEST_CASE("stability command labels step sizes") {
    RunConfig c = tiny_errors_config("stab1");
    c.command = "stability";
    c.params = {-1.0, 2.0, 0.0, 0.0};
    c.schemes = {{SchemeKind::Euler, 0.0, "euler"}};
    c.T = 2.0;
    c.h_grid = {0.05, 0.1};
    c.paths = 30;
    REQUIRE(run_config(c) == 0);
    std::string csv = slurp(c.out_prefix + ".csv");
    CHECK(csv.rfind("h,rate,stable\n", 0) == 0);
    json out = json::parse(slurp(c.out_prefix + ".json"));
    REQUIRE(out["runs"][0]["stable"].size() == 2);
    CHECK(out["runs"][0]["stable"][0].get<bool>());
    CHECK(out["runs"][0]["stable"][1].get<bool>());
}

TEST_CASE("tv command compares terminal laws against the coupled reference") {
    RunConfig c = tiny_errors_config("tv1");
    c.command = "tv";
    c.schemes = {{SchemeKind::ExactEuler, -1.0, "exact_kopt"},
                 {SchemeKind::Euler, 0.0, "euler"}};
    c.t_eval = 0.25;
    c.step_counts = {5, 10};
    c.bin_count = 40;
    c.paths = 2000;
    REQUIRE(run_config(c) == 0);
    json out = json::parse(slurp(c.out_prefix + ".json"));
    CHECK(out["t"].get<double>() == doctest::Approx(0.25));
    REQUIRE(out["runs"].size() == 4);
    for (const json& r : out["runs"]) {
        double tv = r["tv"].get<double>();
        CHECK(tv >= 0.0);
        CHECK(tv <= 1.0);
    }
    std::string csv = slurp(c.out_prefix + ".csv");
    CHECK(csv.find("exact_kopt_N5") != std::string::npos);
    CHECK(csv.find("euler_N10") != std::string::npos);
}

TEST_CASE("convergence command fits the strong order") {
    RunConfig c = tiny_errors_config("conv1");
    c.command = "convergence";
    c.schemes = {{SchemeKind::Milstein, 0.0, "milstein"}};
    c.t_eval = 0.5;
    c.step_counts = {8, 16, 32, 64};
    c.paths = 2000;
    c.couple_factor = 64;
    REQUIRE(run_config(c) == 0);
    json out = json::parse(slurp(c.out_prefix + ".json"));
    REQUIRE(out["runs"].size() == 1);
    double slope = out["runs"][0]["fit"]["slope"].get<double>();
    CHECK(slope > 0.6);
    CHECK(slope < 1.4);
}

TEST_CASE("verify-symmetry passes for the shipped models") {
    RunConfig c = tiny_errors_config("sym1");
    c.command = "verify-symmetry";
    SUBCASE("linear model") {}
    SUBCASE("tanh model") { c.model = "tanh"; }
    REQUIRE(run_config(c) == 0);
    json out = json::parse(slurp(c.out_prefix + ".json"));
    CHECK(out["max_residual"].get<double>() < out["tolerance"].get<double>());
    std::string csv = slurp(c.out_prefix + ".csv");
    CHECK(csv.rfind("field,point,r1,r2\n", 0) == 0);
}

TEST_CASE("bounds command reports growth constants and moment envelopes") {
    RunConfig c = tiny_errors_config("bnd1");
    c.command = "bounds";
    c.params = {-2.0, 0.0, 10.0, 0.0};
    c.T = 0.1;
    c.h = 0.01;
    REQUIRE(run_config(c) == 0);
    json out = json::parse(slurp(c.out_prefix + ".json"));
    CHECK(out["G1"].get<double>() ==
          doctest::Approx((std::exp(4.8) - 1.0) / 48.0).epsilon(1e-12));
    CHECK(out["n"].get<int>() == 14);
    CHECK(out["alpha"].get<double>() == doctest::Approx(28.0 / 27.0).epsilon(1e-12));
    CHECK(out["M"].size() == 10);
    std::string csv = slurp(c.out_prefix + ".csv");
    CHECK(csv.rfind("name,value\n", 0) == 0);
    CHECK(csv.find("\nG1,") != std::string::npos);
    CHECK(csv.find("\nM10,") != std::string::npos);
}
