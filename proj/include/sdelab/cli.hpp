#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdelab/experiments.hpp"

namespace sdelab {

// Resolved run description: one command plus everything it needs.
struct RunConfig {
    std::string command;          // simulate | errors | stability | tv |
                                  // convergence | verify-symmetry | bounds
    std::string model = "linear";  // "linear" or builtin "tanh"
    LinearSdeParams params{-2.0, 10.0, 10.0, 10.0};
    double tanh_a = 1.0;
    double tanh_b = 1.0;
    double x0 = 5.0;
    std::vector<SchemeSpec> schemes;
    double T = 1.0;
    double h = 0.025;
    std::vector<double> out_times;
    std::size_t paths = 100000;
    std::uint64_t master_seed = 0;
    std::size_t couple_factor = 64;
    std::size_t workers = 1;
    std::size_t bin_count = 200;
    double threshold = 0.5;
    double tolerance = 1e-8;           // verify-symmetry pass bar
    std::vector<double> h_grid;        // stability
    std::vector<std::size_t> step_counts;  // convergence / tv N grid
    double t_eval = 0.0;               // tv / convergence time; 0 means T
    std::string out_prefix = "out";
};

// Parses a JSON config document.  A manifest produced by run_config (with the
// config echoed under "config") is accepted as-is, so manifests round-trip.
RunConfig parse_config_json(const std::string& text);

// Overlays the fig1..fig4 experiment settings onto cfg.
void apply_preset(RunConfig& cfg, const std::string& name);

// Executes the command and writes PREFIX.csv, PREFIX.json and
// PREFIX.manifest.json (plus PREFIX-<label>.csv per scheme on multi-scheme
// runs).  Returns 0 on success, 1 on validation error, 2 on runtime failure.
int run_config(const RunConfig& cfg);

}  // namespace sdelab
