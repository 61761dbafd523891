#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdelab/linear_oracle.hpp"
#include "sdelab/noise.hpp"
#include "sdelab/schemes.hpp"

namespace sdelab {

// A path functional: full trajectory (N + 1 values, starting at x0) on the
// given increment grid.  May throw ChartExitError for a failed path.
using PathFn = std::function<std::vector<double>(const NoiseGrid& grid, double x0)>;

struct EnsembleConfig {
    double x0 = 0.0;
    double T = 1.0;
    double h = 0.1;
    std::size_t paths = 1000;
    std::uint64_t master_seed = 0;
    std::size_t couple_factor = 64;  // reference grid refinement
    std::size_t workers = 1;
    std::vector<double> out_times;   // must sit on the coarse grid
};

struct EnsembleResult {
    std::vector<double> times;
    // [time][path]; failed paths carry NaN.
    std::vector<std::vector<double>> scheme_vals;
    std::vector<std::vector<double>> ref_vals;
    std::vector<std::uint8_t> failed;
    std::size_t paths = 0;
    std::size_t failures = 0;
    double h = 0.0;
};

// Couples scheme and reference through the same Brownian path: the fine grid
// is sampled per (master_seed, path_index), the scheme runs on its coarsening.
// Deterministic in (master_seed, paths), independent of worker count.
EnsembleResult run_ensemble(const PathFn& scheme, const PathFn& reference,
                            const EnsembleConfig& cfg);

struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> weak_err, weak_stderr;
    std::vector<double> strong_l1, strong_l1_stderr;
    std::vector<double> strong_l2, strong_l2_stderr;
    std::size_t paths = 0;
    std::size_t failures = 0;
    std::string scheme_label;
    LinearSdeParams params;
    double x0 = 0.0;
    double h = 0.0;
    bool has_weak = true;
};

// Weak error against the analytic mean curve; strong errors against the
// coupled reference.  Failed paths are excluded and counted.
ErrorSeries error_series(const EnsembleResult& ens, const LinearSdeParams& p, double x0,
                         std::string label, bool weak_available = true);

struct ValueWithError {
    double value = 0.0;
    double stderror = 0.0;
};

ValueWithError weak_error(const std::vector<double>& samples, const LinearSdeParams& p,
                          double x0, double t);

enum class StrongNorm { L1, L2 };

ValueWithError strong_error(const std::vector<double>& scheme,
                            const std::vector<double>& reference, StrongNorm norm);

struct TvReport {
    std::size_t bin_count = 0;
    double lo = 0.0, hi = 0.0;  // pooled range
    double tv = 0.0;
    std::vector<double> mass_a, mass_b;
};

TvReport tv_distance(const std::vector<double>& a, const std::vector<double>& b,
                     std::size_t bin_count = 200);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

// Least-squares slope of log(error) versus log(h).
FitResult convergence_fit(const std::vector<double>& h_values,
                          const std::vector<double>& errors);

enum class SchemeKind { Euler, Milstein, ExactEuler, ExactMilstein };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::Euler;
    double k = 0.0;
    std::string label;
};

PathFn make_linear_scheme_path(const SchemeSpec& spec, const LinearSdeParams& p);
PathFn make_linear_reference(const LinearSdeParams& p,
                             RefMethod method = RefMethod::ExactScheme);

struct StabilityReport {
    std::vector<double> h_grid;
    std::vector<double> rates;       // fitted growth of log strong_l1 over [T/2, T]
    std::vector<std::uint8_t> stable;
    double threshold = 0.5;
};

StabilityReport stability_scan(const SchemeSpec& scheme, const LinearSdeParams& p,
                               double x0, const std::vector<double>& h_grid, double T,
                               std::size_t paths, std::uint64_t seed, double threshold,
                               std::size_t workers = 1, std::size_t couple_factor = 64);

// Growth-rate fit used by the stability scan; exposed for the figure checks.
double growth_rate(const ErrorSeries& series, double t_lo);

struct ExperimentPreset {
    std::string name;
    LinearSdeParams params;
    double x0 = 5.0;
    double T = 1.0;
    double h = 0.025;
    std::vector<double> out_times;
    std::vector<SchemeSpec> schemes;
    std::size_t paths = 100000;
    std::size_t couple_factor = 64;
    std::size_t bin_count = 200;
    double tv_time = 0.5;
    std::vector<std::size_t> step_counts;  // fig3/fig4 N grid
};

ExperimentPreset figure_preset(const std::string& which);

// CSV with fixed headers; numbers in shortest round-trip form.
void write_error_series_csv(const ErrorSeries& s, std::ostream& out);
void write_stability_csv(const StabilityReport& r, std::ostream& out);
void write_tv_csv(const std::vector<std::pair<std::string, TvReport>>& rows,
                  std::ostream& out);

// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace sdelab
