#pragma once

#include <array>
#include <optional>
#include <vector>

#include "sdelab/models.hpp"
#include "sdelab/noise.hpp"

namespace sdelab {

// E[exp(alpha t + beta W_t)] = exp((alpha + beta^2/2) t).
double lognormal_moment(double alpha, double beta, double t);

// E[X_t] for the scalar linear SDE, solving dE/dt = aE + b.
double mean_curve(const LinearSdeParams& p, double x0, double t);

// E[X_t^2], solving dM/dt = (2a + c^2) M + (2b + 2cd) E + d^2.
double second_moment_curve(const LinearSdeParams& p, double x0, double t);

struct MomentCurve {
    LinearSdeParams params;
    double x0 = 0.0;

    double mean(double t) const { return mean_curve(params, x0, t); }
    double second_moment(double t) const { return second_moment_curve(params, x0, t); }
};

struct EquilibriumClass {
    bool has_equilibrium = false;       // a - c^2/2 < 0
    bool finite_mean = false;           // a < 0
    bool finite_second_moment = false;  // a + c^2/2 < 0
};

EquilibriumClass equilibrium_classification(const LinearSdeParams& p);

enum class RefMethod { ExactScheme, FineMilstein };

// Pathwise reference trajectory on the fine grid (length N + 1, starting at
// x0).  ExactScheme iterates the exact one-step map at k = -d/c.
std::vector<double> reference_path(const LinearSdeParams& p, double x0,
                                   const NoiseGrid& fine, RefMethod method);

enum class GBound { G1, G2, G4 };

// Integral bounds int_0^T exp(g (T - t)) dt with the per-bound exponent g;
// equals T when g = 0.
double bound_G(GBound which, double T, const LinearSdeParams& p,
               std::optional<double> alpha = std::nullopt);

struct AlphaSelection {
    double alpha = 0.0;  // 2n / (2n - 1), in (1, 2)
    int n = 0;
};

// Smallest n >= 2 with alpha = 2n/(2n-1) satisfying
// alpha a + alpha (alpha - 1) c^2 / 2 < 0 strictly.  Requires a < 0.
AlphaSelection select_alpha(const LinearSdeParams& p);

// Closed forms M1, M3, M5, M7, M8, M9 = M7 M8 of the one-step error moments.
double appendix_M(int index, double h, const LinearSdeParams& p);

// Derivative-maximum envelopes M2, M4, M6 (second derivative) and M10
// (fourth derivative) over [0, h].
double appendix_envelope(int index, double h, const LinearSdeParams& p);

struct BoundReport {
    double T = 0.0, h = 0.0;
    double alpha = 0.0;
    int n = 0;
    double G1 = 0.0, G2 = 0.0, G4 = 0.0;
    std::array<double, 10> M{};  // M[i] = M_{i+1}(h)
};

BoundReport make_bound_report(const LinearSdeParams& p, double T, double h);

// (e^{zt} - 1)/z with the z -> 0 limit t; shared by the curves and bounds.
double exp_integral(double z, double t);

}  // namespace sdelab
