#pragma once

#include "sdelab/models.hpp"
#include "sdelab/sde_model.hpp"

namespace sdelab {

// One-step integration map (x, dt, dW, dWW) -> x'.  dWW is the m = 1
// iterated-integral term; schemes that do not need it ignore the argument.
struct OneStepScheme {
    enum class Kind { Euler, Milstein, Conjugated, ExactLinearEuler, ExactLinearMilstein };

    Kind kind = Kind::Euler;
    double k = 0.0;  // exact-scheme parameter, meaningful for the exact kinds
    bool requires_levy = false;
    std::function<Vec(const Vec& x, double dt, const Vec& dW, double dWW)> step;
};

Vec euler_step(const SdeSystem& sde, const Vec& x, double dt, const Vec& dW);

// m = 1 only; adds sigma (d sigma) * dWW on top of the Euler update.
Vec milstein_step(const SdeSystem& sde, const Vec& x, double dt, const Vec& dW,
                  double dWW);

// Phi^{-1}(base(Phi(x), dt, dW, dWW)); base must discretize the
// Phi-transformed SDE.  Throws ChartExitError when either evaluation
// leaves its chart.
Vec conjugated_step(const OneStepScheme& base, const Diffeomorphism& phi, const Vec& x,
                    double dt, const Vec& dW, double dWW);

double exact_euler_linear_step(const LinearSdeParams& p, double k, double x, double dt,
                               double dW);
double exact_milstein_linear_step(const LinearSdeParams& p, double k, double x,
                                  double dt, double dW);

OneStepScheme make_euler(const SdeSystem& sde);
OneStepScheme make_milstein(const SdeSystem& sde);
OneStepScheme make_conjugated(const OneStepScheme& base, const Diffeomorphism& phi);
OneStepScheme make_exact_linear_euler(const LinearSdeParams& p, double k);
OneStepScheme make_exact_linear_milstein(const LinearSdeParams& p, double k);

// Finite-invariance residual Phi^{-1}(F(Phi(x),...)) - F(x,...).
Vec invariance_residual(const OneStepScheme& F, const Diffeomorphism& phi, const Vec& x,
                        double dt, const Vec& dW, double dWW);

// Infinitesimal residual Y(F(x,...)) - (DF Y)(x,...), DF by central differences.
Vec infinitesimal_invariance_residual(const OneStepScheme& F, const VectorField& Y,
                                      const Vec& x, double dt, const Vec& dW,
                                      double dWW);

// Time-eps flow of a vector field, integrated with a classical 4-stage
// one-step method at parameter step 1e-3 (test utility for non-affine
// symmetries).
Diffeomorphism flow_of(const VectorField& Y, double eps, Box chart = {});

}  // namespace sdelab
