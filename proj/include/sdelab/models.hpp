#pragma once

#include "sdelab/sde_model.hpp"

namespace sdelab {

// Scalar linear SDE dX = (aX + b) dt + (cX + d) dW.
struct LinearSdeParams {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

// 1-d linear system with analytic jacobians.
SdeSystem make_linear_system(const LinearSdeParams& p, Box domain = {});

// Augmented 2-d system (X, Z): the linear SDE paired with its associated
// homogeneous equation, on R x R_+.
SdeSystem make_augmented_linear_system(const LinearSdeParams& p, Box domain = {});

// Strong symmetries of the augmented system: Y1 = (z, 0), Y2 = (0, z).
VectorField make_augmented_symmetry(int which);

// Adapted chart Phi(x, z) = ((x - k)/z, log z), the f(z) = -k/z family.
Diffeomorphism make_adapted_chart(double k);

// Transformed coefficients in the adapted chart (closed form):
//   dX' = (b - cd + ak - c^2 k) e^{-z'} dt + (d + ck) e^{-z'} dW
//   dZ' = (a - c^2/2) dt + c dW
SdeSystem make_transformed_linear_system(const LinearSdeParams& p, double k,
                                         Box domain = {});

// Tanh model: dX = (a tanh X - (b^2/2) tanh^3 X) dt + b tanh X dW, x > 0 chart.
SdeSystem make_tanh_system(double a, double b, Box domain = {});

// Its strong symmetry Y = tanh(x) d_x.
VectorField make_tanh_symmetry();

// Chart Phi_1 = sinh x (maps to geometric Brownian motion).
Diffeomorphism make_sinh_chart();

// Chart Phi_2 = log sinh x (maps to Brownian motion with drift); x > 0.
Diffeomorphism make_log_sinh_chart();

// Geometric Brownian motion dX = a X dt + c X dW as a 1-d system.
SdeSystem make_gbm_system(double a, double c, Box domain = {});

}  // namespace sdelab
