#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sdelab {

using Vec = std::vector<double>;
// Row-major matrix of known shape; shape is carried by context.
using Mat = std::vector<double>;
// Rank-3 tensor, index order [i][j][k] flattened row-major.
using Tensor3 = std::vector<double>;

using VecFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;
using TensorFn = std::function<Tensor3(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

// Axis-aligned box, the validity chart of a model.
struct Box {
    Vec lo, hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const Vec& x) const;
};

// Thrown when a conjugated step or transformed coefficient leaves its chart.
struct ChartExitError : std::runtime_error {
    explicit ChartExitError(const std::string& what) : std::runtime_error(what) {}
};

// The object (mu, sigma): drift R^n -> R^n, diffusion R^n -> R^{n x m}.
// Jacobians are optional; operations fall back to central differences.
struct SdeSystem {
    std::size_t dim = 0;
    std::size_t noise_dim = 0;
    VecFn drift;
    MatFn diffusion;            // n x m row-major
    MatFn drift_jacobian;       // n x n, optional (empty target)
    TensorFn diffusion_jacobian;  // [i][alpha][k] = d sigma^i_alpha / d x^k, optional
    Box domain;

    bool has_drift_jacobian() const { return static_cast<bool>(drift_jacobian); }
    bool has_diffusion_jacobian() const { return static_cast<bool>(diffusion_jacobian); }
};

struct VectorField {
    std::size_t dim = 0;
    VecFn value;
    MatFn jacobian;   // optional
    TensorFn hessian; // [i][j][k] = d2 Y^i / dx^j dx^k, optional
};

struct Diffeomorphism {
    std::size_t dim = 0;
    VecFn forward;
    VecFn inverse;
    MatFn jacobian;   // n x n of forward, optional
    TensorFn hessian; // of forward, optional
    Box source_domain;
    Box target_domain;
};

// Scalar field with enough derivatives for the generator.
struct ScalarField {
    ScalarFn value;
    VecFn gradient;  // optional
    MatFn hessian;   // optional
};

// --- finite differences (central, step eps^{1/3} * max(1, |x_i|)) ---
double fd_step(double xi);
Vec fd_gradient(const ScalarFn& f, const Vec& x);
Mat fd_jacobian(const VecFn& f, std::size_t out_dim, const Vec& x);
Mat fd_hessian(const ScalarFn& f, const Vec& x);

// Effective derivative accessors: analytic when present, else central FD.
Mat jacobian_of(const VectorField& Y, const Vec& x);
Tensor3 hessian_of(const VectorField& Y, const Vec& x);
Mat drift_jacobian_of(const SdeSystem& sde, const Vec& x);
Tensor3 diffusion_jacobian_of(const SdeSystem& sde, const Vec& x);
Mat jacobian_of(const Diffeomorphism& phi, const Vec& x);
Tensor3 hessian_of(const Diffeomorphism& phi, const Vec& x);

// --- operations ---

// Infinitesimal generator L = 1/2 sum sigma^i_a sigma^j_a d_ij + sum mu^i d_i.
double generator_apply(const SdeSystem& sde, const ScalarField& f, const Vec& x);

// SDE satisfied by Phi(X): drift' = L(Phi) o Phi^{-1}, sigma' = (DPhi sigma) o Phi^{-1}.
SdeSystem ito_transform(const SdeSystem& sde, const Diffeomorphism& phi);

// [Y, Z] = DZ * Y - DY * Z.
Vec lie_bracket(const VectorField& Y, const VectorField& Z, const Vec& x);

// Phi_*(Y) = (DPhi * Y) o Phi^{-1}.
VectorField pushforward(const Diffeomorphism& phi, const VectorField& Y);

struct DeterminingResidual {
    Vec r1;  // Y(mu) - L(Y), length n
    Mat r2;  // columns [Y, sigma_alpha], n x m row-major
};

DeterminingResidual determining_residual(const SdeSystem& sde, const VectorField& Y,
                                         const Vec& x);

// --- structural checks (sample-based certificates) ---
bool is_affine(const VectorField& Y, const std::vector<Vec>& samples, double tol);
bool is_triangular(const SdeSystem& sde, std::size_t r, const std::vector<Vec>& samples,
                   double tol);
bool is_canonical_form(const std::vector<VectorField>& fields,
                       const std::vector<Vec>& samples,
                       const std::vector<std::size_t>& splits, double tol);

// Default sampling of a box: 7 points per axis, capped at 49 total for n >= 3
// by fixed-seed random sampling.
std::vector<Vec> sample_box(const Box& box, std::size_t per_axis = 7);

// Checks supplied analytic jacobians against central differences at sampled
// domain points; throws std::runtime_error on disagreement beyond rel_tol.
void validate_derivatives(const SdeSystem& sde, double rel_tol = 1e-5);

}  // namespace sdelab
