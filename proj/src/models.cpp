#include "sdelab/models.hpp"

#include <cmath>

namespace sdelab {

namespace {

Box wide_box_1d(double lo = -1e6, double hi = 1e6) { return Box{{lo}, {hi}}; }

}  // namespace

SdeSystem make_linear_system(const LinearSdeParams& p, Box domain) {
    SdeSystem sde;
    sde.dim = 1;
    sde.noise_dim = 1;
    sde.domain = domain.dim() == 1 ? domain : wide_box_1d();
    sde.drift = [p](const Vec& x) { return Vec{p.a * x[0] + p.b}; };
    sde.diffusion = [p](const Vec& x) { return Mat{p.c * x[0] + p.d}; };
    sde.drift_jacobian = [p](const Vec&) { return Mat{p.a}; };
    sde.diffusion_jacobian = [p](const Vec&) { return Tensor3{p.c}; };
    return sde;
}

SdeSystem make_augmented_linear_system(const LinearSdeParams& p, Box domain) {
    SdeSystem sde;
    sde.dim = 2;
    sde.noise_dim = 1;
    sde.domain = domain.dim() == 2 ? domain : Box{{-1e6, 1e-9}, {1e6, 1e6}};
    sde.drift = [p](const Vec& x) { return Vec{p.a * x[0] + p.b, p.a * x[1]}; };
    sde.diffusion = [p](const Vec& x) { return Mat{p.c * x[0] + p.d, p.c * x[1]}; };
    sde.drift_jacobian = [p](const Vec&) { return Mat{p.a, 0.0, 0.0, p.a}; };
    sde.diffusion_jacobian = [p](const Vec&) {
        // [i][alpha][k], m = 1
        return Tensor3{p.c, 0.0, 0.0, p.c};
    };
    return sde;
}

VectorField make_augmented_symmetry(int which) {
    VectorField Y;
    Y.dim = 2;
    if (which == 1) {
        Y.value = [](const Vec& x) { return Vec{x[1], 0.0}; };
        Y.jacobian = [](const Vec&) { return Mat{0.0, 1.0, 0.0, 0.0}; };
    } else {
        Y.value = [](const Vec& x) { return Vec{0.0, x[1]}; };
        Y.jacobian = [](const Vec&) { return Mat{0.0, 0.0, 0.0, 1.0}; };
    }
    Y.hessian = [](const Vec&) { return Tensor3(8, 0.0); };
    return Y;
}

Diffeomorphism make_adapted_chart(double k) {
    Diffeomorphism phi;
    phi.dim = 2;
    phi.source_domain = Box{{-1e12, 1e-12}, {1e12, 1e12}};
    phi.target_domain = Box{{-1e15, -650.0}, {1e15, 650.0}};
    phi.forward = [k](const Vec& p) { return Vec{(p[0] - k) / p[1], std::log(p[1])}; };
    phi.inverse = [k](const Vec& q) {
        double z = std::exp(q[1]);
        return Vec{q[0] * z + k, z};
    };
    phi.jacobian = [k](const Vec& p) {
        double z = p[1];
        return Mat{1.0 / z, -(p[0] - k) / (z * z), 0.0, 1.0 / z};
    };
    phi.hessian = [k](const Vec& p) {
        double z = p[1];
        Tensor3 h(8, 0.0);
        // component 0: d2/dxdz = -1/z^2, d2/dz2 = 2(x-k)/z^3
        h[0 * 4 + 0 * 2 + 1] = -1.0 / (z * z);
        h[0 * 4 + 1 * 2 + 0] = -1.0 / (z * z);
        h[0 * 4 + 1 * 2 + 1] = 2.0 * (p[0] - k) / (z * z * z);
        // component 1: d2/dz2 = -1/z^2
        h[1 * 4 + 1 * 2 + 1] = -1.0 / (z * z);
        return h;
    };
    return phi;
}

SdeSystem make_transformed_linear_system(const LinearSdeParams& p, double k, Box domain) {
    SdeSystem sde;
    sde.dim = 2;
    sde.noise_dim = 1;
    sde.domain = domain.dim() == 2 ? domain : Box{{-1e15, -650.0}, {1e15, 650.0}};
    double q = p.b - p.c * p.d + p.a * k - p.c * p.c * k;
    double s = p.d + p.c * k;
    double az = p.a - 0.5 * p.c * p.c;
    double c = p.c;
    sde.drift = [q, az](const Vec& x) { return Vec{q * std::exp(-x[1]), az}; };
    sde.diffusion = [s, c](const Vec& x) { return Mat{s * std::exp(-x[1]), c}; };
    sde.drift_jacobian = [q](const Vec& x) {
        return Mat{0.0, -q * std::exp(-x[1]), 0.0, 0.0};
    };
    sde.diffusion_jacobian = [s](const Vec& x) {
        return Tensor3{0.0, -s * std::exp(-x[1]), 0.0, 0.0};
    };
    return sde;
}

SdeSystem make_tanh_system(double a, double b, Box domain) {
    SdeSystem sde;
    sde.dim = 1;
    sde.noise_dim = 1;
    sde.domain = domain.dim() == 1 ? domain : wide_box_1d(1e-8, 350.0);
    sde.drift = [a, b](const Vec& x) {
        double t = std::tanh(x[0]);
        return Vec{a * t - 0.5 * b * b * t * t * t};
    };
    sde.diffusion = [b](const Vec& x) { return Mat{b * std::tanh(x[0])}; };
    sde.drift_jacobian = [a, b](const Vec& x) {
        double t = std::tanh(x[0]);
        double s2 = 1.0 - t * t;  // sech^2
        return Mat{a * s2 - 1.5 * b * b * t * t * s2};
    };
    sde.diffusion_jacobian = [b](const Vec& x) {
        double t = std::tanh(x[0]);
        return Tensor3{b * (1.0 - t * t)};
    };
    return sde;
}

VectorField make_tanh_symmetry() {
    VectorField Y;
    Y.dim = 1;
    Y.value = [](const Vec& x) { return Vec{std::tanh(x[0])}; };
    Y.jacobian = [](const Vec& x) {
        double t = std::tanh(x[0]);
        return Mat{1.0 - t * t};
    };
    Y.hessian = [](const Vec& x) {
        double t = std::tanh(x[0]);
        return Tensor3{-2.0 * t * (1.0 - t * t)};
    };
    return Y;
}

Diffeomorphism make_sinh_chart() {
    Diffeomorphism phi;
    phi.dim = 1;
    phi.source_domain = wide_box_1d(-350.0, 350.0);
    phi.target_domain = wide_box_1d(-1e300, 1e300);
    phi.forward = [](const Vec& x) { return Vec{std::sinh(x[0])}; };
    phi.inverse = [](const Vec& y) { return Vec{std::asinh(y[0])}; };
    phi.jacobian = [](const Vec& x) { return Mat{std::cosh(x[0])}; };
    phi.hessian = [](const Vec& x) { return Tensor3{std::sinh(x[0])}; };
    return phi;
}

Diffeomorphism make_log_sinh_chart() {
    Diffeomorphism phi;
    phi.dim = 1;
    phi.source_domain = wide_box_1d(1e-8, 350.0);
    phi.target_domain = wide_box_1d(-700.0, 700.0);
    phi.forward = [](const Vec& x) { return Vec{std::log(std::sinh(x[0]))}; };
    phi.inverse = [](const Vec& y) { return Vec{std::asinh(std::exp(y[0]))}; };
    phi.jacobian = [](const Vec& x) { return Mat{1.0 / std::tanh(x[0])}; };
    phi.hessian = [](const Vec& x) {
        double s = std::sinh(x[0]);
        return Tensor3{-1.0 / (s * s)};
    };
    return phi;
}

SdeSystem make_gbm_system(double a, double c, Box domain) {
    SdeSystem sde;
    sde.dim = 1;
    sde.noise_dim = 1;
    sde.domain = domain.dim() == 1 ? domain : wide_box_1d(-1e300, 1e300);
    sde.drift = [a](const Vec& x) { return Vec{a * x[0]}; };
    sde.diffusion = [c](const Vec& x) { return Mat{c * x[0]}; };
    sde.drift_jacobian = [a](const Vec&) { return Mat{a}; };
    sde.diffusion_jacobian = [c](const Vec&) { return Tensor3{c}; };
    return sde;
}

}  // namespace sdelab
