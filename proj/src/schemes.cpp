#include "sdelab/schemes.hpp"

#include <cmath>

namespace sdelab {

Vec euler_step(const SdeSystem& sde, const Vec& x, double dt, const Vec& dW) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be positive");
    if (!sde.domain.contains(x)) {
        throw ChartExitError("euler_step: point outside domain");
    }
    std::size_t n = sde.dim, m = sde.noise_dim;
    Vec mu = sde.drift(x);
    Mat sigma = sde.diffusion(x);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = x[i] + mu[i] * dt;
        for (std::size_t alpha = 0; alpha < m; ++alpha) {
            acc += sigma[i * m + alpha] * dW[alpha];
        }
        out[i] = acc;
    }
    return out;
}

Vec milstein_step(const SdeSystem& sde, const Vec& x, double dt, const Vec& dW,
                  double dWW) {
    if (sde.noise_dim != 1) {
        throw std::invalid_argument("milstein_step: only m = 1 is supported");
    }
    Vec out = euler_step(sde, x, dt, dW);
    std::size_t n = sde.dim;
    Mat sigma = sde.diffusion(x);
    Tensor3 dsigma = diffusion_jacobian_of(sde, x);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += sigma[j] * dsigma[i * n + j];  // m = 1: [i][0][j]
        }
        out[i] += acc * dWW;
    }
    return out;
}

Vec conjugated_step(const OneStepScheme& base, const Diffeomorphism& phi, const Vec& x,
                    double dt, const Vec& dW, double dWW) {
    if (!phi.source_domain.contains(x)) {
        throw ChartExitError("conjugated_step: point outside source chart");
    }
    Vec xp = phi.forward(x);
    Vec yp = base.step(xp, dt, dW, dWW);
    if (!phi.target_domain.contains(yp)) {
        throw ChartExitError("conjugated_step: base step left the target chart");
    }
    return phi.inverse(yp);
}

double exact_euler_linear_step(const LinearSdeParams& p, double k, double x, double dt,
                               double dW) {
    if (!(dt > 0.0)) throw std::invalid_argument("exact_euler_linear_step: dt > 0 required");
    double g = std::exp((p.a - 0.5 * p.c * p.c) * dt + p.c * dW);
    double bracket = x + (p.b - p.c * p.d + p.a * k - p.c * p.c * k) * dt +
                     (p.d + p.c * k) * dW - k;
    return g * bracket + k;
}

double exact_milstein_linear_step(const LinearSdeParams& p, double k, double x,
                                  double dt, double dW) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("exact_milstein_linear_step: dt > 0 required");
    }
    double g = std::exp((p.a - 0.5 * p.c * p.c) * dt + p.c * dW);
    double half_cd = 0.5 * (p.c * p.d + p.c * p.c * k);
    double bracket = x + (p.b + p.a * k - half_cd) * dt + (p.d + p.c * k) * dW -
                     half_cd * dW * dW - k;
    return g * bracket + k;
}

OneStepScheme make_euler(const SdeSystem& sde) {
    OneStepScheme s;
    s.kind = OneStepScheme::Kind::Euler;
    s.requires_levy = false;
    s.step = [sde](const Vec& x, double dt, const Vec& dW, double) {
        return euler_step(sde, x, dt, dW);
    };
    return s;
}

OneStepScheme make_milstein(const SdeSystem& sde) {
    if (sde.noise_dim != 1) {
        throw std::invalid_argument("make_milstein: only m = 1 is supported");
    }
    OneStepScheme s;
    s.kind = OneStepScheme::Kind::Milstein;
    s.requires_levy = true;
    s.step = [sde](const Vec& x, double dt, const Vec& dW, double dWW) {
        return milstein_step(sde, x, dt, dW, dWW);
    };
    return s;
}

OneStepScheme make_conjugated(const OneStepScheme& base, const Diffeomorphism& phi) {
    OneStepScheme s;
    s.kind = OneStepScheme::Kind::Conjugated;
    s.requires_levy = base.requires_levy;
    s.step = [base, phi](const Vec& x, double dt, const Vec& dW, double dWW) {
        return conjugated_step(base, phi, x, dt, dW, dWW);
    };
    return s;
}

OneStepScheme make_exact_linear_euler(const LinearSdeParams& p, double k) {
    OneStepScheme s;
    s.kind = OneStepScheme::Kind::ExactLinearEuler;
    s.k = k;
    s.requires_levy = false;
    s.step = [p, k](const Vec& x, double dt, const Vec& dW, double) {
        return Vec{exact_euler_linear_step(p, k, x[0], dt, dW[0])};
    };
    return s;
}

OneStepScheme make_exact_linear_milstein(const LinearSdeParams& p, double k) {
    OneStepScheme s;
    s.kind = OneStepScheme::Kind::ExactLinearMilstein;
    s.k = k;
    s.requires_levy = true;
    s.step = [p, k](const Vec& x, double dt, const Vec& dW, double) {
        return Vec{exact_milstein_linear_step(p, k, x[0], dt, dW[0])};
    };
    return s;
}

Vec invariance_residual(const OneStepScheme& F, const Diffeomorphism& phi, const Vec& x,
                        double dt, const Vec& dW, double dWW) {
    Vec direct = F.step(x, dt, dW, dWW);
    Vec xp = phi.forward(x);
    Vec fp = F.step(xp, dt, dW, dWW);
    if (!phi.target_domain.contains(fp)) {
        throw ChartExitError("invariance_residual: step left the target chart");
    }
    Vec back = phi.inverse(fp);
    for (std::size_t i = 0; i < back.size(); ++i) back[i] -= direct[i];
    return back;
}

Vec infinitesimal_invariance_residual(const OneStepScheme& F, const VectorField& Y,
                                      const Vec& x, double dt, const Vec& dW,
                                      double dWW) {
    std::size_t n = x.size();
    Vec fx = F.step(x, dt, dW, dWW);
    Vec y_at_f = Y.value(fx);
    Vec yx = Y.value(x);
    // directional derivative (DF) Y by central differences along Y
    Vec res(n);
    Mat df = fd_jacobian(
        [&](const Vec& p) { return F.step(p, dt, dW, dWW); }, n, x);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = y_at_f[i];
        for (std::size_t k = 0; k < n; ++k) acc -= yx[k] * df[i * n + k];
        res[i] = acc;
    }
    return res;
}

Diffeomorphism flow_of(const VectorField& Y, double eps, Box chart) {
    auto integrate = [Y](Vec x, double time) {
        const double step = 1e-3;
        int sign = time >= 0.0 ? 1 : -1;
        double remaining = std::abs(time);
        std::size_t n = x.size();
        while (remaining > 0.0) {
            double s = sign * std::min(step, remaining);
            Vec k1 = Y.value(x);
            Vec p(n);
            for (std::size_t i = 0; i < n; ++i) p[i] = x[i] + 0.5 * s * k1[i];
            Vec k2 = Y.value(p);
            for (std::size_t i = 0; i < n; ++i) p[i] = x[i] + 0.5 * s * k2[i];
            Vec k3 = Y.value(p);
            for (std::size_t i = 0; i < n; ++i) p[i] = x[i] + s * k3[i];
            Vec k4 = Y.value(p);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += s / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            remaining -= std::abs(s);
        }
        return x;
    };
    Diffeomorphism phi;
    phi.dim = Y.dim;
    if (chart.dim() == Y.dim) {
        phi.source_domain = chart;
        phi.target_domain = chart;
    } else {
        phi.source_domain = Box{Vec(Y.dim, -1e300), Vec(Y.dim, 1e300)};
        phi.target_domain = phi.source_domain;
    }
    phi.forward = [integrate, eps](const Vec& x) { return integrate(x, eps); };
    phi.inverse = [integrate, eps](const Vec& x) { return integrate(x, -eps); };
    return phi;
}

}  // namespace sdelab
