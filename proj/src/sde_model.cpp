#include "sdelab/sde_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sdelab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Solve A X = I for a small dense matrix (n x n row-major), partial pivoting.
Mat invert_matrix(Mat a, std::size_t n) {
    Mat inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        }
        if (a[piv * n + col] == 0.0) {
            throw std::runtime_error("singular jacobian");
        }
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) {
                std::swap(a[piv * n + k], a[col * n + k]);
                std::swap(inv[piv * n + k], inv[col * n + k]);
            }
        }
        double d = a[col * n + col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                a[r * n + k] -= f * a[col * n + k];
                inv[r * n + k] -= f * inv[col * n + k];
            }
        }
    }
    return inv;
}

Vec mat_vec(const Mat& a, const Vec& x, std::size_t rows, std::size_t cols) {
    Vec y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) y[i] += a[i * cols + j] * x[j];
    }
    return y;
}

}  // namespace

bool Box::contains(const Vec& x) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

double fd_step(double xi) { return std::cbrt(kEps) * std::max(1.0, std::abs(xi)); }

Vec fd_gradient(const ScalarFn& f, const Vec& x) {
    Vec g(x.size());
    Vec xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = fd_step(x[i]);
        xp[i] = x[i] + h;
        double fp = f(xp);
        xp[i] = x[i] - h;
        double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Mat fd_jacobian(const VecFn& f, std::size_t out_dim, const Vec& x) {
    std::size_t n = x.size();
    Mat j(out_dim * n);
    Vec xp = x;
    for (std::size_t k = 0; k < n; ++k) {
        double h = fd_step(x[k]);
        xp[k] = x[k] + h;
        Vec fp = f(xp);
        xp[k] = x[k] - h;
        Vec fm = f(xp);
        xp[k] = x[k];
        for (std::size_t i = 0; i < out_dim; ++i) j[i * n + k] = (fp[i] - fm[i]) / (2.0 * h);
    }
    return j;
}

Mat fd_hessian(const ScalarFn& f, const Vec& x) {
    std::size_t n = x.size();
    Mat hmat(n * n);
    Vec xp = x;
    double f0 = f(x);
    for (std::size_t i = 0; i < n; ++i) {
        // Wider step than the gradient one: second differences lose more digits.
        double hi = std::sqrt(std::sqrt(kEps)) * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + hi;
        double fp = f(xp);
        xp[i] = x[i] - hi;
        double fm = f(xp);
        xp[i] = x[i];
        hmat[i * n + i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (std::size_t j = i + 1; j < n; ++j) {
            double hj = std::sqrt(std::sqrt(kEps)) * std::max(1.0, std::abs(x[j]));
            xp[i] = x[i] + hi; xp[j] = x[j] + hj;
            double fpp = f(xp);
            xp[j] = x[j] - hj;
            double fpm = f(xp);
            xp[i] = x[i] - hi; xp[j] = x[j] + hj;
            double fmp = f(xp);
            xp[j] = x[j] - hj;
            double fmm = f(xp);
            xp[i] = x[i]; xp[j] = x[j];
            double v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hmat[i * n + j] = v;
            hmat[j * n + i] = v;
        }
    }
    return hmat;
}

Mat jacobian_of(const VectorField& Y, const Vec& x) {
    if (Y.jacobian) return Y.jacobian(x);
    return fd_jacobian(Y.value, Y.dim, x);
}

Tensor3 hessian_of(const VectorField& Y, const Vec& x) {
    if (Y.hessian) return Y.hessian(x);
    std::size_t n = Y.dim;
    Tensor3 t(n * n * n);
    for (std::size_t i = 0; i < n; ++i) {
        auto comp = [&Y, i](const Vec& p) { return Y.value(p)[i]; };
        Mat h = fd_hessian(comp, x);
        std::copy(h.begin(), h.end(), t.begin() + static_cast<std::ptrdiff_t>(i * n * n));
    }
    return t;
}

Mat drift_jacobian_of(const SdeSystem& sde, const Vec& x) {
    if (sde.drift_jacobian) return sde.drift_jacobian(x);
    return fd_jacobian(sde.drift, sde.dim, x);
}

Tensor3 diffusion_jacobian_of(const SdeSystem& sde, const Vec& x) {
    if (sde.diffusion_jacobian) return sde.diffusion_jacobian(x);
    std::size_t n = sde.dim, m = sde.noise_dim;
    Tensor3 t(n * m * n);
    Mat j = fd_jacobian(sde.diffusion, n * m, x);  // rows (i, alpha), cols k
    std::copy(j.begin(), j.end(), t.begin());
    return t;
}

Mat jacobian_of(const Diffeomorphism& phi, const Vec& x) {
    if (phi.jacobian) return phi.jacobian(x);
    return fd_jacobian(phi.forward, phi.dim, x);
}

Tensor3 hessian_of(const Diffeomorphism& phi, const Vec& x) {
    if (phi.hessian) return phi.hessian(x);
    std::size_t n = phi.dim;
    Tensor3 t(n * n * n);
    for (std::size_t i = 0; i < n; ++i) {
        auto comp = [&phi, i](const Vec& p) { return phi.forward(p)[i]; };
        Mat h = fd_hessian(comp, x);
        std::copy(h.begin(), h.end(), t.begin() + static_cast<std::ptrdiff_t>(i * n * n));
    }
    return t;
}

double generator_apply(const SdeSystem& sde, const ScalarField& f, const Vec& x) {
    if (!sde.domain.contains(x)) {
        throw ChartExitError("generator_apply: point outside domain");
    }
    std::size_t n = sde.dim, m = sde.noise_dim;
    Vec mu = sde.drift(x);
    Mat sigma = sde.diffusion(x);
    Vec grad = f.gradient ? f.gradient(x) : fd_gradient(f.value, x);
    Mat hess = f.hessian ? f.hessian(x) : fd_hessian(f.value, x);
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) out += mu[i] * grad[i];
    for (std::size_t alpha = 0; alpha < m; ++alpha) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out += 0.5 * sigma[i * m + alpha] * sigma[j * m + alpha] * hess[i * n + j];
            }
        }
    }
    return out;
}

SdeSystem ito_transform(const SdeSystem& sde, const Diffeomorphism& phi) {
    if (sde.dim != phi.dim) {
        throw std::invalid_argument("ito_transform: dimension mismatch");
    }
    std::size_t n = sde.dim, m = sde.noise_dim;
    SdeSystem out;
    out.dim = n;
    out.noise_dim = m;
    out.domain = phi.target_domain;

    auto pullback = [phi](const Vec& xp) {
        if (!phi.target_domain.contains(xp)) {
            throw ChartExitError("ito_transform: point outside target chart");
        }
        return phi.inverse(xp);
    };

    out.drift = [sde, phi, pullback, n, m](const Vec& xp) {
        Vec y = pullback(xp);
        Vec mu = sde.drift(y);
        Mat sigma = sde.diffusion(y);
        Mat dphi = jacobian_of(phi, y);
        Tensor3 hphi = hessian_of(phi, y);
        Vec drift(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += dphi[i * n + j] * mu[j];
            for (std::size_t alpha = 0; alpha < m; ++alpha) {
                for (std::size_t j = 0; j < n; ++j) {
                    for (std::size_t k = 0; k < n; ++k) {
                        acc += 0.5 * sigma[j * m + alpha] * sigma[k * m + alpha] *
                               hphi[i * n * n + j * n + k];
                    }
                }
            }
            drift[i] = acc;
        }
        return drift;
    };

    out.diffusion = [sde, phi, pullback, n, m](const Vec& xp) {
        Vec y = pullback(xp);
        Mat sigma = sde.diffusion(y);
        Mat dphi = jacobian_of(phi, y);
        Mat res(n * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t alpha = 0; alpha < m; ++alpha) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += dphi[i * n + j] * sigma[j * m + alpha];
                res[i * m + alpha] = acc;
            }
        }
        return res;
    };

    // Diffusion jacobian by chain rule when the inputs carry analytic
    // derivatives; the drift jacobian would need third derivatives of phi,
    // so it stays on the finite-difference fallback.
    if (sde.has_diffusion_jacobian() && phi.jacobian && phi.hessian) {
        out.diffusion_jacobian = [sde, phi, pullback, n, m](const Vec& xp) {
            Vec y = pullback(xp);
            Mat sigma = sde.diffusion(y);
            Tensor3 dsigma = sde.diffusion_jacobian(y);
            Mat dphi = phi.jacobian(y);
            Tensor3 hphi = phi.hessian(y);
            Mat dphi_inv = invert_matrix(dphi, n);
            Tensor3 res(n * m * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t alpha = 0; alpha < m; ++alpha) {
                    for (std::size_t l = 0; l < n; ++l) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < n; ++j) {
                            double dj = 0.0;
                            for (std::size_t k = 0; k < n; ++k) {
                                dj += hphi[i * n * n + k * n + j] * sigma[k * m + alpha];
                                dj += dphi[i * n + k] * dsigma[k * m * n + alpha * n + j];
                            }
                            acc += dj * dphi_inv[j * n + l];
                        }
                        res[i * m * n + alpha * n + l] = acc;
                    }
                }
            }
            return res;
        };
    }
    return out;
}

Vec lie_bracket(const VectorField& Y, const VectorField& Z, const Vec& x) {
    if (Y.dim != Z.dim || x.size() != Y.dim) {
        throw std::invalid_argument("lie_bracket: dimension mismatch");
    }
    std::size_t n = Y.dim;
    Vec y = Y.value(x), z = Z.value(x);
    Mat dy = jacobian_of(Y, x), dz = jacobian_of(Z, x);
    Vec a = mat_vec(dz, y, n, n);
    Vec b = mat_vec(dy, z, n, n);
    for (std::size_t i = 0; i < n; ++i) a[i] -= b[i];
    return a;
}

VectorField pushforward(const Diffeomorphism& phi, const VectorField& Y) {
    VectorField out;
    out.dim = Y.dim;
    std::size_t n = Y.dim;
    out.value = [phi, Y, n](const Vec& xp) {
        if (!phi.target_domain.contains(xp)) {
            throw ChartExitError("pushforward: point outside target chart");
        }
        Vec y = phi.inverse(xp);
        Mat dphi = jacobian_of(phi, y);
        return mat_vec(dphi, Y.value(y), n, n);
    };
    return out;
}

DeterminingResidual determining_residual(const SdeSystem& sde, const VectorField& Y,
                                         const Vec& x) {
    std::size_t n = sde.dim, m = sde.noise_dim;
    Vec mu = sde.drift(x);
    Mat sigma = sde.diffusion(x);
    Mat dmu = drift_jacobian_of(sde, x);
    Tensor3 dsigma = diffusion_jacobian_of(sde, x);
    Vec yval = Y.value(x);
    Mat dy = jacobian_of(Y, x);
    Tensor3 hy = hessian_of(Y, x);

    DeterminingResidual res;
    res.r1.assign(n, 0.0);
    res.r2.assign(n * m, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        double yi_mu = 0.0;  // Y(mu^i) = Y^k d_k mu^i
        for (std::size_t k = 0; k < n; ++k) yi_mu += dmu[i * n + k] * yval[k];
        double l_yi = 0.0;   // L(Y^i)
        for (std::size_t k = 0; k < n; ++k) l_yi += mu[k] * dy[i * n + k];
        for (std::size_t alpha = 0; alpha < m; ++alpha) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    l_yi += 0.5 * sigma[j * m + alpha] * sigma[k * m + alpha] *
                            hy[i * n * n + j * n + k];
                }
            }
        }
        res.r1[i] = yi_mu - l_yi;
    }

    for (std::size_t alpha = 0; alpha < m; ++alpha) {
        // [Y, sigma_alpha] = D(sigma_alpha) Y - DY sigma_alpha
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += dsigma[i * m * n + alpha * n + k] * yval[k];
                acc -= dy[i * n + k] * sigma[k * m + alpha];
            }
            res.r2[i * m + alpha] = acc;
        }
    }
    return res;
}

bool is_affine(const VectorField& Y, const std::vector<Vec>& samples, double tol) {
    if (samples.empty()) {
        throw std::invalid_argument("is_affine: empty sample set");
    }
    std::size_t n = Y.dim;
    for (const Vec& x : samples) {
        for (std::size_t i = 0; i < n; ++i) {
            auto comp = [&Y, i](const Vec& p) { return Y.value(p)[i]; };
            Mat h = fd_hessian(comp, x);
            for (double v : h) {
                if (std::abs(v) > tol) return false;
            }
        }
    }
    return true;
}

bool is_triangular(const SdeSystem& sde, std::size_t r, const std::vector<Vec>& samples,
                   double tol) {
    std::size_t n = sde.dim, m = sde.noise_dim;
    if (r < 1 || r > n) {
        throw std::invalid_argument("is_triangular: invalid split");
    }
    for (const Vec& x : samples) {
        Mat dmu = fd_jacobian(sde.drift, n, x);
        Mat dsig = fd_jacobian(sde.diffusion, n * m, x);
        for (std::size_t i = 0; i < n; ++i) {
            // Components inside the triangular block may not depend on
            // x^i..x^{r-1}; the remaining block may not depend on the
            // triangular block at all.
            std::size_t k_lo = (i < r) ? i : 0;
            std::size_t k_hi = r;
            for (std::size_t k = k_lo; k < k_hi; ++k) {
                if (std::abs(dmu[i * n + k]) > tol) return false;
                for (std::size_t alpha = 0; alpha < m; ++alpha) {
                    if (std::abs(dsig[(i * m + alpha) * n + k]) > tol) return false;
                }
            }
        }
    }
    return true;
}

bool is_canonical_form(const std::vector<VectorField>& fields,
                       const std::vector<Vec>& samples,
                       const std::vector<std::size_t>& splits, double tol) {
    std::size_t r = fields.size();
    if (r == 0 || samples.empty()) {
        throw std::invalid_argument("is_canonical_form: empty input");
    }
    std::size_t n = fields[0].dim;
    std::size_t sum = 0;
    for (std::size_t s : splits) sum += s;
    if (sum != r || r > n) {
        throw std::invalid_argument("is_canonical_form: inconsistent splits");
    }
    // Row block boundaries within the first r rows.
    std::vector<std::size_t> row_start{0};
    for (std::size_t s : splits) row_start.push_back(row_start.back() + s);

    for (const Vec& x : samples) {
        Mat cols(n * r);
        for (std::size_t c = 0; c < r; ++c) {
            Vec v = fields[c].value(x);
            for (std::size_t i = 0; i < n; ++i) cols[i * r + c] = v[i];
        }
        for (std::size_t bi = 0; bi < splits.size(); ++bi) {
            for (std::size_t bj = 0; bj < splits.size(); ++bj) {
                if (bj > bi) continue;  // upper blocks unconstrained
                for (std::size_t i = row_start[bi]; i < row_start[bi + 1]; ++i) {
                    for (std::size_t j = row_start[bj]; j < row_start[bj + 1]; ++j) {
                        double target = (bi == bj && (i - row_start[bi]) == (j - row_start[bj]))
                                            ? 1.0
                                            : 0.0;
                        if (std::abs(cols[i * r + j] - target) > tol) return false;
                    }
                }
            }
        }
        for (std::size_t i = r; i < n; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
                if (std::abs(cols[i * r + j]) > tol) return false;
            }
        }
    }
    return true;
}

std::vector<Vec> sample_box(const Box& box, std::size_t per_axis) {
    std::size_t n = box.dim();
    std::vector<Vec> out;
    if (n <= 2) {
        std::vector<std::size_t> idx(n, 0);
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= per_axis;
        for (std::size_t t = 0; t < total; ++t) {
            Vec x(n);
            std::size_t rest = t;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t k = rest % per_axis;
                rest /= per_axis;
                double frac = (per_axis == 1) ? 0.5
                                              : static_cast<double>(k) /
                                                    static_cast<double>(per_axis - 1);
                x[i] = box.lo[i] + frac * (box.hi[i] - box.lo[i]);
            }
            out.push_back(std::move(x));
        }
    } else {
        std::mt19937_64 rng(0x5DE1ABu);
        std::size_t total = per_axis * per_axis;
        for (std::size_t t = 0; t < total; ++t) {
            Vec x(n);
            for (std::size_t i = 0; i < n; ++i) {
                double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                x[i] = box.lo[i] + u * (box.hi[i] - box.lo[i]);
            }
            out.push_back(std::move(x));
        }
    }
    return out;
}

void validate_derivatives(const SdeSystem& sde, double rel_tol) {
    auto samples = sample_box(sde.domain);
    for (const Vec& x : samples) {
        if (sde.has_drift_jacobian()) {
            Mat a = sde.drift_jacobian(x);
            Mat b = fd_jacobian(sde.drift, sde.dim, x);
            for (std::size_t i = 0; i < a.size(); ++i) {
                double scale = std::max(1.0, std::abs(a[i]));
                if (std::abs(a[i] - b[i]) > rel_tol * scale) {
                    throw std::runtime_error("validate_derivatives: drift jacobian mismatch");
                }
            }
        }
        if (sde.has_diffusion_jacobian()) {
            Tensor3 a = sde.diffusion_jacobian(x);
            Mat b = fd_jacobian(sde.diffusion, sde.dim * sde.noise_dim, x);
            for (std::size_t i = 0; i < a.size(); ++i) {
                double scale = std::max(1.0, std::abs(a[i]));
                if (std::abs(a[i] - b[i]) > rel_tol * scale) {
                    throw std::runtime_error(
                        "validate_derivatives: diffusion jacobian mismatch");
                }
            }
        }
    }
}

}  // namespace sdelab
