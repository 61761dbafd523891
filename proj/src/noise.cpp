#include "sdelab/noise.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sdelab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Stafford mix13 finalizer, the splitmix64 output function.
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

std::uint64_t stream_key(SeedSpec seed) {
    std::uint64_t k = mix64(seed.master_seed + kGolden);
    return mix64(k ^ (seed.path_index * kGolden + 1));
}

double uniform_from_bits(std::uint64_t bits) {
    // (0, 1), never exactly 0 or 1.
    return ((bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");
    }
    // Acklam's rational approximation followed by one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement against the exact CDF.
    const double sqrt2 = 1.4142135623730951;
    const double sqrt2pi = 2.5066282746310002;
    double e = 0.5 * std::erfc(-x / sqrt2) - p;
    double u = e * sqrt2pi * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double normal_draw(SeedSpec seed, std::uint64_t counter) {
    std::uint64_t bits = mix64(stream_key(seed) + (counter + 1) * kGolden);
    return inverse_normal_cdf(uniform_from_bits(bits));
}

std::vector<double> NoiseGrid::cumulative(std::size_t alpha) const {
    std::vector<double> w(steps);
    double acc = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
        acc += at(n, alpha);
        w[n] = acc;
    }
    return w;
}

NoiseGrid sample_path(SeedSpec seed, double T, double h, std::size_t m) {
    if (!(T > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("sample_path: T and h must be positive");
    }
    if (m == 0) {
        throw std::invalid_argument("sample_path: noise dimension must be positive");
    }
    double ratio = T / h;
    double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 0.5) {
        throw std::invalid_argument("sample_path: T/h must be an integer");
    }
    auto N = static_cast<std::size_t>(rounded);

    NoiseGrid grid;
    grid.horizon = T;
    grid.step = h;
    grid.noise_dim = m;
    grid.steps = N;
    grid.increments.resize(N * m);
    double scale = std::sqrt(h);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t alpha = 0; alpha < m; ++alpha) {
            std::uint64_t counter = n * m + alpha;
            grid.increments[n * m + alpha] = scale * normal_draw(seed, counter);
        }
    }
    return grid;
}

NoiseGrid coarsen(const NoiseGrid& fine, std::size_t factor) {
    if (factor == 0 || fine.steps % factor != 0) {
        throw std::invalid_argument("coarsen: factor must divide the step count");
    }
    NoiseGrid coarse;
    coarse.horizon = fine.horizon;
    coarse.step = fine.step * static_cast<double>(factor);
    coarse.noise_dim = fine.noise_dim;
    coarse.steps = fine.steps / factor;
    coarse.increments.assign(coarse.steps * coarse.noise_dim, 0.0);
    for (std::size_t n = 0; n < fine.steps; ++n) {
        std::size_t cn = n / factor;
        for (std::size_t alpha = 0; alpha < fine.noise_dim; ++alpha) {
            coarse.increments[cn * coarse.noise_dim + alpha] += fine.at(n, alpha);
        }
    }
    return coarse;
}

double levy_term(double dW, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("levy_term: dt must be positive");
    }
    return 0.5 * (dW * dW - dt);
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t double_bits(double x) {
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    return v;
}

double bits_double(std::uint64_t v) {
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

}  // namespace

void write_grid(const NoiseGrid& grid, std::ostream& out) {
    put_u64(out, double_bits(grid.horizon));
    put_u64(out, double_bits(grid.step));
    put_u64(out, grid.noise_dim);
    put_u64(out, grid.steps);
    for (double x : grid.increments) put_u64(out, double_bits(x));
}

NoiseGrid read_grid(std::istream& in) {
    NoiseGrid grid;
    grid.horizon = bits_double(get_u64(in));
    grid.step = bits_double(get_u64(in));
    grid.noise_dim = get_u64(in);
    grid.steps = get_u64(in);
    if (!in) throw std::runtime_error("read_grid: truncated header");
    grid.increments.resize(grid.steps * grid.noise_dim);
    for (double& x : grid.increments) x = bits_double(get_u64(in));
    if (!in) throw std::runtime_error("read_grid: truncated payload");
    return grid;
}

}  // namespace sdelab
