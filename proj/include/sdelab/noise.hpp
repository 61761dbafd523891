#pragma once

#include <cstdint>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace sdelab {

// Identifies one Brownian path within a reproducible ensemble.  The pair
// (master_seed, path_index) fully determines the realized increments,
// independently of evaluation order and worker count.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

// Realized Brownian increment grid: N steps of size h covering [0, T],
// m noise components.  Increments are stored row-major (step, component).
struct NoiseGrid {
    double horizon = 0.0;     // T
    double step = 0.0;        // h
    std::size_t noise_dim = 0;
    std::size_t steps = 0;    // N, with N*h = T
    std::vector<double> increments;

    double at(std::size_t n, std::size_t alpha) const {
        return increments[n * noise_dim + alpha];
    }

    // Wiener values W_{t_1},...,W_{t_N} for one component, by prefix sums
    // in fixed index order.
    std::vector<double> cumulative(std::size_t alpha) const;
};

// Deterministic, counter-based standard normal draw.  Exposed for tests.
double normal_draw(SeedSpec seed, std::uint64_t counter);

NoiseGrid sample_path(SeedSpec seed, double T, double h, std::size_t m);

// Sum consecutive groups of `factor` increments; coarse step = factor * h.
NoiseGrid coarsen(const NoiseGrid& fine, std::size_t factor);

// Iterated-integral term for m = 1: ((dW)^2 - dt) / 2.
double levy_term(double dW, double dt);

// Debug replay format: T, h, m, N as little-endian 64-bit values followed
// by row-major 64-bit floats.
void write_grid(const NoiseGrid& grid, std::ostream& out);
NoiseGrid read_grid(std::istream& in);

// Inverse standard normal CDF, accurate to full double precision.
double inverse_normal_cdf(double p);

}  // namespace sdelab
