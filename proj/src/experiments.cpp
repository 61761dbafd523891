#include "sdelab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace sdelab {

namespace {

std::vector<std::size_t> out_indices(const EnsembleConfig& cfg) {
    std::vector<double> times = cfg.out_times;
    if (times.empty()) times.push_back(cfg.T);
    std::vector<std::size_t> idx;
    idx.reserve(times.size());
    for (double t : times) {
        if (!(t > 0.0) || t > cfg.T * (1.0 + 1e-9)) {
            throw std::invalid_argument("run_ensemble: output time outside (0, T]");
        }
        double r = t / cfg.h;
        auto n = static_cast<std::size_t>(std::llround(r));
        if (std::abs(n * cfg.h - t) > 1e-9 * std::max(1.0, t)) {
            throw std::invalid_argument("run_ensemble: output time not on the step grid");
        }
        idx.push_back(n);
    }
    return idx;
}

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / (static_cast<double>(v.size()) - 1.0));
}

}  // namespace

EnsembleResult run_ensemble(const PathFn& scheme, const PathFn& reference,
                            const EnsembleConfig& cfg) {
    if (!(cfg.h > 0.0) || !(cfg.T > 0.0)) {
        throw std::invalid_argument("run_ensemble: T and h must be positive");
    }
    if (cfg.paths == 0) throw std::invalid_argument("run_ensemble: paths must be > 0");
    std::size_t factor = std::max<std::size_t>(1, cfg.couple_factor);
    double h_fine = cfg.h / static_cast<double>(factor);

    std::vector<std::size_t> idx = out_indices(cfg);
    std::size_t nt = idx.size();

    EnsembleResult res;
    res.paths = cfg.paths;
    res.h = cfg.h;
    res.times.resize(nt);
    for (std::size_t j = 0; j < nt; ++j) res.times[j] = idx[j] * cfg.h;
    res.scheme_vals.assign(nt, std::vector<double>(cfg.paths));
    res.ref_vals.assign(nt, std::vector<double>(cfg.paths));
    res.failed.assign(cfg.paths, 0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::exception_ptr first_error;
    std::mutex err_mutex;

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            try {
                NoiseGrid fine = sample_path({cfg.master_seed, p}, cfg.T, h_fine, 1);
                const NoiseGrid& coarse_ref =
                    (factor == 1) ? fine : coarsen(fine, factor);
                bool ok = true;
                std::vector<double> sp, rp;
                try {
                    sp = scheme(coarse_ref, cfg.x0);
                    rp = reference(fine, cfg.x0);
                } catch (const ChartExitError&) {
                    ok = false;
                }
                for (std::size_t j = 0; j < nt; ++j) {
                    res.scheme_vals[j][p] = ok ? sp[idx[j]] : nan;
                    res.ref_vals[j][p] = ok ? rp[idx[j] * factor] : nan;
                }
                if (!ok) res.failed[p] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::size_t workers = std::max<std::size_t>(1, cfg.workers);
    workers = std::min(workers, cfg.paths);
    if (workers == 1) {
        work(0, cfg.paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::size_t chunk = (cfg.paths + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t lo = w * chunk;
            std::size_t hi = std::min(cfg.paths, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (std::uint8_t f : res.failed) res.failures += f;
    return res;
}

ErrorSeries error_series(const EnsembleResult& ens, const LinearSdeParams& p, double x0,
                         std::string label, bool weak_available) {
    ErrorSeries s;
    s.times = ens.times;
    s.paths = ens.paths;
    s.failures = ens.failures;
    s.scheme_label = std::move(label);
    s.params = p;
    s.x0 = x0;
    s.h = ens.h;
    s.has_weak = weak_available;

    std::size_t nt = ens.times.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < nt; ++j) {
        std::vector<double> vals, diffs;
        vals.reserve(ens.paths);
        diffs.reserve(ens.paths);
        for (std::size_t q = 0; q < ens.paths; ++q) {
            if (ens.failed[q]) continue;
            vals.push_back(ens.scheme_vals[j][q]);
            diffs.push_back(std::abs(ens.scheme_vals[j][q] - ens.ref_vals[j][q]));
        }
        if (vals.empty()) {
            s.weak_err.push_back(nan);
            s.weak_stderr.push_back(nan);
            s.strong_l1.push_back(nan);
            s.strong_l1_stderr.push_back(nan);
            s.strong_l2.push_back(nan);
            s.strong_l2_stderr.push_back(nan);
            continue;
        }
        double n = static_cast<double>(vals.size());
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= n;
        double sd = sample_sd(vals, mean);
        if (weak_available) {
            s.weak_err.push_back(std::abs(mean - mean_curve(p, x0, ens.times[j])));
        } else {
            s.weak_err.push_back(nan);
        }
        s.weak_stderr.push_back(sd / std::sqrt(n));

        double l1 = 0.0, l2sq = 0.0;
        for (double d : diffs) {
            l1 += d;
            l2sq += d * d;
        }
        l1 /= n;
        l2sq /= n;
        double l2 = std::sqrt(l2sq);
        s.strong_l1.push_back(l1);
        s.strong_l1_stderr.push_back(sample_sd(diffs, l1) / std::sqrt(n));
        s.strong_l2.push_back(l2);
        std::vector<double> sq(diffs.size());
        for (std::size_t q = 0; q < diffs.size(); ++q) sq[q] = diffs[q] * diffs[q];
        double se2 = sample_sd(sq, l2sq) / std::sqrt(n);
        s.strong_l2_stderr.push_back(l2 > 0.0 ? se2 / (2.0 * l2) : 0.0);
        if (std::isfinite(l1) && std::isfinite(l2) &&
            l2 < l1 * (1.0 - 1e-12) - 1e-300) {
            throw std::logic_error("error_series: L2 below L1");
        }
    }
    return s;
}

ValueWithError weak_error(const std::vector<double>& samples, const LinearSdeParams& p,
                          double x0, double t) {
    if (samples.empty()) throw std::invalid_argument("weak_error: empty sample");
    double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    return {std::abs(mean - mean_curve(p, x0, t)), sample_sd(samples, mean) / std::sqrt(n)};
}

ValueWithError strong_error(const std::vector<double>& scheme,
                            const std::vector<double>& reference, StrongNorm norm) {
    if (scheme.empty() || scheme.size() != reference.size()) {
        throw std::invalid_argument("strong_error: sample size mismatch");
    }
    double n = static_cast<double>(scheme.size());
    std::vector<double> d(scheme.size());
    for (std::size_t i = 0; i < scheme.size(); ++i) {
        d[i] = std::abs(scheme[i] - reference[i]);
    }
    if (norm == StrongNorm::L1) {
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= n;
        return {mean, sample_sd(d, mean) / std::sqrt(n)};
    }
    std::vector<double> sq(d.size());
    double m2 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        sq[i] = d[i] * d[i];
        m2 += sq[i];
    }
    m2 /= n;
    double l2 = std::sqrt(m2);
    double se2 = sample_sd(sq, m2) / std::sqrt(n);
    return {l2, l2 > 0.0 ? se2 / (2.0 * l2) : 0.0};
}

TvReport tv_distance(const std::vector<double>& a, const std::vector<double>& b,
                     std::size_t bin_count) {
    if (a.empty() || b.empty()) throw std::invalid_argument("tv_distance: empty sample");
    if (bin_count == 0) throw std::invalid_argument("tv_distance: bin_count must be > 0");
    TvReport r;
    r.bin_count = bin_count;
    double lo = a[0], hi = a[0];
    for (double v : a) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : b) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("tv_distance: non-finite sample");
    }
    r.lo = lo;
    r.hi = hi;
    r.mass_a.assign(bin_count, 0.0);
    r.mass_b.assign(bin_count, 0.0);
    double width = hi - lo;
    auto bin_of = [&](double v) -> std::size_t {
        if (width <= 0.0) return 0;
        auto j = static_cast<std::size_t>((v - lo) / width * static_cast<double>(bin_count));
        return std::min(j, bin_count - 1);
    };
    for (double v : a) r.mass_a[bin_of(v)] += 1.0 / static_cast<double>(a.size());
    for (double v : b) r.mass_b[bin_of(v)] += 1.0 / static_cast<double>(b.size());
    double tv = 0.0;
    for (std::size_t j = 0; j < bin_count; ++j) tv += std::abs(r.mass_a[j] - r.mass_b[j]);
    r.tv = 0.5 * tv;
    return r;
}

FitResult convergence_fit(const std::vector<double>& h_values,
                          const std::vector<double>& errors) {
    if (h_values.size() != errors.size() || h_values.size() < 3) {
        throw std::invalid_argument("convergence_fit: need >= 3 matched points");
    }
    std::size_t n = h_values.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(h_values[i] > 0.0) || !(errors[i] > 0.0)) {
            throw std::invalid_argument("convergence_fit: h and errors must be positive");
        }
        lx[i] = std::log(h_values[i]);
        ly[i] = std::log(errors[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("convergence_fit: degenerate h grid");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        f.max_residual =
            std::max(f.max_residual, std::abs(ly[i] - (f.slope * lx[i] + f.intercept)));
    }
    return f;
}

PathFn make_linear_scheme_path(const SchemeSpec& spec, const LinearSdeParams& p) {
    SchemeKind kind = spec.kind;
    double k = spec.k;
    return [kind, k, p](const NoiseGrid& grid, double x0) {
        std::vector<double> path(grid.steps + 1);
        path[0] = x0;
        double h = grid.step;
        double x = x0;
        switch (kind) {
            case SchemeKind::Euler:
                for (std::size_t n = 0; n < grid.steps; ++n) {
                    double dW = grid.increments[n];
                    x += (p.a * x + p.b) * h + (p.c * x + p.d) * dW;
                    path[n + 1] = x;
                }
                break;
            case SchemeKind::Milstein:
                for (std::size_t n = 0; n < grid.steps; ++n) {
                    double dW = grid.increments[n];
                    double sig = p.c * x + p.d;
                    x += (p.a * x + p.b) * h + sig * dW + p.c * sig * levy_term(dW, h);
                    path[n + 1] = x;
                }
                break;
            case SchemeKind::ExactEuler:
                for (std::size_t n = 0; n < grid.steps; ++n) {
                    x = exact_euler_linear_step(p, k, x, h, grid.increments[n]);
                    path[n + 1] = x;
                }
                break;
            case SchemeKind::ExactMilstein:
                for (std::size_t n = 0; n < grid.steps; ++n) {
                    x = exact_milstein_linear_step(p, k, x, h, grid.increments[n]);
                    path[n + 1] = x;
                }
                break;
        }
        return path;
    };
}

PathFn make_linear_reference(const LinearSdeParams& p, RefMethod method) {
    return [p, method](const NoiseGrid& grid, double x0) {
        return reference_path(p, x0, grid, method);
    };
}

double growth_rate(const ErrorSeries& series, double t_lo) {
    std::vector<double> ts, vals;
    for (std::size_t j = 0; j < series.times.size(); ++j) {
        if (series.times[j] < t_lo * (1.0 - 1e-12)) continue;
        ts.push_back(series.times[j]);
        vals.push_back(series.strong_l1[j]);
    }
    if (ts.size() < 2) throw std::invalid_argument("growth_rate: need >= 2 tail points");
    bool all_tiny = true;
    for (double v : vals) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        if (v > 1e-300) all_tiny = false;
    }
    if (all_tiny) return 0.0;
    double mx = 0.0, my = 0.0;
    std::size_t n = ts.size();
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        ly[i] = std::log(std::max(vals[i], 1e-300));
        mx += ts[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (ts[i] - mx) * (ts[i] - mx);
        sxy += (ts[i] - mx) * (ly[i] - my);
    }
    return sxy / sxx;
}

StabilityReport stability_scan(const SchemeSpec& scheme, const LinearSdeParams& p,
                               double x0, const std::vector<double>& h_grid, double T,
                               std::size_t paths, std::uint64_t seed, double threshold,
                               std::size_t workers, std::size_t couple_factor) {
    if (h_grid.empty()) throw std::invalid_argument("stability_scan: empty h grid");
    StabilityReport rep;
    rep.h_grid = h_grid;
    rep.threshold = threshold;
    PathFn sp = make_linear_scheme_path(scheme, p);
    PathFn rp = make_linear_reference(p, RefMethod::ExactScheme);
    for (double h : h_grid) {
        auto steps = static_cast<std::size_t>(std::llround(T / h));
        if (std::abs(steps * h - T) > 1e-9 * T) {
            throw std::invalid_argument("stability_scan: T must be a multiple of h");
        }
        if (steps < 8) {
            throw std::invalid_argument("stability_scan: need at least 8 steps per h");
        }
        // eight probe times spread over [0, T], snapped to the step grid
        std::vector<double> out;
        std::size_t last = 0;
        for (int j = 1; j <= 8; ++j) {
            auto n = static_cast<std::size_t>(std::llround(steps * (j / 8.0)));
            n = std::max<std::size_t>(1, std::min(n, steps));
            if (n != last) out.push_back(n * h);
            last = n;
        }
        EnsembleConfig cfg;
        cfg.x0 = x0;
        cfg.T = T;
        cfg.h = h;
        cfg.paths = paths;
        cfg.master_seed = seed;
        cfg.couple_factor = couple_factor;
        cfg.workers = workers;
        cfg.out_times = out;
        EnsembleResult ens = run_ensemble(sp, rp, cfg);
        ErrorSeries es = error_series(ens, p, x0, scheme.label);
        double rate = growth_rate(es, 0.5 * T);
        rep.rates.push_back(rate);
        rep.stable.push_back(std::isfinite(rate) && rate <= threshold ? 1 : 0);
    }
    return rep;
}

ExperimentPreset figure_preset(const std::string& which) {
    ExperimentPreset pr;
    pr.name = which;
    pr.params = {-2.0, 10.0, 10.0, 10.0};
    pr.schemes = {
        {SchemeKind::Euler, 0.0, "euler"},
        {SchemeKind::Milstein, 0.0, "milstein"},
        {SchemeKind::ExactEuler, 0.0, "exact_k0"},
        {SchemeKind::ExactEuler, -1.0, "exact_km1"},
    };
    if (which == "fig1" || which == "fig2") {
        pr.h = (which == "fig1") ? 0.025 : 0.01;
        for (int j = 1; j <= 10; ++j) pr.out_times.push_back(0.1 * j);
    } else if (which == "fig3" || which == "fig4") {
        pr.T = 0.5;
        pr.tv_time = 0.5;
        pr.step_counts = {10, 20, 40, 80};
        pr.out_times = {0.5};
        pr.h = 0.5 / 40.0;
    } else {
        throw std::invalid_argument("figure_preset: unknown preset " + which);
    }
    return pr;
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

void write_error_series_csv(const ErrorSeries& s, std::ostream& out) {
    out << "time,weak_err,weak_stderr,strong_l1,strong_l1_stderr,"
           "strong_l2,strong_l2_stderr,failures\n";
    for (std::size_t j = 0; j < s.times.size(); ++j) {
        out << format_double(s.times[j]) << ',' << format_double(s.weak_err[j]) << ','
            << format_double(s.weak_stderr[j]) << ',' << format_double(s.strong_l1[j])
            << ',' << format_double(s.strong_l1_stderr[j]) << ','
            << format_double(s.strong_l2[j]) << ',' << format_double(s.strong_l2_stderr[j])
            << ',' << s.failures << '\n';
    }
}

void write_stability_csv(const StabilityReport& r, std::ostream& out) {
    out << "h,rate,stable\n";
    for (std::size_t j = 0; j < r.h_grid.size(); ++j) {
        out << format_double(r.h_grid[j]) << ',' << format_double(r.rates[j]) << ','
            << static_cast<int>(r.stable[j]) << '\n';
    }
}

void write_tv_csv(const std::vector<std::pair<std::string, TvReport>>& rows,
                  std::ostream& out) {
    out << "scheme,bins,lo,hi,tv\n";
    for (const auto& [label, r] : rows) {
        out << label << ',' << r.bin_count << ',' << format_double(r.lo) << ','
            << format_double(r.hi) << ',' << format_double(r.tv) << '\n';
    }
}

}  // namespace sdelab
