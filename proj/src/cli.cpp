#include "sdelab/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "sdelab/models.hpp"
#include "sdelab/sde_model.hpp"

namespace sdelab {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string kind_to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::Euler:
            return "euler";
        case SchemeKind::Milstein:
            return "milstein";
        case SchemeKind::ExactEuler:
            return "exact_euler";
        case SchemeKind::ExactMilstein:
            return "exact_milstein";
    }
    return "euler";
}

SchemeKind kind_from_string(const std::string& s) {
    if (s == "euler") return SchemeKind::Euler;
    if (s == "milstein") return SchemeKind::Milstein;
    if (s == "exact_euler" || s == "exact") return SchemeKind::ExactEuler;
    if (s == "exact_milstein") return SchemeKind::ExactMilstein;
    throw std::invalid_argument("unknown scheme kind: " + s);
}

json config_to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["model"] = c.model;
    j["params"] = {{"a", c.params.a}, {"b", c.params.b}, {"c", c.params.c}, {"d", c.params.d}};
    j["tanh"] = {{"a", c.tanh_a}, {"b", c.tanh_b}};
    j["x0"] = c.x0;
    json schemes = json::array();
    for (const SchemeSpec& s : c.schemes) {
        schemes.push_back({{"kind", kind_to_string(s.kind)}, {"k", s.k}, {"label", s.label}});
    }
    j["schemes"] = schemes;
    j["T"] = c.T;
    j["h"] = c.h;
    j["out_times"] = c.out_times;
    j["paths"] = c.paths;
    j["seed"] = c.master_seed;
    j["couple_factor"] = c.couple_factor;
    j["workers"] = c.workers;
    j["bin_count"] = c.bin_count;
    j["threshold"] = c.threshold;
    j["tolerance"] = c.tolerance;
    j["h_grid"] = c.h_grid;
    j["step_counts"] = c.step_counts;
    j["t"] = c.t_eval;
    j["out"] = c.out_prefix;
    return j;
}

void overlay(RunConfig& c, const json& j) {
    if (j.contains("command")) c.command = j["command"].get<std::string>();
    if (j.contains("model")) c.model = j["model"].get<std::string>();
    if (j.contains("params")) {
        const json& p = j["params"];
        if (p.contains("a")) c.params.a = p["a"].get<double>();
        if (p.contains("b")) c.params.b = p["b"].get<double>();
        if (p.contains("c")) c.params.c = p["c"].get<double>();
        if (p.contains("d")) c.params.d = p["d"].get<double>();
    }
    if (j.contains("tanh")) {
        const json& p = j["tanh"];
        if (p.contains("a")) c.tanh_a = p["a"].get<double>();
        if (p.contains("b")) c.tanh_b = p["b"].get<double>();
    }
    if (j.contains("x0")) c.x0 = j["x0"].get<double>();
    if (j.contains("schemes")) {
        c.schemes.clear();
        for (const json& s : j["schemes"]) {
            SchemeSpec spec;
            spec.kind = kind_from_string(s.at("kind").get<std::string>());
            if (s.contains("k")) spec.k = s["k"].get<double>();
            spec.label = s.contains("label") ? s["label"].get<std::string>()
                                             : kind_to_string(spec.kind);
            c.schemes.push_back(std::move(spec));
        }
    }
    if (j.contains("T")) c.T = j["T"].get<double>();
    if (j.contains("h")) c.h = j["h"].get<double>();
    if (j.contains("out_times")) c.out_times = j["out_times"].get<std::vector<double>>();
    if (j.contains("paths")) c.paths = j["paths"].get<std::size_t>();
    if (j.contains("seed")) c.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("couple_factor")) c.couple_factor = j["couple_factor"].get<std::size_t>();
    if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
    if (j.contains("bin_count")) c.bin_count = j["bin_count"].get<std::size_t>();
    if (j.contains("threshold")) c.threshold = j["threshold"].get<double>();
    if (j.contains("tolerance")) c.tolerance = j["tolerance"].get<double>();
    if (j.contains("h_grid")) c.h_grid = j["h_grid"].get<std::vector<double>>();
    if (j.contains("step_counts")) {
        c.step_counts = j["step_counts"].get<std::vector<std::size_t>>();
    }
    if (j.contains("t")) c.t_eval = j["t"].get<double>();
    if (j.contains("out")) c.out_prefix = j["out"].get<std::string>();
}

void validate(const RunConfig& c) {
    static const char* commands[] = {"simulate", "errors",  "stability",      "tv",
                                     "convergence", "verify-symmetry", "bounds"};
    bool known = false;
    for (const char* cmd : commands) known = known || c.command == cmd;
    if (!known) throw std::invalid_argument("unknown command: " + c.command);
    if (c.model != "linear" && c.model != "tanh") {
        throw std::invalid_argument("unknown model: " + c.model);
    }
    if (c.paths < 1) throw std::invalid_argument("paths must be >= 1");
    for (double v : {c.params.a, c.params.b, c.params.c, c.params.d, c.x0, c.T, c.h,
                     c.threshold, c.tanh_a, c.tanh_b}) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite numeric field");
    }
    if (!(c.T > 0.0) || !(c.h > 0.0)) throw std::invalid_argument("T and h must be positive");
    if (c.out_prefix.empty()) throw std::invalid_argument("output prefix required");
    if (c.model == "tanh" &&
        (c.command == "stability" || c.command == "bounds" || c.command == "convergence")) {
        throw std::invalid_argument("command '" + c.command + "' supports the linear model only");
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    return f;
}

// Path functionals for the builtin tanh model: raw one-step methods on the
// x > 0 chart plus the constant-coefficient chart method ("exact_euler").
PathFn make_tanh_path(SchemeKind kind, double a, double b) {
    double drift_const = a - 0.5 * b * b;
    return [kind, a, b, drift_const](const NoiseGrid& grid, double x0) {
        if (!(x0 > 0.0)) throw ChartExitError("tanh path: x0 must be positive");
        std::vector<double> path(grid.steps + 1);
        path[0] = x0;
        double h = grid.step;
        if (kind == SchemeKind::ExactEuler || kind == SchemeKind::ExactMilstein) {
            double z = std::log(std::sinh(x0));
            for (std::size_t n = 0; n < grid.steps; ++n) {
                z += drift_const * h + b * grid.increments[n];
                if (z > 700.0) throw ChartExitError("tanh path: chart overflow");
                path[n + 1] = std::asinh(std::exp(z));
            }
            return path;
        }
        double x = x0;
        for (std::size_t n = 0; n < grid.steps; ++n) {
            double t = std::tanh(x);
            double dW = grid.increments[n];
            x += (a * t - 0.5 * b * b * t * t * t) * h + b * t * dW;
            if (kind == SchemeKind::Milstein) {
                x += b * b * t * (1.0 - t * t) * levy_term(dW, h);
            }
            if (!(x > 0.0)) throw ChartExitError("tanh path: left the x > 0 chart");
            path[n + 1] = x;
        }
        return path;
    };
}

PathFn scheme_path_for(const RunConfig& c, const SchemeSpec& s) {
    if (c.model == "tanh") return make_tanh_path(s.kind, c.tanh_a, c.tanh_b);
    return make_linear_scheme_path(s, c.params);
}

PathFn reference_path_for(const RunConfig& c) {
    if (c.model == "tanh") {
        return make_tanh_path(SchemeKind::ExactEuler, c.tanh_a, c.tanh_b);
    }
    return make_linear_reference(c.params);
}

EnsembleConfig ensemble_config(const RunConfig& c) {
    EnsembleConfig e;
    e.x0 = c.x0;
    e.T = c.T;
    e.h = c.h;
    e.paths = c.paths;
    e.master_seed = c.master_seed;
    e.couple_factor = c.couple_factor;
    e.workers = c.workers;
    e.out_times = c.out_times;
    return e;
}

json series_to_json(const ErrorSeries& s) {
    json j;
    j["scheme"] = s.scheme_label;
    j["paths"] = s.paths;
    j["failures"] = s.failures;
    j["h"] = s.h;
    j["x0"] = s.x0;
    j["times"] = s.times;
    if (s.has_weak) {
        j["weak_err"] = s.weak_err;
    }
    j["weak_stderr"] = s.weak_stderr;
    j["strong_l1"] = s.strong_l1;
    j["strong_l1_stderr"] = s.strong_l1_stderr;
    j["strong_l2"] = s.strong_l2;
    j["strong_l2_stderr"] = s.strong_l2_stderr;
    return j;
}

int cmd_simulate(const RunConfig& c, json& out) {
    json runs = json::array();
    std::ostringstream combined;
    bool multi = c.schemes.size() > 1;
    combined << (multi ? "scheme,time,mean,sd,stderr,failures\n"
                       : "time,mean,sd,stderr,failures\n");
    std::size_t worst_failures = 0;
    for (const SchemeSpec& s : c.schemes) {
        EnsembleResult ens =
            run_ensemble(scheme_path_for(c, s), reference_path_for(c), ensemble_config(c));
        worst_failures = std::max(worst_failures, ens.failures);
        json r;
        r["scheme"] = s.label;
        r["failures"] = ens.failures;
        json times = json::array(), means = json::array(), sds = json::array();
        std::ostringstream own;
        own << "time,mean,sd,stderr,failures\n";
        for (std::size_t j = 0; j < ens.times.size(); ++j) {
            double n = 0.0, mean = 0.0;
            for (std::size_t q = 0; q < ens.paths; ++q) {
                if (ens.failed[q]) continue;
                mean += ens.scheme_vals[j][q];
                n += 1.0;
            }
            mean = n > 0.0 ? mean / n : std::numeric_limits<double>::quiet_NaN();
            double var = 0.0;
            for (std::size_t q = 0; q < ens.paths; ++q) {
                if (ens.failed[q]) continue;
                double d = ens.scheme_vals[j][q] - mean;
                var += d * d;
            }
            double sd = n > 1.0 ? std::sqrt(var / (n - 1.0)) : 0.0;
            double se = n > 0.0 ? sd / std::sqrt(n) : 0.0;
            times.push_back(ens.times[j]);
            means.push_back(mean);
            sds.push_back(sd);
            std::string row = format_double(ens.times[j]) + "," + format_double(mean) +
                              "," + format_double(sd) + "," + format_double(se) + "," +
                              std::to_string(ens.failures) + "\n";
            own << row;
            combined << (multi ? s.label + "," + row : row);
        }
        r["times"] = times;
        r["mean"] = means;
        r["sd"] = sds;
        runs.push_back(r);
        if (multi) {
            open_out(c.out_prefix + "-" + s.label + ".csv") << own.str();
        }
    }
    open_out(c.out_prefix + ".csv") << combined.str();
    out["runs"] = runs;
    return worst_failures >= c.paths ? 2 : 0;
}

int cmd_errors(const RunConfig& c, json& out) {
    json runs = json::array();
    std::ostringstream combined;
    bool multi = c.schemes.size() > 1;
    if (multi) {
        combined << "scheme,time,weak_err,weak_stderr,strong_l1,strong_l1_stderr,"
                    "strong_l2,strong_l2_stderr,failures\n";
    }
    std::size_t worst_failures = 0;
    bool weak = c.model == "linear";
    for (const SchemeSpec& s : c.schemes) {
        EnsembleResult ens =
            run_ensemble(scheme_path_for(c, s), reference_path_for(c), ensemble_config(c));
        worst_failures = std::max(worst_failures, ens.failures);
        ErrorSeries series = error_series(ens, c.params, c.x0, s.label, weak);
        if (multi) {
            std::ostringstream own;
            write_error_series_csv(series, own);
            open_out(c.out_prefix + "-" + s.label + ".csv") << own.str();
            std::istringstream rows(own.str());
            std::string line;
            std::getline(rows, line);  // drop the header
            while (std::getline(rows, line)) combined << s.label << ',' << line << '\n';
        } else {
            write_error_series_csv(series, combined);
        }
        runs.push_back(series_to_json(series));
    }
    open_out(c.out_prefix + ".csv") << combined.str();
    out["runs"] = runs;
    return worst_failures >= c.paths ? 2 : 0;
}

int cmd_stability(const RunConfig& c, json& out) {
    std::vector<double> grid = c.h_grid;
    if (grid.empty()) grid = {0.00625, 0.0125, 0.025, 0.05};
    json runs = json::array();
    std::ostringstream combined;
    bool multi = c.schemes.size() > 1;
    combined << (multi ? "scheme,h,rate,stable\n" : "h,rate,stable\n");
    for (const SchemeSpec& s : c.schemes) {
        StabilityReport rep =
            stability_scan(s, c.params, c.x0, grid, c.T, c.paths, c.master_seed,
                           c.threshold, c.workers, c.couple_factor);
        json r;
        r["scheme"] = s.label;
        r["h"] = rep.h_grid;
        r["rate"] = rep.rates;
        json flags = json::array();
        for (std::uint8_t f : rep.stable) flags.push_back(f != 0);
        r["stable"] = flags;
        r["threshold"] = rep.threshold;
        runs.push_back(r);
        std::ostringstream own;
        write_stability_csv(rep, own);
        if (multi) open_out(c.out_prefix + "-" + s.label + ".csv") << own.str();
        for (std::size_t j = 0; j < rep.h_grid.size(); ++j) {
            if (multi) combined << s.label << ',';
            combined << format_double(rep.h_grid[j]) << ',' << format_double(rep.rates[j])
                     << ',' << static_cast<int>(rep.stable[j]) << '\n';
        }
    }
    open_out(c.out_prefix + ".csv") << combined.str();
    out["runs"] = runs;
    return 0;
}

// Non-failed terminal samples of scheme and reference at the single out time.
std::pair<std::vector<double>, std::vector<double>> terminal_samples(
    const EnsembleResult& ens) {
    std::vector<double> sv, rv;
    for (std::size_t q = 0; q < ens.paths; ++q) {
        if (ens.failed[q]) continue;
        double s = ens.scheme_vals[0][q], r = ens.ref_vals[0][q];
        if (std::isfinite(s) && std::isfinite(r)) {
            sv.push_back(s);
            rv.push_back(r);
        }
    }
    return {sv, rv};
}

int cmd_tv(const RunConfig& c, json& out) {
    double t = c.t_eval > 0.0 ? c.t_eval : c.T;
    std::vector<std::size_t> ns = c.step_counts;
    if (ns.empty()) ns = {10, 20, 40, 80};
    std::vector<std::pair<std::string, TvReport>> rows;
    json runs = json::array();
    for (const SchemeSpec& s : c.schemes) {
        for (std::size_t n : ns) {
            RunConfig rc = c;
            rc.T = t;
            rc.h = t / static_cast<double>(n);
            rc.out_times = {t};
            EnsembleResult ens = run_ensemble(scheme_path_for(rc, s),
                                              reference_path_for(rc), ensemble_config(rc));
            auto [sv, rv] = terminal_samples(ens);
            if (sv.empty()) return 2;
            TvReport tv = tv_distance(sv, rv, c.bin_count);
            std::string label = s.label + "_N" + std::to_string(n);
            rows.emplace_back(label, tv);
            json r;
            r["scheme"] = s.label;
            r["steps"] = n;
            r["h"] = rc.h;
            r["tv"] = tv.tv;
            r["bins"] = tv.bin_count;
            r["lo"] = tv.lo;
            r["hi"] = tv.hi;
            r["failures"] = ens.failures;
            runs.push_back(r);
        }
    }
    std::ostringstream csv;
    write_tv_csv(rows, csv);
    open_out(c.out_prefix + ".csv") << csv.str();
    out["t"] = t;
    out["runs"] = runs;
    return 0;
}

int cmd_convergence(const RunConfig& c, json& out) {
    double t = c.t_eval > 0.0 ? c.t_eval : c.T;
    std::vector<std::size_t> ns = c.step_counts;
    if (ns.empty()) ns = {10, 20, 40, 80};
    json runs = json::array();
    std::ostringstream csv;
    csv << "scheme,steps,h,strong_l1,strong_l2,weak_err\n";
    for (const SchemeSpec& s : c.schemes) {
        std::vector<double> hs, l1s;
        json points = json::array();
        for (std::size_t n : ns) {
            RunConfig rc = c;
            rc.T = t;
            rc.h = t / static_cast<double>(n);
            rc.out_times = {t};
            EnsembleResult ens = run_ensemble(scheme_path_for(rc, s),
                                              reference_path_for(rc), ensemble_config(rc));
            ErrorSeries series = error_series(ens, c.params, c.x0, s.label,
                                              c.model == "linear");
            double l1 = series.strong_l1[0];
            hs.push_back(rc.h);
            l1s.push_back(l1);
            csv << s.label << ',' << n << ',' << format_double(rc.h) << ','
                << format_double(l1) << ',' << format_double(series.strong_l2[0]) << ','
                << format_double(series.weak_err[0]) << '\n';
            json pt;
            pt["steps"] = n;
            pt["h"] = rc.h;
            pt["strong_l1"] = l1;
            pt["strong_l2"] = series.strong_l2[0];
            pt["weak_err"] = series.weak_err[0];
            pt["failures"] = series.failures;
            points.push_back(pt);
        }
        json r;
        r["scheme"] = s.label;
        r["points"] = points;
        bool fittable = true;
        for (double v : l1s) fittable = fittable && std::isfinite(v) && v > 0.0;
        if (fittable && l1s.size() >= 3) {
            FitResult fit = convergence_fit(hs, l1s);
            r["fit"] = {{"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"max_residual", fit.max_residual}};
        }
        runs.push_back(r);
    }
    open_out(c.out_prefix + ".csv") << csv.str();
    out["t"] = t;
    out["runs"] = runs;
    return 0;
}

int cmd_verify_symmetry(const RunConfig& c, json& out) {
    struct Case {
        std::string name;
        SdeSystem system;
        VectorField field;
        Box window;
    };
    std::vector<Case> cases;
    if (c.model == "tanh") {
        cases.push_back({"tanh", make_tanh_system(c.tanh_a, c.tanh_b),
                         make_tanh_symmetry(), Box{{0.2}, {2.5}}});
    } else {
        SdeSystem aug = make_augmented_linear_system(c.params);
        Box window{{-5.0, 0.5}, {5.0, 2.0}};
        cases.push_back({"y1", aug, make_augmented_symmetry(1), window});
        cases.push_back({"y2", aug, make_augmented_symmetry(2), window});
    }
    std::ostringstream csv;
    csv << "field,point,r1,r2\n";
    double max_res = 0.0;
    json table = json::array();
    for (const Case& cs : cases) {
        for (const Vec& x : sample_box(cs.window)) {
            DeterminingResidual res = determining_residual(cs.system, cs.field, x);
            double r1 = 0.0, r2 = 0.0;
            for (double v : res.r1) r1 = std::max(r1, std::abs(v));
            for (double v : res.r2) r2 = std::max(r2, std::abs(v));
            max_res = std::max(max_res, std::max(r1, r2));
            std::string pt;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (i) pt += ';';
                pt += format_double(x[i]);
            }
            csv << cs.name << ',' << pt << ',' << format_double(r1) << ','
                << format_double(r2) << '\n';
            table.push_back(
                {{"field", cs.name}, {"point", x}, {"r1", r1}, {"r2", r2}});
        }
    }
    open_out(c.out_prefix + ".csv") << csv.str();
    out["residuals"] = table;
    out["max_residual"] = max_res;
    out["tolerance"] = c.tolerance;
    return max_res < c.tolerance ? 0 : 2;
}

int cmd_bounds(const RunConfig& c, json& out) {
    BoundReport rep = make_bound_report(c.params, c.T, c.h);
    std::ostringstream csv;
    csv << "name,value\n";
    auto row = [&csv](const std::string& name, double v) {
        csv << name << ',' << format_double(v) << '\n';
    };
    row("T", rep.T);
    row("h", rep.h);
    row("alpha", rep.alpha);
    csv << "n," << rep.n << '\n';
    row("G1", rep.G1);
    row("G2", rep.G2);
    row("G4", rep.G4);
    for (int i = 0; i < 10; ++i) row("M" + std::to_string(i + 1), rep.M[i]);
    open_out(c.out_prefix + ".csv") << csv.str();
    out["T"] = rep.T;
    out["h"] = rep.h;
    out["alpha"] = rep.alpha;
    out["n"] = rep.n;
    out["G1"] = rep.G1;
    out["G2"] = rep.G2;
    out["G4"] = rep.G4;
    json m = json::array();
    for (double v : rep.M) m.push_back(v);
    out["M"] = m;
    return 0;
}

void fill_default_schemes(RunConfig& c) {
    if (!c.schemes.empty()) return;
    if (c.model == "tanh") {
        c.schemes = {{SchemeKind::Euler, 0.0, "euler"},
                     {SchemeKind::Milstein, 0.0, "milstein"},
                     {SchemeKind::ExactEuler, 0.0, "exact"}};
        return;
    }
    c.schemes = {{SchemeKind::Euler, 0.0, "euler"},
                 {SchemeKind::Milstein, 0.0, "milstein"},
                 {SchemeKind::ExactEuler, 0.0, "exact_k0"}};
    if (c.params.c != 0.0) {
        c.schemes.push_back(
            {SchemeKind::ExactEuler, -c.params.d / c.params.c, "exact_kopt"});
    }
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
    json j = json::parse(text);
    if (j.contains("config") && j["config"].is_object()) j = j["config"];
    RunConfig c;
    if (j.contains("preset")) apply_preset(c, j["preset"].get<std::string>());
    overlay(c, j);
    return c;
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    ExperimentPreset p = figure_preset(name);
    cfg.params = p.params;
    cfg.x0 = p.x0;
    cfg.T = p.T;
    cfg.h = p.h;
    cfg.out_times = p.out_times;
    cfg.schemes = p.schemes;
    cfg.paths = p.paths;
    cfg.couple_factor = p.couple_factor;
    cfg.bin_count = p.bin_count;
    cfg.step_counts = p.step_counts;
    cfg.t_eval = p.tv_time;
    if (cfg.command.empty()) {
        if (name == "fig3") {
            cfg.command = "convergence";
        } else if (name == "fig4") {
            cfg.command = "tv";
        } else {
            cfg.command = "errors";
        }
    }
}

int run_config(const RunConfig& config) {
    RunConfig c = config;
    try {
        validate(c);
        fill_default_schemes(c);
        if (c.out_times.empty()) c.out_times = {c.T};

        json manifest;
        manifest["tool"] = "sdelab";
        manifest["version"] = kVersion;
        manifest["seed"] = c.master_seed;
        manifest["config"] = config_to_json(c);
        open_out(c.out_prefix + ".manifest.json") << manifest.dump(2) << '\n';

        json out;
        out["command"] = c.command;
        out["model"] = c.model;
        out["params"] = manifest["config"]["params"];
        out["x0"] = c.x0;
        out["paths"] = c.paths;
        out["seed"] = c.master_seed;
        int rc = 0;
        if (c.command == "simulate") {
            rc = cmd_simulate(c, out);
        } else if (c.command == "errors") {
            rc = cmd_errors(c, out);
        } else if (c.command == "stability") {
            rc = cmd_stability(c, out);
        } else if (c.command == "tv") {
            rc = cmd_tv(c, out);
        } else if (c.command == "convergence") {
            rc = cmd_convergence(c, out);
        } else if (c.command == "verify-symmetry") {
            rc = cmd_verify_symmetry(c, out);
        } else {
            rc = cmd_bounds(c, out);
        }
        open_out(c.out_prefix + ".json") << out.dump(2) << '\n';
        return rc;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace sdelab
