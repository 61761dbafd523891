#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdelab/cli.hpp"
#include "sdelab/experiments.hpp"
#include "sdelab/linear_oracle.hpp"
#include "sdelab/noise.hpp"
#include "sdelab/schemes.hpp"

namespace py = pybind11;
using namespace sdelab;

namespace {

SchemeSpec spec_from(const std::string& kind, double k) {
    SchemeSpec s;
    if (kind == "euler") {
        s.kind = SchemeKind::Euler;
    } else if (kind == "milstein") {
        s.kind = SchemeKind::Milstein;
    } else if (kind == "exact_euler" || kind == "exact") {
        s.kind = SchemeKind::ExactEuler;
    } else if (kind == "exact_milstein") {
        s.kind = SchemeKind::ExactMilstein;
    } else {
        throw std::invalid_argument("unknown scheme kind: " + kind);
    }
    s.k = k;
    s.label = kind;
    return s;
}

py::dict series_dict(const ErrorSeries& s) {
    py::dict d;
    d["times"] = s.times;
    d["weak_err"] = s.weak_err;
    d["weak_stderr"] = s.weak_stderr;
    d["strong_l1"] = s.strong_l1;
    d["strong_l1_stderr"] = s.strong_l1_stderr;
    d["strong_l2"] = s.strong_l2;
    d["strong_l2_stderr"] = s.strong_l2_stderr;
    d["paths"] = s.paths;
    d["failures"] = s.failures;
    d["scheme"] = s.scheme_label;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "numerical laboratory for stochastic differential equations";

    py::class_<LinearSdeParams>(m, "LinearSdeParams")
        .def(py::init<>())
        .def(py::init([](double a, double b, double c, double d) {
                 return LinearSdeParams{a, b, c, d};
             }),
             py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
        .def_readwrite("a", &LinearSdeParams::a)
        .def_readwrite("b", &LinearSdeParams::b)
        .def_readwrite("c", &LinearSdeParams::c)
        .def_readwrite("d", &LinearSdeParams::d);

    m.def("mean_curve", &mean_curve, py::arg("params"), py::arg("x0"), py::arg("t"));
    m.def("second_moment_curve", &second_moment_curve, py::arg("params"), py::arg("x0"),
          py::arg("t"));
    m.def("lognormal_moment", &lognormal_moment, py::arg("alpha"), py::arg("beta"),
          py::arg("t"));

    m.def("exact_euler_step", &exact_euler_linear_step, py::arg("params"), py::arg("k"),
          py::arg("x"), py::arg("dt"), py::arg("dw"));
    m.def("exact_milstein_step", &exact_milstein_linear_step, py::arg("params"),
          py::arg("k"), py::arg("x"), py::arg("dt"), py::arg("dw"));
    m.def("levy_term", &levy_term, py::arg("dw"), py::arg("dt"));
    m.def("inverse_normal_cdf", &inverse_normal_cdf, py::arg("p"));

    m.def(
        "normal_draw",
        [](std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t counter) {
            return normal_draw({master_seed, path_index}, counter);
        },
        py::arg("master_seed"), py::arg("path_index"), py::arg("counter"));

    m.def(
        "sample_increments",
        [](std::uint64_t master_seed, std::uint64_t path_index, double T, double h) {
            return sample_path({master_seed, path_index}, T, h, 1).increments;
        },
        py::arg("master_seed"), py::arg("path_index"), py::arg("T"), py::arg("h"));

    m.def(
        "select_alpha",
        [](const LinearSdeParams& p) {
            AlphaSelection s = select_alpha(p);
            return py::make_tuple(s.alpha, s.n);
        },
        py::arg("params"));

    m.def(
        "bound_report",
        [](const LinearSdeParams& p, double T, double h) {
            BoundReport r = make_bound_report(p, T, h);
            py::dict d;
            d["T"] = r.T;
            d["h"] = r.h;
            d["alpha"] = r.alpha;
            d["n"] = r.n;
            d["G1"] = r.G1;
            d["G2"] = r.G2;
            d["G4"] = r.G4;
            py::list mm;
            for (double v : r.M) mm.append(v);
            d["M"] = mm;
            return d;
        },
        py::arg("params"), py::arg("T"), py::arg("h"));

    m.def(
        "tv_distance",
        [](const std::vector<double>& a, const std::vector<double>& b,
           std::size_t bins) { return tv_distance(a, b, bins).tv; },
        py::arg("a"), py::arg("b"), py::arg("bins") = 200);

    m.def(
        "convergence_fit",
        [](const std::vector<double>& hs, const std::vector<double>& errs) {
            FitResult f = convergence_fit(hs, errs);
            return py::make_tuple(f.slope, f.intercept, f.max_residual);
        },
        py::arg("h_values"), py::arg("errors"));

    m.def(
        "error_series",
        [](const LinearSdeParams& p, double x0, double T, double h, std::size_t paths,
           std::uint64_t seed, const std::string& scheme, double k,
           std::size_t couple_factor, std::size_t workers,
           std::vector<double> out_times) {
            SchemeSpec s = spec_from(scheme, k);
            EnsembleConfig cfg;
            cfg.x0 = x0;
            cfg.T = T;
            cfg.h = h;
            cfg.paths = paths;
            cfg.master_seed = seed;
            cfg.couple_factor = couple_factor;
            cfg.workers = workers;
            cfg.out_times = std::move(out_times);
            EnsembleResult ens = run_ensemble(make_linear_scheme_path(s, p),
                                              make_linear_reference(p), cfg);
            return series_dict(error_series(ens, p, x0, s.label));
        },
        py::arg("params"), py::arg("x0"), py::arg("T"), py::arg("h"), py::arg("paths"),
        py::arg("seed"), py::arg("scheme") = "euler", py::arg("k") = 0.0,
        py::arg("couple_factor") = 64, py::arg("workers") = 1,
        py::arg("out_times") = std::vector<double>{});

    m.def(
        "run_config_json",
        [](const std::string& text) { return run_config(parse_config_json(text)); },
        py::arg("text"));
}
