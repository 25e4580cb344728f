#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pinnsolve/cli.hpp"
#include "pinnsolve/expression.hpp"
#include "pinnsolve/geometry.hpp"
#include "pinnsolve/solvers.hpp"

namespace py = pybind11;
using namespace pinnsolve;

namespace {

const char* category_name(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Admissibility: return "admissibility";
    case ErrorCategory::Divergence: return "divergence";
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Argument: return "argument";
    }
    return "?";
}

cli::RunConfig checked(const std::string& text) {
    auto loaded = cli::parse_config(text);
    if (!loaded.issues.empty()) throw Error(loaded.issues.front().category, loaded.issues.front().message);
    return loaded.config;
}

py::dict field_dict(const SolutionField& f) {
    py::dict d;
    for (std::size_t a = 0; a < f.axes.size(); ++a) d[py::str(f.axes[a])] = Eigen::VectorXd(f.points.row(static_cast<Eigen::Index>(a)));
    for (std::size_t v = 0; v < f.variables.size(); ++v) {
        d[py::str(f.variables[v])] = Eigen::VectorXd(f.values.row(static_cast<Eigen::Index>(v)));
        if (f.analytic) d[py::str(f.variables[v] + "_exact")] = Eigen::VectorXd(f.analytic->row(static_cast<Eigen::Index>(v)));
    }
    if (!f.window.empty()) d["window"] = f.window;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings for the pinnsolve C++ library";

    static py::handle error = py::exception<Error>(m, "Error").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
            exc.attr("category") = category_name(e.category());
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def(
        "main",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::main(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line front end in-process; returns (exit code, stdout, stderr).");

    m.def(
        "validate",
        [](const std::string& text) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& i : cli::parse_config(text).issues) out.emplace_back(category_name(i.category), i.message);
            return out;
        },
        py::arg("config_text"));

    m.def(
        "parse_equation",
        [](const std::string& source, const std::vector<std::string>& dependent,
           const std::vector<std::string>& independent) {
            expr::VarConfig c;
            c.dependent = dependent;
            c.independent = independent;
            const auto ast = expr::parse(expr::normalize_source(source), c);
            std::vector<std::string> needs;
            for (const auto& r : expr::derivative_requirements(ast)) needs.push_back(c.dependent[static_cast<std::size_t>(r.variable)] + expr::suffix(r, c));
            return py::make_tuple(expr::to_string(ast), needs);
        },
        py::arg("source"), py::arg("dependent") = std::vector<std::string>{"u"},
        py::arg("independent") = std::vector<std::string>{"t", "x"},
        "Returns (canonical rendering, required derivative names).");

    m.def(
        "latin_hypercube",
        [](std::size_t n, const std::vector<std::pair<double, double>>& bounds, std::uint64_t seed) {
            std::vector<Interval> iv;
            for (auto [lo, hi] : bounds) iv.push_back({lo, hi});
            return latin_hypercube(n, iv, seed);
        },
        py::arg("n"), py::arg("bounds"), py::arg("seed"), "Points as a (dims, n) array.");

    py::class_<SolutionHandle>(m, "Solution")
        .def_property_readonly("loss", [](const SolutionHandle& h) {
            py::dict d;
            d["residual"] = h.report.residual;
            d["initial"] = h.report.initial;
            d["boundary"] = h.report.boundary;
            d["composite"] = h.report.composite;
            return d;
        })
        .def_property_readonly("parameter_count", [](const SolutionHandle& h) { return h.params.size(); })
        .def(
            "evaluate",
            [](const SolutionHandle& h, const Eigen::MatrixXd& points) {
                std::optional<Eigen::VectorXd> branch;
                if (h.spec.model == ModelKind::DeepOnet) branch = default_sensor_values(h);
                return evaluate(h, points, branch);
            },
            py::arg("points"), "Prediction (variables, n) at points given as (dims, n).")
        .def(
            "time_step",
            [](const SolutionHandle& h, int steps, const std::vector<int>& resolution) {
                return field_dict(time_step(h, steps, resolution));
            },
            py::arg("steps"), py::arg("resolution"));

    m.def(
        "solve",
        [](const std::string& text, std::optional<std::size_t> epochs, std::optional<std::uint64_t> seed) {
            cli::RunConfig c = checked(text);
            cli::Overrides o;
            o.seed = seed;
            cli::apply(c, o);
            if (epochs) c.spec.training.epochs = *epochs;
            py::gil_scoped_release release;
            return solve(c.spec);
        },
        py::arg("config_text"), py::arg("epochs") = py::none(), py::arg("seed") = py::none(),
        "Train the problem described by a config file's text.");
}
