#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "flowlab/cli.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/evolution_verifier.hpp"
#include "flowlab/homogeneous_flow.hpp"
#include "flowlab/norm_analysis.hpp"
#include "flowlab/rosenau_flow.hpp"
#include "flowlab/suite.hpp"

namespace py = pybind11;
using namespace flowlab;
using frame::DiagonalMetric;
using frame::Geometry;

namespace {

Geometry geometry_of(const std::string& name) { return frame::parse_geometry(name); }

DiagonalMetric metric_of(const std::array<double, 3>& m) { return {m[0], m[1], m[2]}; }

std::vector<std::vector<double>> matrix(const Tensor<2>& t)
{
    std::vector<std::vector<double>> out(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = t(i, j);
    return out;
}

py::dict trajectory_dict(const flow::FlowTrajectory& tr)
{
    std::vector<double> t, a, b, c;
    for (const auto& s : tr.samples) {
        t.push_back(s.t);
        a.push_back(s.metric.A());
        b.push_back(s.metric.B());
        c.push_back(s.metric.C());
    }
    py::dict d;
    d["geometry"] = std::string(frame::to_string(tr.geometry));
    d["t"] = t;
    d["A"] = a;
    d["B"] = b;
    d["C"] = c;
    d["stop_reason"] = std::string(flow::to_string(tr.stop_reason));
    d["T_estimate"] = tr.t_estimate ? py::cast(*tr.t_estimate) : py::none();
    d["density"] = norm::norm_series(tr, norm::DensitySource::Oracle).density;
    return d;
}

}  // namespace

PYBIND11_MODULE(_flowlab, m)
{
    m.doc() = "Cotton-York tensor under homogeneous Ricci flow";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UnsupportedBranch>(m, "UnsupportedBranch", PyExc_ValueError);
    py::register_exception<HypothesisViolated>(m, "HypothesisViolated", PyExc_ArithmeticError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<InvariantBreach>(m, "InvariantBreach", PyExc_RuntimeError);

    m.attr("geometries") = [] {
        std::vector<std::string> names;
        for (Geometry g : frame::kAllGeometries) names.emplace_back(frame::to_string(g));
        return names;
    }();

    m.def(
        "ricci",
        [](const std::string& g, std::array<double, 3> metric) {
            const auto r = frame::ricci(metric_of(metric),
                                        frame::structure_constants(frame::StructureTriple::of(geometry_of(g))));
            return py::make_tuple(matrix(r.ric), r.scalar);
        },
        py::arg("geometry"), py::arg("metric"), "Frame Ricci tensor and scalar curvature.");

    m.def(
        "cotton_york",
        [](const std::string& g, std::array<double, 3> metric) {
            const auto q = frame::analyze(metric_of(metric), frame::StructureTriple::of(geometry_of(g)));
            return matrix(q.c2);
        },
        py::arg("geometry"), py::arg("metric"));

    m.def(
        "cotton_york_closed",
        [](const std::string& g, std::array<double, 3> metric) {
            return norm::cotton_york_closed(geometry_of(g), metric_of(metric));
        },
        py::arg("geometry"), py::arg("metric"), "Diagonal (C11, C22, C33) from the closed forms.");

    m.def(
        "density",
        [](const std::string& g, std::array<double, 3> metric, const std::string& source) {
            if (source == "oracle") return norm::l1_density_oracle(geometry_of(g), metric_of(metric));
            if (source == "closed") return norm::l1_density_closed(geometry_of(g), metric_of(metric));
            throw DomainError("source must be 'oracle' or 'closed'");
        },
        py::arg("geometry"), py::arg("metric"), py::arg("source") = "oracle");

    m.def(
        "flow_rhs",
        [](const std::string& g, std::array<double, 3> metric) {
            return flow::flow_rhs(geometry_of(g), metric_of(metric));
        },
        py::arg("geometry"), py::arg("metric"));

    m.def(
        "simulate",
        [](const std::string& g, std::array<double, 3> initial, double t_end, double sample_stride, double rel_tol,
           double abs_tol) {
            flow::FlowParams p;
            p.t_end = t_end;
            p.sample_stride = sample_stride;
            p.rel_tol = rel_tol;
            p.abs_tol = abs_tol;
            flow::FlowTrajectory tr;
            {
                py::gil_scoped_release release;
                tr = flow::integrate_or_throw(geometry_of(g), metric_of(initial), p);
            }
            auto d = trajectory_dict(tr);
            const auto series = norm::norm_series(tr, norm::DensitySource::Oracle);
            d["verdict"] = std::string(norm::to_string(norm::monotonicity_verdict(series)));
            const auto ext = norm::find_extremum(series, tr);
            d["t0"] = ext.t0 ? py::cast(*ext.t0) : py::none();
            d["ratio_at_t0"] = ext.ratio_at_t0 ? py::cast(*ext.ratio_at_t0) : py::none();
            d["conserved_max_drift"] = flow::max_conserved_drift(tr);
            return d;
        },
        py::arg("geometry"), py::arg("initial"), py::arg("t_end") = 10.0, py::arg("sample_stride") = 1e-2,
        py::arg("rel_tol") = 1e-10, py::arg("abs_tol") = 1e-12,
        "Integrate the flow; returns samples, density series, verdict and extremum.");

    m.def(
        "heisenberg_closed_form",
        [](std::array<double, 3> initial, double t) {
            return flow::heisenberg_closed_form(metric_of(initial), t).components();
        },
        py::arg("initial"), py::arg("t"));

    m.def(
        "verify",
        [](std::uint64_t seed, std::size_t samples) {
            suite::VerificationReport rep;
            {
                py::gil_scoped_release release;
                rep = suite::run_verification(seed, samples);
            }
            py::dict d;
            d["pass"] = rep.all_pass();
            d["thm21_verdict"] = std::string(verify::to_string(rep.l1_verdict));
            d["heisenberg_ratio"] = py::make_tuple(rep.heisenberg_ratio_min, rep.heisenberg_ratio_max);
            py::dict checks;
            for (const auto& c : rep.checks) checks[py::str(c.name)] = py::make_tuple(c.value, c.tolerance, c.pass);
            d["checks"] = checks;
            return d;
        },
        py::arg("seed") = suite::kDefaultSeed, py::arg("samples") = 100);

    m.def(
        "rosenau_l1",
        [](double t) {
            const auto q = rosenau::l1_norm(t);
            return py::make_tuple(q.value, rosenau::l1_closed_form(t));
        },
        py::arg("t"), "Quadrature and closed-form L1 norm of the Rosenau product metric.");

    m.def("rosenau_cotton_york_23", &rosenau::cotton_york_23, py::arg("x"), py::arg("t"));

    m.def(
        "table1",
        [](unsigned jobs) {
            std::vector<suite::SweepOutcome> res;
            {
                py::gil_scoped_release release;
                res = suite::run_sweep(suite::table1_items(), jobs);
            }
            py::list rows;
            for (const auto& r : res) {
                py::dict d;
                d["row"] = r.item.row;
                d["geometry"] = std::string(frame::to_string(r.item.geometry));
                d["initial"] = r.item.initial.components();
                d["verdict"] = std::string(norm::to_string(r.verdict));
                d["expected"] = std::string(norm::to_string(r.item.expected));
                d["match"] = r.match;
                rows.append(d);
            }
            return rows;
        },
        py::arg("jobs") = 1);

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "flowlab");
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line front end in-process; returns (exit code, stdout, stderr).");
}
