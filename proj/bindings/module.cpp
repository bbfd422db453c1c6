#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wkbsq/pipeline.hpp"

namespace py = pybind11;
using namespace wkbsq;

namespace {

using C = std::complex<double>;

ConicRegion cone_from_name(const std::string& kind, double lo, double hi) {
    if (kind == "half_plane") return ConicRegion::half_plane_re_ge0();
    if (kind == "ray") return ConicRegion::ray_re_ge0();
    if (kind == "arc") return ConicRegion::arc(Angle::radians(lo), Angle::radians(hi), true);
    throw ParseError("unknown cone kind '" + kind + "'");
}

NovikovElement nv_from_terms(const std::vector<std::pair<C, C>>& terms,
                             const ConicRegion& cone, double cutoff) {
    std::vector<NovikovTerm> ts;
    for (const auto& [e, c] : terms) ts.push_back({Scalar(e), Scalar(c)});
    return NovikovElement(cone, cutoff, ts);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Novikov-ring arithmetic, exact-WKB Stokes geometry and "
              "sheaf-quantization data";

    py::register_exception<Error>(m, "WkbsqError");

    py::class_<ConicRegion>(m, "Cone")
        .def_static("half_plane", [] { return ConicRegion::half_plane_re_ge0(); })
        .def_static("ray", [] { return ConicRegion::ray_re_ge0(); })
        .def_static(
            "arc",
            [](double lo, double hi) {
                return ConicRegion::arc(Angle::radians(lo), Angle::radians(hi), true);
            },
            py::arg("lo"), py::arg("hi"))
        .def("is_acute", [](const ConicRegion& c) { return is_acute(c); })
        .def("hull", [](const ConicRegion& c) { return hull(c); })
        .def("polar_dual", [](const ConicRegion& c) { return polar_dual(c); })
        .def("contains_direction",
             [](const ConicRegion& c, double theta) {
                 return c.contains_direction(Angle::radians(theta));
             })
        .def("total_aperture", &ConicRegion::total_aperture)
        .def("arcs", [](const ConicRegion& c) {
            std::vector<std::pair<double, double>> out;
            for (const Arc& a : c.arcs()) out.emplace_back(a.lo.rad(), a.hi.rad());
            return out;
        });

    m.def(
        "cone_of",
        [](const std::vector<std::pair<double, double>>& sectors) {
            std::vector<Sector> ss;
            for (auto [lo, hi] : sectors)
                ss.emplace_back(Angle::radians(lo), Angle::radians(hi), 1.0);
            return cone_of(ss);
        },
        "Cone of a sectoroid given as (theta1, theta2) windows");
    m.def("is_gamma_finite", [](const std::vector<C>& exps, const ConicRegion& gamma) {
        std::vector<Scalar> s;
        for (auto e : exps) s.push_back(Scalar(e));
        return is_gamma_finite(s, gamma);
    });

    py::class_<NovikovElement>(m, "Novikov")
        .def(py::init([](const std::vector<std::pair<C, C>>& terms, const ConicRegion& cone,
                         double cutoff) { return nv_from_terms(terms, cone, cutoff); }),
             py::arg("terms"), py::arg("cone"), py::arg("cutoff"))
        .def("__add__", &nv_add)
        .def("__sub__", &nv_sub)
        .def("__mul__", &nv_mul)
        .def("inverse", &nv_invert)
        .def("valuation", &nv_valuation)
        .def("restrict", &nv_restrict)
        .def("eval", &nv_eval, py::arg("hbar"))
        .def("terms",
             [](const NovikovElement& a) {
                 std::vector<std::pair<C, C>> out;
                 for (const auto& t : a.terms())
                     out.emplace_back(t.exponent.to_complex(), t.coeff.to_complex());
                 return out;
             })
        .def("is_zero", &NovikovElement::is_zero)
        .def("__eq__", [](const NovikovElement& a, const NovikovElement& b) { return a == b; })
        .def("__repr__", [](const NovikovElement& a) { return a.str(); });

    m.def(
        "wkb_terms",
        [](const std::string& q, int N) {
            WkbSeries s = wkb_recursion(parse_ratfunc(q, true), N);
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& t : s.terms) out.emplace_back(t.a.str(), t.b.str());
            return out;
        },
        py::arg("q"), py::arg("order"),
        "S_n of the Riccati recursion as (rational, sqrt(Q)) string pairs");
    m.def(
        "wkb_eval",
        [](const std::string& q, int N, C x, C hbar, int branch) {
            WkbSeries s = wkb_recursion(parse_ratfunc(q, true), N);
            return wkb_series_eval(s, x, hbar, branch);
        },
        py::arg("q"), py::arg("order"), py::arg("x"), py::arg("hbar"),
        py::arg("branch") = 1);
    m.def("turning_points", [](const std::string& q) {
        return turning_points(Potential::schrodinger(parse_ratfunc(q, true)));
    });

    m.def(
        "trace_graph",
        [](const std::string& q, double theta, double c_max, bool regions) {
            Potential p = Potential::schrodinger(parse_ratfunc(q, true));
            StokesGraph g = trace_stokes_curves(p, theta, c_max);
            if (regions) detect_regions(g);
            return graph_to_json(g).dump();
        },
        py::arg("q"), py::arg("theta") = 0.0, py::arg("c_max") = 1e6,
        py::arg("regions") = true, "Stokes graph as a JSON string");

    m.def(
        "run_problem",
        [](const std::string& problem_json, const std::vector<std::string>& stages) {
            ProblemSpec spec = ProblemSpec::from_json(Json::parse(problem_json));
            std::set<std::string> st(stages.begin(), stages.end());
            return run_pipeline(spec, st);
        },
        py::arg("problem_json"), py::arg("stages"),
        "Run pipeline stages for a problem document (JSON text)");

    m.attr("__version__") = "0.1.0";
}
