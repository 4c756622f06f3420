#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mtrace/catalog.hpp"
#include "mtrace/ecurve.hpp"
#include "mtrace/errors.hpp"
#include "mtrace/ltconst.hpp"
#include "mtrace/modcurve.hpp"
#include "mtrace/mtclassify.hpp"
#include "mtrace/qpoly.hpp"

namespace py = pybind11;
using namespace mtrace;

namespace {

using PyMat = std::array<std::array<i64, 2>, 2>;

PyMat to_py(const Mat& x) { return {{{x.a, x.b}, {x.c, x.d}}}; }

Rat to_rat(const std::string& s) {
    Rat q;
    if (q.set_str(s, 10) != 0) throw py::value_error("not a rational number: " + s);
    q.canonicalize();
    return q;
}

Group make_group(const std::vector<PyMat>& gens, u32 m) {
    std::vector<Mat> ms;
    for (const auto& g : gens) ms.push_back(Mat::make(g[0][0], g[0][1], g[1][0], g[1][1], m));
    return Group::close(ms, m);
}

std::map<std::string, i64> genus_dict(const GenusReport& g) {
    return {{"index", static_cast<i64>(g.mu)}, {"nu2", static_cast<i64>(g.nu2)}, {"nu3", static_cast<i64>(g.nu3)},
            {"cusps", static_cast<i64>(g.cusps)}, {"genus", g.genus}};
}

py::dict census_dict(const TraceCensus& c) {
    py::dict d;
    d["primes"] = c.primes;
    d["sequence"] = c.sequence;
    d["counts"] = c.counts;
    d["missing"] = c.missing();
    return d;
}

}  // namespace

PYBIND11_MODULE(mtrace, m) {
    m.doc() = "Missing-trace groups of genus zero and their elliptic-curve families";

    py::register_exception<Error>(m, "MtraceError", PyExc_ValueError);

    m.def("canonical", [](const std::string& text) { return to_string(parse_expr(text)); }, py::arg("expr"));
    m.def(
        "evaluate",
        [](const std::string& text, const std::string& t, const std::string& d) {
            return eval_expr(parse_expr(text), to_rat(t), to_rat(d)).get_str();
        },
        py::arg("expr"), py::arg("t"), py::arg("D") = "1");
    m.def(
        "compose",
        [](const std::string& outer, const std::string& inner) {
            return to_string(compose(parse_expr(outer), parse_expr(inner)));
        },
        py::arg("outer"), py::arg("inner"));
    m.def(
        "identity_check",
        [](const std::string& lhs, const std::string& rhs) { return identity_check(parse_expr(lhs), parse_expr(rhs)); },
        py::arg("lhs"), py::arg("rhs"));

    py::class_<Group>(m, "Group")
        .def(py::init(&make_group), py::arg("gens"), py::arg("m"))
        .def_property_readonly("modulus", &Group::modulus)
        .def_property_readonly("order", &Group::order)
        .def_property_readonly("gl2_level", &Group::gl2_level)
        .def_property_readonly("sl2_level", &Group::sl2_level)
        .def_property_readonly("minus_identity", &Group::contains_minus_identity)
        .def("gens", [](const Group& g) {
            std::vector<PyMat> out;
            for (const auto& x : small_generating_set(g)) out.push_back(to_py(x));
            return out;
        })
        .def("missing_traces", [](const Group& g, u32 d) { return missing_traces(g, d); }, py::arg("d"))
        .def("trace_fibers", [](const Group& g, u32 d) { return trace_fibers(g, d); }, py::arg("d"))
        .def("genus", [](const Group& g) { return genus_dict(genus(adjoin_minus_identity(g))); })
        .def("rational_point_test", [](const Group& g) { return sz_rational_point_test(g); })
        .def("reduce", [](const Group& g, u32 d) { return reduce_group(g, d); }, py::arg("d"))
        .def("is_conjugate", [](const Group& g, const Group& h) { return conjugacy(g, h, ConjMode::equal).holds; });

    m.def(
        "classify",
        [](u32 level, i64 genus_bound, unsigned threads) {
            ClassifyOptions opts;
            opts.genus = genus_bound;
            opts.threads = threads;
            return classify(level, opts);
        },
        py::arg("level"), py::arg("genus") = 0, py::arg("threads") = 1);

    m.def(
        "catalog_group",
        [](const std::string& label, const std::string& path) {
            auto groups = load_groups(path.empty() ? default_data_dir() + "/groups.json" : path);
            const GroupRecord* r = find_group(groups, label);
            if (!r) throw py::key_error(label);
            return r->group();
        },
        py::arg("label"), py::arg("path") = "");

    m.def(
        "census_long",
        [](const std::array<std::string, 5>& coeffs, unsigned mod, u64 bound) {
            LongModel w;
            for (int i = 0; i < 5; ++i) w[i] = to_rat(coeffs[i]);
            return census_dict(trace_census(Curve::from_long(w), mod, bound, false));
        },
        py::arg("coeffs"), py::arg("mod"), py::arg("bound"));
    m.def(
        "census_family",
        [](const std::string& j, const std::string& d, const std::string& t0, const std::string& d0, unsigned mod,
           u64 bound) {
            Curve e = specialize(parse_expr(j), parse_expr(d), to_rat(t0), to_rat(d0));
            return census_dict(trace_census(e, mod, bound, true));
        },
        py::arg("j"), py::arg("d"), py::arg("t"), py::arg("D"), py::arg("mod"), py::arg("bound"));
    m.def(
        "ap",
        [](const std::string& a, const std::string& b, u64 p) { return ap(Curve(to_rat(a), to_rat(b)), p); },
        py::arg("A"), py::arg("B"), py::arg("p"));

    m.def("euler_factor", [](u32 l, i64 r) { return euler_factor(l, r).get_str(); }, py::arg("l"), py::arg("r"));
    m.def("gl2_trace_count", &gl2_trace_count, py::arg("l"), py::arg("r"));
}
