// Python bindings for the main operations.  Structured inputs and outputs
// cross the boundary as JSON strings; the package wrapper turns them into
// dicts and Fractions so every value stays exact.

#include "orderdens/jsonio.hpp"
#include "orderdens/verify.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace od = orderdens;

namespace {

od::ImageType image_or_throw(const std::string& s) {
    auto img = od::parse_image(s);
    if (!img) throw std::invalid_argument("unknown image type \"" + s + "\"");
    return *img;
}

std::string closed_density_str(const std::string& image, int64_t ell, int defect) {
    return od::closed_density(image_or_throw(image), ell, defect).str();
}

std::string derived_series_density_str(const std::string& image, int64_t ell, int defect,
                                       int threads) {
    return od::derived_series_density(image_or_throw(image), ell, defect, threads).str();
}

std::string measure_table_str(const std::string& spec_json, int threads) {
    od::MatrixGroupLevel g = od::build_group(od::Json::parse(spec_json));
    return od::measure_table_json(od::measure_table(g, threads)).dump();
}

std::string tail_model_str(const std::string& spec_json, int threads) {
    od::Json spec = od::Json::parse(spec_json);
    od::MatrixGroupLevel lo = od::build_group(spec);
    od::Json hi_spec = spec;
    hi_spec["level"] = spec.at("level").get<int>() + 1;
    od::MatrixGroupLevel hi = od::build_group(hi_spec);
    od::TailModel model = od::fit_tail(od::measure_table(lo, threads),
                                       od::measure_table(hi, threads));
    return od::tail_model_json(model).dump();
}

std::string group_series_str(const std::string& spec_json, int defect, int threads) {
    od::Json spec = od::Json::parse(spec_json);
    od::MatrixGroupLevel lo = od::build_group(spec);
    od::Json hi_spec = spec;
    hi_spec["level"] = spec.at("level").get<int>() + 1;
    od::MatrixGroupLevel hi = od::build_group(hi_spec);
    od::TailModel model = od::fit_tail(od::measure_table(lo, threads),
                                       od::measure_table(hi, threads));
    int64_t ell = spec.at("ell").get<int64_t>();
    od::Rational f(od::pow_big(od::BigInt(ell), 2LL * defect));
    return od::sum_series(model, ell, f, od::DefectRule{defect}).str();
}

std::string simulate_str(const std::string& spec_json) {
    od::ArborealGroupLevel a = od::build_arboreal(od::Json::parse(spec_json));
    od::Rational tail = od::singular_mass(a.matrix_projection(), a.mod().level);
    auto [lo, hi] = a.density_interval(tail);
    od::Json j = od::interval_json(lo, hi, a.mod().ell, a.mod().level);
    j["failure_constant"] = a.failure_constant().str();
    return j.dump();
}

std::string empirical_str(const std::string& spec_json, int64_t ell, long long bound,
                          int scale, int threads) {
    auto [curve, point] = od::build_curve(od::Json::parse(spec_json));
    return od::sweep_json(od::empirical_density(curve, point, ell, bound, scale, threads))
        .dump();
}

std::string verify_str(bool skip_empirical, int threads, long long bound) {
    od::VerifyOptions opts;
    opts.skip_empirical = skip_empirical;
    opts.threads = threads;
    opts.empirical_bound = bound;
    od::Json out = od::Json::array();
    for (const auto& r : od::run_acceptance(opts))
        out.push_back({{"id", r.id},
                       {"name", r.name},
                       {"pass", r.pass},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
    return out.dump();
}

py::object v_ell_py(const std::string& x, int64_t ell) {
    auto v = od::v_ell(od::Rational::parse(x), od::BigInt(ell));
    if (!v) return py::none();
    return py::int_(*v);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "exact densities of primes with point order coprime to ell";

    m.def("closed_density", &closed_density_str, py::arg("image"), py::arg("ell"),
          py::arg("defect") = 0,
          "Closed-formula density for gl2/split/nonsplit/norm-split/norm-nonsplit, as 'num/den'.");
    m.def("derived_series_density", &derived_series_density_str, py::arg("image"),
          py::arg("ell"), py::arg("defect") = 0, py::arg("threads") = 1,
          "Series density from enumerated measure tables and fitted tails.");
    m.def("measure_table_json", &measure_table_str, py::arg("group_spec_json"),
          py::arg("threads") = 1);
    m.def("tail_model_json", &tail_model_str, py::arg("group_spec_json"), py::arg("threads") = 1);
    m.def("group_series_density", &group_series_str, py::arg("group_spec_json"),
          py::arg("defect") = 0, py::arg("threads") = 1);
    m.def("simulate_json", &simulate_str, py::arg("arboreal_spec_json"));
    m.def("empirical_json", &empirical_str, py::arg("curve_spec_json"), py::arg("ell"),
          py::arg("bound") = 100000, py::arg("scale") = 0, py::arg("threads") = 1);
    m.def("verify_json", &verify_str, py::arg("skip_empirical") = true, py::arg("threads") = 2,
          py::arg("bound") = 100000);
    m.def("v_ell", &v_ell_py, py::arg("x"), py::arg("ell"),
          "ell-adic valuation of the rational x ('num/den'); None means +infinity.");
    m.def("geometric_tail",
          [](int64_t ell, long long step, long long start) {
              return od::geometric_tail(od::BigInt(ell), step, start).str();
          },
          py::arg("ell"), py::arg("step"), py::arg("start"));
    m.def("decimal",
          [](const std::string& x, int digits) {
              return od::Rational::parse(x).decimal(digits);
          },
          py::arg("x"), py::arg("digits") = 5);
}
