#include "orderdens/jsonio.hpp"

#include <cmath>
#include <fstream>

namespace orderdens {

namespace {

std::vector<ResidueMatrix> parse_generators(const Modulus& mod, const Json& j) {
    std::vector<ResidueMatrix> gens;
    for (const auto& g : j) gens.push_back(matrix_from_json(mod, g));
    return gens;
}

} // namespace

ResidueMatrix matrix_from_json(const Modulus& mod, const Json& j) {
    if (!j.is_array() || j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
        throw std::invalid_argument("matrix spec must be [[m11,m12],[m21,m22]]");
    return ResidueMatrix::from_entries(mod, j[0][0].get<int64_t>(), j[0][1].get<int64_t>(),
                                       j[1][0].get<int64_t>(), j[1][1].get<int64_t>());
}

Json matrix_json(const ResidueMatrix& m) {
    return Json::array({Json::array({m.e[0], m.e[1]}), Json::array({m.e[2], m.e[3]})});
}

MatrixGroupLevel build_group(const Json& spec) {
    int64_t ell = spec.at("ell").get<int64_t>();
    int level = spec.at("level").get<int>();
    std::string mode = spec.at("mode").get<std::string>();

    auto cartan_params = [&]() {
        CartanParams p;
        p.d = spec.value("d", int64_t{1});
        p.r = spec.value("r", int64_t{0});
        return p;
    };

    if (mode == "full") return gl2_full(ell, level);
    if (mode == "cartan") return cartan(ell, level, cartan_params());
    if (mode == "normalizer") return normalizer_cartan(cartan(ell, level, cartan_params()));
    if (mode == "generated") {
        Modulus mod = Modulus::make(ell, level);
        return generated_subgroup(ell, level, parse_generators(mod, spec.at("generators")));
    }
    if (mode == "preimage") {
        int base_level = spec.value("base_level", 1);
        Json base_spec = spec;
        base_spec["level"] = base_level;
        base_spec["mode"] = spec.value("base_mode",
                                       spec.contains("generators") ? std::string("generated")
                                                                   : std::string("full"));
        MatrixGroupLevel base = build_group(base_spec);
        std::string lift = spec.value("lift", std::string("full"));
        if (lift == "full") return preimage_group(base, level);
        if (lift == "cartan") {
            if (!base.frame && !base.cartan_params) {
                auto frame = detect_normalizer_frame(base);
                if (!frame)
                    throw std::invalid_argument(
                        "group spec: cartan lift needs a normalizer-structured base");
                base.frame = frame;
            }
            return cartan_preimage(base, level);
        }
        throw std::invalid_argument("group spec: lift must be \"full\" or \"cartan\"");
    }
    throw std::invalid_argument("group spec: unknown mode \"" + mode + "\"");
}

ArborealGroupLevel build_arboreal(const Json& spec) {
    int64_t ell = spec.at("ell").get<int64_t>();
    int level = spec.at("level").get<int>();
    const Json& kummer = spec.at("kummer");
    std::string mode = kummer.at("mode").get<std::string>();
    if (mode == "defect") {
        Json image_spec = spec.at("image");
        image_spec["level"] = level; // the image is taken at the arboreal level
        MatrixGroupLevel image = build_group(image_spec);
        return ArborealGroupLevel::standard(std::move(image), kummer.at("d").get<int>());
    }
    if (mode == "explicit") {
        Modulus mod = Modulus::make(ell, level);
        std::vector<ArborealElement> gens;
        for (const auto& e : kummer.at("elements")) {
            ArborealElement el{Vec2{e.at(0).at(0).get<int64_t>(), e.at(0).at(1).get<int64_t>()},
                               matrix_from_json(mod, e.at(1))};
            el.t[0] = ((el.t[0] % mod.m) + mod.m) % mod.m;
            el.t[1] = ((el.t[1] % mod.m) + mod.m) % mod.m;
            gens.push_back(el);
        }
        return ArborealGroupLevel::generated(ell, level, gens);
    }
    throw std::invalid_argument("arboreal spec: kummer mode must be defect or explicit");
}

std::pair<CurveQ, PointQ> build_curve(const Json& spec) {
    const Json& a = spec.at("a");
    if (a.size() != 5) throw std::invalid_argument("curve spec: \"a\" must be [a1,a2,a3,a4,a6]");
    CurveQ c;
    c.a1 = a[0].get<int64_t>();
    c.a2 = a[1].get<int64_t>();
    c.a3 = a[2].get<int64_t>();
    c.a4 = a[3].get<int64_t>();
    c.a6 = a[4].get<int64_t>();
    c.label = spec.value("label", std::string());
    PointQ p{spec.at("point")[0].get<int64_t>(), spec.at("point")[1].get<int64_t>()};
    if (c.discriminant().is_zero()) throw std::invalid_argument("curve spec: singular curve");
    if (!on_curve(c, p)) throw std::invalid_argument("curve spec: point is not on the curve");
    return {c, p};
}

Json measure_table_json(const MeasureTable& t) {
    Json entries = Json::array();
    for (const auto& [cell, mu] : t.mu)
        entries.push_back({{"a", cell.first}, {"b", cell.second}, {"mu", mu.str()}});
    return Json{{"ell", t.ell},
                {"level", t.level},
                {"group", t.group_tag},
                {"entries", entries},
                {"undetermined", t.undetermined.str()}};
}

Json tail_model_json(const TailModel& m) {
    Json grid = Json::array();
    for (const auto& [cell, mu] : m.grid)
        grid.push_back({{"a", cell.first}, {"b", cell.second}, {"mu", mu.str()}});
    Json pieces = Json::array();
    for (const auto& p : m.pieces) {
        Json piece{{"c", p.c.str()}, {"alpha", p.alpha}, {"beta", p.beta}};
        if (p.a_range.is_tail) piece["a_from"] = p.a_range.from;
        else piece["a_set"] = p.a_range.points;
        if (p.b_range.is_tail) piece["b_from"] = p.b_range.from;
        else piece["b_set"] = p.b_range.points;
        pieces.push_back(piece);
    }
    return Json{{"ell", m.ell}, {"grid", grid}, {"pieces", pieces}};
}

Json density_json(const Rational& value, const std::string& method, int64_t ell, int defect,
                  const std::string& image) {
    return Json{{"value", value.str()},  {"decimal", value.decimal(5)}, {"method", method},
                {"ell", ell},            {"defect", defect},            {"image", image}};
}

Json interval_json(const Rational& lo, const Rational& hi, int64_t ell, int level) {
    return Json{{"lo", lo.str()},           {"hi", hi.str()},
                {"lo_decimal", lo.decimal(5)}, {"hi_decimal", hi.decimal(5)},
                {"method", "interval"},    {"ell", ell},
                {"level", level}};
}

Json sweep_json(const SweepReport& r) {
    Json j{{"label", r.label},
           {"ell", r.ell},
           {"bound", r.bound},
           {"scale", r.scale},
           {"primes_used", r.primes_used},
           {"primes_skipped", r.primes_skipped},
           {"count_coprime", r.count_coprime},
           {"frequency", r.frequency}};
    if (r.exact_reference) {
        j["exact"] = r.exact_reference->str();
        double exact = std::stod(r.exact_reference->decimal(12));
        j["abs_error"] = std::abs(r.frequency - exact);
    }
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace orderdens
