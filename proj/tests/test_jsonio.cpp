#include "orderdens/jsonio.hpp"

#include <doctest.h>

using namespace orderdens;

TEST_CASE("group specs") {
    Json full{{"ell", 2}, {"level", 2}, {"mode", "full"}};
    CHECK(build_group(full).size() == 96);

    Json gen{{"ell", 3},
             {"level", 1},
             {"mode", "generated"},
             {"generators", Json::array({Json::array({Json::array({1, 1}), Json::array({0, 1})}),
                                         Json::array({Json::array({-1, 0}), Json::array({0, 1})})})}};
    CHECK(build_group(gen).size() == 6);

    Json pre = gen;
    pre["mode"] = "preimage";
    pre["base_level"] = 1;
    pre["level"] = 2;
    CHECK(build_group(pre).size() == 486);

    Json cart{{"ell", 5}, {"level", 1}, {"mode", "cartan"}, {"d", 2}};
    CHECK(build_group(cart).size() == 24);
    Json norm = cart;
    norm["mode"] = "normalizer";
    CHECK(build_group(norm).size() == 48);

    Json bad = cart;
    bad["mode"] = "borel";
    CHECK_THROWS_AS(build_group(bad), std::invalid_argument);
}

TEST_CASE("cartan-lift preimage spec") {
    Json spec{{"ell", 5}, {"level", 2}, {"mode", "preimage"},
              {"base_level", 1}, {"base_mode", "normalizer"}, {"d", 1}, {"lift", "cartan"}};
    MatrixGroupLevel g = build_group(spec);
    CHECK(g.size() == 32u * 25u);
}

TEST_CASE("matrix serialization shape") {
    Modulus m = Modulus::make(3, 2);
    ResidueMatrix mat = ResidueMatrix::from_entries(m, 1, 2, 3, 4);
    Json j = matrix_json(mat);
    CHECK(j.dump() == "[[1,2],[3,4]]");
    CHECK(matrix_from_json(m, j) == mat);
}

TEST_CASE("measure table serialization") {
    MeasureTable t = measure_table(gl2_full(2, 2));
    Json j = measure_table_json(t);
    CHECK(j["ell"] == 2);
    CHECK(j["level"] == 2);
    CHECK(j["undetermined"].get<std::string>().find('/') != std::string::npos);
    bool found = false;
    for (const auto& e : j["entries"])
        if (e["a"] == 0 && e["b"] == 0) {
            CHECK(e["mu"] == "1/3");
            found = true;
        }
    CHECK(found);
}

TEST_CASE("arboreal specs") {
    Json spec{{"ell", 2},
              {"level", 2},
              {"image", Json{{"ell", 2}, {"level", 1}, {"mode", "full"}}},
              {"kummer", Json{{"mode", "defect"}, {"d", 0}}}};
    ArborealGroupLevel a = build_arboreal(spec);
    CHECK(a.mod().level == 2);
    CHECK(a.size() == BigInt(96 * 16)); // #GL2(Z/4) * 4^2

    Json exp{{"ell", 3},
             {"level", 1},
             {"image", Json{{"ell", 3}, {"level", 1}, {"mode", "full"}}},
             {"kummer",
              Json{{"mode", "explicit"},
                   {"elements", Json::array({Json::array(
                                    {Json::array({0, 1}),
                                     Json::array({Json::array({1, 1}), Json::array({0, 1})})})})}}}};
    CHECK(build_arboreal(exp).size() == BigInt(3));
}

TEST_CASE("curve specs") {
    Json spec{{"label", "37.a1"}, {"a", Json::array({0, 0, 1, -1, 0})},
              {"point", Json::array({0, 0})}};
    auto [curve, point] = build_curve(spec);
    CHECK(curve.label == "37.a1");
    CHECK(curve.discriminant() == BigInt(37));

    Json off = spec;
    off["point"] = Json::array({1, 1});
    CHECK_THROWS_AS(build_curve(off), std::invalid_argument);
}

TEST_CASE("density and sweep reports") {
    Json j = density_json(Rational::parse("23/104"), "series", 3, 0, "explicit-group");
    CHECK(j["value"] == "23/104");
    CHECK(j["decimal"] == "0.22115");
    SweepReport rep;
    rep.label = "x";
    rep.ell = 3;
    rep.frequency = 0.25;
    rep.exact_reference = Rational::parse("1/4");
    Json s = sweep_json(rep);
    CHECK(s["exact"] == "1/4");
    CHECK(s["abs_error"].get<double>() == doctest::Approx(0.0));
}
