#pragma once

/// JSON schemas for group specs, arboreal specs, curve specs and reports.

#include "orderdens/arboreal.hpp"
#include "orderdens/curves.hpp"
#include "orderdens/density.hpp"
#include "orderdens/measures.hpp"

#include <json.hpp>

namespace orderdens {

using Json = nlohmann::json;

/// {"ell", "level", "mode": "full"|"cartan"|"normalizer"|"generated"|"preimage",
///  "d"?, "r"?, "generators"?, "base_level"?, "base_mode"?, "lift"?: "full"|"cartan"}
MatrixGroupLevel build_group(const Json& spec);

/// {"ell", "level", "image": <group spec>, "kummer":
///    {"mode":"defect","d":k} | {"mode":"explicit","elements":[[[t0,t1],[[..],[..]]],...]}}
ArborealGroupLevel build_arboreal(const Json& spec);

/// {"label", "a":[a1,a2,a3,a4,a6], "point":[x,y]}
std::pair<CurveQ, PointQ> build_curve(const Json& spec);

Json matrix_json(const ResidueMatrix& m);
ResidueMatrix matrix_from_json(const Modulus& mod, const Json& j);

Json measure_table_json(const MeasureTable& t);
Json tail_model_json(const TailModel& m);
Json density_json(const Rational& value, const std::string& method, int64_t ell, int defect,
                  const std::string& image);
Json interval_json(const Rational& lo, const Rational& hi, int64_t ell, int level);
Json sweep_json(const SweepReport& r);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

} // namespace orderdens
