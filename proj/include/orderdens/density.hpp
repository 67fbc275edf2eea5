#pragma once

/**
 * @file density.hpp
 * @brief Exact densities: closed formulas for the five standard image types,
 *        the general series summed exactly over tail models, scaled points,
 *        and the denominator-divisibility audit.
 */

#include "orderdens/measures.hpp"

#include <variant>

namespace orderdens {

enum class ImageType { Gl2Full, SplitCartan, NonsplitCartan, NormSplit, NormNonsplit };

const char* image_name(ImageType t);
std::optional<ImageType> parse_image(const std::string& s);

/// Closed density for the standard image types with Kummer defect d.
Rational closed_density(ImageType image, int64_t ell, int d);

/// delta(a, b) given by the maximal-Kummer defect-d model:
/// ell^(2a+b-2d-max(a-d,0)-max(a+b-d,0)).
struct DefectRule {
    int d = 0;
};

/// delta(a, b) from a finite table with the stabilized extension
/// delta = 1 for a >= n0, delta(a, b) = table(a, n0-a) for a + b >= n0 > a.
struct DeltaTableRule {
    int n0 = 0;
    std::map<Cell, Rational> values; // required for a + b <= n0
    Rational delta(int a, int b) const;
};

using DeltaRule = std::variant<DefectRule, DeltaTableRule>;

/// F * sum mu(a,b) * ell^(-2a-b) * delta(a,b), summed exactly over the model
/// (finite grid cells plus geometric series per admissible piece).
Rational sum_series(const TailModel& model, int64_t ell, const Rational& failure,
                    const DeltaRule& rule);

/// Series density of a measure model pair (Cartan coset, nontrivial coset),
/// merged with weight 1/2 each.
Rational sum_series_pair(const TailModel& cartan_model, const TailModel& other_model,
                         int64_t ell, const Rational& failure, const DeltaRule& rule);

/// Tail models of a standard image type from pure enumeration plus fitting:
/// a single model, or the per-coset pair for the normalizer types.
struct DerivedModels {
    TailModel main;
    std::optional<TailModel> coset;
};
DerivedModels derived_tail_models(ImageType image, int64_t ell, int threads = 1);

Rational series_from_models(const DerivedModels& models, int64_t ell, int d);

/// Build the measure tables for a standard image type by enumeration, fit the
/// tails, and sum the series with the defect rule.  Exact; used to cross-check
/// closed_density.
Rational derived_series_density(ImageType image, int64_t ell, int d, int threads = 1);

/// Re-evaluate with defect d + k (scaling the point by ell^k raises the defect).
Rational scaled_density(ImageType image, int64_t ell, int d, int k);

/// Thm-style divisibility audit: x * (l-1)(l^2-1)^2(l^E-1) in Z[1/l],
/// E = 4 with complex multiplication, 6 without.
bool denominator_audit(const Rational& x, int64_t ell, bool cm);

/// Checks closed_density is nondecreasing in d over 0..20 with deficit
/// 1 - value <= ell^(3-d).
bool limit_audit(ImageType image, int64_t ell);

} // namespace orderdens
