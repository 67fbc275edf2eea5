#include "orderdens/density.hpp"

namespace orderdens {

namespace {

// ell^k for k of either sign, as a Rational.
Rational rat_pow(const BigInt& ell, long long k) {
    if (k >= 0) return Rational(pow_big(ell, k));
    return Rational(BigInt(1), pow_big(ell, -k));
}

Rational one_minus_mult(const BigInt& l, int d) {
    // 1 - l^(1-d) / (l^2 - 1): the multiplicative-group factor
    return Rational(1) - rat_pow(l, 1 - d) / Rational(l * l - 1);
}

} // namespace

const char* image_name(ImageType t) {
    switch (t) {
        case ImageType::Gl2Full: return "gl2";
        case ImageType::SplitCartan: return "split";
        case ImageType::NonsplitCartan: return "nonsplit";
        case ImageType::NormSplit: return "norm-split";
        case ImageType::NormNonsplit: return "norm-nonsplit";
    }
    return "?";
}

std::optional<ImageType> parse_image(const std::string& s) {
    if (s == "gl2" || s == "gl2full" || s == "full") return ImageType::Gl2Full;
    if (s == "split" || s == "split-cartan") return ImageType::SplitCartan;
    if (s == "nonsplit" || s == "nonsplit-cartan") return ImageType::NonsplitCartan;
    if (s == "norm-split" || s == "normalizer-split") return ImageType::NormSplit;
    if (s == "norm-nonsplit" || s == "normalizer-nonsplit") return ImageType::NormNonsplit;
    return std::nullopt;
}

Rational closed_density(ImageType image, int64_t ell, int d) {
    if (d < 0) throw std::invalid_argument("closed_density: defect must be >= 0");
    BigInt l(ell);
    switch (image) {
        case ImageType::Gl2Full:
            return Rational(1) - rat_pow(l, 1 - d) * Rational(l * l * l - l - 1) /
                                     Rational((l * l - 1) * (l * l * l - 1));
        case ImageType::SplitCartan: {
            Rational f = one_minus_mult(l, d);
            return f * f;
        }
        case ImageType::NonsplitCartan:
            return Rational(1) - rat_pow(l, 2 * (1 - d)) / Rational(l * l * l * l - 1);
        case ImageType::NormSplit: {
            Rational f = one_minus_mult(l, d);
            return (one_minus_mult(l, d) + f * f) / Rational(2);
        }
        case ImageType::NormNonsplit:
            return (one_minus_mult(l, d) + closed_density(ImageType::NonsplitCartan, ell, d)) /
                   Rational(2);
    }
    throw std::logic_error("closed_density: unknown image");
}

Rational DeltaTableRule::delta(int a, int b) const {
    if (a >= n0) return Rational(1);
    Cell cell = (a + b >= n0) ? Cell{a, n0 - a} : Cell{a, b};
    auto it = values.find(cell);
    if (it == values.end()) throw std::invalid_argument("delta table: uncovered cell");
    return it->second;
}

namespace {

// sum over b in range of ell^(-beta*b - max(b - s, 0)), s any integer
Rational defect_bsum(const RangeSpec& b, const BigInt& ell, int beta, long long s) {
    Rational out(0);
    if (!b.is_tail) {
        for (int x : b.points)
            out += rat_pow(ell, -(static_cast<long long>(beta) * x + std::max<long long>(x - s, 0)));
        return out;
    }
    long long split = std::max<long long>(b.from, s);
    for (long long x = b.from; x < split; ++x) out += rat_pow(ell, -beta * x);
    out += rat_pow(ell, s) * geometric_tail(ell, beta + 1, split);
    return out;
}

// sum over (a, b) in the piece ranges of ell^(-alpha a - beta b - max(a-d,0) - max(a+b-d,0))
Rational defect_piece_sum(const AdmissiblePiece& p, const BigInt& ell, int d) {
    const int alpha = p.alpha, beta = p.beta;
    auto a_term = [&](long long a) {
        return rat_pow(ell, -(alpha * a + std::max<long long>(a - d, 0))) *
               defect_bsum(p.b_range, ell, beta, d - a);
    };
    if (!p.a_range.is_tail) {
        Rational out(0);
        for (int a : p.a_range.points) out += a_term(a);
        return out;
    }
    Rational out(0);
    long long split = std::max<long long>(p.a_range.from, d);
    for (long long a = p.a_range.from; a < split; ++a) out += a_term(a);
    // a >= max(d, from): both kinks active, everything factorizes
    Rational bsum(0);
    if (!p.b_range.is_tail)
        for (int x : p.b_range.points) bsum += rat_pow(ell, -(beta + 1LL) * x);
    else
        bsum = geometric_tail(ell, beta + 1, p.b_range.from);
    out += rat_pow(ell, 2LL * d) * geometric_tail(ell, alpha + 2, split) * bsum;
    return out;
}

// sum over b in range of ell^(-(beta+1) b) * delta(a, b), for fixed a < rule.n0
Rational table_bsum(const RangeSpec& b, const BigInt& ell, int beta, int a,
                    const DeltaTableRule& rule) {
    Rational out(0);
    if (!b.is_tail) {
        for (int x : b.points) out += rat_pow(ell, -(beta + 1LL) * x) * rule.delta(a, x);
        return out;
    }
    long long split = std::max<long long>(b.from, rule.n0 - a);
    for (long long x = b.from; x < split; ++x)
        out += rat_pow(ell, -(beta + 1LL) * x) * rule.delta(a, static_cast<int>(x));
    out += rule.delta(a, rule.n0 - a) * geometric_tail(ell, beta + 1, split);
    return out;
}

Rational table_piece_sum(const AdmissiblePiece& p, const BigInt& ell,
                         const DeltaTableRule& rule) {
    const int alpha = p.alpha, beta = p.beta;
    auto a_term = [&](long long a) {
        if (a >= rule.n0) {
            Rational bsum(0);
            if (!p.b_range.is_tail)
                for (int x : p.b_range.points) bsum += rat_pow(ell, -(beta + 1LL) * x);
            else
                bsum = geometric_tail(ell, beta + 1, p.b_range.from);
            return rat_pow(ell, -(alpha + 2LL) * a) * bsum;
        }
        return rat_pow(ell, -(alpha + 2LL) * a) *
               table_bsum(p.b_range, ell, beta, static_cast<int>(a), rule);
    };
    if (!p.a_range.is_tail) {
        Rational out(0);
        for (int a : p.a_range.points) out += a_term(a);
        return out;
    }
    Rational out(0);
    long long split = std::max<long long>(p.a_range.from, rule.n0);
    for (long long a = p.a_range.from; a < split; ++a) out += a_term(a);
    Rational bsum(0);
    if (!p.b_range.is_tail)
        for (int x : p.b_range.points) bsum += rat_pow(ell, -(beta + 1LL) * x);
    else
        bsum = geometric_tail(ell, beta + 1, p.b_range.from);
    out += geometric_tail(ell, alpha + 2, split) * bsum;
    return out;
}

} // namespace

Rational sum_series(const TailModel& model, int64_t ell, const Rational& failure,
                    const DeltaRule& rule) {
    BigInt l(ell);
    Rational total(0);
    if (const auto* defect = std::get_if<DefectRule>(&rule)) {
        const int d = defect->d;
        for (const auto& [cell, mu] : model.grid) {
            auto [a, b] = cell;
            total += mu * rat_pow(l, -(2LL * d + std::max(a - d, 0) + std::max(a + b - d, 0)));
        }
        for (const auto& p : model.pieces) {
            if (p.c.is_zero()) continue;
            total += p.c * rat_pow(l, -2LL * d) * defect_piece_sum(p, l, d);
        }
        return failure * total;
    }
    const auto& table = std::get<DeltaTableRule>(rule);
    for (const auto& [cell, mu] : model.grid) {
        auto [a, b] = cell;
        total += mu * rat_pow(l, -(2LL * a + b)) * table.delta(a, b);
    }
    for (const auto& p : model.pieces) {
        if (p.c.is_zero()) continue;
        total += p.c * table_piece_sum(p, l, table);
    }
    return failure * total;
}

Rational sum_series_pair(const TailModel& cartan_model, const TailModel& other_model,
                         int64_t ell, const Rational& failure, const DeltaRule& rule) {
    return (sum_series(cartan_model, ell, failure, rule) +
            sum_series(other_model, ell, failure, rule)) /
           Rational(2);
}

DerivedModels derived_tail_models(ImageType image, int64_t ell, int threads) {
    if (image == ImageType::Gl2Full) {
        MatrixGroupLevel base = gl2_full(ell, 1);
        return DerivedModels{fit_tail(lifted_measure_table(base, 3, 4, threads),
                                      lifted_measure_table(base, 4, 4, threads)),
                             std::nullopt};
    }

    CartanParams params = canonical_cartan(
        ell, (image == ImageType::SplitCartan || image == ImageType::NormSplit)
                 ? CartanType::Split
                 : CartanType::Nonsplit);

    if (image == ImageType::SplitCartan || image == ImageType::NonsplitCartan) {
        MatrixGroupLevel base = cartan(ell, 1, params);
        for (int lo = 3;; ++lo) {
            try {
                return DerivedModels{fit_tail(lifted_measure_table(base, lo, 2, threads),
                                              lifted_measure_table(base, lo + 1, 2, threads)),
                                     std::nullopt};
            } catch (const FitRejection&) {
                if (lo >= 5) throw;
            }
        }
    }

    MatrixGroupLevel base = normalizer_cartan(cartan(ell, 1, params));
    for (int lo = 3;; ++lo) {
        try {
            auto [clo, slo] = lifted_coset_tables(base, lo, threads);
            auto [chi, shi] = lifted_coset_tables(base, lo + 1, threads);
            return DerivedModels{fit_tail(clo, chi), fit_tail(slo, shi)};
        } catch (const FitRejection&) {
            if (lo >= 5) throw;
        }
    }
}

Rational series_from_models(const DerivedModels& models, int64_t ell, int d) {
    Rational failure(pow_big(BigInt(ell), 2LL * d));
    DeltaRule rule = DefectRule{d};
    if (models.coset)
        return sum_series_pair(models.main, *models.coset, ell, failure, rule);
    return sum_series(models.main, ell, failure, rule);
}

Rational derived_series_density(ImageType image, int64_t ell, int d, int threads) {
    return series_from_models(derived_tail_models(image, ell, threads), ell, d);
}

Rational scaled_density(ImageType image, int64_t ell, int d, int k) {
    if (k < 0) throw std::invalid_argument("scaled_density: k must be >= 0");
    return closed_density(image, ell, d + k);
}

bool denominator_audit(const Rational& x, int64_t ell, bool cm) {
    BigInt l(ell);
    if (!is_prime(l)) throw std::invalid_argument("denominator_audit: ell must be prime");
    int e = cm ? 4 : 6;
    BigInt factor = (l - 1) * (l * l - 1) * (l * l - 1) * (pow_big(l, e) - 1);
    return in_z_inv_ell(x * Rational(factor), l);
}

bool limit_audit(ImageType image, int64_t ell) {
    Rational prev(-1);
    BigInt l(ell);
    for (int d = 0; d <= 20; ++d) {
        Rational v = closed_density(image, ell, d);
        if (v < prev) return false;
        if (v > Rational(1)) return false;
        Rational deficit = Rational(1) - v;
        // 1 - value <= ell^(3-d)
        if (deficit * rat_pow(l, d - 3) > Rational(1)) return false;
        prev = v;
    }
    return true;
}

} // namespace orderdens
