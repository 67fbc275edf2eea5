#include "orderdens/measures.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace orderdens {

namespace {

// Flat (a, b) histogram; levels are capped well below 16 by the word guard.
struct ClassCounter {
    std::array<uint64_t, 256> cls{};
    uint64_t undetermined = 0;
    uint64_t total = 0;

    void merge(const ClassCounter& o) {
        for (size_t i = 0; i < cls.size(); ++i) cls[i] += o.cls[i];
        undetermined += o.undetermined;
        total += o.total;
    }
};

// Valuation lookup table for one modulus.
struct FastMod {
    int64_t ell, m;
    int level;
    std::vector<uint8_t> val;

    explicit FastMod(const Modulus& mod) : ell(mod.ell), m(mod.m), level(mod.level) {
        val.resize(m);
        val[0] = static_cast<uint8_t>(level);
        for (int64_t x = 1; x < m; ++x) {
            int v = 0;
            int64_t y = x;
            while (y % ell == 0) { y /= ell; ++v; }
            val[x] = static_cast<uint8_t>(v);
        }
    }
};

// Classify M given the entries of A = M - I (reduced mod m).
inline void classify_into(ClassCounter& cc, const FastMod& fm, const Modulus& mod,
                          int64_t a0, int64_t a1, int64_t a2, int64_t a3) {
    ++cc.total;
    int e1 = std::min(std::min(fm.val[a0], fm.val[a1]), std::min(fm.val[a2], fm.val[a3]));
    if (e1 >= fm.level) { ++cc.undetermined; return; } // M == I at this level
    int64_t det = (a0 * a3 - a1 * a2) % fm.m;
    if (det < 0) det += fm.m;
    int vd = fm.val[det];
    if (det != 0 && vd < fm.level) {
        // det valuation below the level pins e2 = vd - e1 < level exactly.
        cc.cls[(e1 << 4) | (vd - 2 * e1)]++;
        return;
    }
    auto [ee1, ee2] = elementary_valuations(ResidueMatrix{mod, {a0, a1, a2, a3}});
    if (ee2 >= fm.level) ++cc.undetermined;
    else cc.cls[(ee1 << 4) | (ee2 - ee1)]++;
}

MeasureTable table_from_counter(const ClassCounter& cc, const Modulus& mod,
                                const std::string& tag) {
    MeasureTable t;
    t.ell = mod.ell;
    t.level = mod.level;
    t.total_count = cc.total;
    t.group_tag = tag;
    BigInt total(static_cast<int64_t>(cc.total));
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            uint64_t n = cc.cls[(a << 4) | b];
            if (n) t.mu[{a, b}] = Rational(BigInt(static_cast<int64_t>(n)), total);
        }
    t.undetermined = Rational(BigInt(static_cast<int64_t>(cc.undetermined)), total);
    return t;
}

template <class PerElem>
void chunked_scan(size_t n, int threads, const PerElem& body, std::vector<ClassCounter>& out) {
    int chunks = std::max(1, threads);
    out.assign(static_cast<size_t>(chunks) * 2, ClassCounter{});
    auto run = [&](int c) {
        size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
        body(c, lo, hi, out[2 * c], out[2 * c + 1]);
    };
    if (chunks == 1) {
        run(0);
        return;
    }
    std::vector<std::thread> pool;
    for (int c = 0; c < chunks; ++c) pool.emplace_back(run, c);
    for (auto& th : pool) th.join();
}

} // namespace

Rational MeasureTable::at(int a, int b) const {
    auto it = mu.find({a, b});
    return it == mu.end() ? Rational(0) : it->second;
}

Rational MeasureTable::grid_mass() const {
    Rational s(0);
    for (const auto& [cell, v] : mu) s += v;
    return s;
}

bool RangeSpec::contains(int x) const {
    if (is_tail) return x >= from;
    return std::find(points.begin(), points.end(), x) != points.end();
}

MeasureTable measure_table(const MatrixGroupLevel& g, int threads) {
    FastMod fm(g.mod);
    const int64_t m = g.mod.m;
    std::vector<ClassCounter> parts;
    chunked_scan(
        g.size(), threads,
        [&](int, size_t lo, size_t hi, ClassCounter& cc, ClassCounter&) {
            for (size_t i = lo; i < hi; ++i) {
                const PackedMat& p = g.elems[i];
                classify_into(cc, fm, g.mod, (p[0] + m - 1) % m, p[1], p[2], (p[3] + m - 1) % m);
            }
        },
        parts);
    ClassCounter sum;
    for (const auto& c : parts) sum.merge(c);
    return table_from_counter(sum, g.mod, g.tag());
}

namespace {

// Shared scan over the dims-dimensional lifts of `base` at `level`, counting
// into per-coset counters (coset flags precomputed per base element; all
// lifts of one base element share its coset).
void lifted_scan(const MatrixGroupLevel& base, int level, int dims,
                 const std::vector<uint8_t>& coset_flag, int threads,
                 ClassCounter& out0, ClassCounter& out1) {
    Modulus mod = Modulus::make(base.mod.ell, level);
    FastMod fm(mod);
    const int64_t step = base.mod.m;
    const int64_t lifts = mod.m / step;
    const int64_t m = mod.m;

    std::optional<ResidueMatrix> phi, wlift;
    std::optional<NormalizerFrame> base_frame;
    if (dims == 2) {
        auto fw = lift_normalizer_frame(base, mod);
        phi = fw.first;
        wlift = fw.second;
        base_frame = stored_frame(base);
    }

    std::vector<ClassCounter> parts;
    chunked_scan(
        base.size(), threads,
        [&](int, size_t lo, size_t hi, ClassCounter& cc0, ClassCounter& cc1) {
            for (size_t i = lo; i < hi; ++i) {
                ClassCounter& cc = coset_flag.empty() ? cc0 : (coset_flag[i] ? cc1 : cc0);
                ResidueMatrix b = base.element(i);
                if (dims == 4) {
                    for (int64_t k0 = 0; k0 < lifts; ++k0) {
                        int64_t a0 = (b.e[0] + k0 * step + m - 1) % m;
                        for (int64_t k1 = 0; k1 < lifts; ++k1) {
                            int64_t a1 = b.e[1] + k1 * step;
                            for (int64_t k2 = 0; k2 < lifts; ++k2) {
                                int64_t a2 = b.e[2] + k2 * step;
                                for (int64_t k3 = 0; k3 < lifts; ++k3)
                                    classify_into(cc, fm, mod, a0, a1, a2,
                                                  (b.e[3] + k3 * step + m - 1) % m);
                            }
                        }
                    }
                } else {
                    ResidueMatrix lift0 = ambient_cartan_lift(b, *base_frame, *phi, *wlift);
                    ResidueMatrix d1 = mat_scale(step, lift0);
                    ResidueMatrix d2 = mat_scale(step, mat_mul(lift0, *phi));
                    for (int64_t s = 0; s < lifts; ++s) {
                        int64_t r0 = (lift0.e[0] + s * d1.e[0]) % m;
                        int64_t r1 = (lift0.e[1] + s * d1.e[1]) % m;
                        int64_t r2 = (lift0.e[2] + s * d1.e[2]) % m;
                        int64_t r3 = (lift0.e[3] + s * d1.e[3]) % m;
                        for (int64_t t = 0; t < lifts; ++t) {
                            classify_into(cc, fm, mod, (r0 + m - 1) % m, r1, r2, (r3 + m - 1) % m);
                            r0 += d2.e[0]; if (r0 >= m) r0 -= m;
                            r1 += d2.e[1]; if (r1 >= m) r1 -= m;
                            r2 += d2.e[2]; if (r2 >= m) r2 -= m;
                            r3 += d2.e[3]; if (r3 >= m) r3 -= m;
                        }
                    }
                }
            }
        },
        parts);
    for (size_t c = 0; c < parts.size(); c += 2) out0.merge(parts[c]);
    for (size_t c = 1; c < parts.size(); c += 2) out1.merge(parts[c]);
}

} // namespace

MeasureTable lifted_measure_table(const MatrixGroupLevel& base, int level, int dims,
                                  int threads) {
    ClassCounter c0, c1;
    lifted_scan(base, level, dims, {}, threads, c0, c1);
    c0.merge(c1);
    Modulus mod = Modulus::make(base.mod.ell, level);
    return table_from_counter(c0, mod, base.tag() + "+lift");
}

Rational singular_mass(const MatrixGroupLevel& g, int k) {
    if (k < 0 || k > g.mod.level) throw std::invalid_argument("singular_mass: need 0 <= k <= level");
    if (k == 0) return Rational(1);
    int64_t pk = 1;
    for (int i = 0; i < k; ++i) pk *= g.mod.ell;
    const int64_t m = g.mod.m;
    uint64_t count = 0;
    for (const auto& p : g.elems) {
        int64_t a0 = (p[0] + m - 1) % m, a3 = (p[3] + m - 1) % m;
        int64_t det = (a0 * a3 - static_cast<int64_t>(p[1]) * p[2]) % m;
        if (det < 0) det += m;
        if (det % pk == 0) ++count;
    }
    return Rational(BigInt(static_cast<int64_t>(count)), BigInt(static_cast<int64_t>(g.size())));
}

std::pair<MeasureTable, MeasureTable> split_coset_tables(const MatrixGroupLevel& g,
                                                         int threads) {
    bool structured = g.frame.has_value() ||
                      (g.kind == GroupKind::Preimage && g.base && g.base->frame.has_value());
    if (!structured)
        throw std::invalid_argument("split_coset_tables: input is not a 2-coset normalizer");
    FastMod fm(g.mod);
    const int64_t m = g.mod.m;
    std::vector<ClassCounter> parts;
    chunked_scan(
        g.size(), threads,
        [&](int, size_t lo, size_t hi, ClassCounter& cc0, ClassCounter& cc1) {
            for (size_t i = lo; i < hi; ++i) {
                ResidueMatrix mat = g.element(i);
                ClassCounter& cc = g.in_nontrivial_coset(mat) ? cc1 : cc0;
                classify_into(cc, fm, g.mod, (mat.e[0] + m - 1) % m, mat.e[1], mat.e[2],
                              (mat.e[3] + m - 1) % m);
            }
        },
        parts);
    ClassCounter c0, c1;
    for (size_t c = 0; c < parts.size(); c += 2) c0.merge(parts[c]);
    for (size_t c = 1; c < parts.size(); c += 2) c1.merge(parts[c]);
    if (c0.total == 0 || c1.total == 0)
        throw std::invalid_argument("split_coset_tables: degenerate coset split");
    return {table_from_counter(c0, g.mod, g.tag() + "|cartan-coset"),
            table_from_counter(c1, g.mod, g.tag() + "|nontrivial-coset")};
}

std::pair<MeasureTable, MeasureTable> lifted_coset_tables(const MatrixGroupLevel& base,
                                                          int level, int threads) {
    std::vector<uint8_t> flags(base.size());
    for (size_t i = 0; i < base.size(); ++i)
        flags[i] = base.in_nontrivial_coset(base.element(i)) ? 1 : 0;
    ClassCounter c0, c1;
    lifted_scan(base, level, 2, flags, threads, c0, c1);
    if (c0.total == 0 || c1.total == 0)
        throw std::invalid_argument("lifted_coset_tables: degenerate coset split");
    Modulus mod = Modulus::make(base.mod.ell, level);
    return {table_from_counter(c0, mod, base.tag() + "|cartan-coset"),
            table_from_counter(c1, mod, base.tag() + "|nontrivial-coset")};
}

Rational TailModel::value_at(int a, int b) const {
    for (const auto& p : pieces)
        if (p.a_range.contains(a) && p.b_range.contains(b)) {
            if (p.c.is_zero()) return Rational(0);
            BigInt l(ell);
            return p.c / Rational(pow_big(l, static_cast<long long>(p.alpha) * a +
                                                 static_cast<long long>(p.beta) * b));
        }
    auto it = grid.find({a, b});
    return it == grid.end() ? Rational(0) : it->second;
}

namespace {

Rational range_sum(const RangeSpec& r, const BigInt& ell, int exponent) {
    // sum over x in range of ell^(-exponent * x)
    Rational s(0);
    if (!r.is_tail) {
        for (int x : r.points)
            s += Rational(BigInt(1), pow_big(ell, static_cast<long long>(exponent) * x));
        return s;
    }
    if (exponent < 1) throw std::logic_error("range_sum: divergent tail");
    return geometric_tail(ell, exponent, r.from);
}

} // namespace

Rational TailModel::total_mass() const {
    Rational s(0);
    for (const auto& [cell, v] : grid) s += v;
    BigInt l(ell);
    for (const auto& p : pieces) {
        if (p.c.is_zero()) continue;
        s += p.c * range_sum(p.a_range, l, p.alpha) * range_sum(p.b_range, l, p.beta);
    }
    return s;
}

namespace {

// q must be a nonnegative power of ell; returns the exponent.
std::optional<int> power_of(const Rational& q, const BigInt& ell) {
    if (q <= Rational(0) || q.den() != 1) return std::nullopt;
    BigInt n = q.num();
    int k = 0;
    while (n % ell == 0) { n /= ell; ++k; }
    return n == 1 ? std::optional<int>(k) : std::nullopt;
}

struct FitContext {
    const MeasureTable& hi;
    BigInt ell;
    int D; // exact cells cover a+b <= D

    Rational mu(int a, int b) const { return hi.at(a, b); }
    Rational predict(const Rational& c, int alpha, int beta, int a, int b) const {
        if (c.is_zero()) return Rational(0);
        return c / Rational(pow_big(ell, static_cast<long long>(alpha) * a +
                                             static_cast<long long>(beta) * b));
    }
};

// Fit a 1-D geometric tail on the cells value(x), x in [x_min, x_max], using the
// two largest x; returns (c, beta, x0) where x0 >= x_min is where the formula
// starts holding, and cells [x_min, x0) become exceptions.  Requires at least
// one held-out matching cell below x_max - 1.  Nullopt on any mismatch.
struct LineFit {
    Rational c;
    int exponent;
    int start;
};

template <class Value>
std::optional<LineFit> fit_line(const FitContext& ctx, const Value& value, int x_min,
                                int x_max) {
    bool all_zero = true;
    for (int x = x_min; x <= x_max; ++x)
        if (!value(x).is_zero()) { all_zero = false; break; }
    if (all_zero) return LineFit{Rational(0), 1, x_min};

    if (x_max - x_min < 2) return std::nullopt; // two to fit plus one held out
    Rational vtop = value(x_max), vsec = value(x_max - 1);
    if (vtop.is_zero() || vsec.is_zero()) return std::nullopt;
    auto exp = power_of(vsec / vtop, ctx.ell);
    if (!exp || *exp < 1) return std::nullopt;
    Rational c = vtop * Rational(pow_big(ctx.ell, static_cast<long long>(*exp) * x_max));
    int start = x_max - 1;
    while (start > x_min) {
        Rational pred = c / Rational(pow_big(ctx.ell, static_cast<long long>(*exp) * (start - 1)));
        if (value(start - 1) != pred) break;
        --start;
    }
    if (start > x_max - 2) return std::nullopt; // no held-out confirmation
    return LineFit{c, *exp, start};
}

} // namespace

TailModel fit_tail(const MeasureTable& lo, const MeasureTable& hi) {
    if (lo.ell != hi.ell || hi.level != lo.level + 1)
        throw std::invalid_argument("fit_tail: tables must be at consecutive levels");
    for (int a = 0; a < lo.level; ++a)
        for (int b = 0; a + b < lo.level; ++b)
            if (lo.at(a, b) != hi.at(a, b))
                throw FitRejection("fit_tail: tables disagree on the shared grid");

    FitContext ctx{hi, BigInt(hi.ell), hi.level - 1};
    const int D = ctx.D;
    if (D < 3) throw FitRejection("fit_tail: grid too small (need level >= 4)");

    static const std::vector<std::pair<int, int>> combos = {
        {1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 3}, {3, 1}, {2, 3}, {3, 2}, {3, 3}};
    std::string last_err = "no admissible regime layout fits the grid";

    for (auto [A0, B0] : combos) {
        if (A0 + B0 > D - 1) continue;
        TailModel model;
        model.ell = hi.ell;
        bool ok = true;

        // Rows a < A0: one b-tail each.
        for (int a = 0; a < A0 && ok; ++a) {
            auto fit = fit_line(ctx, [&](int b) { return ctx.mu(a, b); }, B0, D - a);
            if (!fit) { ok = false; last_err = "row tail mismatch"; break; }
            AdmissiblePiece p;
            p.a_range = RangeSpec::single(a);
            p.b_range = RangeSpec::tail(fit->start);
            p.c = fit->c;
            p.alpha = 0;
            p.beta = fit->exponent;
            model.pieces.push_back(p);
            for (int b = B0; b < fit->start; ++b) model.grid[{a, b}] = ctx.mu(a, b);
        }
        if (!ok) continue;

        // Columns b < B0: one a-tail each.
        for (int b = 0; b < B0 && ok; ++b) {
            auto fit = fit_line(ctx, [&](int a) { return ctx.mu(a, b); }, A0, D - b);
            if (!fit) { ok = false; last_err = "column tail mismatch"; break; }
            AdmissiblePiece p;
            p.a_range = RangeSpec::tail(fit->start);
            p.b_range = RangeSpec::single(b);
            p.c = fit->c;
            p.alpha = fit->exponent;
            p.beta = 0;
            model.pieces.push_back(p);
            for (int a = A0; a < fit->start; ++a) model.grid[{a, b}] = ctx.mu(a, b);
        }
        if (!ok) continue;

        // Interior {a >= A0, b >= B0}.
        {
            bool all_zero = true;
            for (int a = A0; a + B0 <= D && all_zero; ++a)
                for (int b = B0; a + b <= D; ++b)
                    if (!ctx.mu(a, b).is_zero()) { all_zero = false; break; }
            AdmissiblePiece p;
            p.a_range = RangeSpec::tail(A0);
            p.b_range = RangeSpec::tail(B0);
            if (all_zero) {
                p.c = Rational(0);
                p.alpha = 1;
                p.beta = 1;
                model.pieces.push_back(p);
            } else if (D - A0 - 1 < B0) {
                ok = false;
                last_err = "interior underdetermined";
            } else {
                Rational va = ctx.mu(A0, D - A0), vb = ctx.mu(A0, D - A0 - 1),
                         vc = ctx.mu(A0 + 1, D - A0 - 1);
                auto beta = power_of(vb / va, ctx.ell);
                auto alpha = power_of(vb / vc, ctx.ell);
                if (va.is_zero() || vb.is_zero() || vc.is_zero() || !alpha || !beta ||
                    *alpha < 1 || *beta < 1) {
                    ok = false;
                    last_err = "interior tail mismatch";
                } else {
                    p.c = va * Rational(pow_big(ctx.ell,
                                                static_cast<long long>(*alpha) * A0 +
                                                    static_cast<long long>(*beta) * (D - A0)));
                    p.alpha = *alpha;
                    p.beta = *beta;
                    for (int a = A0; a + B0 <= D && ok; ++a)
                        for (int b = B0; a + b <= D; ++b)
                            if (ctx.mu(a, b) != ctx.predict(p.c, p.alpha, p.beta, a, b)) {
                                ok = false;
                                last_err = "interior held-out mismatch";
                                break;
                            }
                    if (ok) model.pieces.push_back(p);
                }
            }
        }
        if (!ok) continue;

        // Exact rectangle a < A0, b < B0.
        for (int a = 0; a < A0; ++a)
            for (int b = 0; b < B0; ++b) model.grid[{a, b}] = ctx.mu(a, b);

        if (model.total_mass() != Rational(1)) {
            last_err = "total mass of fitted model is not 1";
            continue;
        }
        return model;
    }
    throw FitRejection("fit_tail: " + last_err);
}

} // namespace orderdens
