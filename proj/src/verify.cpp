#include "orderdens/verify.hpp"

#include "orderdens/arboreal.hpp"
#include "orderdens/curves.hpp"
#include "orderdens/density.hpp"
#include "orderdens/measures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace orderdens {

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (ok && !cond) {
            ok = false;
            detail = what;
        }
    }
    void expect_eq(const Rational& got, const std::string& want, const std::string& what) {
        expect(got == Rational::parse(want), what + ": got " + got.str() + ", want " + want);
    }
};

Rational ell_pow(int64_t ell, long long k) {
    if (k >= 0) return Rational(pow_big(BigInt(ell), k));
    return Rational(BigInt(1), pow_big(BigInt(ell), -k));
}

// --- C1: closed-formula fidelity ------------------------------------------

void criterion_closed(Check& c) {
    struct Row {
        ImageType img;
        int64_t ell;
        int d;
        const char* want;
    };
    static const Row rows[] = {
        {ImageType::Gl2Full, 2, 0, "11/21"},        {ImageType::Gl2Full, 2, 1, "16/21"},
        {ImageType::Gl2Full, 2, 2, "37/42"},        {ImageType::Gl2Full, 3, 0, "139/208"},
        {ImageType::Gl2Full, 3, 1, "185/208"},      {ImageType::Gl2Full, 3, 2, "601/624"},
        {ImageType::Gl2Full, 5, 0, "2381/2976"},    {ImageType::Gl2Full, 5, 1, "2857/2976"},
        {ImageType::Gl2Full, 7, 0, "14071/16416"},  {ImageType::Gl2Full, 7, 1, "16081/16416"},
        {ImageType::NormSplit, 5, 0, "817/1152"},   {ImageType::NormSplit, 5, 1, "1081/1152"},
        {ImageType::NormNonsplit, 2, 0, "8/15"},    {ImageType::NormNonsplit, 2, 1, "4/5"},
        {ImageType::NormNonsplit, 2, 2, "109/120"},
    };
    for (const auto& r : rows)
        c.expect_eq(closed_density(r.img, r.ell, r.d),
                    r.want,
                    std::string(image_name(r.img)) + " ell=" + std::to_string(r.ell) +
                        " d=" + std::to_string(r.d));
}

// --- C2: the mod-3 worked example ------------------------------------------

MatrixGroupLevel mod3_base_group() {
    Modulus m = Modulus::make(3, 1);
    return generated_subgroup(3, 1,
                              {ResidueMatrix::from_entries(m, 1, 1, 0, 1),
                               ResidueMatrix::from_entries(m, -1, 0, 0, 1)});
}

Rational mod3_expected_mu(int a, int b) {
    if (a == 0 && b == 0) return Rational(0);
    if (a == 0) return Rational(5) * ell_pow(3, -b - 1);
    if (b == 0) return Rational(8) * ell_pow(3, -4LL * a);
    return Rational(32) * ell_pow(3, -4LL * a - b - 1);
}

void criterion_mod3(Check& c, int threads) {
    MatrixGroupLevel g1 = mod3_base_group();
    c.expect(g1.size() == 6, "mod-3 generated subgroup should have order 6");

    MatrixGroupLevel p3 = preimage_group(g1, 3);
    MatrixGroupLevel p4 = preimage_group(g1, 4);
    c.expect(p3.size() == 6u * 6561u, "level-3 preimage order");
    c.expect(p4.size() == 6u * 531441u, "level-4 preimage order");

    MeasureTable t3 = measure_table(p3, threads);
    MeasureTable t4 = measure_table(p4, threads);
    c.expect_eq(t3.at(0, 0), "0", "mu(0,0) at level 3");
    c.expect_eq(t3.at(0, 1), "5/9", "mu(0,1) at level 3");
    c.expect_eq(t3.at(1, 0), "8/81", "mu(1,0) at level 3");

    if (!c.ok) return;
    TailModel model = fit_tail(t3, t4);
    for (int a = 0; a <= 6 && c.ok; ++a)
        for (int b = 0; a + b <= 6 && c.ok; ++b)
            c.expect(model.value_at(a, b) == mod3_expected_mu(a, b),
                     "fitted mu(" + std::to_string(a) + "," + std::to_string(b) +
                         ") should match the piecewise display");

    c.expect_eq(sum_series(model, 3, Rational(1), DefectRule{0}), "23/104", "series d=0");
    c.expect_eq(sum_series(model, 3, Rational(9), DefectRule{1}), "77/104", "series d=1");
    c.expect_eq(sum_series(model, 3, Rational(81), DefectRule{2}), "95/104", "series d=2");
}

// --- C3: the mod-13 normalizer example -------------------------------------

MatrixGroupLevel mod13_base_group() {
    Modulus m = Modulus::make(13, 1);
    MatrixGroupLevel g = generated_subgroup(
        13, 1,
        {ResidueMatrix::from_entries(m, 2, 0, 0, 2), ResidueMatrix::from_entries(m, 5, 0, 0, 1),
         ResidueMatrix::from_entries(m, 0, 1, -1, 0)});
    auto frame = detect_normalizer_frame(g);
    if (frame) g.frame = frame;
    return g;
}

void criterion_mod13(Check& c, int threads) {
    MatrixGroupLevel g1 = mod13_base_group();
    c.expect(g1.size() == 96, "mod-13 generated subgroup should have order 96");
    c.expect(g1.frame.has_value(), "coset structure should be detected");
    if (!c.ok) return;

    auto [c1, s1] = split_coset_tables(g1, threads);
    c.expect(c1.total_count == 48 && s1.total_count == 48, "coset sizes 48 + 48");
    c.expect_eq(c1.at(0, 0), "41/48", "cartan-coset mu(0,0) at level 1");
    c.expect_eq(s1.at(0, 0), "11/12", "nontrivial-coset mu(0,0) at level 1");
    c.expect_eq(s1.undetermined, "1/12", "nontrivial-coset unresolved mass at level 1");

    MatrixGroupLevel big = cartan_preimage(g1, 3);
    c.expect(big.size() == 2741856u, "level-3 Cartan-direction preimage order 96*13^4");

    auto [c3, s3] = split_coset_tables(big, threads);
    auto [c4, s4] = lifted_coset_tables(g1, 4, threads);
    if (!c.ok) return;
    TailModel mc = fit_tail(c3, c4);
    TailModel ms = fit_tail(s3, s4);

    for (int a = 0; a <= 5 && c.ok; ++a)
        for (int b = 0; a + b <= 5 && c.ok; ++b) {
            Rational want_c = (a == 0 && b == 0) ? Rational::parse("41/48")
                              : (a == 0)         ? Rational(3) / Rational(2) * ell_pow(13, -b)
                              : (b == 0)         ? Rational(3) * ell_pow(13, -2LL * a)
                                                 : Rational(6) * ell_pow(13, -2LL * a - b);
            Rational want_s = (a > 0)            ? Rational(0)
                              : (b == 0)         ? Rational::parse("11/12")
                                                 : ell_pow(13, -b);
            c.expect(mc.value_at(a, b) == want_c, "cartan-coset tail value at (" +
                                                      std::to_string(a) + "," +
                                                      std::to_string(b) + ")");
            c.expect(ms.value_at(a, b) == want_s, "nontrivial-coset tail value at (" +
                                                      std::to_string(a) + "," +
                                                      std::to_string(b) + ")");
        }

    c.expect_eq(sum_series_pair(mc, ms, 13, Rational(1), DefectRule{0}), "16801/18816",
                "merged series d=0");
    c.expect_eq(sum_series_pair(mc, ms, 13, Rational(169), DefectRule{1}), "18649/18816",
                "merged series d=1");
}

// --- C4: closed/series cross-validation ------------------------------------

void criterion_cross(Check& c, int threads) {
    static const ImageType images[] = {ImageType::Gl2Full, ImageType::SplitCartan,
                                       ImageType::NonsplitCartan, ImageType::NormSplit,
                                       ImageType::NormNonsplit};
    for (ImageType img : images)
        for (int64_t ell : {2, 3}) {
            DerivedModels models = derived_tail_models(img, ell, threads);
            for (int d = 0; d <= 2 && c.ok; ++d) {
                Rational series = series_from_models(models, ell, d);
                Rational closed = closed_density(img, ell, d);
                c.expect(series == closed,
                         std::string("series vs closed: ") + image_name(img) +
                             " ell=" + std::to_string(ell) + " d=" + std::to_string(d) +
                             ": " + series.str() + " vs " + closed.str());
            }
            if (!c.ok) return;
        }
}

// --- C5: arboreal oracle ----------------------------------------------------

void criterion_arboreal(Check& c) {
    Rational prev(1);
    for (int n = 1; n <= 4; ++n) {
        ArborealGroupLevel a = ArborealGroupLevel::standard(gl2_full(2, n), 0);
        Rational dn = a.fixed_density_level();
        if (n == 1) c.expect_eq(dn, "5/8", "D_1 for full GL2 mod 2");
        else c.expect(dn <= prev, "D_n must be non-increasing at n=" + std::to_string(n));
        prev = dn;
        if (n == 4) {
            Rational tail = singular_mass(a.matrix_projection(), 4);
            auto [lo, hi] = a.density_interval(tail);
            Rational target = Rational::parse("11/21");
            c.expect(lo <= target && target <= hi,
                     "interval at level 4 should contain 11/21: [" + lo.str() + ", " +
                         hi.str() + "]");
        }
    }
}

// --- C6: empirical agreement ------------------------------------------------

void criterion_empirical(Check& c, const VerifyOptions& opts) {
    struct Row {
        CurveQ curve;
        PointQ point;
        int64_t ell;
        const char* exact;
    };
    const Row rows[] = {
        {{0, 0, 1, -1, 0, "37.a1"}, {0, 0}, 2, "11/21"},
        {{0, 0, 1, 6, 27, "153.b2"}, {5, 13}, 3, "23/104"},
        {{0, 0, 1, 0, 7140, "1521.b2"}, {56, 427}, 13, "16801/18816"},
        {{0, 0, 0, 3, 0, "cm-split-5"}, {1, -2}, 5, "817/1152"},
        {{0, 0, 0, 0, 3, "cm-nonsplit-2"}, {1, 2}, 2, "8/15"},
    };
    for (const auto& r : rows) {
        SweepReport rep =
            empirical_density(r.curve, r.point, r.ell, opts.empirical_bound, 0, opts.threads);
        double exact = std::stod(Rational::parse(r.exact).decimal(12));
        double err = std::abs(rep.frequency - exact);
        std::ostringstream os;
        os << r.curve.label << " ell=" << r.ell << ": freq " << rep.frequency << " vs exact "
           << r.exact << " (|err| = " << err << ")";
        c.expect(err <= 0.005, os.str());
    }
}

// --- C7: property suites ------------------------------------------------------

void criterion_properties(Check& c, int threads) {
    // mu-table normalization
    {
        std::vector<MatrixGroupLevel> groups;
        groups.push_back(gl2_full(2, 3));
        groups.push_back(gl2_full(3, 2));
        groups.push_back(cartan(3, 3, canonical_cartan(3, CartanType::Split)));
        groups.push_back(cartan(2, 4, canonical_cartan(2, CartanType::Nonsplit)));
        groups.push_back(normalizer_cartan(cartan(5, 2, canonical_cartan(5, CartanType::Split))));
        groups.push_back(preimage_group(mod3_base_group(), 3));
        for (const auto& g : groups) {
            MeasureTable t = measure_table(g, threads);
            c.expect(t.grid_mass() + t.undetermined == Rational(1),
                     "table normalization for " + g.tag());
        }
    }

    // kernel-class stability under lifts, exhaustive for ell in {2,3}, levels up to 4
    for (int64_t ell : {2, 3})
        for (int n = 1; n <= 3 && c.ok; ++n) {
            MatrixGroupLevel g = gl2_full(ell, n);
            Modulus up = Modulus::make(ell, n + 1);
            const int64_t step = g.mod.m;
            const int64_t lifts = up.m / step;
            for (size_t i = 0; i < g.size() && c.ok; ++i) {
                ResidueMatrix m = g.element(i);
                auto cls = kernel_class(m);
                if (!cls) continue;
                for (int64_t k0 = 0; k0 < lifts && c.ok; ++k0)
                    for (int64_t k1 = 0; k1 < lifts; ++k1)
                        for (int64_t k2 = 0; k2 < lifts; ++k2)
                            for (int64_t k3 = 0; k3 < lifts; ++k3) {
                                ResidueMatrix lift{up,
                                                   {m.e[0] + k0 * step, m.e[1] + k1 * step,
                                                    m.e[2] + k2 * step, m.e[3] + k3 * step}};
                                if (kernel_class(lift) != cls) {
                                    c.expect(false, "kernel class changed under lift, ell=" +
                                                        std::to_string(ell) +
                                                        " n=" + std::to_string(n));
                                    break;
                                }
                            }
            }
        }

    // fiber-translate property and w-value range on the order-ell arboreal example
    {
        Modulus m3 = Modulus::make(3, 1);
        ArborealGroupLevel h = ArborealGroupLevel::generated(
            3, 1,
            {ArborealElement{Vec2{0, 1}, ResidueMatrix::from_entries(m3, 1, 1, 0, 1)}});
        c.expect(h.size() == 3, "the order-ell example group has order ell");
        auto wi = h.kummer_fiber(ResidueMatrix::identity(m3));
        for (size_t i = 0; i < h.matrix_projection().size(); ++i) {
            ResidueMatrix m = h.matrix_projection().element(i);
            auto fiber = h.kummer_fiber(m);
            c.expect(fiber.size() == wi.size(), "fibers have equal cardinality");
            // W(M) = t0 + W(I)
            std::vector<Vec2> shifted;
            for (const auto& t : wi)
                shifted.push_back(Vec2{(fiber[0][0] + t[0]) % m3.m, (fiber[0][1] + t[1]) % m3.m});
            auto norm = [](std::vector<Vec2> v) {
                std::sort(v.begin(), v.end());
                return v;
            };
            c.expect(norm(fiber) == norm(shifted), "fiber is a translate of W(I)");
            Rational w = h.w_value(m);
            bool power = w.is_zero();
            if (!power) {
                power = w.num() == 1;
                BigInt den = w.den();
                while (power && den % 3 == 0) den /= 3;
                power = power && den == 1;
            }
            c.expect(power, "w must be 0 or a power of ell");
            if (!m.is_identity())
                c.expect(w.is_zero(), "w vanishes on the nontrivial matrix of the example");
        }
        Rational f = h.failure_constant();
        c.expect(f == Rational(9), "failure constant of the example at level 1");
    }

    // failure constant is a power of ell and stable under lifting
    {
        ArborealGroupLevel a2 = ArborealGroupLevel::standard(gl2_full(2, 2), 1);
        c.expect(a2.failure_constant() == Rational(4), "failure constant of the defect-1 model");
        ArborealGroupLevel a3 = a2.lift(3);
        c.expect(a3.failure_constant() == Rational(4), "failure constant stable under lift");
        c.expect(a3.fixed_density_level() <= a2.fixed_density_level(),
                 "density approximation decreases under lift");
    }

    // denominator audit on every density this suite produces
    {
        struct Row {
            const char* v;
            int64_t ell;
            bool cm;
        };
        static const Row rows[] = {
            {"11/21", 2, false},  {"16/21", 2, false},       {"37/42", 2, false},
            {"139/208", 3, false}, {"185/208", 3, false},    {"601/624", 3, false},
            {"2381/2976", 5, false}, {"2857/2976", 5, false}, {"14071/16416", 7, false},
            {"16081/16416", 7, false}, {"817/1152", 5, true}, {"1081/1152", 5, true},
            {"8/15", 2, true},    {"4/5", 2, true},          {"109/120", 2, true},
            {"23/104", 3, false}, {"77/104", 3, false},      {"95/104", 3, false},
            {"16801/18816", 13, true}, {"18649/18816", 13, true},
        };
        for (const auto& r : rows)
            c.expect(denominator_audit(Rational::parse(r.v), r.ell, r.cm),
                     std::string("denominator audit for ") + r.v);
    }

    // limit audit for all five closed forms
    for (ImageType img : {ImageType::Gl2Full, ImageType::SplitCartan, ImageType::NonsplitCartan,
                          ImageType::NormSplit, ImageType::NormNonsplit})
        for (int64_t ell : {2, 3, 5})
            c.expect(limit_audit(img, ell), std::string("limit audit ") + image_name(img) +
                                                " ell=" + std::to_string(ell));
}

CriterionResult run_one(int id, const std::string& name,
                        const std::function<void(Check&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = std::string("exception: ") + e.what();
    }
    r.pass = c.ok;
    r.detail = c.ok ? "" : c.detail;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts) {
    std::vector<CriterionResult> out;
    out.push_back(run_one(1, "closed-formula fidelity", [&](Check& c) { criterion_closed(c); }));
    out.push_back(run_one(2, "mod-3 pipeline (generated -> preimage -> fit -> series)",
                          [&](Check& c) { criterion_mod3(c, opts.threads); }));
    out.push_back(run_one(3, "mod-13 normalizer pipeline (coset split, tails, merged series)",
                          [&](Check& c) { criterion_mod13(c, opts.threads); }));
    out.push_back(run_one(4, "closed/series cross-validation (5 images x {2,3} x d<=2)",
                          [&](Check& c) { criterion_cross(c, opts.threads); }));
    out.push_back(run_one(5, "arboreal oracle (D_n sequence and certified interval)",
                          [&](Check& c) { criterion_arboreal(c); }));
    if (opts.skip_empirical) {
        CriterionResult r;
        r.id = 6;
        r.name = "empirical agreement";
        r.pass = true;
        r.detail = "skipped on request";
        out.push_back(r);
    } else {
        out.push_back(run_one(6, "empirical agreement (prime sweeps vs exact values)",
                              [&](Check& c) { criterion_empirical(c, opts); }));
    }
    out.push_back(run_one(7, "property suites (normalization, stability, w, F, audits)",
                          [&](Check& c) { criterion_properties(c, opts.threads); }));
    return out;
}

bool all_passed(const std::vector<CriterionResult>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return true;
}

} // namespace orderdens
