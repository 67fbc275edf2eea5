#include "orderdens/arboreal.hpp"
#include "orderdens/measures.hpp"

#include <doctest.h>

#include <algorithm>
#include <unordered_set>

using namespace orderdens;

namespace {

// Independent oracle for w: enumerate im(M - I) by scanning the domain and
// intersect with the fiber, directly from definitions.
Rational brute_w(const ArborealGroupLevel& a, const ResidueMatrix& m) {
    const int64_t mm = m.mod.m;
    ResidueMatrix d = mat_sub(m, ResidueMatrix::identity(m.mod));
    std::unordered_set<uint64_t> image;
    for (int64_t x = 0; x < mm; ++x)
        for (int64_t y = 0; y < mm; ++y)
            image.insert(static_cast<uint64_t>(mat_apply(d, Vec2{x, y})[0]) * mm +
                         mat_apply(d, Vec2{x, y})[1]);
    uint64_t hit = 0;
    for (const auto& t : a.kummer_fiber(m))
        hit += image.count(static_cast<uint64_t>(t[0]) * mm + t[1]);
    return Rational(BigInt(static_cast<int64_t>(hit)),
                    BigInt(static_cast<int64_t>(image.size())));
}

ArborealGroupLevel order_ell_example(int64_t ell) {
    Modulus m = Modulus::make(ell, 1);
    return ArborealGroupLevel::generated(
        ell, 1, {ArborealElement{Vec2{0, 1}, ResidueMatrix::from_entries(m, 1, 1, 0, 1)}});
}

} // namespace

TEST_CASE("semidirect law") {
    Modulus m = Modulus::make(3, 2);
    ArborealElement id{Vec2{0, 0}, ResidueMatrix::identity(m)};
    ArborealElement g{Vec2{2, 5}, ResidueMatrix::from_entries(m, 1, 3, 0, 8)};
    CHECK(arb_mul(g, arb_inv(g)).m.is_identity());
    CHECK(arb_mul(g, arb_inv(g)).t == Vec2{0, 0});
    CHECK(arb_mul(id, g).t == g.t);
    // (u, M)^k = ([k]u, M^k) for M = I
    ArborealElement u{Vec2{1, 2}, ResidueMatrix::identity(m)};
    ArborealElement p = u;
    for (int k = 2; k <= 5; ++k) {
        p = arb_mul(p, u);
        CHECK(p.t == Vec2{k % 9, (2 * k) % 9});
    }
}

TEST_CASE("standard model sizes and fibers") {
    ArborealGroupLevel a = ArborealGroupLevel::standard(gl2_full(2, 1), 0);
    CHECK(a.size() == BigInt(24)); // 4 * 6
    CHECK(a.kummer_fiber(ResidueMatrix::identity(a.mod())).size() == 4);

    // defect >= level: fibers shrink to {0}
    ArborealGroupLevel b = ArborealGroupLevel::standard(gl2_full(2, 2), 5);
    CHECK(b.size() == BigInt(static_cast<int64_t>(gl2_full(2, 2).size())));
    CHECK(b.kummer_fiber(ResidueMatrix::identity(b.mod())) == std::vector<Vec2>{Vec2{0, 0}});

    // closure spot-check: products of sampled elements stay inside
    ArborealGroupLevel c = ArborealGroupLevel::standard(gl2_full(2, 2), 1);
    const MatrixGroupLevel& proj = c.matrix_projection();
    for (size_t i = 0; i < proj.size(); i += 7)
        for (size_t j = 0; j < proj.size(); j += 11) {
            ArborealElement x{Vec2{2, 0}, proj.element(i)};
            ArborealElement y{Vec2{0, 2}, proj.element(j)};
            REQUIRE(c.contains(x));
            REQUIRE(c.contains(y));
            REQUIRE(c.contains(arb_mul(x, y)));
        }
}

TEST_CASE("generated arboreal groups") {
    ArborealGroupLevel h = order_ell_example(3);
    CHECK(h.size() == BigInt(3));
    CHECK(ArborealGroupLevel::generated(3, 1, {}).size() == BigInt(1));

    // generators of the full standard model reproduce it
    Modulus m2 = Modulus::make(2, 1);
    std::vector<ArborealElement> gens = {
        ArborealElement{Vec2{1, 0}, ResidueMatrix::identity(m2)},
        ArborealElement{Vec2{0, 1}, ResidueMatrix::identity(m2)},
        ArborealElement{Vec2{0, 0}, ResidueMatrix::from_entries(m2, 1, 1, 0, 1)},
        ArborealElement{Vec2{0, 0}, ResidueMatrix::from_entries(m2, 0, 1, 1, 0)}};
    CHECK(ArborealGroupLevel::generated(2, 1, gens).size() == BigInt(24));
}

TEST_CASE("kummer fibers: translate property and the pinned example") {
    ArborealGroupLevel h = order_ell_example(3);
    Modulus m = h.mod();
    ResidueMatrix u = ResidueMatrix::from_entries(m, 1, 1, 0, 1);
    CHECK(h.kummer_fiber(u) == std::vector<Vec2>{Vec2{0, 1}});
    CHECK_THROWS_AS(h.kummer_fiber(ResidueMatrix::from_entries(m, 2, 0, 0, 2)),
                    std::domain_error);

    auto wi = h.kummer_fiber(ResidueMatrix::identity(m));
    for (size_t i = 0; i < h.matrix_projection().size(); ++i) {
        auto fiber = h.kummer_fiber(h.matrix_projection().element(i));
        REQUIRE(fiber.size() == wi.size());
        std::vector<Vec2> shifted;
        for (const auto& t : wi)
            shifted.push_back(Vec2{(fiber[0][0] + t[0]) % m.m, (fiber[0][1] + t[1]) % m.m});
        std::sort(fiber.begin(), fiber.end());
        std::sort(shifted.begin(), shifted.end());
        CHECK(fiber == shifted);
    }
}

TEST_CASE("w values") {
    // maximal Kummer: w = 1 everywhere
    ArborealGroupLevel a = ArborealGroupLevel::standard(gl2_full(2, 2), 0);
    for (size_t i = 0; i < a.matrix_projection().size(); ++i)
        CHECK(a.w_value(a.matrix_projection().element(i)) == Rational(1));

    // the order-ell example: w dies on the nontrivial matrix
    ArborealGroupLevel h = order_ell_example(3);
    CHECK(h.w_value(ResidueMatrix::from_entries(h.mod(), 1, 1, 0, 1)) == Rational(0));

    // fast path vs brute force on a defect-1 model
    ArborealGroupLevel d1 = ArborealGroupLevel::standard(gl2_full(2, 2), 1);
    for (size_t i = 0; i < d1.matrix_projection().size(); ++i) {
        ResidueMatrix m = d1.matrix_projection().element(i);
        Rational w = d1.w_value(m);
        REQUIRE(w == brute_w(d1, m));
        // always zero or a power of ell with nonpositive exponent
        bool good = w.is_zero() || (w.num() == 1);
        if (!w.is_zero()) {
            BigInt den = w.den();
            while (den % 2 == 0) den /= 2;
            good = good && den == 1 && w <= Rational(1);
        }
        REQUIRE(good);
    }
}

TEST_CASE("defect-model w matches the closed expression") {
    // w(M) = #fine / (ell^(2d) * #(ell^d fine)) for class (a, b), level > max(d, a+b)
    for (int d : {0, 1, 2}) {
        ArborealGroupLevel a = ArborealGroupLevel::standard(gl2_full(2, 4), d);
        const MatrixGroupLevel& proj = a.matrix_projection();
        for (size_t i = 0; i < proj.size(); i += 3) {
            ResidueMatrix m = proj.element(i);
            auto cls = kernel_class(m);
            if (!cls) continue;
            auto [aa, bb] = *cls;
            if (std::max(d, aa + bb) >= a.mod().level) continue;
            long long fine = 2LL * aa + bb;
            long long scaled = std::max(aa - d, 0) + std::max(aa + bb - d, 0);
            Rational expect = Rational(pow_big(BigInt(2), fine)) /
                              Rational(pow_big(BigInt(2), 2LL * d + scaled));
            REQUIRE(a.w_value(m) == expect);
        }
    }
}

TEST_CASE("failure constant") {
    CHECK(ArborealGroupLevel::standard(gl2_full(2, 2), 0).failure_constant() == Rational(1));
    CHECK(ArborealGroupLevel::standard(gl2_full(2, 3), 2).failure_constant() == Rational(16));
    CHECK(order_ell_example(3).failure_constant() == Rational(9));

    // stability under the preimage lift
    ArborealGroupLevel a = ArborealGroupLevel::standard(gl2_full(2, 2), 1);
    CHECK(a.lift(3).failure_constant() == a.failure_constant());
    ArborealGroupLevel h = order_ell_example(3);
    CHECK(h.lift(2).failure_constant() == Rational(9)); // 3^(2*2) / #W(I) = 81/9
}

TEST_CASE("fixed density level and intervals") {
    ArborealGroupLevel a1 = ArborealGroupLevel::standard(gl2_full(2, 1), 0);
    CHECK(a1.fixed_density_level() == Rational(BigInt(5), BigInt(8)));

    CHECK(ArborealGroupLevel::generated(2, 1, {}).fixed_density_level() == Rational(1));

    Rational prev = a1.fixed_density_level();
    Rational prev_width(2);
    for (int n = 2; n <= 4; ++n) {
        ArborealGroupLevel an = ArborealGroupLevel::standard(gl2_full(2, n), 0);
        Rational dn = an.fixed_density_level();
        CHECK(dn <= prev);
        Rational tail = singular_mass(an.matrix_projection(), n);
        auto [lo, hi] = an.density_interval(tail);
        CHECK(lo <= Rational(BigInt(11), BigInt(21)));
        CHECK(Rational(BigInt(11), BigInt(21)) <= hi);
        CHECK(hi - lo < prev_width);
        prev = dn;
        prev_width = hi - lo;
    }

    auto [lo, hi] = a1.density_interval(Rational(0));
    CHECK(lo == hi); // point interval when the tail vanishes
}

TEST_CASE("delta_ab") {
    ArborealGroupLevel a0 = ArborealGroupLevel::standard(gl2_full(2, 3), 0);
    for (int aa = 0; aa < 2; ++aa)
        for (int bb = 0; aa + bb < 2; ++bb) {
            auto d = a0.delta_ab(aa, bb);
            CHECK(!d.empty_class);
            CHECK(d.value == Rational(1));
        }
    ArborealGroupLevel a1 = ArborealGroupLevel::standard(gl2_full(2, 3), 1);
    auto d01 = a1.delta_ab(0, 1);
    CHECK(d01.value == Rational(BigInt(1), BigInt(2))); // ell^(2a+b-2d-...) at (0,1), d=1
    CHECK_THROWS_AS(a1.delta_ab(3, 0), std::invalid_argument);

    // empty class is flagged: the trivial projection has no (0,1) matrices
    ArborealGroupLevel triv = ArborealGroupLevel::generated(2, 2, {});
    auto d = triv.delta_ab(0, 1);
    CHECK(d.empty_class);
    CHECK(d.value == Rational(0));
}

TEST_CASE("finite-sum consistency of the density approximation") {
    // F * sum_grid mu * ell^-(2a+b) * delta_n plus a remainder inside the
    // unresolved mass reproduces fixed_density_level
    for (int d : {0, 1}) {
        ArborealGroupLevel a = ArborealGroupLevel::standard(gl2_full(2, 3), d);
        MeasureTable t = measure_table(a.matrix_projection());
        Rational f = a.failure_constant();
        Rational grid_sum(0);
        for (const auto& [cell, mu] : t.mu) {
            auto delta = a.delta_ab(cell.first, cell.second);
            grid_sum += mu *
                        Rational(BigInt(1),
                                 pow_big(BigInt(2), 2LL * cell.first + cell.second)) *
                        delta.value;
        }
        Rational hi = a.fixed_density_level();
        Rational remainder = hi - f * grid_sum;
        CHECK(remainder >= Rational(0));
        CHECK(remainder <= t.undetermined);
    }
}

TEST_CASE("explicit lift keeps the density approximation monotone") {
    ArborealGroupLevel h = order_ell_example(3);
    ArborealGroupLevel h2 = h.lift(2);
    CHECK(h2.size() == BigInt(3 * 729)); // index grows by ell^6
    CHECK(h2.fixed_density_level() <= h.fixed_density_level());
    // fibers of the lift are full preimages of the base fibers
    CHECK(h2.kummer_fiber(ResidueMatrix::identity(h2.mod())).size() == 9);
}
