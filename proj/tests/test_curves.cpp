#include "orderdens/curves.hpp"

#include <doctest.h>

using namespace orderdens;

namespace {

const CurveQ k37a{0, 0, 1, -1, 0, "37.a1"};
const CurveQ k153b2{0, 0, 1, 6, 27, "153.b2"};

// Oracle: count points of y^2 = x^3 + Ax + B over F_p by scanning all (x, y).
int64_t brute_count(const CurveFp& c) {
    int64_t n = 1; // infinity
    for (int64_t x = 0; x < c.p; ++x) {
        int64_t f = ((x * x % c.p) * x + c.A * x + c.B) % c.p;
        for (int64_t y = 0; y < c.p; ++y)
            if (y * y % c.p == f) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("discriminants and curve membership") {
    CHECK(k37a.discriminant() == BigInt(37));
    CHECK(!k153b2.discriminant().is_zero());
    CHECK(k153b2.discriminant() % 3 == 0);
    CHECK(on_curve(k37a, PointQ{0, 0}));
    CHECK(on_curve(k153b2, PointQ{5, 13}));
    CHECK(on_curve(CurveQ{0, 0, 1, 0, 7140}, PointQ{56, 427}));
    CHECK(on_curve(CurveQ{0, 0, 0, 3, 0}, PointQ{1, -2}));
    CHECK(on_curve(CurveQ{0, 0, 0, 0, 3}, PointQ{1, 2}));
    CHECK(!on_curve(k37a, PointQ{1, 1}));
}

TEST_CASE("good reduction and skips") {
    CHECK(!reduce_good(k37a, PointQ{0, 0}, 2));
    CHECK(!reduce_good(k37a, PointQ{0, 0}, 3));
    CHECK(!reduce_good(k37a, PointQ{0, 0}, 37)); // p | disc
    auto red = reduce_good(k37a, PointQ{0, 0}, 5);
    REQUIRE(red.has_value());
    CHECK(red->first.p == 5);
}

TEST_CASE("group order by character sum matches brute force") {
    for (int64_t p : {5, 7, 11, 13, 17, 101}) {
        for (int64_t A : {0, 1, 3}) {
            for (int64_t B : {1, 2, 5}) {
                CurveFp c{p, A, B};
                // skip singular reductions: 4A^3 + 27B^2 = 0 mod p
                if ((4 * A * A * A + 27 * B * B) % p == 0) continue;
                CHECK(group_order(c) == brute_count(c));
            }
        }
    }
    CHECK(group_order(CurveFp{7, 3, 0}) == 8); // y^2 = x^3 + 3x mod 7
}

TEST_CASE("point arithmetic and orders") {
    auto red = reduce_good(k37a, PointQ{0, 0}, 101);
    REQUIRE(red.has_value());
    auto [c, pt] = *red;
    int64_t n = group_order(c);

    // Lagrange: N * P = O for a batch of curve points
    int found = 0;
    for (int64_t x = 0; x < c.p && found < 20; ++x) {
        int64_t f = ((x * x % c.p) * x + c.A * x + c.B) % c.p;
        for (int64_t y = 0; y < c.p && found < 20; ++y)
            if (y * y % c.p == f) {
                CHECK(ec_mul(c, n, PointFp{x, y, false}).infinity);
                ++found;
            }
    }

    int64_t ord = point_order(c, pt, n);
    CHECK(n % ord == 0);
    CHECK(ec_mul(c, ord, pt).infinity);
    for (int64_t q = 2; q <= ord; ++q)
        if (ord % q == 0 && q > 1) {
            bool is_prime_q = true;
            for (int64_t r = 2; r * r <= q; ++r)
                if (q % r == 0) is_prime_q = false;
            if (is_prime_q) CHECK(!ec_mul(c, ord / q, pt).infinity);
        }
    CHECK(point_order(c, PointFp{0, 0, true}, n) == 1);
    CHECK_THROWS_AS(point_order(c, pt, n + 1), std::invalid_argument);
}

TEST_CASE("scaling drops the ell-valuation of the order by one") {
    for (int64_t p : {11, 23, 41, 59, 83}) {
        auto red = reduce_good(k37a, PointQ{0, 0}, p);
        REQUIRE(red.has_value());
        auto [c, pt] = *red;
        int64_t n = group_order(c);
        int64_t ord = point_order(c, pt, n);
        PointFp doubled = ec_mul(c, 2, pt);
        int64_t ord2 = doubled.infinity ? 1 : point_order(c, doubled, n);
        auto v2 = [](int64_t x) {
            int v = 0;
            while (x % 2 == 0) { x /= 2; ++v; }
            return v;
        };
        CHECK(v2(ord2) == std::max(v2(ord) - 1, 0));
    }
}

TEST_CASE("small sweeps behave") {
    std::vector<SweepRow> rows;
    SweepReport rep = empirical_density(k37a, PointQ{0, 0}, 2, 3000, 0, 2, &rows);
    CHECK(rep.primes_used + rep.primes_skipped == primes_up_to(3000).size());
    CHECK(rep.primes_skipped == 3); // 2, 3, 37
    CHECK(rep.count_coprime <= rep.primes_used);
    CHECK(rows.size() == rep.primes_used);
    // rough agreement with 11/21 = 0.5238 already at a small bound
    CHECK(std::abs(rep.frequency - 11.0 / 21.0) < 0.05);

    // frequency is monotone nondecreasing in the scale k
    SweepReport k0 = empirical_density(k37a, PointQ{0, 0}, 2, 2000, 0, 2);
    SweepReport k1 = empirical_density(k37a, PointQ{0, 0}, 2, 2000, 1, 2);
    SweepReport k2 = empirical_density(k37a, PointQ{0, 0}, 2, 2000, 2, 2);
    CHECK(k0.frequency <= k1.frequency);
    CHECK(k1.frequency <= k2.frequency);

    CHECK_THROWS_AS(empirical_density(k37a, PointQ{1, 1}, 2, 1000, 0, 1),
                    std::invalid_argument);
}
