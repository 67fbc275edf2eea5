#include "orderdens/modmatrix.hpp"

#include <doctest.h>

#include <algorithm>

using namespace orderdens;

namespace {

// Independent oracle: count the kernel of A on (Z/ell^n)^2 by scanning all vectors.
uint64_t brute_kernel_size(const ResidueMatrix& a) {
    const int64_t m = a.mod.m;
    uint64_t count = 0;
    for (int64_t x = 0; x < m; ++x)
        for (int64_t y = 0; y < m; ++y)
            if ((a.e[0] * x + a.e[1] * y) % m == 0 && (a.e[2] * x + a.e[3] * y) % m == 0)
                ++count;
    return count;
}

int64_t ipow(int64_t b, int e) {
    int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

} // namespace

TEST_CASE("elementary valuations match the brute-force kernel count") {
    for (int64_t ell : {2, 3}) {
        int max_level = ell == 2 ? 3 : 2;
        for (int n = 1; n <= max_level; ++n) {
            Modulus mod = Modulus::make(ell, n);
            for (int64_t a = 0; a < mod.m; ++a)
                for (int64_t b = 0; b < mod.m; ++b)
                    for (int64_t c = 0; c < mod.m; ++c)
                        for (int64_t d = 0; d < mod.m; ++d) {
                            ResidueMatrix mat{mod, {a, b, c, d}};
                            auto [e1, e2] = elementary_valuations(mat);
                            REQUIRE(e1 <= e2);
                            REQUIRE(brute_kernel_size(mat) ==
                                    static_cast<uint64_t>(ipow(ell, e1 + e2)));
                            // e1 + e2 = v(det), with both sides clipped at the level
                            if (e2 < n)
                                REQUIRE(std::min(e1 + e2, n) ==
                                        residue_valuation(mat.det(), mod));
                            // pivot-independence: the transpose has the same profile
                            ResidueMatrix t{mod, {a, c, b, d}};
                            REQUIRE(elementary_valuations(t) == std::make_pair(e1, e2));
                        }
        }
    }
}

TEST_CASE("elementary valuations, pinned examples") {
    Modulus m32 = Modulus::make(3, 2);
    CHECK(elementary_valuations(ResidueMatrix{m32, {0, 0, 0, 0}}) == std::make_pair(2, 2));
    CHECK(elementary_valuations(ResidueMatrix::from_entries(m32, 3, 0, 0, 1)) ==
          std::make_pair(0, 1));
    Modulus m23 = Modulus::make(2, 3);
    CHECK(elementary_valuations(ResidueMatrix::from_entries(m23, 2, 0, 0, 4)) ==
          std::make_pair(1, 2));
}

TEST_CASE("kernel_class") {
    Modulus m32 = Modulus::make(3, 2);
    CHECK(!kernel_class(ResidueMatrix::identity(m32)).has_value());
    CHECK(kernel_class(ResidueMatrix::from_entries(m32, 4, 0, 0, 2)) == std::make_pair(0, 1));

    // mod 2 only the two elements of order 3 are fixed-point-free
    Modulus m2 = Modulus::make(2, 1);
    int determined = 0;
    for (int64_t a = 0; a < 2; ++a)
        for (int64_t b = 0; b < 2; ++b)
            for (int64_t c = 0; c < 2; ++c)
                for (int64_t d = 0; d < 2; ++d) {
                    ResidueMatrix m{m2, {a, b, c, d}};
                    if (!m.invertible()) continue;
                    auto cls = kernel_class(m);
                    if (cls) {
                        CHECK(*cls == std::make_pair(0, 0));
                        CHECK(mat_pow(m, 3).is_identity());
                        ++determined;
                    }
                }
    CHECK(determined == 2);
}

TEST_CASE("kernel class is stable under lifting") {
    for (int64_t ell : {2, 3})
        for (int n = 1; n <= 2; ++n) {
            Modulus mod = Modulus::make(ell, n);
            Modulus up = Modulus::make(ell, n + 1);
            const int64_t lifts = up.m / mod.m;
            for (int64_t a = 0; a < mod.m; ++a)
                for (int64_t b = 0; b < mod.m; ++b)
                    for (int64_t c = 0; c < mod.m; ++c)
                        for (int64_t d = 0; d < mod.m; ++d) {
                            ResidueMatrix m{mod, {a, b, c, d}};
                            if (!m.invertible()) continue;
                            auto cls = kernel_class(m);
                            if (!cls) continue;
                            for (int64_t k0 = 0; k0 < lifts; ++k0)
                                for (int64_t k1 = 0; k1 < lifts; ++k1)
                                    for (int64_t k2 = 0; k2 < lifts; ++k2)
                                        for (int64_t k3 = 0; k3 < lifts; ++k3)
                                            REQUIRE(kernel_class(ResidueMatrix{
                                                        up,
                                                        {a + k0 * mod.m, b + k1 * mod.m,
                                                         c + k2 * mod.m, d + k3 * mod.m}}) == cls);
                        }
        }
}

TEST_CASE("matrix arithmetic") {
    Modulus m4 = Modulus::make(2, 2);
    ResidueMatrix u = ResidueMatrix::from_entries(m4, 1, 1, 0, 1);
    CHECK(mat_pow(u, 4).is_identity());
    CHECK(mat_inv(ResidueMatrix::identity(m4)).is_identity());
    CHECK(mat_mul(u, mat_inv(u)).is_identity());
    CHECK(mat_pow(u, -1) == mat_inv(u));
    CHECK_THROWS_AS(mat_inv(ResidueMatrix::from_entries(m4, 2, 0, 0, 1)), std::domain_error);

    Modulus m9 = Modulus::make(3, 2);
    CHECK_THROWS_AS(mat_mul(u, ResidueMatrix::identity(m9)), std::invalid_argument);
}
