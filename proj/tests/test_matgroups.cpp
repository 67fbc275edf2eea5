#include "orderdens/matgroups.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace orderdens;

namespace {

std::set<uint64_t> key_set(const MatrixGroupLevel& g) {
    std::set<uint64_t> s;
    for (const auto& p : g.elems) s.insert(mat_key(p, g.mod.m));
    return s;
}

MatrixGroupLevel mod3_group() {
    Modulus m = Modulus::make(3, 1);
    return generated_subgroup(3, 1,
                              {ResidueMatrix::from_entries(m, 1, 1, 0, 1),
                               ResidueMatrix::from_entries(m, -1, 0, 0, 1)});
}

MatrixGroupLevel mod13_group() {
    Modulus m = Modulus::make(13, 1);
    return generated_subgroup(13, 1,
                              {ResidueMatrix::from_entries(m, 2, 0, 0, 2),
                               ResidueMatrix::from_entries(m, 5, 0, 0, 1),
                               ResidueMatrix::from_entries(m, 0, 1, -1, 0)});
}

} // namespace

TEST_CASE("gl2_full orders") {
    CHECK(gl2_full(2, 1).size() == 6);
    CHECK(gl2_full(3, 1).size() == 48);
    CHECK(gl2_full(3, 2).size() == 3888);
    CHECK(gl2_order(3, 2) == BigInt(3888));
    CHECK(gl2_polynomial(BigInt(2)) == BigInt(6));
    CHECK(closure_audit(gl2_full(2, 2)));
    CHECK_THROWS_AS(gl2_full(13, 2), SizeGuardExceeded);
}

TEST_CASE("cartan subgroups") {
    MatrixGroupLevel split5 = cartan(5, 1, 1);
    CHECK(split5.size() == 16); // (5-1)^2
    CHECK(classify_cartan(*split5.cartan_params, split5.mod) == CartanType::Split);

    MatrixGroupLevel nonsplit5 = cartan(5, 1, 2);
    CHECK(nonsplit5.size() == 24); // 5^2 - 1
    CHECK(classify_cartan(*nonsplit5.cartan_params, nonsplit5.mod) == CartanType::Nonsplit);

    MatrixGroupLevel c2 = cartan(2, 1, 1);
    CHECK(c2.contains(ResidueMatrix::identity(c2.mod)));
    CHECK(closure_audit(c2));
    // the trace-zero family ramifies at 2; the maximal orders use r = 1
    CHECK(classify_cartan(CartanParams{0, 1}, Modulus::make(2, 3)) == CartanType::Ramified);
    CHECK(cartan(2, 1, canonical_cartan(2, CartanType::Split)).size() == 1);
    CHECK(cartan(2, 1, canonical_cartan(2, CartanType::Nonsplit)).size() == 3);
    CHECK(classify_cartan(CartanParams{0, 3}, Modulus::make(3, 2)) == CartanType::Ramified);

    for (auto type : {CartanType::Split, CartanType::Nonsplit})
        for (int64_t ell : {2, 3, 5, 13}) {
            MatrixGroupLevel c = cartan(ell, 1, canonical_cartan(ell, type));
            CHECK(c.size() == (type == CartanType::Split ? (ell - 1) * (ell - 1) : ell * ell - 1));
            CHECK(closure_audit(c));
        }
}

TEST_CASE("normalizer of a cartan") {
    MatrixGroupLevel n_split = normalizer_cartan(cartan(5, 1, 1));
    CHECK(n_split.size() == 32);
    CHECK(closure_audit(n_split));
    MatrixGroupLevel n_nonsplit = normalizer_cartan(cartan(5, 1, 2));
    CHECK(n_nonsplit.size() == 48);
    CHECK(closure_audit(n_nonsplit));

    // w^2 = I and exactly two cosets
    ResidueMatrix w = n_split.cartan_params->coset_rep(n_split.mod);
    CHECK(mat_mul(w, w).is_identity());
    size_t nontrivial = 0;
    for (size_t i = 0; i < n_split.size(); ++i)
        if (n_split.in_nontrivial_coset(n_split.element(i))) ++nontrivial;
    CHECK(nontrivial * 2 == n_split.size());
}

TEST_CASE("split cartan measures agree with the diagonal model") {
    // conjugation check at ell = 5, level 1: same element count and the same
    // multiset of fixed-point classes as plain diagonal matrices
    MatrixGroupLevel c = cartan(5, 1, canonical_cartan(5, CartanType::Split));
    Modulus m5 = Modulus::make(5, 1);
    std::multiset<std::pair<int, int>> model_classes, diag_classes;
    auto record = [](const ResidueMatrix& m, std::multiset<std::pair<int, int>>& into) {
        auto cls = kernel_class(m);
        into.insert(cls ? *cls : std::make_pair(-1, -1));
    };
    for (size_t i = 0; i < c.size(); ++i) record(c.element(i), model_classes);
    int64_t diag_count = 0;
    for (int64_t a = 1; a < 5; ++a)
        for (int64_t b = 1; b < 5; ++b) {
            record(ResidueMatrix::from_entries(m5, a, 0, 0, b), diag_classes);
            ++diag_count;
        }
    CHECK(diag_count == static_cast<int64_t>(c.size()));
    CHECK(model_classes == diag_classes);
}

TEST_CASE("generated subgroups") {
    CHECK(mod3_group().size() == 6);
    CHECK(mod13_group().size() == 96);
    CHECK(generated_subgroup(3, 1, {}).size() == 1);
    CHECK(closure_audit(mod13_group()));
}

TEST_CASE("preimage groups") {
    MatrixGroupLevel g = mod3_group();
    MatrixGroupLevel p2 = preimage_group(g, 2);
    CHECK(p2.size() == 486); // 6 * 3^4
    CHECK(closure_audit(p2));
    CHECK(p2.tag() == "preimage-of(level 1)");

    // preimage of GL2(Z/2) at level 2 is all of GL2(Z/4)
    MatrixGroupLevel p = preimage_group(gl2_full(2, 1), 2);
    CHECK(key_set(p) == key_set(gl2_full(2, 2)));

    // trivial lift
    CHECK(preimage_group(g, 1).size() == g.size());

    // counting formula
    CHECK(preimage_group(g, 3).size() == 6u * 6561u);
}

TEST_CASE("reduction kernel sizes stabilize") {
    CHECK(reduction_kernel_size(gl2_full(2, 3)) == 16);
    CHECK(reduction_kernel_size(gl2_full(2, 2)) == 16);
    CHECK(reduction_kernel_size(preimage_group(mod3_group(), 2)) == 81);
    CHECK(reduction_kernel_size(preimage_group(mod3_group(), 3)) == 81);
    CHECK(reduction_kernel_size(cartan(5, 2, 1)) == 25);
    CHECK(reduction_kernel_size(cartan(5, 3, 1)) == 25);
}

TEST_CASE("normalizer frame detection") {
    MatrixGroupLevel g = mod13_group();
    auto frame = detect_normalizer_frame(g);
    REQUIRE(frame.has_value());
    g.frame = frame;
    size_t cartan_part = 0;
    for (size_t i = 0; i < g.size(); ++i)
        if (!g.in_nontrivial_coset(g.element(i))) ++cartan_part;
    CHECK(cartan_part == 48);
    // the detected Cartan part is the diagonal part
    for (size_t i = 0; i < g.size(); ++i) {
        ResidueMatrix m = g.element(i);
        bool diagonal = m.e[1] == 0 && m.e[2] == 0;
        CHECK(g.in_nontrivial_coset(m) == !diagonal);
    }
}

TEST_CASE("cartan-direction preimages") {
    MatrixGroupLevel n = normalizer_cartan(cartan(5, 1, 1));
    MatrixGroupLevel lift = cartan_preimage(n, 2);
    CHECK(lift.size() == n.size() * 25);
    CHECK(closure_audit(lift)); // full pairwise audit at this size
    // contained in the full preimage, and reduces onto the base
    MatrixGroupLevel full = preimage_group(n, 2);
    auto keys = key_set(full);
    for (const auto& p : lift.elems) CHECK(keys.count(mat_key(p, lift.mod.m)));

    // detected-frame route: the mod-13 group
    MatrixGroupLevel g = mod13_group();
    g.frame = detect_normalizer_frame(g);
    MatrixGroupLevel l2 = cartan_preimage(g, 2);
    CHECK(l2.size() == 96u * 169u);
    CHECK(closure_audit(l2));
    for (const auto& p : l2.elems) {
        ResidueMatrix m = unpack_mat(l2.mod, p);
        CHECK(g.contains(m.reduce(1)));
    }
}

TEST_CASE("streamed lift enumeration matches materialized groups") {
    MatrixGroupLevel g = mod3_group();
    std::set<uint64_t> streamed;
    for_each_lift(g, 2, 4, 1, [&](int, const ResidueMatrix& m) {
        streamed.insert(mat_key(pack_mat(m), m.mod.m));
    });
    CHECK(streamed == key_set(preimage_group(g, 2)));

    MatrixGroupLevel n = normalizer_cartan(cartan(5, 1, 2));
    std::set<uint64_t> streamed2;
    for_each_lift(n, 2, 2, 1, [&](int, const ResidueMatrix& m) {
        streamed2.insert(mat_key(pack_mat(m), m.mod.m));
    });
    CHECK(streamed2 == key_set(cartan_preimage(n, 2)));
}

TEST_CASE("size guard is configurable") {
    CHECK(size_guard() == 8000000);
    CHECK_THROWS_AS(preimage_group(gl2_full(3, 1), 4), SizeGuardExceeded); // 48 * 3^12
}
