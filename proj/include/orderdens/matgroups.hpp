#pragma once

/**
 * @file matgroups.hpp
 * @brief Finite subgroups of GL2(Z/ell^n Z): full group, Cartan subgroups and
 *        their normalizers, generated subgroups, and preimage lifts across levels.
 *
 * Groups are stored as deduplicated element lists (packed 4-entry rows).  A
 * configurable size guard caps enumeration; streaming scans over preimage
 * lifts avoid materializing the very large levels.
 */

#include "orderdens/modmatrix.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace orderdens {

using PackedMat = std::array<uint32_t, 4>;

inline PackedMat pack_mat(const ResidueMatrix& m) {
    return {static_cast<uint32_t>(m.e[0]), static_cast<uint32_t>(m.e[1]),
            static_cast<uint32_t>(m.e[2]), static_cast<uint32_t>(m.e[3])};
}

inline ResidueMatrix unpack_mat(const Modulus& mod, const PackedMat& p) {
    return ResidueMatrix{mod, {p[0], p[1], p[2], p[3]}};
}

inline uint64_t mat_key(const PackedMat& p, int64_t m) {
    return ((static_cast<uint64_t>(p[0]) * m + p[1]) * m + p[2]) * m + p[3];
}

enum class GroupKind { Full, Cartan, Normalizer, Generated, Preimage };

/// Parameters (r, d) of a Cartan subgroup: the algebra spanned by I and
/// phi = [[0, d], [1, r]] (phi^2 = r*phi + d).  r = 0 is the classical trace-zero
/// family; ell = 2 needs r = 1 to reach the maximal (split/nonsplit) orders.
struct CartanParams {
    int64_t r = 0;
    int64_t d = 0;

    int64_t disc() const { return r * r + 4 * d; }
    ResidueMatrix phi(const Modulus& mod) const;
    /// Coset representative w with w^2 = I and w phi w^-1 = r*I - phi.
    ResidueMatrix coset_rep(const Modulus& mod) const;
};

enum class CartanType { Split, Nonsplit, Ramified };

CartanType classify_cartan(const CartanParams& c, const Modulus& mod);

/// Canonical parameters whose unit group is a maximal split/nonsplit Cartan.
CartanParams canonical_cartan(int64_t ell, CartanType type);

/// The two-element data needed to split a normalizer-structured group into
/// its Cartan coset and the nontrivial coset, and to lift it along the
/// 2-dimensional Cartan directions.
struct NormalizerFrame {
    ResidueMatrix phi;  // non-scalar mod ell; the Cartan algebra is span{I, phi}
    ResidueMatrix wrep; // any element of the nontrivial coset
};

struct MatrixGroupLevel {
    Modulus mod;
    GroupKind kind = GroupKind::Generated;
    std::vector<PackedMat> elems;
    std::vector<ResidueMatrix> generators;
    std::optional<CartanParams> cartan_params;
    std::optional<NormalizerFrame> frame;      // set for normalizer-structured groups
    std::shared_ptr<const MatrixGroupLevel> base; // set for preimage groups
    int base_level = 0;

    size_t size() const { return elems.size(); }
    ResidueMatrix element(size_t i) const { return unpack_mat(mod, elems[i]); }
    bool contains(const ResidueMatrix& m) const;
    std::string tag() const;

    /// For normalizer-structured groups (directly or through a preimage base):
    /// true iff the element lies in the nontrivial coset.
    bool in_nontrivial_coset(const ResidueMatrix& m) const;
};

/// Default 8e6 elements; ORDER_DENSITY_SIZE_GUARD overrides.
size_t size_guard();

struct SizeGuardExceeded : std::runtime_error {
    explicit SizeGuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

MatrixGroupLevel gl2_full(int64_t ell, int level);
BigInt gl2_order(int64_t ell, int level);

/// gl_b(t) = prod_{k<b} (t^b - t^k) for b = 2: the order of GL2(Z/ell).
BigInt gl2_polynomial(const BigInt& t);

MatrixGroupLevel cartan(int64_t ell, int level, const CartanParams& params);
MatrixGroupLevel cartan(int64_t ell, int level, int64_t d); // (0, d) family

/// C together with w*C; verifies w (x*I + y*phi) w^-1 = x*I + y*(r*I - phi) stays in C.
MatrixGroupLevel normalizer_cartan(const MatrixGroupLevel& c);

MatrixGroupLevel generated_subgroup(int64_t ell, int level,
                                    const std::vector<ResidueMatrix>& gens);

/// All matrices mod ell^n reducing into G (4-dimensional lift directions);
/// order is #G * ell^(4(n-m)).
MatrixGroupLevel preimage_group(const MatrixGroupLevel& g, int level);

/// Preimage inside the ambient Cartan normalizer: lifts only along the
/// 2-dimensional algebra directions; order is #G * ell^(2(n-m)).
/// Requires g to carry a NormalizerFrame (built by normalizer_cartan, detected,
/// or supplied).
MatrixGroupLevel cartan_preimage(const MatrixGroupLevel& g, int level);

/// #ker(G(n) -> G(n-1)); requires n >= 2.
size_t reduction_kernel_size(const MatrixGroupLevel& g);

/// Pairwise-product closure check: full below `full_threshold` elements,
/// deterministic sample above.
bool closure_audit(const MatrixGroupLevel& g, size_t full_threshold = 2048,
                   size_t samples = 200000);

/// Identify the Cartan coset inside a normalizer-structured group: the unique
/// index-2 subgroup of the form span{I, phi} intersect G.  Returns nullopt if
/// no unambiguous split exists.
std::optional<NormalizerFrame> detect_normalizer_frame(const MatrixGroupLevel& g);

/// Streaming enumeration of the lifts of every base element to `level`,
/// without materializing the group.  dims = 4 walks all entry lifts
/// (preimage_group semantics); dims = 2 walks the Cartan-algebra directions
/// of the base frame (cartan_preimage semantics).  Visits elements in a
/// deterministic order, partitioned into `chunks` contiguous ranges; `fn`
/// is called as fn(chunk_index, matrix).
void for_each_lift(const MatrixGroupLevel& base, int level, int dims, int chunks,
                   const std::function<void(int, const ResidueMatrix&)>& fn,
                   int threads = 1);

/// The normalizer frame of g lifted to a higher-level modulus.  Exact for
/// frames backed by CartanParams; entry lifts of detected frames are verified
/// to still normalize the algebra span{I, phi}.
std::pair<ResidueMatrix, ResidueMatrix> lift_normalizer_frame(const MatrixGroupLevel& g,
                                                              const Modulus& target);

/// The base frame of g as stored (params-derived when needed).
NormalizerFrame stored_frame(const MatrixGroupLevel& g);

/// A lift of base element b into the ambient Cartan normalizer at the level of
/// phi_lift/w_lift; throws if b is not compatible with the frame.
ResidueMatrix ambient_cartan_lift(const ResidueMatrix& b, const NormalizerFrame& base_frame,
                                  const ResidueMatrix& phi_lift, const ResidueMatrix& w_lift);

} // namespace orderdens
