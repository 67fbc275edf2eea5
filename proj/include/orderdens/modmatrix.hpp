#pragma once

/**
 * @file modmatrix.hpp
 * @brief 2x2 matrices over Z/ell^n Z and the fixed-point structure of M - I.
 *
 * Residues are machine words: every construction in this library keeps
 * ell^(2*level) comfortably inside 64 bits (desk scale is ell^level <= 13^2).
 */

#include "orderdens/exactnum.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

namespace orderdens {

/// The pair (ell, level) with the cached modulus ell^level.
struct Modulus {
    int64_t ell = 0;
    int level = 0;
    int64_t m = 0;

    static Modulus make(int64_t ell, int level);
    bool operator==(const Modulus& o) const { return ell == o.ell && level == o.level; }
    bool operator!=(const Modulus& o) const { return !(*this == o); }
};

/// Row-major 2x2 matrix with entries reduced into [0, ell^level).
struct ResidueMatrix {
    Modulus mod;
    std::array<int64_t, 4> e{0, 0, 0, 0}; // m11 m12 m21 m22

    static ResidueMatrix identity(const Modulus& mod);
    static ResidueMatrix from_entries(const Modulus& mod, int64_t a, int64_t b,
                                      int64_t c, int64_t d);

    int64_t det() const;
    int64_t trace() const;
    bool is_identity() const;
    bool is_scalar() const;
    bool invertible() const { return det() % mod.ell != 0; }

    /// Reduce to a smaller level of the same ell.
    ResidueMatrix reduce(int level) const;

    bool operator==(const ResidueMatrix& o) const { return mod == o.mod && e == o.e; }
};

ResidueMatrix mat_mul(const ResidueMatrix& a, const ResidueMatrix& b);
ResidueMatrix mat_add(const ResidueMatrix& a, const ResidueMatrix& b);
ResidueMatrix mat_sub(const ResidueMatrix& a, const ResidueMatrix& b);
ResidueMatrix mat_scale(int64_t k, const ResidueMatrix& a);

/// Inverse in GL2(Z/ell^n); throws std::domain_error when det is not a unit.
ResidueMatrix mat_inv(const ResidueMatrix& a);
ResidueMatrix mat_pow(const ResidueMatrix& a, long long k);

/// v_ell of a residue in [0, m), counting x == 0 as level.
int residue_valuation(int64_t x, const Modulus& mod);

/// Inverse of a unit residue mod m.
int64_t unit_inverse(int64_t x, int64_t m);

/// Valuations (e1, e2) of the elementary divisors of A over Z/ell^n,
/// 0 <= e1 <= e2 <= n.  The kernel of A on (Z/ell^n)^2 has order ell^(e1+e2).
std::pair<int, int> elementary_valuations(const ResidueMatrix& a);

/// Fixed-point class of an invertible M: ker(M - I) = Z/ell^a x Z/ell^(a+b).
/// Determined(a, b) is emitted only when the class is stable under lifts,
/// i.e. when e2 < level; otherwise nullopt (undetermined at this level).
std::optional<std::pair<int, int>> kernel_class(const ResidueMatrix& m);

} // namespace orderdens
