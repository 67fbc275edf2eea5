#pragma once

/**
 * @file arboreal.hpp
 * @brief Finite-level subgroups of (Z/ell^n)^2 x| GL2(Z/ell^n): translation
 *        fibers over each matrix, the correction w(M), the failure constant F,
 *        and monotone density approximations with certified truncation bounds.
 */

#include "orderdens/matgroups.hpp"

#include <map>
#include <memory>

namespace orderdens {

using Vec2 = std::array<int64_t, 2>;

/// Element (t, M) with composition (t1, M1)(t2, M2) = (t1 + M1 t2, M1 M2).
struct ArborealElement {
    Vec2 t{0, 0};
    ResidueMatrix m;
};

ArborealElement arb_mul(const ArborealElement& x, const ArborealElement& y);
ArborealElement arb_inv(const ArborealElement& x);
Vec2 mat_apply(const ResidueMatrix& m, const Vec2& v);

/// Either the maximal-Kummer model over a matrix group (all fibers equal to
/// ell^min(d,n) * (Z/ell^n)^2), or an explicit element set.
class ArborealGroupLevel {
public:
    /// {(t, M) : M in G, t in ell^min(d,n) (Z/ell^n)^2} - defect-d model.
    static ArborealGroupLevel standard(MatrixGroupLevel g, int defect);
    static ArborealGroupLevel generated(int64_t ell, int level,
                                        const std::vector<ArborealElement>& gens);

    const Modulus& mod() const { return mod_; }
    bool is_standard() const { return standard_; }
    int defect() const { return defect_; }

    BigInt size() const;
    const MatrixGroupLevel& matrix_projection() const { return *proj_; }
    bool contains(const ArborealElement& x) const;

    /// W_n(M): the translation fiber over M; throws if M is not in the projection.
    std::vector<Vec2> kummer_fiber(const ResidueMatrix& m) const;
    uint64_t fiber_size(const ResidueMatrix& m) const;

    /// #(im(M-I) intersect W_n(M)) / #im(M-I); always 0 or ell^(-j), j >= 0.
    Rational w_value(const ResidueMatrix& m) const;

    /// F = ell^(2n) / #W_n(I); a nonnegative integer power of ell.
    Rational failure_constant() const;

    /// D_n = #{(t,M) : t in im(M-I)} / #A - the level-n upper approximation.
    Rational fixed_density_level() const;

    /// [hi - tail, hi] with hi = fixed_density_level(); the true density lies inside
    /// when tail = singular_mass of the matrix projection at this level.
    std::pair<Rational, Rational> density_interval(const Rational& tail) const;

    struct Delta {
        Rational value;
        bool empty_class = false;
    };
    /// Average of w over the matrices of class (a, b); requires level > a + b.
    Delta delta_ab(int a, int b) const;

    /// The full lift: all (t, M) whose reduction lies in this group.
    ArborealGroupLevel lift(int level) const;

private:
    ArborealGroupLevel() = default;

    Modulus mod_;
    bool standard_ = false;
    int defect_ = 0;
    std::shared_ptr<MatrixGroupLevel> proj_;
    // explicit mode: fiber lists keyed by packed matrix
    std::map<uint64_t, std::vector<uint64_t>> fibers_;

    uint64_t im_intersect_fiber(const ResidueMatrix& m, uint64_t* im_size) const;
};

} // namespace orderdens
