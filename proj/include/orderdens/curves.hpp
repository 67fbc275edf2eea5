#pragma once

/**
 * @file curves.hpp
 * @brief Empirical verifier: reduce a rational elliptic curve and point modulo
 *        primes, compute point orders, and estimate the density of primes at
 *        which the order is coprime to ell.
 */

#include "orderdens/exactnum.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace orderdens {

/// Long Weierstrass curve y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q.
struct CurveQ {
    int64_t a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;
    std::string label;

    BigInt discriminant() const;
};

struct PointQ {
    int64_t x = 0, y = 0;
};

/// Exact check of the curve equation over Z.
bool on_curve(const CurveQ& c, const PointQ& p);

/// Short Weierstrass reduction y^2 = x^3 + A x + B over F_p (valid for p > 3).
struct CurveFp {
    int64_t p = 0, A = 0, B = 0;
};

struct PointFp {
    int64_t x = 0, y = 0;
    bool infinity = false;
};

/// Reduction at a good prime (p > 3, p not dividing the discriminant), with
/// the point moved to the short model; nullopt marks a skipped prime.
std::optional<std::pair<CurveFp, PointFp>> reduce_good(const CurveQ& c, const PointQ& pt,
                                                       int64_t p);

/// #E(F_p) by the quadratic character sum p + 1 + sum_x chi(x^3 + Ax + B);
/// throws if the Hasse bound |N - p - 1| <= 2 sqrt(p) fails.
int64_t group_order(const CurveFp& c);

PointFp ec_add(const CurveFp& c, const PointFp& p, const PointFp& q);
PointFp ec_mul(const CurveFp& c, int64_t k, const PointFp& p);

/// Minimal o with o*P = O, starting from N with N*P = O (throws otherwise).
int64_t point_order(const CurveFp& c, const PointFp& p, int64_t n);

struct SweepRow {
    int64_t p = 0;
    int64_t group_size = 0;
    int64_t order = 0;
    int v_ell = 0;
};

struct SweepReport {
    std::string label;
    int64_t ell = 0;
    long long bound = 0;
    int scale = 0;
    uint64_t primes_used = 0;
    uint64_t primes_skipped = 0;
    uint64_t count_coprime = 0;
    double frequency = 0.0; // display only
    std::optional<Rational> exact_reference;
};

std::vector<int64_t> primes_up_to(int64_t bound);

/// Frequency, over good primes p <= bound, of v_ell(ord(ell^k * alpha mod p)) = 0.
SweepReport empirical_density(const CurveQ& curve, const PointQ& point, int64_t ell,
                              long long bound, int scale, int threads = 1,
                              std::vector<SweepRow>* rows = nullptr);

} // namespace orderdens
