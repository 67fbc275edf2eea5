#pragma once

/**
 * @file exactnum.hpp
 * @brief Arbitrary-precision integers and exact rationals with l-adic valuations.
 *
 * Every density, measure and constant in this library is an exact Rational;
 * floating point appears only when a report formats a decimal for display.
 */

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <type_traits>
#include <stdexcept>
#include <string>

namespace orderdens {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

/// Exact rational, always in lowest terms with positive denominator.
class Rational {
public:
    Rational() : v_(0) {}
    template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
    Rational(T n) : v_(static_cast<long long>(n)) {}
    Rational(const BigInt& n) : v_(n) {}
    Rational(const BigInt& num, const BigInt& den);

    static Rational parse(const std::string& s);

    BigInt num() const { return boost::multiprecision::numerator(v_); }
    BigInt den() const { return boost::multiprecision::denominator(v_); }

    bool is_zero() const { return v_.is_zero(); }

    /// "num/den", or just "num" when den == 1.
    std::string str() const;

    /// Decimal expansion truncated toward zero to `digits` places ("0.22115").
    std::string decimal(int digits = 5) const;

    Rational operator+(const Rational& o) const { return Rational(raw{}, v_ + o.v_); }
    Rational operator-(const Rational& o) const { return Rational(raw{}, v_ - o.v_); }
    Rational operator*(const Rational& o) const { return Rational(raw{}, v_ * o.v_); }
    Rational operator/(const Rational& o) const;
    Rational operator-() const { return Rational(raw{}, -v_); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

    bool operator==(const Rational& o) const { return v_ == o.v_; }
    bool operator!=(const Rational& o) const { return v_ != o.v_; }
    bool operator<(const Rational& o) const { return v_ < o.v_; }
    bool operator<=(const Rational& o) const { return v_ <= o.v_; }
    bool operator>(const Rational& o) const { return v_ > o.v_; }
    bool operator>=(const Rational& o) const { return v_ >= o.v_; }

    /// True iff gcd(|num|, den) == 1 and den > 0 (the representation audit).
    bool canonical() const;

private:
    struct raw {};
    Rational(raw, const BigRat& v) : v_(v) {}
    BigRat v_;
};

/// Deterministic primality test (trial division; the library only meets small primes).
bool is_prime(const BigInt& n);

/// Exponent of the prime ell in x; +infinity (nullopt) iff x == 0.
std::optional<long long> v_ell(const Rational& x, const BigInt& ell);
std::optional<long long> v_ell(const BigInt& x, const BigInt& ell);

/// True iff the denominator of x is a power of ell, i.e. x lies in Z[1/ell].
bool in_z_inv_ell(const Rational& x, const BigInt& ell);

/// Exact value of sum_{k >= start} ell^(-k*step), step >= 1.
Rational geometric_tail(const BigInt& ell, long long step, long long start);

/// ell^k for k >= 0.
BigInt pow_big(const BigInt& ell, long long k);

} // namespace orderdens
