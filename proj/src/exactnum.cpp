#include "orderdens/exactnum.hpp"

namespace orderdens {

Rational::Rational(const BigInt& num, const BigInt& den) {
    if (den.is_zero()) throw std::invalid_argument("Rational: zero denominator");
    // rational division canonicalizes: lowest terms, positive denominator
    v_ = BigRat(num);
    v_ /= BigRat(den);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.v_.is_zero()) throw std::invalid_argument("Rational: division by zero");
    return Rational(raw{}, v_ / o.v_);
}

Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

std::string Rational::str() const {
    BigInt d = den();
    if (d == 1) return num().str();
    return num().str() + "/" + d.str();
}

std::string Rational::decimal(int digits) const {
    BigInt n = num(), d = den();
    std::string sign;
    if (n < 0) { sign = "-"; n = -n; }
    BigInt ip = n / d, rem = n % d;
    std::string out = sign + ip.str();
    if (digits <= 0) return out;
    out += '.';
    for (int i = 0; i < digits; ++i) {
        rem *= 10;
        out += static_cast<char>('0' + static_cast<int>(rem / d));
        rem %= d;
    }
    return out;
}

bool Rational::canonical() const {
    BigInt n = num(), d = den();
    if (d <= 0) return false;
    if (n.is_zero()) return d == 1;
    return boost::multiprecision::gcd(boost::multiprecision::abs(n), d) == 1;
}

bool is_prime(const BigInt& n) {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0) return false;
    for (BigInt q = 3; q * q <= n; q += 2)
        if (n % q == 0) return false;
    return true;
}

std::optional<long long> v_ell(const BigInt& x, const BigInt& ell) {
    if (!is_prime(ell)) throw std::invalid_argument("v_ell: modulus must be prime");
    if (x.is_zero()) return std::nullopt;
    long long v = 0;
    BigInt y = x;
    while (y % ell == 0) { y /= ell; ++v; }
    return v;
}

std::optional<long long> v_ell(const Rational& x, const BigInt& ell) {
    if (!is_prime(ell)) throw std::invalid_argument("v_ell: modulus must be prime");
    if (x.is_zero()) return std::nullopt;
    return *v_ell(x.num(), ell) - *v_ell(x.den(), ell);
}

bool in_z_inv_ell(const Rational& x, const BigInt& ell) {
    if (!is_prime(ell)) throw std::invalid_argument("in_z_inv_ell: modulus must be prime");
    BigInt d = x.den();
    while (d % ell == 0) d /= ell;
    return d == 1;
}

BigInt pow_big(const BigInt& ell, long long k) {
    if (k < 0) throw std::invalid_argument("pow_big: negative exponent");
    BigInt r = 1, b = ell;
    while (k > 0) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

Rational geometric_tail(const BigInt& ell, long long step, long long start) {
    if (step < 1) throw std::invalid_argument("geometric_tail: step must be >= 1");
    if (start < 0) throw std::invalid_argument("geometric_tail: start must be >= 0");
    BigInt p = pow_big(ell, step);
    // sum_{k>=start} p^-k = p^(1-start) / (p-1)
    if (start == 0) return Rational(p, p - 1);
    return Rational(BigInt(1), pow_big(ell, step * (start - 1)) * (p - 1));
}

} // namespace orderdens
