#include "orderdens/modmatrix.hpp"

#include <stdexcept>

namespace orderdens {

namespace {

int64_t reduce_mod(int64_t x, int64_t m) {
    int64_t r = x % m;
    return r < 0 ? r + m : r;
}

void check_same(const Modulus& a, const Modulus& b) {
    if (a != b) throw std::invalid_argument("modmatrix: mismatched (ell, level)");
}

} // namespace

Modulus Modulus::make(int64_t ell, int level) {
    if (ell < 2 || !is_prime(BigInt(ell)))
        throw std::invalid_argument("Modulus: ell must be a prime");
    if (level < 1) throw std::invalid_argument("Modulus: level must be >= 1");
    Modulus mod{ell, level, 1};
    for (int i = 0; i < level; ++i) {
        mod.m *= ell;
        if (mod.m > (int64_t(1) << 15))
            throw std::invalid_argument("Modulus: ell^level too large for word arithmetic");
    }
    return mod;
}

ResidueMatrix ResidueMatrix::identity(const Modulus& mod) {
    return ResidueMatrix{mod, {1 % mod.m, 0, 0, 1 % mod.m}};
}

ResidueMatrix ResidueMatrix::from_entries(const Modulus& mod, int64_t a, int64_t b,
                                          int64_t c, int64_t d) {
    return ResidueMatrix{mod, {reduce_mod(a, mod.m), reduce_mod(b, mod.m),
                               reduce_mod(c, mod.m), reduce_mod(d, mod.m)}};
}

int64_t ResidueMatrix::det() const {
    return reduce_mod(e[0] * e[3] - e[1] * e[2], mod.m);
}

int64_t ResidueMatrix::trace() const { return reduce_mod(e[0] + e[3], mod.m); }

bool ResidueMatrix::is_identity() const {
    return e[0] == 1 % mod.m && e[1] == 0 && e[2] == 0 && e[3] == 1 % mod.m;
}

bool ResidueMatrix::is_scalar() const { return e[1] == 0 && e[2] == 0 && e[0] == e[3]; }

ResidueMatrix ResidueMatrix::reduce(int level) const {
    if (level > mod.level) throw std::invalid_argument("reduce: target level above source");
    Modulus t = Modulus::make(mod.ell, level);
    return ResidueMatrix{t, {e[0] % t.m, e[1] % t.m, e[2] % t.m, e[3] % t.m}};
}

ResidueMatrix mat_mul(const ResidueMatrix& a, const ResidueMatrix& b) {
    check_same(a.mod, b.mod);
    int64_t m = a.mod.m;
    return ResidueMatrix{a.mod,
                         {(a.e[0] * b.e[0] + a.e[1] * b.e[2]) % m,
                          (a.e[0] * b.e[1] + a.e[1] * b.e[3]) % m,
                          (a.e[2] * b.e[0] + a.e[3] * b.e[2]) % m,
                          (a.e[2] * b.e[1] + a.e[3] * b.e[3]) % m}};
}

ResidueMatrix mat_add(const ResidueMatrix& a, const ResidueMatrix& b) {
    check_same(a.mod, b.mod);
    int64_t m = a.mod.m;
    return ResidueMatrix{a.mod, {(a.e[0] + b.e[0]) % m, (a.e[1] + b.e[1]) % m,
                                 (a.e[2] + b.e[2]) % m, (a.e[3] + b.e[3]) % m}};
}

ResidueMatrix mat_sub(const ResidueMatrix& a, const ResidueMatrix& b) {
    check_same(a.mod, b.mod);
    int64_t m = a.mod.m;
    return ResidueMatrix{a.mod,
                         {reduce_mod(a.e[0] - b.e[0], m), reduce_mod(a.e[1] - b.e[1], m),
                          reduce_mod(a.e[2] - b.e[2], m), reduce_mod(a.e[3] - b.e[3], m)}};
}

ResidueMatrix mat_scale(int64_t k, const ResidueMatrix& a) {
    int64_t m = a.mod.m;
    k = reduce_mod(k, m);
    return ResidueMatrix{a.mod, {k * a.e[0] % m, k * a.e[1] % m, k * a.e[2] % m, k * a.e[3] % m}};
}

int64_t unit_inverse(int64_t x, int64_t m) {
    int64_t a = reduce_mod(x, m), b = m;
    int64_t u = 1, v = 0;
    while (b != 0) {
        int64_t q = a / b;
        a -= q * b;
        std::swap(a, b);
        u -= q * v;
        std::swap(u, v);
    }
    if (a != 1) throw std::domain_error("unit_inverse: not a unit");
    return reduce_mod(u, m);
}

ResidueMatrix mat_inv(const ResidueMatrix& a) {
    int64_t d = a.det();
    if (d % a.mod.ell == 0) throw std::domain_error("mat_inv: determinant is not a unit");
    int64_t di = unit_inverse(d, a.mod.m);
    int64_t m = a.mod.m;
    return ResidueMatrix{a.mod,
                         {a.e[3] * di % m, reduce_mod(-a.e[1], m) * di % m,
                          reduce_mod(-a.e[2], m) * di % m, a.e[0] * di % m}};
}

ResidueMatrix mat_pow(const ResidueMatrix& a, long long k) {
    ResidueMatrix base = k < 0 ? mat_inv(a) : a;
    if (k < 0) k = -k;
    ResidueMatrix r = ResidueMatrix::identity(a.mod);
    while (k > 0) {
        if (k & 1) r = mat_mul(r, base);
        base = mat_mul(base, base);
        k >>= 1;
    }
    return r;
}

int residue_valuation(int64_t x, const Modulus& mod) {
    if (x % mod.m == 0) return mod.level;
    int v = 0;
    while (x % mod.ell == 0) { x /= mod.ell; ++v; }
    return v;
}

std::pair<int, int> elementary_valuations(const ResidueMatrix& a) {
    const Modulus& mod = a.mod;
    std::array<int64_t, 4> w = a.e;
    int e1 = mod.level;
    int pivot = -1;
    for (int i = 0; i < 4; ++i) {
        int v = residue_valuation(w[i], mod);
        if (v < e1) { e1 = v; pivot = i; }
    }
    if (pivot < 0) return {mod.level, mod.level}; // zero matrix

    // Move the minimal-valuation entry to position (0,0).
    if (pivot == 2 || pivot == 3) { std::swap(w[0], w[2]); std::swap(w[1], w[3]); }
    if (pivot == 1 || pivot == 3) { std::swap(w[0], w[1]); std::swap(w[2], w[3]); }

    int64_t p = 1;
    for (int i = 0; i < e1; ++i) p *= mod.ell;
    // Normalize the pivot row so w[0] becomes ell^e1 exactly.
    int64_t u = unit_inverse(w[0] / p, mod.m);
    w[0] = p;
    w[1] = reduce_mod(w[1] * u, mod.m);
    // Clear the rest of column 0, then of row 0.
    int64_t q = w[2] / p;
    w[2] = 0;
    w[3] = reduce_mod(w[3] - q * w[1], mod.m);
    // Column operation does not change w[3] since w[2] is already 0.
    int e2 = residue_valuation(w[3], mod);
    return {e1, e2};
}

std::optional<std::pair<int, int>> kernel_class(const ResidueMatrix& m) {
    if (!m.invertible()) throw std::domain_error("kernel_class: matrix must be invertible");
    auto [e1, e2] = elementary_valuations(mat_sub(m, ResidueMatrix::identity(m.mod)));
    if (e2 >= m.mod.level) return std::nullopt;
    return std::make_pair(e1, e2 - e1);
}

} // namespace orderdens
