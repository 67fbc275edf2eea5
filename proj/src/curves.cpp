#include "orderdens/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace orderdens {

namespace {

int64_t mod_reduce(int64_t x, int64_t p) {
    int64_t r = x % p;
    return r < 0 ? r + p : r;
}

int64_t mod_reduce_big(const BigInt& x, int64_t p) {
    BigInt r = x % p;
    if (r < 0) r += p;
    return r.convert_to<int64_t>();
}

int64_t mulmod(int64_t a, int64_t b, int64_t p) {
    return static_cast<int64_t>(static_cast<__int128>(a) * b % p);
}

int64_t inv_mod(int64_t a, int64_t p) {
    int64_t t = 0, nt = 1, r = p, nr = mod_reduce(a, p);
    while (nr != 0) {
        int64_t q = r / nr;
        t -= q * nt;
        std::swap(t, nt);
        r -= q * nr;
        std::swap(r, nr);
    }
    if (r != 1) throw std::domain_error("inv_mod: not invertible");
    return mod_reduce(t, p);
}

struct BCoeffs {
    BigInt b2, b4, b6, b8;
};

BCoeffs b_invariants(const CurveQ& c) {
    BigInt a1(c.a1), a2(c.a2), a3(c.a3), a4(c.a4), a6(c.a6);
    BCoeffs b;
    b.b2 = a1 * a1 + 4 * a2;
    b.b4 = 2 * a4 + a1 * a3;
    b.b6 = a3 * a3 + 4 * a6;
    b.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    return b;
}

} // namespace

BigInt CurveQ::discriminant() const {
    BCoeffs b = b_invariants(*this);
    return -b.b2 * b.b2 * b.b8 - 8 * b.b4 * b.b4 * b.b4 - 27 * b.b6 * b.b6 +
           9 * b.b2 * b.b4 * b.b6;
}

bool on_curve(const CurveQ& c, const PointQ& p) {
    BigInt x(p.x), y(p.y);
    BigInt lhs = y * y + c.a1 * x * y + c.a3 * y;
    BigInt rhs = x * x * x + c.a2 * x * x + c.a4 * x + c.a6;
    return lhs == rhs;
}

std::optional<std::pair<CurveFp, PointFp>> reduce_good(const CurveQ& c, const PointQ& pt,
                                                       int64_t p) {
    if (p <= 3) return std::nullopt;
    if (c.discriminant() % p == 0) return std::nullopt;
    BCoeffs b = b_invariants(c);
    BigInt c4 = b.b2 * b.b2 - 24 * b.b4;
    BigInt c6 = -b.b2 * b.b2 * b.b2 + 36 * b.b2 * b.b4 - 216 * b.b6;
    CurveFp curve;
    curve.p = p;
    curve.A = mod_reduce_big(-27 * c4, p);
    curve.B = mod_reduce_big(-54 * c6, p);
    // (x, y) -> (36 x + 3 b2, 108 (2 y + a1 x + a3)): integral isomorphism onto
    // the short model, valid away from 2 and 3.
    PointFp q;
    q.x = mod_reduce_big(36 * BigInt(pt.x) + 3 * b.b2, p);
    q.y = mod_reduce_big(216 * BigInt(pt.y) + 108 * (BigInt(c.a1) * pt.x + c.a3), p);
    int64_t lhs = mulmod(q.y, q.y, p);
    int64_t rhs = (mulmod(mulmod(q.x, q.x, p), q.x, p) + mulmod(curve.A, q.x, p) + curve.B) % p;
    if (lhs != rhs) throw std::logic_error("reduce_good: transformed point left the curve");
    return std::make_pair(curve, q);
}

int64_t group_order(const CurveFp& c) {
    const int64_t p = c.p;
    // chi(z) lookup: 0 -> 0, nonzero square -> 1, else -1
    std::vector<uint8_t> square(p, 0);
    for (int64_t z = 1; z < p; ++z) square[mulmod(z, z, p)] = 1;
    int64_t sum = 0;
    for (int64_t x = 0; x < p; ++x) {
        int64_t f = (mulmod(mulmod(x, x, p), x, p) + mulmod(c.A, x, p) + c.B) % p;
        if (f != 0) sum += square[f] ? 1 : -1;
    }
    int64_t n = p + 1 + sum;
    // |N - p - 1| <= 2 sqrt(p), checked exactly
    if (sum * sum > 4 * p) throw std::logic_error("group_order: Hasse bound violated");
    return n;
}

PointFp ec_add(const CurveFp& c, const PointFp& p, const PointFp& q) {
    const int64_t pp = c.p;
    if (p.infinity) return q;
    if (q.infinity) return p;
    if (p.x == q.x) {
        if ((p.y + q.y) % pp == 0) return PointFp{0, 0, true};
        // doubling
        int64_t num = (3 * mulmod(p.x, p.x, pp) + c.A) % pp;
        int64_t lam = mulmod(num, inv_mod(2 * p.y % pp, pp), pp);
        int64_t x3 = mod_reduce(mulmod(lam, lam, pp) - 2 * p.x, pp);
        int64_t y3 = mod_reduce(mulmod(lam, mod_reduce(p.x - x3, pp), pp) - p.y, pp);
        return PointFp{x3, y3, false};
    }
    int64_t lam = mulmod(mod_reduce(q.y - p.y, pp), inv_mod(mod_reduce(q.x - p.x, pp), pp), pp);
    int64_t x3 = mod_reduce(mulmod(lam, lam, pp) - p.x - q.x, pp);
    int64_t y3 = mod_reduce(mulmod(lam, mod_reduce(p.x - x3, pp), pp) - p.y, pp);
    return PointFp{x3, y3, false};
}

PointFp ec_mul(const CurveFp& c, int64_t k, const PointFp& p) {
    PointFp acc{0, 0, true}, base = p;
    while (k > 0) {
        if (k & 1) acc = ec_add(c, acc, base);
        base = ec_add(c, base, base);
        k >>= 1;
    }
    return acc;
}

int64_t point_order(const CurveFp& c, const PointFp& p, int64_t n) {
    if (!ec_mul(c, n, p).infinity) throw std::invalid_argument("point_order: N*P != O");
    int64_t order = n;
    int64_t rem = n;
    for (int64_t q = 2; q * q <= rem; ++q) {
        if (rem % q) continue;
        while (rem % q == 0) rem /= q;
        while (order % q == 0 && ec_mul(c, order / q, p).infinity) order /= q;
    }
    if (rem > 1)
        while (order % rem == 0 && ec_mul(c, order / rem, p).infinity) order /= rem;
    return order;
}

std::vector<int64_t> primes_up_to(int64_t bound) {
    std::vector<uint8_t> sieve(std::max<int64_t>(bound + 1, 2), 1);
    sieve[0] = sieve[1] = 0;
    for (int64_t i = 2; i * i <= bound; ++i)
        if (sieve[i])
            for (int64_t j = i * i; j <= bound; j += i) sieve[j] = 0;
    std::vector<int64_t> out;
    for (int64_t i = 2; i <= bound; ++i)
        if (sieve[i]) out.push_back(i);
    return out;
}

SweepReport empirical_density(const CurveQ& curve, const PointQ& point, int64_t ell,
                              long long bound, int scale, int threads,
                              std::vector<SweepRow>* rows) {
    if (bound < 5) throw std::invalid_argument("empirical_density: bound too small");
    if (!on_curve(curve, point))
        throw std::invalid_argument("empirical_density: point is not on the curve");
    if (curve.discriminant().is_zero())
        throw std::invalid_argument("empirical_density: singular curve");

    std::vector<int64_t> ps = primes_up_to(bound);
    const size_t n = ps.size();
    std::vector<SweepRow> all(n);
    std::vector<uint8_t> used(n, 0);

    auto run = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
            auto red = reduce_good(curve, point, ps[i]);
            if (!red) continue;
            auto [cfp, pfp] = *red;
            int64_t N = group_order(cfp);
            int64_t ord = point_order(cfp, pfp, N);
            int v = 0;
            int64_t o = ord;
            while (o % ell == 0) { o /= ell; ++v; }
            all[i] = SweepRow{ps[i], N, ord, v};
            used[i] = 1;
        }
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        run(0, n);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back(run, n * t / nthreads, n * (t + 1) / nthreads);
        for (auto& th : pool) th.join();
    }

    SweepReport rep;
    rep.label = curve.label;
    rep.ell = ell;
    rep.bound = bound;
    rep.scale = scale;
    for (size_t i = 0; i < n; ++i) {
        if (!used[i]) {
            ++rep.primes_skipped;
            continue;
        }
        ++rep.primes_used;
        // v_ell(ord(ell^k alpha)) = max(v_ell(ord alpha) - k, 0)
        if (all[i].v_ell <= scale) ++rep.count_coprime;
        if (rows) rows->push_back(all[i]);
    }
    rep.frequency = rep.primes_used
                        ? static_cast<double>(rep.count_coprime) / rep.primes_used
                        : 0.0;
    return rep;
}

} // namespace orderdens
