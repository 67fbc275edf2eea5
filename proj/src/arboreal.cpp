#include "orderdens/arboreal.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

namespace orderdens {

namespace {

int64_t mod_reduce(int64_t x, int64_t m) {
    int64_t r = x % m;
    return r < 0 ? r + m : r;
}

uint64_t vec_key(const Vec2& t, int64_t m) {
    return static_cast<uint64_t>(t[0]) * m + static_cast<uint64_t>(t[1]);
}

Vec2 key_vec(uint64_t k, int64_t m) {
    return Vec2{static_cast<int64_t>(k / m), static_cast<int64_t>(k % m)};
}

int64_t pow_small(int64_t b, int e) {
    int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

} // namespace

Vec2 mat_apply(const ResidueMatrix& m, const Vec2& v) {
    const int64_t mm = m.mod.m;
    return Vec2{(m.e[0] * v[0] + m.e[1] * v[1]) % mm, (m.e[2] * v[0] + m.e[3] * v[1]) % mm};
}

ArborealElement arb_mul(const ArborealElement& x, const ArborealElement& y) {
    if (x.m.mod != y.m.mod) throw std::invalid_argument("arb_mul: mismatched levels");
    Vec2 t = mat_apply(x.m, y.t);
    const int64_t m = x.m.mod.m;
    return ArborealElement{Vec2{(x.t[0] + t[0]) % m, (x.t[1] + t[1]) % m}, mat_mul(x.m, y.m)};
}

ArborealElement arb_inv(const ArborealElement& x) {
    ResidueMatrix mi = mat_inv(x.m);
    Vec2 t = mat_apply(mi, x.t);
    const int64_t m = x.m.mod.m;
    return ArborealElement{Vec2{mod_reduce(-t[0], m), mod_reduce(-t[1], m)}, mi};
}

ArborealGroupLevel ArborealGroupLevel::standard(MatrixGroupLevel g, int defect) {
    if (defect < 0) throw std::invalid_argument("standard arboreal: defect must be >= 0");
    ArborealGroupLevel a;
    a.mod_ = g.mod;
    a.standard_ = true;
    a.defect_ = defect;
    int dd = std::min(defect, g.mod.level);
    BigInt size = BigInt(static_cast<int64_t>(g.size())) *
                  pow_big(BigInt(g.mod.ell), 2LL * (g.mod.level - dd));
    if (size > BigInt(static_cast<int64_t>(size_guard())))
        throw SizeGuardExceeded("standard arboreal group: size " + size.str());
    a.proj_ = std::make_shared<MatrixGroupLevel>(std::move(g));
    return a;
}

ArborealGroupLevel ArborealGroupLevel::generated(int64_t ell, int level,
                                                 const std::vector<ArborealElement>& gens) {
    Modulus mod = Modulus::make(ell, level);
    ArborealGroupLevel a;
    a.mod_ = mod;
    std::vector<ArborealElement> gen_set;
    for (const auto& g : gens) {
        if (g.m.mod != mod) throw std::invalid_argument("generated arboreal: level mismatch");
        gen_set.push_back(g);
        gen_set.push_back(arb_inv(g));
    }

    ArborealElement id{Vec2{0, 0}, ResidueMatrix::identity(mod)};
    std::map<uint64_t, std::unordered_set<uint64_t>> seen;
    std::queue<ArborealElement> todo;
    seen[mat_key(pack_mat(id.m), mod.m)].insert(vec_key(id.t, mod.m));
    todo.push(id);
    size_t count = 1;
    const size_t guard = size_guard();
    while (!todo.empty()) {
        ArborealElement cur = todo.front();
        todo.pop();
        for (const auto& g : gen_set) {
            ArborealElement nxt = arb_mul(cur, g);
            auto& fiber = seen[mat_key(pack_mat(nxt.m), mod.m)];
            if (fiber.insert(vec_key(nxt.t, mod.m)).second) {
                if (++count > guard)
                    throw SizeGuardExceeded("generated arboreal group exceeds size guard");
                todo.push(nxt);
            }
        }
    }

    auto proj = std::make_shared<MatrixGroupLevel>();
    proj->mod = mod;
    proj->kind = GroupKind::Generated;
    for (auto& [mkey, fiber] : seen) {
        std::vector<uint64_t> ts(fiber.begin(), fiber.end());
        std::sort(ts.begin(), ts.end());
        a.fibers_.emplace(mkey, std::move(ts));
    }
    for (const auto& [mkey, fiber] : a.fibers_) {
        uint64_t k = mkey;
        PackedMat p;
        p[3] = static_cast<uint32_t>(k % mod.m); k /= mod.m;
        p[2] = static_cast<uint32_t>(k % mod.m); k /= mod.m;
        p[1] = static_cast<uint32_t>(k % mod.m); k /= mod.m;
        p[0] = static_cast<uint32_t>(k);
        proj->elems.push_back(p);
    }
    a.proj_ = proj;
    return a;
}

BigInt ArborealGroupLevel::size() const {
    if (standard_) {
        int dd = std::min(defect_, mod_.level);
        return BigInt(static_cast<int64_t>(proj_->size())) *
               pow_big(BigInt(mod_.ell), 2LL * (mod_.level - dd));
    }
    BigInt s = 0;
    for (const auto& [k, f] : fibers_) s += static_cast<int64_t>(f.size());
    return s;
}

bool ArborealGroupLevel::contains(const ArborealElement& x) const {
    if (x.m.mod != mod_) return false;
    if (standard_) {
        int64_t step = pow_small(mod_.ell, std::min(defect_, mod_.level));
        return proj_->contains(x.m) && x.t[0] % step == 0 && x.t[1] % step == 0;
    }
    auto it = fibers_.find(mat_key(pack_mat(x.m), mod_.m));
    if (it == fibers_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), vec_key(x.t, mod_.m));
}

uint64_t ArborealGroupLevel::fiber_size(const ResidueMatrix& m) const {
    if (standard_) {
        if (!proj_->contains(m)) throw std::domain_error("fiber: matrix not in projection");
        int dd = std::min(defect_, mod_.level);
        return static_cast<uint64_t>(pow_small(mod_.ell, 2 * (mod_.level - dd)));
    }
    auto it = fibers_.find(mat_key(pack_mat(m), mod_.m));
    if (it == fibers_.end()) throw std::domain_error("fiber: matrix not in projection");
    return it->second.size();
}

std::vector<Vec2> ArborealGroupLevel::kummer_fiber(const ResidueMatrix& m) const {
    std::vector<Vec2> out;
    if (standard_) {
        if (!proj_->contains(m)) throw std::domain_error("kummer_fiber: matrix not in projection");
        int dd = std::min(defect_, mod_.level);
        int64_t step = pow_small(mod_.ell, dd);
        for (int64_t x = 0; x < mod_.m; x += step)
            for (int64_t y = 0; y < mod_.m; y += step) out.push_back(Vec2{x, y});
        return out;
    }
    auto it = fibers_.find(mat_key(pack_mat(m), mod_.m));
    if (it == fibers_.end()) throw std::domain_error("kummer_fiber: matrix not in projection");
    for (uint64_t k : it->second) out.push_back(key_vec(k, mod_.m));
    return out;
}

// #(im(M-I) intersect W(M)); also reports #im(M-I).
uint64_t ArborealGroupLevel::im_intersect_fiber(const ResidueMatrix& m, uint64_t* im_size) const {
    ResidueMatrix a = mat_sub(m, ResidueMatrix::identity(mod_));
    auto [e1, e2] = elementary_valuations(a);
    uint64_t im = static_cast<uint64_t>(pow_small(mod_.ell, (mod_.level - e1) + (mod_.level - e2)));
    if (im_size) *im_size = im;
    if (standard_) {
        int dd = std::min(defect_, mod_.level);
        // In a Smith basis, im = ell^e1 Z x ell^e2 Z and the fiber ell^dd L is
        // basis-independent, so the intersection has index max(e,dd) per factor.
        int j1 = std::max(e1, dd), j2 = std::max(e2, dd);
        return static_cast<uint64_t>(pow_small(mod_.ell, (mod_.level - j1) + (mod_.level - j2)));
    }
    auto it = fibers_.find(mat_key(pack_mat(m), mod_.m));
    if (it == fibers_.end()) throw std::domain_error("w_value: matrix not in projection");
    // enumerate im(M-I) once
    std::unordered_set<uint64_t> image;
    for (int64_t x = 0; x < mod_.m; ++x)
        for (int64_t y = 0; y < mod_.m; ++y)
            image.insert(vec_key(mat_apply(a, Vec2{x, y}), mod_.m));
    if (image.size() != im) throw std::logic_error("w_value: image size mismatch");
    uint64_t hit = 0;
    for (uint64_t k : it->second) hit += image.count(k);
    return hit;
}

Rational ArborealGroupLevel::w_value(const ResidueMatrix& m) const {
    uint64_t im = 0;
    uint64_t hit = im_intersect_fiber(m, &im);
    return Rational(BigInt(static_cast<int64_t>(hit)), BigInt(static_cast<int64_t>(im)));
}

Rational ArborealGroupLevel::failure_constant() const {
    BigInt l2n = pow_big(BigInt(mod_.ell), 2LL * mod_.level);
    uint64_t w_id = fiber_size(ResidueMatrix::identity(mod_));
    return Rational(l2n, BigInt(static_cast<int64_t>(w_id)));
}

Rational ArborealGroupLevel::fixed_density_level() const {
    BigInt fixed = 0, total = 0;
    for (size_t i = 0; i < proj_->size(); ++i) {
        ResidueMatrix m = proj_->element(i);
        fixed += static_cast<int64_t>(im_intersect_fiber(m, nullptr));
        total += static_cast<int64_t>(fiber_size(m));
    }
    return Rational(fixed, total);
}

std::pair<Rational, Rational> ArborealGroupLevel::density_interval(const Rational& tail) const {
    Rational hi = fixed_density_level();
    Rational lo = hi - tail;
    if (lo < Rational(0)) lo = Rational(0);
    return {lo, hi};
}

ArborealGroupLevel::Delta ArborealGroupLevel::delta_ab(int a, int b) const {
    if (a + b >= mod_.level)
        throw std::invalid_argument("delta_ab: need level > a + b");
    Rational sum(0);
    long long count = 0;
    for (size_t i = 0; i < proj_->size(); ++i) {
        ResidueMatrix m = proj_->element(i);
        auto cls = kernel_class(m);
        if (cls && cls->first == a && cls->second == b) {
            sum += w_value(m);
            ++count;
        }
    }
    if (count == 0) return Delta{Rational(0), true};
    return Delta{sum / Rational(count), false};
}

ArborealGroupLevel ArborealGroupLevel::lift(int level) const {
    if (level < mod_.level) throw std::invalid_argument("lift: level below current");
    if (standard_)
        return standard(preimage_group(*proj_, level), defect_);
    Modulus mod = Modulus::make(mod_.ell, level);
    const int64_t step = mod_.m;
    const int64_t lifts = mod.m / step;
    BigInt new_size = size() * pow_big(BigInt(mod_.ell), 6LL * (level - mod_.level));
    if (new_size > BigInt(static_cast<int64_t>(size_guard())))
        throw SizeGuardExceeded("arboreal lift exceeds size guard");

    ArborealGroupLevel out;
    out.mod_ = mod;
    auto proj = std::make_shared<MatrixGroupLevel>();
    proj->mod = mod;
    proj->kind = GroupKind::Generated;
    for (const auto& [mkey, fiber] : fibers_) {
        uint64_t k = mkey;
        std::array<int64_t, 4> base;
        base[3] = static_cast<int64_t>(k % mod_.m); k /= mod_.m;
        base[2] = static_cast<int64_t>(k % mod_.m); k /= mod_.m;
        base[1] = static_cast<int64_t>(k % mod_.m); k /= mod_.m;
        base[0] = static_cast<int64_t>(k);
        std::vector<uint64_t> lifted_ts;
        for (uint64_t tk : fiber) {
            Vec2 t = key_vec(tk, mod_.m);
            for (int64_t u0 = 0; u0 < lifts; ++u0)
                for (int64_t u1 = 0; u1 < lifts; ++u1)
                    lifted_ts.push_back(vec_key(Vec2{t[0] + u0 * step, t[1] + u1 * step}, mod.m));
        }
        std::sort(lifted_ts.begin(), lifted_ts.end());
        for (int64_t k0 = 0; k0 < lifts; ++k0)
            for (int64_t k1 = 0; k1 < lifts; ++k1)
                for (int64_t k2 = 0; k2 < lifts; ++k2)
                    for (int64_t k3 = 0; k3 < lifts; ++k3) {
                        PackedMat p{static_cast<uint32_t>(base[0] + k0 * step),
                                    static_cast<uint32_t>(base[1] + k1 * step),
                                    static_cast<uint32_t>(base[2] + k2 * step),
                                    static_cast<uint32_t>(base[3] + k3 * step)};
                        proj->elems.push_back(p);
                        out.fibers_.emplace(mat_key(p, mod.m), lifted_ts);
                    }
    }
    out.proj_ = proj;
    return out;
}

} // namespace orderdens
