#include "orderdens/matgroups.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <queue>
#include <thread>
#include <unordered_set>

namespace orderdens {

namespace {

int64_t mod_reduce(int64_t x, int64_t m) {
    int64_t r = x % m;
    return r < 0 ? r + m : r;
}

bool is_unit_square(int64_t u, int64_t ell) {
    // squareness of a unit in Z_ell
    if (ell == 2) return mod_reduce(u, 8) == 1;
    int64_t r = mod_reduce(u, ell);
    for (int64_t x = 1; x < ell; ++x)
        if (x * x % ell == r) return true;
    return false;
}

// Coordinates (x, y) with b == x*I + y*phi, if b lies in the algebra span{I, phi}.
// Requires phi non-scalar mod ell.
std::optional<std::pair<int64_t, int64_t>> algebra_coords(const ResidueMatrix& b,
                                                          const ResidueMatrix& phi) {
    const int64_t ell = b.mod.ell, m = b.mod.m;
    int64_t x, y;
    if (phi.e[2] % ell != 0) {
        y = b.e[2] * unit_inverse(phi.e[2], m) % m;
    } else if (phi.e[1] % ell != 0) {
        y = b.e[1] * unit_inverse(phi.e[1], m) % m;
    } else {
        int64_t diag = mod_reduce(phi.e[0] - phi.e[3], m);
        if (diag % ell == 0) return std::nullopt; // phi scalar mod ell
        y = mod_reduce(b.e[0] - b.e[3], m) * unit_inverse(diag, m) % m;
    }
    x = mod_reduce(b.e[0] - y * phi.e[0], m);
    ResidueMatrix cand = mat_add(mat_scale(x, ResidueMatrix::identity(b.mod)),
                                 mat_scale(y, phi));
    if (!(cand == b)) return std::nullopt;
    return std::make_pair(x, y);
}

} // namespace

ResidueMatrix CartanParams::phi(const Modulus& mod) const {
    return ResidueMatrix::from_entries(mod, 0, d, 1, r);
}

ResidueMatrix CartanParams::coset_rep(const Modulus& mod) const {
    // w^2 = I and w phi w^-1 = r*I - phi, as integer identities.
    return ResidueMatrix::from_entries(mod, 1, r, 0, -1);
}

CartanType classify_cartan(const CartanParams& c, const Modulus& mod) {
    int64_t disc = c.disc();
    if (disc == 0) return CartanType::Ramified;
    int64_t u = disc < 0 ? -disc : disc;
    int v = 0;
    while (u % mod.ell == 0) { u /= mod.ell; ++v; }
    if (v > 0) return CartanType::Ramified;
    return is_unit_square(disc, mod.ell) ? CartanType::Split : CartanType::Nonsplit;
}

CartanParams canonical_cartan(int64_t ell, CartanType type) {
    if (type == CartanType::Ramified) return CartanParams{0, ell};
    if (ell == 2) return type == CartanType::Split ? CartanParams{1, 0} : CartanParams{1, 1};
    if (type == CartanType::Split) return CartanParams{0, 1}; // disc 4, a unit square
    for (int64_t d = 2; d < ell; ++d) {
        CartanParams c{0, d};
        if (!is_unit_square(4 * d, ell)) return c;
    }
    throw std::logic_error("canonical_cartan: no non-square residue found");
}

size_t size_guard() {
    if (const char* s = std::getenv("ORDER_DENSITY_SIZE_GUARD")) {
        long long v = std::atoll(s);
        if (v > 0) return static_cast<size_t>(v);
    }
    return 8000000;
}

bool MatrixGroupLevel::contains(const ResidueMatrix& m) const {
    if (m.mod != mod) return false;
    PackedMat p = pack_mat(m);
    for (const auto& q : elems)
        if (q == p) return true;
    return false;
}

std::string MatrixGroupLevel::tag() const {
    switch (kind) {
        case GroupKind::Full: return "full";
        case GroupKind::Cartan: return "cartan";
        case GroupKind::Normalizer: return "normalizer";
        case GroupKind::Generated: return "generated";
        case GroupKind::Preimage:
            return "preimage-of(level " + std::to_string(base_level) + ")";
    }
    return "?";
}

bool MatrixGroupLevel::in_nontrivial_coset(const ResidueMatrix& m) const {
    if (kind == GroupKind::Preimage) {
        if (!base) throw std::logic_error("preimage group without base");
        return base->in_nontrivial_coset(m.reduce(base->mod.level));
    }
    if (!frame) throw std::domain_error("coset query on a group without normalizer structure");
    return !algebra_coords(m, frame->phi).has_value();
}

BigInt gl2_polynomial(const BigInt& t) { return (t * t - 1) * (t * t - t); }

BigInt gl2_order(int64_t ell, int level) {
    return gl2_polynomial(BigInt(ell)) * pow_big(BigInt(ell), 4LL * (level - 1));
}

MatrixGroupLevel gl2_full(int64_t ell, int level) {
    Modulus mod = Modulus::make(ell, level);
    BigInt order = gl2_order(ell, level);
    if (order > BigInt(static_cast<int64_t>(size_guard())))
        throw SizeGuardExceeded("gl2_full(" + std::to_string(ell) + ", " +
                                std::to_string(level) + "): order " + order.str());
    MatrixGroupLevel g;
    g.mod = mod;
    g.kind = GroupKind::Full;
    g.elems.reserve(static_cast<size_t>(order));
    const int64_t m = mod.m;
    for (int64_t a = 0; a < m; ++a)
        for (int64_t b = 0; b < m; ++b)
            for (int64_t c = 0; c < m; ++c)
                for (int64_t d = 0; d < m; ++d)
                    if (mod_reduce(a * d - b * c, m) % ell != 0)
                        g.elems.push_back({static_cast<uint32_t>(a), static_cast<uint32_t>(b),
                                           static_cast<uint32_t>(c), static_cast<uint32_t>(d)});
    return g;
}

MatrixGroupLevel cartan(int64_t ell, int level, const CartanParams& params) {
    Modulus mod = Modulus::make(ell, level);
    MatrixGroupLevel g;
    g.mod = mod;
    g.kind = GroupKind::Cartan;
    g.cartan_params = params;
    ResidueMatrix phi = params.phi(mod);
    const int64_t m = mod.m;
    for (int64_t x = 0; x < m; ++x)
        for (int64_t y = 0; y < m; ++y) {
            // det(x*I + y*phi) = x^2 + r*x*y - d*y^2
            int64_t det = mod_reduce(x * x + params.r * x % m * y - params.d * y % m * y, m);
            if (det % ell != 0)
                g.elems.push_back(pack_mat(mat_add(
                    mat_scale(x, ResidueMatrix::identity(mod)), mat_scale(y, phi))));
        }
    return g;
}

MatrixGroupLevel cartan(int64_t ell, int level, int64_t d) {
    return cartan(ell, level, CartanParams{0, d});
}

MatrixGroupLevel normalizer_cartan(const MatrixGroupLevel& c) {
    if (c.kind != GroupKind::Cartan || !c.cartan_params)
        throw std::invalid_argument("normalizer_cartan: input must be a cartan() group");
    ResidueMatrix w = c.cartan_params->coset_rep(c.mod);
    ResidueMatrix winv = mat_inv(w);
    // Conjugation audit: w C w^-1 = C elementwise.
    for (const auto& p : c.elems) {
        ResidueMatrix g = unpack_mat(c.mod, p);
        if (!algebra_coords(mat_mul(mat_mul(w, g), winv), c.cartan_params->phi(c.mod)))
            throw std::domain_error("normalizer_cartan: conjugation closure audit failed");
    }
    MatrixGroupLevel n;
    n.mod = c.mod;
    n.kind = GroupKind::Normalizer;
    n.cartan_params = c.cartan_params;
    n.frame = NormalizerFrame{c.cartan_params->phi(c.mod), w};
    n.elems = c.elems;
    n.elems.reserve(2 * c.elems.size());
    for (const auto& p : c.elems) n.elems.push_back(pack_mat(mat_mul(w, unpack_mat(c.mod, p))));
    return n;
}

MatrixGroupLevel generated_subgroup(int64_t ell, int level,
                                    const std::vector<ResidueMatrix>& gens) {
    Modulus mod = Modulus::make(ell, level);
    MatrixGroupLevel g;
    g.mod = mod;
    g.kind = GroupKind::Generated;
    std::vector<ResidueMatrix> gen_set;
    for (const auto& gen : gens) {
        if (gen.mod != mod) throw std::invalid_argument("generated_subgroup: level mismatch");
        if (!gen.invertible()) throw std::domain_error("generated_subgroup: generator not invertible");
        gen_set.push_back(gen);
        gen_set.push_back(mat_inv(gen));
    }
    g.generators = gens;

    std::unordered_set<uint64_t> seen;
    std::queue<ResidueMatrix> todo;
    ResidueMatrix id = ResidueMatrix::identity(mod);
    seen.insert(mat_key(pack_mat(id), mod.m));
    g.elems.push_back(pack_mat(id));
    todo.push(id);
    const size_t guard = size_guard();
    while (!todo.empty()) {
        ResidueMatrix cur = todo.front();
        todo.pop();
        for (const auto& gen : gen_set) {
            ResidueMatrix nxt = mat_mul(cur, gen);
            if (seen.insert(mat_key(pack_mat(nxt), mod.m)).second) {
                if (g.elems.size() >= guard)
                    throw SizeGuardExceeded("generated_subgroup: orbit exceeds size guard");
                g.elems.push_back(pack_mat(nxt));
                todo.push(nxt);
            }
        }
    }
    std::sort(g.elems.begin(), g.elems.end());
    return g;
}

MatrixGroupLevel preimage_group(const MatrixGroupLevel& g, int level) {
    if (level < g.mod.level) throw std::invalid_argument("preimage_group: level below base");
    if (level == g.mod.level) return g;
    Modulus mod = Modulus::make(g.mod.ell, level);
    const int delta = level - g.mod.level;
    BigInt order = BigInt(static_cast<int64_t>(g.size())) * pow_big(BigInt(g.mod.ell), 4LL * delta);
    if (order > BigInt(static_cast<int64_t>(size_guard())))
        throw SizeGuardExceeded("preimage_group: order " + order.str());

    MatrixGroupLevel out;
    out.mod = mod;
    out.kind = GroupKind::Preimage;
    out.base = std::make_shared<MatrixGroupLevel>(g);
    out.base_level = g.mod.level;
    out.cartan_params = g.cartan_params;
    if (g.cartan_params)
        out.frame = NormalizerFrame{g.cartan_params->phi(mod), g.cartan_params->coset_rep(mod)};
    out.elems.reserve(static_cast<size_t>(order));
    int64_t step = g.mod.m;
    int64_t lifts = mod.m / step;
    for (const auto& p : g.elems)
        for (int64_t k0 = 0; k0 < lifts; ++k0)
            for (int64_t k1 = 0; k1 < lifts; ++k1)
                for (int64_t k2 = 0; k2 < lifts; ++k2)
                    for (int64_t k3 = 0; k3 < lifts; ++k3)
                        out.elems.push_back({static_cast<uint32_t>(p[0] + k0 * step),
                                             static_cast<uint32_t>(p[1] + k1 * step),
                                             static_cast<uint32_t>(p[2] + k2 * step),
                                             static_cast<uint32_t>(p[3] + k3 * step)});
    return out;
}

ResidueMatrix ambient_cartan_lift(const ResidueMatrix& b, const NormalizerFrame& base_frame,
                                  const ResidueMatrix& phi_lift, const ResidueMatrix& w_lift) {
    const Modulus& mod = phi_lift.mod;
    ResidueMatrix id = ResidueMatrix::identity(mod);
    if (auto xy = algebra_coords(b, base_frame.phi))
        return mat_add(mat_scale(xy->first, id), mat_scale(xy->second, phi_lift));
    ResidueMatrix c = mat_mul(mat_inv(base_frame.wrep), b);
    auto xy = algebra_coords(c, base_frame.phi);
    if (!xy) throw std::domain_error("cartan_preimage: element outside the normalizer frame");
    return mat_mul(w_lift, mat_add(mat_scale(xy->first, id), mat_scale(xy->second, phi_lift)));
}

NormalizerFrame stored_frame(const MatrixGroupLevel& g) {
    if (g.frame) return *g.frame;
    if (g.cartan_params)
        return NormalizerFrame{g.cartan_params->phi(g.mod), g.cartan_params->coset_rep(g.mod)};
    throw std::invalid_argument("group has no Cartan/normalizer structure");
}

std::pair<ResidueMatrix, ResidueMatrix> lift_normalizer_frame(const MatrixGroupLevel& g,
                                                              const Modulus& mod) {
    if (g.cartan_params)
        return {g.cartan_params->phi(mod), g.cartan_params->coset_rep(mod)};
    if (!g.frame) throw std::invalid_argument("lift_normalizer_frame: no normalizer frame");
    ResidueMatrix phi = ResidueMatrix::from_entries(mod, g.frame->phi.e[0], g.frame->phi.e[1],
                                                    g.frame->phi.e[2], g.frame->phi.e[3]);
    ResidueMatrix w = ResidueMatrix::from_entries(mod, g.frame->wrep.e[0], g.frame->wrep.e[1],
                                                  g.frame->wrep.e[2], g.frame->wrep.e[3]);
    ResidueMatrix conj = mat_sub(mat_scale(phi.trace(), ResidueMatrix::identity(mod)), phi);
    if (!(mat_mul(w, phi) == mat_mul(conj, w)))
        throw std::domain_error("lift_normalizer_frame: lift does not normalize the algebra");
    return {phi, w};
}

MatrixGroupLevel cartan_preimage(const MatrixGroupLevel& g, int level) {
    if (!g.frame && !g.cartan_params)
        throw std::invalid_argument("cartan_preimage: group has no Cartan structure");
    if (level < g.mod.level) throw std::invalid_argument("cartan_preimage: level below base");
    if (level == g.mod.level) return g;
    Modulus mod = Modulus::make(g.mod.ell, level);
    const int delta = level - g.mod.level;
    BigInt order = BigInt(static_cast<int64_t>(g.size())) * pow_big(BigInt(g.mod.ell), 2LL * delta);
    if (order > BigInt(static_cast<int64_t>(size_guard())))
        throw SizeGuardExceeded("cartan_preimage: order " + order.str());

    auto [phi, w] = lift_normalizer_frame(g, mod);
    NormalizerFrame base_frame = g.frame ? *g.frame
                                         : NormalizerFrame{g.cartan_params->phi(g.mod),
                                                           g.cartan_params->coset_rep(g.mod)};

    MatrixGroupLevel out;
    out.mod = mod;
    out.kind = GroupKind::Preimage;
    out.base = std::make_shared<MatrixGroupLevel>(g);
    out.base_level = g.mod.level;
    out.cartan_params = g.cartan_params;
    out.frame = NormalizerFrame{phi, w};
    out.elems.reserve(static_cast<size_t>(order));
    const int64_t step = g.mod.m;
    const int64_t lifts = mod.m / step;
    const int64_t m = mod.m;
    for (const auto& p : g.elems) {
        ResidueMatrix lift0 = ambient_cartan_lift(unpack_mat(g.mod, p), base_frame, phi, w);
        ResidueMatrix d1 = mat_scale(step, lift0);
        ResidueMatrix d2 = mat_scale(step, mat_mul(lift0, phi));
        for (int64_t s = 0; s < lifts; ++s) {
            int64_t r0 = (lift0.e[0] + s * d1.e[0]) % m, r1 = (lift0.e[1] + s * d1.e[1]) % m;
            int64_t r2 = (lift0.e[2] + s * d1.e[2]) % m, r3 = (lift0.e[3] + s * d1.e[3]) % m;
            for (int64_t t = 0; t < lifts; ++t) {
                out.elems.push_back({static_cast<uint32_t>(r0), static_cast<uint32_t>(r1),
                                     static_cast<uint32_t>(r2), static_cast<uint32_t>(r3)});
                r0 = (r0 + d2.e[0]) % m;
                r1 = (r1 + d2.e[1]) % m;
                r2 = (r2 + d2.e[2]) % m;
                r3 = (r3 + d2.e[3]) % m;
            }
        }
    }
    return out;
}

size_t reduction_kernel_size(const MatrixGroupLevel& g) {
    if (g.mod.level < 2) throw std::invalid_argument("reduction_kernel_size: need level >= 2");
    const int64_t mprev = g.mod.m / g.mod.ell;
    size_t count = 0;
    for (const auto& p : g.elems)
        if (p[0] % mprev == 1 % mprev && p[1] % mprev == 0 && p[2] % mprev == 0 &&
            p[3] % mprev == 1 % mprev)
            ++count;
    return count;
}

bool closure_audit(const MatrixGroupLevel& g, size_t full_threshold, size_t samples) {
    std::vector<uint64_t> keys;
    keys.reserve(g.size());
    for (const auto& p : g.elems) keys.push_back(mat_key(p, g.mod.m));
    std::sort(keys.begin(), keys.end());
    auto in_group = [&](const ResidueMatrix& m) {
        return std::binary_search(keys.begin(), keys.end(), mat_key(pack_mat(m), g.mod.m));
    };
    const size_t n = g.size();
    if (n == 0) return false;
    if (!in_group(ResidueMatrix::identity(g.mod))) return false;
    if (n <= full_threshold) {
        for (size_t i = 0; i < n; ++i) {
            ResidueMatrix a = g.element(i);
            if (!in_group(mat_inv(a))) return false;
            for (size_t j = 0; j < n; ++j)
                if (!in_group(mat_mul(a, g.element(j)))) return false;
        }
        return true;
    }
    uint64_t state = 0x9e3779b97f4a7c15ull; // fixed seed: deterministic sample
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };
    for (size_t k = 0; k < samples; ++k) {
        ResidueMatrix a = g.element(next() % n);
        ResidueMatrix b = g.element(next() % n);
        if (!in_group(mat_mul(a, b)) || !in_group(mat_inv(a))) return false;
    }
    return true;
}

std::optional<NormalizerFrame> detect_normalizer_frame(const MatrixGroupLevel& g) {
    if (g.size() % 2 != 0) return std::nullopt;
    const size_t half = g.size() / 2;
    std::optional<std::vector<uint8_t>> found_split;
    std::optional<ResidueMatrix> found_phi;
    for (const auto& p : g.elems) {
        ResidueMatrix cand = unpack_mat(g.mod, p);
        ResidueMatrix red = g.mod.level > 1 ? cand.reduce(1) : cand;
        if (red.is_scalar()) continue;
        std::vector<uint8_t> split(g.size());
        size_t count = 0;
        for (size_t i = 0; i < g.size(); ++i) {
            bool inside = algebra_coords(g.element(i), cand).has_value();
            split[i] = inside ? 1 : 0;
            count += inside;
        }
        if (count != half) continue;
        if (found_split && *found_split != split) return std::nullopt; // ambiguous
        if (!found_split) {
            found_split = split;
            found_phi = cand;
        }
    }
    if (!found_split) return std::nullopt;
    for (size_t i = 0; i < g.size(); ++i)
        if (!(*found_split)[i])
            return NormalizerFrame{*found_phi, g.element(i)};
    return std::nullopt;
}

void for_each_lift(const MatrixGroupLevel& base, int level, int dims, int chunks,
                   const std::function<void(int, const ResidueMatrix&)>& fn, int threads) {
    if (dims != 2 && dims != 4) throw std::invalid_argument("for_each_lift: dims must be 2 or 4");
    Modulus mod = Modulus::make(base.mod.ell, level);
    const int64_t step = base.mod.m;
    const int64_t lifts = mod.m / step;
    const int64_t m = mod.m;
    if (chunks < 1) chunks = 1;

    std::optional<ResidueMatrix> phi, w;
    std::optional<NormalizerFrame> base_frame;
    if (dims == 2) {
        auto fw = lift_normalizer_frame(base, mod);
        phi = fw.first;
        w = fw.second;
        base_frame = base.frame ? *base.frame
                                : NormalizerFrame{base.cartan_params->phi(base.mod),
                                                  base.cartan_params->coset_rep(base.mod)};
    }

    auto run_chunk = [&](int chunk) {
        size_t lo = base.size() * chunk / chunks;
        size_t hi = base.size() * (chunk + 1) / chunks;
        for (size_t i = lo; i < hi; ++i) {
            ResidueMatrix b = base.element(i);
            if (dims == 4) {
                for (int64_t k0 = 0; k0 < lifts; ++k0)
                    for (int64_t k1 = 0; k1 < lifts; ++k1)
                        for (int64_t k2 = 0; k2 < lifts; ++k2)
                            for (int64_t k3 = 0; k3 < lifts; ++k3)
                                fn(chunk, ResidueMatrix{mod,
                                                        {b.e[0] + k0 * step, b.e[1] + k1 * step,
                                                         b.e[2] + k2 * step, b.e[3] + k3 * step}});
            } else {
                ResidueMatrix lift0 = ambient_cartan_lift(b, *base_frame, *phi, *w);
                ResidueMatrix d1 = mat_scale(step, lift0);
                ResidueMatrix d2 = mat_scale(step, mat_mul(lift0, *phi));
                for (int64_t s = 0; s < lifts; ++s) {
                    ResidueMatrix cur{mod,
                                      {(lift0.e[0] + s * d1.e[0]) % m, (lift0.e[1] + s * d1.e[1]) % m,
                                       (lift0.e[2] + s * d1.e[2]) % m, (lift0.e[3] + s * d1.e[3]) % m}};
                    for (int64_t t = 0; t < lifts; ++t) {
                        fn(chunk, cur);
                        cur.e[0] = (cur.e[0] + d2.e[0]) % m;
                        cur.e[1] = (cur.e[1] + d2.e[1]) % m;
                        cur.e[2] = (cur.e[2] + d2.e[2]) % m;
                        cur.e[3] = (cur.e[3] + d2.e[3]) % m;
                    }
                }
            }
        }
    };

    if (threads <= 1 || chunks == 1) {
        for (int c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next_chunk{0};
    int nthreads = std::min<int>(threads, chunks);
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (int c = next_chunk.fetch_add(1); c < chunks; c = next_chunk.fetch_add(1))
                run_chunk(c);
        });
    for (auto& th : pool) th.join();
}

} // namespace orderdens
