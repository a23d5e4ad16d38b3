#include <cmath>

#include "chelm/ckks.hpp"
#include "chelm/error.hpp"
#include "ckks_internal.hpp"

namespace chelm::ckks {

namespace {

constexpr double kScaleRelTol = 1e-9;

bool scales_match(double a, double b) {
    return std::abs(a - b) <= kScaleRelTol * std::max(std::abs(a), std::abs(b));
}

void check_level(const Ciphertext& ct, const CkksContext& ctx) {
    require(ct.level >= 0 && ct.level <= ctx.max_level() &&
                !ct.parts.empty() &&
                ct.parts.front().size() == static_cast<std::size_t>(ct.level) + 1,
            Status::invalid_argument, "ciphertext level inconsistent with residues");
}

ring::RingPoly pointwise_mul(const ring::RingPoly& a, const ring::RingPoly& b,
                             const ring::NttTables& t) {
    return ring::negacyclic_mul(a, b, t);
}

RnsPoly rns_add(const RnsPoly& a, const RnsPoly& b) {
    RnsPoly out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(ring::poly_add(a[i], b[i]));
    return out;
}

RnsPoly rns_sub(const RnsPoly& a, const RnsPoly& b) {
    RnsPoly out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(ring::poly_sub(a[i], b[i]));
    return out;
}

// Aligns two ciphertexts to a common level and checks scale compatibility.
std::pair<Ciphertext, Ciphertext> align(const Ciphertext& a, const Ciphertext& b,
                                        const CkksContext& ctx) {
    int level = std::min(a.level, b.level);
    Ciphertext la = mod_switch_to(a, level, ctx);
    Ciphertext lb = mod_switch_to(b, level, ctx);
    return {std::move(la), std::move(lb)};
}

void add_signed_inplace(ring::RingPoly& p, const std::vector<int64_t>& e) {
    const uint64_t q = p.modulus;
    for (std::size_t c = 0; c < p.coeffs.size(); ++c) {
        int64_t v = e[c] % static_cast<int64_t>(q);
        uint64_t u = v >= 0 ? static_cast<uint64_t>(v) : q - static_cast<uint64_t>(-v);
        p.coeffs[c] = ring::add_mod(p.coeffs[c], u, q);
    }
}

}  // namespace

Ciphertext encrypt(const PlaintextPoly& pt, const PublicKeySet& pub, const CkksContext& ctx,
                   Rng& rng) {
    detail::check_params_hash(pub.params_hash, ctx.params_hash(), "encrypt");
    require(pt.level >= 0 && pt.level <= ctx.max_level(), Status::level_exhausted,
            "encrypt: plaintext level out of range");
    const std::size_t active = pt.rns.size();
    const std::size_t n = ctx.degree();
    const std::size_t special_idx = ctx.modulus_chain().size() - 1;
    const uint64_t special = ctx.special_prime();

    auto u = ring::sample_ternary(n, rng);
    auto e0 = ring::sample_error(n, ctx.params().error_stddev, rng);
    auto e1 = ring::sample_error(n, ctx.params().error_stddev, rng);

    // Work over the active primes plus the special prime, then divide by the
    // special prime. The RLWE mask stays full-size while the embedded noise
    // shrinks to the rounding floor.
    std::vector<std::size_t> prime_index(active + 1);
    for (std::size_t i = 0; i < active; ++i) prime_index[i] = i;
    prime_index[active] = special_idx;

    std::array<std::vector<ring::RingPoly>, 2> parts;
    for (std::size_t row = 0; row <= active; ++row) {
        const std::size_t chain_idx = prime_index[row];
        const auto& tbl = ctx.tables(chain_idx);
        const uint64_t q = tbl.modulus;

        auto u_poly = ring::reduce_signed(std::span<const int8_t>(u), q, ctx.degree_log2());
        ring::ntt_forward_inplace(u_poly.coeffs, tbl);

        for (int part = 0; part < 2; ++part) {
            ring::RingPoly r;
            r.modulus = q;
            r.degree_log2 = ctx.degree_log2();
            r.coeffs.resize(n);
            const auto& key_row = pub.pk[part][chain_idx];
            for (std::size_t c = 0; c < n; ++c) {
                r.coeffs[c] = ring::mul_mod(key_row[c], u_poly.coeffs[c], q);
            }
            ring::ntt_inverse_inplace(r.coeffs, tbl);
            add_signed_inplace(r, part == 0 ? e0 : e1);
            if (part == 0 && row < active) {
                // message lifted by the special prime: P * m
                const uint64_t p_mod = special % q;
                for (std::size_t c = 0; c < n; ++c) {
                    uint64_t lifted = ring::mul_mod(pt.rns[row].coeffs[c], p_mod, q);
                    r.coeffs[c] = ring::add_mod(r.coeffs[c], lifted, q);
                }
            }
            parts[part].push_back(std::move(r));
        }
    }

    Ciphertext ct;
    ct.scale = pt.scale;
    ct.level = pt.level;
    for (int part = 0; part < 2; ++part) {
        detail::div_round_by_last(parts[part], prime_index, ctx);
        ct.parts.push_back(std::move(parts[part]));
    }
    return ct;
}

PlaintextPoly decrypt(const Ciphertext& ct, const SecretKey& sk, const CkksContext& ctx) {
    detail::check_params_hash(sk.params_hash, ctx.params_hash(), "decrypt");
    check_level(ct, ctx);
    require(ct.size() == 2 || ct.size() == 3, Status::invalid_argument,
            "decrypt: unexpected part count");
    const std::size_t active = ct.parts[0].size();
    const std::size_t n = ctx.degree();

    PlaintextPoly pt;
    pt.scale = ct.scale;
    pt.level = ct.level;
    for (std::size_t i = 0; i < active; ++i) {
        const auto& tbl = ctx.tables(i);
        const uint64_t q = tbl.modulus;
        std::vector<uint64_t> acc = ct.parts[1][i].coeffs;
        ring::ntt_forward_inplace(acc, tbl);
        for (std::size_t c = 0; c < n; ++c) acc[c] = ring::mul_mod(acc[c], sk.ntt[i][c], q);
        if (ct.size() == 3) {
            std::vector<uint64_t> c2 = ct.parts[2][i].coeffs;
            ring::ntt_forward_inplace(c2, tbl);
            for (std::size_t c = 0; c < n; ++c) {
                acc[c] = ring::add_mod(acc[c], ring::mul_mod(c2[c], sk.squared_ntt[i][c], q), q);
            }
        }
        ring::ntt_inverse_inplace(acc, tbl);
        ring::RingPoly r;
        r.modulus = q;
        r.degree_log2 = ctx.degree_log2();
        r.coeffs.resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            r.coeffs[c] = ring::add_mod(ct.parts[0][i].coeffs[c], acc[c], q);
        }
        pt.rns.push_back(std::move(r));
    }
    return pt;
}

Ciphertext mod_switch_to(const Ciphertext& a, int level, const CkksContext& ctx) {
    check_level(a, ctx);
    require(level >= 0 && level <= a.level, Status::invalid_argument,
            "mod_switch: target level above current");
    Ciphertext out = a;
    out.level = level;
    for (auto& part : out.parts) part.resize(static_cast<std::size_t>(level) + 1);
    return out;
}

PlaintextPoly mod_switch_to(const PlaintextPoly& pt, int level, const CkksContext& ctx) {
    require(level >= 0 && level <= pt.level, Status::invalid_argument,
            "mod_switch: target level above current");
    (void)ctx;
    PlaintextPoly out = pt;
    out.level = level;
    out.rns.resize(static_cast<std::size_t>(level) + 1);
    return out;
}

Ciphertext add_ct(const Ciphertext& a, const Ciphertext& b, const CkksContext& ctx) {
    check_level(a, ctx);
    check_level(b, ctx);
    auto [la, lb] = align(a, b, ctx);
    require(scales_match(la.scale, lb.scale), Status::scale_mismatch,
            "add: operand scales differ after alignment");
    Ciphertext out;
    out.scale = la.scale;
    out.level = la.level;
    const std::size_t parts = std::max(la.size(), lb.size());
    for (std::size_t p = 0; p < parts; ++p) {
        if (p >= la.size()) {
            out.parts.push_back(lb.parts[p]);
        } else if (p >= lb.size()) {
            out.parts.push_back(la.parts[p]);
        } else {
            out.parts.push_back(rns_add(la.parts[p], lb.parts[p]));
        }
    }
    return out;
}

Ciphertext sub_ct(const Ciphertext& a, const Ciphertext& b, const CkksContext& ctx) {
    check_level(a, ctx);
    check_level(b, ctx);
    auto [la, lb] = align(a, b, ctx);
    require(scales_match(la.scale, lb.scale), Status::scale_mismatch,
            "sub: operand scales differ after alignment");
    Ciphertext out;
    out.scale = la.scale;
    out.level = la.level;
    const std::size_t parts = std::max(la.size(), lb.size());
    for (std::size_t p = 0; p < parts; ++p) {
        if (p >= la.size()) {
            RnsPoly neg;
            for (const auto& r : lb.parts[p]) neg.push_back(ring::poly_negate(r));
            out.parts.push_back(std::move(neg));
        } else if (p >= lb.size()) {
            out.parts.push_back(la.parts[p]);
        } else {
            out.parts.push_back(rns_sub(la.parts[p], lb.parts[p]));
        }
    }
    return out;
}

Ciphertext add_plain(const Ciphertext& a, const PlaintextPoly& pt, const CkksContext& ctx) {
    check_level(a, ctx);
    int level = std::min(a.level, pt.level);
    Ciphertext la = mod_switch_to(a, level, ctx);
    PlaintextPoly lp = mod_switch_to(pt, level, ctx);
    require(scales_match(la.scale, lp.scale), Status::scale_mismatch,
            "add_plain: scales differ");
    Ciphertext out = la;
    out.parts[0] = rns_add(la.parts[0], lp.rns);
    return out;
}

Ciphertext mul_plain(const Ciphertext& a, const PlaintextPoly& pt, const CkksContext& ctx) {
    check_level(a, ctx);
    int level = std::min(a.level, pt.level);
    Ciphertext la = mod_switch_to(a, level, ctx);
    PlaintextPoly lp = mod_switch_to(pt, level, ctx);
    Ciphertext out;
    out.level = level;
    out.scale = la.scale * lp.scale;
    for (const auto& part : la.parts) {
        RnsPoly row;
        for (std::size_t i = 0; i < part.size(); ++i) {
            row.push_back(pointwise_mul(part[i], lp.rns[i], ctx.tables(i)));
        }
        out.parts.push_back(std::move(row));
    }
    return out;
}

Ciphertext mul_ct(const Ciphertext& a, const Ciphertext& b, const KswKey& relin_key,
                  const CkksContext& ctx) {
    check_level(a, ctx);
    check_level(b, ctx);
    require(a.size() == 2 && b.size() == 2, Status::invalid_argument,
            "mul: operands must be relinearized 2-part ciphertexts");
    auto [la, lb] = align(a, b, ctx);
    const std::size_t active = la.parts[0].size();
    const std::size_t n = ctx.degree();

    Ciphertext prod;
    prod.level = la.level;
    prod.scale = la.scale * lb.scale;
    prod.parts.assign(2, RnsPoly{});

    RnsPoly c2;  // the s^2 component, eliminated below
    for (std::size_t i = 0; i < active; ++i) {
        const auto& tbl = ctx.tables(i);
        const uint64_t q = tbl.modulus;
        std::array<std::vector<uint64_t>, 4> ev = {
            la.parts[0][i].coeffs, la.parts[1][i].coeffs,
            lb.parts[0][i].coeffs, lb.parts[1][i].coeffs};
        for (auto& e : ev) ring::ntt_forward_inplace(e, tbl);

        auto make_poly = [&](std::vector<uint64_t> evals) {
            ring::ntt_inverse_inplace(evals, tbl);
            ring::RingPoly r;
            r.modulus = q;
            r.degree_log2 = ctx.degree_log2();
            r.coeffs = std::move(evals);
            return r;
        };
        std::vector<uint64_t> t0(n), t1(n), t2(n);
        for (std::size_t c = 0; c < n; ++c) {
            t0[c] = ring::mul_mod(ev[0][c], ev[2][c], q);
            t1[c] = ring::add_mod(ring::mul_mod(ev[0][c], ev[3][c], q),
                                  ring::mul_mod(ev[1][c], ev[2][c], q), q);
            t2[c] = ring::mul_mod(ev[1][c], ev[3][c], q);
        }
        prod.parts[0].push_back(make_poly(std::move(t0)));
        prod.parts[1].push_back(make_poly(std::move(t1)));
        c2.push_back(make_poly(std::move(t2)));
    }

    auto switched = detail::key_switch(c2, relin_key, ctx);
    prod.parts[0] = rns_add(prod.parts[0], switched[0]);
    prod.parts[1] = rns_add(prod.parts[1], switched[1]);
    return prod;
}

Ciphertext rescale(const Ciphertext& a, const CkksContext& ctx) {
    check_level(a, ctx);
    require(a.level >= 1, Status::level_exhausted,
            "rescale: no primes left to drop");
    const std::size_t active = a.parts[0].size();
    std::vector<std::size_t> prime_index(active);
    for (std::size_t i = 0; i < active; ++i) prime_index[i] = i;

    Ciphertext out;
    out.level = a.level - 1;
    out.scale = a.scale / static_cast<double>(ctx.modulus_chain()[active - 1]);
    for (const auto& part : a.parts) {
        std::vector<ring::RingPoly> rows = part;
        detail::div_round_by_last(rows, prime_index, ctx);
        out.parts.push_back(std::move(rows));
    }
    return out;
}

namespace {

Ciphertext rotate_step(const Ciphertext& a, uint32_t step, const PublicKeySet& keys,
                       const CkksContext& ctx) {
    auto it = keys.rotation.find(step);
    require(it != keys.rotation.end(), Status::key_missing,
            "rotate: no galois key for this step");
    const KswKey& key = it->second;
    const std::size_t active = a.parts[0].size();

    Ciphertext out;
    out.scale = a.scale;
    out.level = a.level;
    out.parts.assign(2, RnsPoly{});
    RnsPoly rotated_c1;
    for (std::size_t i = 0; i < active; ++i) {
        const uint64_t q = ctx.modulus_chain()[i];
        ring::RingPoly r0;
        r0.modulus = q;
        r0.degree_log2 = ctx.degree_log2();
        r0.coeffs = detail::apply_galois(a.parts[0][i].coeffs, key.galois_elt, q);
        out.parts[0].push_back(std::move(r0));

        ring::RingPoly r1;
        r1.modulus = q;
        r1.degree_log2 = ctx.degree_log2();
        r1.coeffs = detail::apply_galois(a.parts[1][i].coeffs, key.galois_elt, q);
        rotated_c1.push_back(std::move(r1));

        ring::RingPoly zero = ring::make_zero_poly(q, ctx.degree_log2());
        out.parts[1].push_back(std::move(zero));
    }
    auto switched = detail::key_switch(rotated_c1, key, ctx);
    out.parts[0] = rns_add(out.parts[0], switched[0]);
    out.parts[1] = rns_add(out.parts[1], switched[1]);
    return out;
}

}  // namespace

Ciphertext rotate(const Ciphertext& a, std::size_t k, const PublicKeySet& keys,
                  const CkksContext& ctx) {
    detail::check_params_hash(keys.params_hash, ctx.params_hash(), "rotate");
    check_level(a, ctx);
    require(a.size() == 2, Status::invalid_argument, "rotate: relinearize before rotating");
    k %= ctx.slot_count();
    if (k == 0) return a;
    Ciphertext cur = a;
    for (uint32_t step = 1; k != 0; step <<= 1) {
        if (k & step) {
            cur = rotate_step(cur, step, keys, ctx);
            k &= ~static_cast<std::size_t>(step);
        }
    }
    return cur;
}

Ciphertext sum_slots(const Ciphertext& a, std::size_t n, const PublicKeySet& keys,
                     const CkksContext& ctx) {
    require(n >= 1 && n <= ctx.slot_count(), Status::invalid_argument,
            "sum_slots: active slot count out of range");
    Ciphertext acc = a;
    for (std::size_t step = 1; step < n; step <<= 1) {
        acc = add_ct(acc, rotate(acc, step, keys, ctx), ctx);
    }
    return acc;
}

Ciphertext dot_product(const Ciphertext& a, const Ciphertext& b, std::size_t n,
                       const PublicKeySet& keys, const CkksContext& ctx) {
    require(n >= 1 && n <= ctx.slot_count(), Status::invalid_argument,
            "dot_product: vector length out of range");
    Ciphertext prod = mul_ct(a, b, keys.relin, ctx);
    // Full ladder before rescaling: rotation noise is negligible at the
    // squared scale, and the total lands replicated in every slot (inputs are
    // zero-padded beyond n).
    prod = sum_slots(prod, ctx.slot_count(), keys, ctx);
    return rescale(prod, ctx);
}

}  // namespace chelm::ckks
