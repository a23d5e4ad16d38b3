#include "chelm/ckks.hpp"
#include "chelm/error.hpp"
#include "ckks_internal.hpp"

namespace chelm::ckks {

namespace {

using detail::digit_count;
using detail::kKsDigitBits;

std::vector<uint64_t> to_ntt(const std::vector<int8_t>& signed_coeffs, const ring::NttTables& t) {
    auto poly = ring::reduce_signed(std::span<const int8_t>(signed_coeffs), t.modulus, t.degree_log2);
    ring::ntt_forward_inplace(poly.coeffs, t);
    return std::move(poly.coeffs);
}

std::vector<uint64_t> to_ntt(const std::vector<int64_t>& signed_coeffs, const ring::NttTables& t) {
    auto poly = ring::reduce_signed(std::span<const int64_t>(signed_coeffs), t.modulus, t.degree_log2);
    ring::ntt_forward_inplace(poly.coeffs, t);
    return std::move(poly.coeffs);
}

// One RLWE row (-(a*s + e) + msg, a) in evaluation domain over the full chain.
// `msg` may be empty; otherwise msg[i] is added into the b component at prime i.
KswKey::Entry make_rlwe_row(const SecretKey& sk,
                            const std::vector<std::vector<uint64_t>>& msg,
                            const CkksContext& ctx, Rng& rng) {
    const std::size_t prime_count = ctx.modulus_chain().size();
    const std::size_t n = ctx.degree();
    auto e = ring::sample_error(n, ctx.params().error_stddev, rng);

    KswKey::Entry row;
    row.a.resize(prime_count);
    row.b.resize(prime_count);
    for (std::size_t i = 0; i < prime_count; ++i) {
        const auto& t = ctx.tables(i);
        const uint64_t p = t.modulus;
        row.a[i] = ring::sample_uniform(p, ctx.degree_log2(), rng).coeffs;  // uniform evals
        auto e_ntt = to_ntt(e, t);
        row.b[i].resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            uint64_t as = ring::mul_mod(row.a[i][c], sk.ntt[i][c], p);
            uint64_t v = ring::sub_mod(0, ring::add_mod(as, e_ntt[c], p), p);
            if (!msg.empty()) v = ring::add_mod(v, msg[i][c], p);
            row.b[i][c] = v;
        }
    }
    return row;
}

// Key-switching key toward `target_ntt` (s', per prime, evaluation domain):
// row (j,k) carries P * 2^(21k) * s' at source prime j and nothing elsewhere.
KswKey make_ksw_key(const SecretKey& sk, const std::vector<std::vector<uint64_t>>& target_ntt,
                    uint64_t galois_elt, const CkksContext& ctx, Rng& rng) {
    const std::size_t data_count = ctx.data_prime_count();
    const std::size_t prime_count = ctx.modulus_chain().size();
    const std::size_t n = ctx.degree();
    const uint64_t special = ctx.special_prime();

    KswKey key;
    key.galois_elt = galois_elt;
    key.rows.resize(data_count);
    for (std::size_t j = 0; j < data_count; ++j) {
        const uint64_t qj = ctx.modulus_chain()[j];
        const uint32_t digits = digit_count(qj);
        for (uint32_t k = 0; k < digits; ++k) {
            uint64_t factor = ring::mul_mod(special % qj, ring::pow_mod(2, kKsDigitBits * k, qj), qj);
            std::vector<std::vector<uint64_t>> msg(prime_count);
            for (std::size_t i = 0; i < prime_count; ++i) {
                msg[i].assign(n, 0);
                if (i == j) {
                    for (std::size_t c = 0; c < n; ++c) {
                        msg[i][c] = ring::mul_mod(factor, target_ntt[i][c], qj);
                    }
                }
            }
            key.rows[j].push_back(make_rlwe_row(sk, msg, ctx, rng));
        }
    }
    return key;
}

}  // namespace

KeySet keygen(const CkksContext& ctx, Rng& rng) {
    const std::size_t prime_count = ctx.modulus_chain().size();
    const std::size_t n = ctx.degree();

    KeySet keys;
    keys.secret.params_hash = ctx.params_hash();
    keys.pub.params_hash = ctx.params_hash();

    keys.secret.coeffs = ring::sample_sparse_ternary(n, ctx.params().secret_hamming_weight, rng);
    keys.secret.ntt.resize(prime_count);
    keys.secret.squared_ntt.resize(prime_count);
    for (std::size_t i = 0; i < prime_count; ++i) {
        const auto& t = ctx.tables(i);
        keys.secret.ntt[i] = to_ntt(keys.secret.coeffs, t);
        keys.secret.squared_ntt[i].resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            keys.secret.squared_ntt[i][c] =
                ring::mul_mod(keys.secret.ntt[i][c], keys.secret.ntt[i][c], t.modulus);
        }
    }

    // Encryption key: an RLWE sample of zero over the full raised modulus.
    auto pk_row = make_rlwe_row(keys.secret, {}, ctx, rng);
    keys.pub.pk[0] = std::move(pk_row.b);
    keys.pub.pk[1] = std::move(pk_row.a);

    keys.pub.relin = make_ksw_key(keys.secret, keys.secret.squared_ntt, 0, ctx, rng);

    // Rotation keys for every power-of-two step up to slot_count/2; arbitrary
    // rotations compose from these.
    const std::size_t m = 2 * n;
    for (std::size_t step = 1; step <= ctx.slot_count() / 2; step <<= 1) {
        uint64_t g = 1;
        for (std::size_t i = 0; i < step; ++i) g = (g * 5) % m;
        auto rotated = detail::apply_galois_signed(keys.secret.coeffs, g);
        std::vector<std::vector<uint64_t>> rot_ntt(prime_count);
        for (std::size_t i = 0; i < prime_count; ++i) {
            rot_ntt[i] = to_ntt(rotated, ctx.tables(i));
        }
        keys.pub.rotation[static_cast<uint32_t>(step)] =
            make_ksw_key(keys.secret, rot_ntt, g, ctx, rng);
    }
    return keys;
}

namespace detail {

void div_round_by_last(std::vector<ring::RingPoly>& rows,
                       const std::vector<std::size_t>& prime_index, const CkksContext& ctx) {
    require(rows.size() >= 2 && rows.size() == prime_index.size(), Status::internal,
            "div_round_by_last: malformed input");
    const std::size_t n = rows.front().coeffs.size();
    const std::size_t last = rows.size() - 1;
    const uint64_t p_last = rows[last].modulus;
    const std::size_t last_chain_idx = prime_index[last];

    for (std::size_t i = 0; i < last; ++i) {
        const uint64_t qi = rows[i].modulus;
        const uint64_t inv = ctx.prime_inv_mod(last_chain_idx, prime_index[i]);
        for (std::size_t c = 0; c < n; ++c) {
            // centered representative of the dropped residue
            uint64_t r = rows[last].coeffs[c];
            uint64_t r_mod;
            if (r > p_last / 2) {
                uint64_t mag = (p_last - r) % qi;
                r_mod = mag == 0 ? 0 : qi - mag;
            } else {
                r_mod = r % qi;
            }
            uint64_t diff = ring::sub_mod(rows[i].coeffs[c], r_mod, qi);
            rows[i].coeffs[c] = ring::mul_mod(diff, inv, qi);
        }
    }
    rows.pop_back();
}

std::array<RnsPoly, 2> key_switch(const RnsPoly& input, const KswKey& key,
                                  const CkksContext& ctx) {
    const std::size_t active = input.size();
    require(active >= 1 && active <= ctx.data_prime_count(), Status::internal,
            "key_switch: bad level");
    require(key.rows.size() >= active, Status::key_missing,
            "key_switch: key does not cover the active primes");
    const std::size_t n = ctx.degree();
    const std::size_t special_idx = ctx.modulus_chain().size() - 1;

    // Accumulate in evaluation domain over the active primes plus the special
    // prime; local row t < active maps to chain prime t, last row to special.
    std::vector<std::size_t> prime_index(active + 1);
    for (std::size_t t = 0; t < active; ++t) prime_index[t] = t;
    prime_index[active] = special_idx;

    std::array<std::vector<std::vector<uint64_t>>, 2> acc;
    for (auto& part : acc) {
        part.assign(active + 1, std::vector<uint64_t>(n, 0));
    }

    std::vector<uint64_t> digit(n);
    for (std::size_t j = 0; j < active; ++j) {
        const uint64_t qj = ctx.modulus_chain()[j];
        const uint32_t digits = digit_count(qj);
        require(key.rows[j].size() == digits, Status::key_missing,
                "key_switch: digit rows missing");
        for (uint32_t k = 0; k < digits; ++k) {
            const uint64_t mask = (uint64_t{1} << kKsDigitBits) - 1;
            for (std::size_t c = 0; c < n; ++c) {
                digit[c] = (input[j].coeffs[c] >> (kKsDigitBits * k)) & mask;
            }
            const auto& entry = key.rows[j][k];
            for (std::size_t t = 0; t <= active; ++t) {
                const std::size_t chain_idx = prime_index[t];
                const auto& tbl = ctx.tables(chain_idx);
                const uint64_t qt = tbl.modulus;
                std::vector<uint64_t> d(n);
                for (std::size_t c = 0; c < n; ++c) {
                    d[c] = digit[c] >= qt ? digit[c] % qt : digit[c];
                }
                ring::ntt_forward_inplace(d, tbl);
                auto& a0 = acc[0][t];
                auto& a1 = acc[1][t];
                const auto& kb = entry.b[chain_idx];
                const auto& ka = entry.a[chain_idx];
                for (std::size_t c = 0; c < n; ++c) {
                    a0[c] = ring::add_mod(a0[c], ring::mul_mod(d[c], kb[c], qt), qt);
                    a1[c] = ring::add_mod(a1[c], ring::mul_mod(d[c], ka[c], qt), qt);
                }
            }
        }
    }

    std::array<RnsPoly, 2> out;
    for (int part = 0; part < 2; ++part) {
        std::vector<ring::RingPoly> rows;
        for (std::size_t t = 0; t <= active; ++t) {
            const std::size_t chain_idx = prime_index[t];
            ring::RingPoly rp;
            rp.modulus = ctx.modulus_chain()[chain_idx];
            rp.degree_log2 = ctx.degree_log2();
            rp.coeffs = std::move(acc[part][t]);
            ring::ntt_inverse_inplace(rp.coeffs, ctx.tables(chain_idx));
            rows.push_back(std::move(rp));
        }
        div_round_by_last(rows, prime_index, ctx);
        out[part] = std::move(rows);
    }
    return out;
}

}  // namespace detail

}  // namespace chelm::ckks
