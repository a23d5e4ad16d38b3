#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "chelm/ckks.hpp"
#include "chelm/error.hpp"

namespace chelm::ckks {

using ring::NttTables;

namespace {

// HomomorphicEncryption.org 128-bit classical budget; enforced from N=8192 up.
// Smaller rings are test-scale and deliberately unconstrained.
int security_budget(uint32_t degree_log2) {
    switch (degree_log2) {
        case 13: return 218;
        case 14: return 438;
        case 15: return 881;
        default: return degree_log2 > 15 ? 881 : 0;
    }
}

uint64_t fnv1a(uint64_t h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// --- fixed-width little-endian accumulator for CRT recombination ---

using Limbs = std::array<uint64_t, 8>;

Limbs limbs_from_u64(uint64_t v) {
    Limbs l{};
    l[0] = v;
    return l;
}

void limbs_mul_u64(Limbs& a, uint64_t m) {
    unsigned __int128 carry = 0;
    for (auto& limb : a) {
        unsigned __int128 cur = static_cast<unsigned __int128>(limb) * m + carry;
        limb = static_cast<uint64_t>(cur);
        carry = cur >> 64;
    }
    require(carry == 0, Status::internal, "crt: limb overflow");
}

void limbs_shr1(Limbs& a) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        a[i] = (a[i] >> 1) | (a[i + 1] << 63);
    }
    a.back() >>= 1;
}

}  // namespace

CkksParams CkksParams::paper_profile() {
    return CkksParams{};
}

CkksParams CkksParams::test_profile() {
    CkksParams p;
    p.degree_log2 = 10;
    p.coeff_modulus_bits = {30, 21, 21, 21, 21, 21, 21, 30};
    p.scale_bits = 21;
    return p;
}

void CkksParams::validate() const {
    require(degree_log2 >= 2 && degree_log2 <= 16, Status::invalid_argument,
            "params: polynomial modulus degree must be a power of two between 4 and 65536");
    require(coeff_modulus_bits.size() >= 3, Status::invalid_argument,
            "params: modulus chain needs a first prime, intermediates, and a final prime");
    for (uint32_t b : coeff_modulus_bits) {
        require(b >= degree_log2 + 2 && b <= 60, Status::invalid_argument,
                "params: modulus bit size out of range for this degree");
    }
    int budget = security_budget(degree_log2);
    if (budget > 0) {
        int total = 0;
        for (uint32_t b : coeff_modulus_bits) total += static_cast<int>(b);
        require(total <= budget, Status::invalid_argument,
                "params: coefficient modulus exceeds the bit budget for this degree");
    }
    require(scale_bits >= 1, Status::invalid_argument, "params: scale must be at least 2");
    require(scale_bits < coeff_modulus_bits.front(), Status::invalid_argument,
            "params: scale must be bounded by the first prime");
    for (std::size_t i = 1; i + 1 < coeff_modulus_bits.size(); ++i) {
        require(scale_bits <= coeff_modulus_bits[i], Status::invalid_argument,
                "params: scale exceeds an intermediate prime size");
    }
    require(error_stddev > 0.0, Status::invalid_argument, "params: error stddev must be positive");
    uint64_t n = uint64_t{1} << degree_log2;
    require(secret_hamming_weight >= 1 && secret_hamming_weight <= n / 2,
            Status::invalid_argument, "params: secret hamming weight out of range");
}

uint64_t CkksParams::hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, degree_log2);
    for (uint32_t b : coeff_modulus_bits) h = fnv1a(h, b);
    h = fnv1a(h, scale_bits);
    h = fnv1a(h, secret_hamming_weight);
    uint64_t sd;
    static_assert(sizeof(sd) == sizeof(error_stddev));
    std::memcpy(&sd, &error_stddev, sizeof(sd));
    h = fnv1a(h, sd);
    return h;
}

CkksContext CkksContext::create(const CkksParams& params) {
    params.validate();

    CkksContext ctx;
    ctx.params_ = params;
    ctx.params_hash_ = params.hash();
    ctx.budget_enforced_ = security_budget(params.degree_log2) > 0;

    // Scan downward from 2^bits; primes of equal bit size continue below the
    // previous find so the chain stays distinct.
    std::map<uint32_t, uint64_t> last_found;
    for (uint32_t bits : params.coeff_modulus_bits) {
        uint64_t below = last_found.count(bits) ? last_found[bits] : 0;
        auto found = ring::find_ntt_primes(bits, params.degree_log2, 1, below);
        ctx.modulus_chain_.push_back(found[0]);
        last_found[bits] = found[0];
    }
    for (uint64_t p : ctx.modulus_chain_) {
        ctx.tables_.push_back(ring::make_ntt_tables(p, params.degree_log2));
    }

    // canonical-embedding tables
    const std::size_t n = ctx.degree();
    const std::size_t m = 2 * n;
    ctx.root_powers_.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        double angle = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(m);
        ctx.root_powers_[i] = {std::cos(angle), std::sin(angle)};
    }
    ctx.rot_group_.resize(n / 2);
    uint64_t five = 1;
    for (std::size_t i = 0; i < n / 2; ++i) {
        ctx.rot_group_[i] = static_cast<uint32_t>(five);
        five = (five * 5) % m;
    }

    // CRT recombination tables, one per level.
    const std::size_t data_count = ctx.data_prime_count();
    for (std::size_t lvl = 0; lvl < data_count; ++lvl) {
        CrtLevel c;
        std::size_t active = lvl + 1;
        c.modulus = limbs_from_u64(1);
        for (std::size_t i = 0; i < active; ++i) limbs_mul_u64(c.modulus, ctx.modulus_chain_[i]);
        c.half_modulus = c.modulus;
        limbs_shr1(c.half_modulus);
        for (std::size_t i = 0; i < active; ++i) {
            Limbs p = limbs_from_u64(1);
            uint64_t rem = 1;
            for (std::size_t j = 0; j < active; ++j) {
                if (j == i) continue;
                limbs_mul_u64(p, ctx.modulus_chain_[j]);
                rem = ring::mul_mod(rem, ctx.modulus_chain_[j] % ctx.modulus_chain_[i],
                                    ctx.modulus_chain_[i]);
            }
            c.punctured.push_back(p);
            c.punctured_inv.push_back(ring::inv_mod(rem, ctx.modulus_chain_[i]));
        }
        ctx.crt_levels_.push_back(std::move(c));
    }

    const std::size_t count = ctx.modulus_chain_.size();
    ctx.prime_inv_mod_.assign(count * count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            if (i == j) continue;
            uint64_t r = ctx.modulus_chain_[i] % ctx.modulus_chain_[j];
            ctx.prime_inv_mod_[i * count + j] = ring::inv_mod(r, ctx.modulus_chain_[j]);
        }
    }
    return ctx;
}

}  // namespace chelm::ckks
