// Shared helpers for the CKKS translation units. Not installed.
#ifndef CHELM_SRC_CKKS_INTERNAL_HPP
#define CHELM_SRC_CKKS_INTERNAL_HPP

#include <cstdint>
#include <vector>

#include "chelm/ckks.hpp"
#include "chelm/error.hpp"

namespace chelm::ckks::detail {

// Key-switching digit width. Residues of every chain prime are split into
// base-2^21 digits, which keeps the d*e accumulation safely below the special
// prime regardless of the 40-bit first prime.
inline constexpr uint32_t kKsDigitBits = 21;

inline uint32_t digit_count(uint64_t prime) {
    uint32_t bits = 64 - static_cast<uint32_t>(__builtin_clzll(prime));
    return (bits + kKsDigitBits - 1) / kKsDigitBits;
}

// X -> X^g on a residue polynomial; index map i -> i*g mod 2N with sign fold.
inline std::vector<uint64_t> apply_galois(const std::vector<uint64_t>& coeffs, uint64_t g,
                                          uint64_t p) {
    const std::size_t n = coeffs.size();
    const std::size_t m = 2 * n;
    std::vector<uint64_t> out(n, 0);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (idx < n) {
            out[idx] = coeffs[i];
        } else {
            uint64_t v = coeffs[i];
            out[idx - n] = v == 0 ? 0 : p - v;
        }
        idx = (idx + g) % m;
    }
    return out;
}

inline std::vector<int8_t> apply_galois_signed(const std::vector<int8_t>& coeffs, uint64_t g) {
    const std::size_t n = coeffs.size();
    const std::size_t m = 2 * n;
    std::vector<int8_t> out(n, 0);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (idx < n) {
            out[idx] = coeffs[i];
        } else {
            out[idx - n] = static_cast<int8_t>(-coeffs[i]);
        }
        idx = (idx + g) % m;
    }
    return out;
}

// Divide-and-round a coefficient-domain RNS vector by its last prime:
// out_i = (in_i - centered(in_last)) * last^-1 mod q_i. `prime_index` maps a
// local row to its index in the context chain.
void div_round_by_last(std::vector<ring::RingPoly>& rows,
                       const std::vector<std::size_t>& prime_index, const CkksContext& ctx);

// Accumulated key-switch of a coefficient-domain polynomial (active data
// primes) against a key; returns two rows over the active data primes,
// already divided by the special prime.
std::array<RnsPoly, 2> key_switch(const RnsPoly& input, const KswKey& key,
                                  const CkksContext& ctx);

inline void check_params_hash(uint64_t lhs, uint64_t rhs, const char* what) {
    require(lhs == rhs, Status::invalid_argument,
            std::string(what) + ": key/context parameter mismatch");
}

}  // namespace chelm::ckks::detail

#endif
