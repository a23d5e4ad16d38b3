#ifndef CHELM_RING_HPP
#define CHELM_RING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "chelm/rng.hpp"

namespace chelm::ring {

// --- modular scalar arithmetic (word-sized primes, p < 2^62) ---

uint64_t add_mod(uint64_t a, uint64_t b, uint64_t p);
uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t p);
uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t p);
uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t p);
uint64_t inv_mod(uint64_t a, uint64_t p);

// Deterministic Miller-Rabin, exact for 64-bit inputs.
bool is_prime(uint64_t n);

// Scans downward from 2^bits for distinct primes p ≡ 1 (mod 2^(degree_log2+1)),
// starting below `below` when given (used to keep chain primes distinct).
std::vector<uint64_t> find_ntt_primes(uint32_t bits, uint32_t degree_log2,
                                      std::size_t count,
                                      uint64_t below = 0);

// --- polynomial ring Z_p[X]/(X^N + 1) ---

// Dense coefficient vector, every value in [0, p). N = 2^degree_log2.
struct RingPoly {
    std::vector<uint64_t> coeffs;
    uint64_t modulus = 0;
    uint32_t degree_log2 = 0;

    std::size_t degree() const { return std::size_t{1} << degree_log2; }
};

RingPoly make_zero_poly(uint64_t modulus, uint32_t degree_log2);

// Twiddle tables for the negacyclic NTT. `root` is a primitive 2N-th root of
// unity mod p, so root^N ≡ -1 and the transform folds the X^N = -1 relation
// into the butterflies. Shoup companions hold floor(w * 2^64 / p) for the
// two-multiply reduction.
struct NttTables {
    uint64_t modulus = 0;
    uint64_t root = 0;
    uint32_t degree_log2 = 0;
    std::vector<uint64_t> forward_twiddles;
    std::vector<uint64_t> forward_twiddles_shoup;
    std::vector<uint64_t> inverse_twiddles;
    std::vector<uint64_t> inverse_twiddles_shoup;
    uint64_t n_inverse = 0;
    uint64_t n_inverse_shoup = 0;

    std::size_t degree() const { return std::size_t{1} << degree_log2; }
};

// Rejects p that is not prime or not ≡ 1 mod 2N.
NttTables make_ntt_tables(uint64_t p, uint32_t degree_log2);

// In-place transforms. Forward output (and inverse input) is in bit-reversed
// order; pointwise products may be formed directly between two forward
// outputs.
void ntt_forward_inplace(std::span<uint64_t> a, const NttTables& t);
void ntt_inverse_inplace(std::span<uint64_t> a, const NttTables& t);

std::vector<uint64_t> ntt_forward(const RingPoly& a, const NttTables& t);
RingPoly ntt_inverse(std::span<const uint64_t> evals, const NttTables& t);

// a*b reduced mod (X^N + 1, p); exact.
RingPoly negacyclic_mul(const RingPoly& a, const RingPoly& b, const NttTables& t);

RingPoly poly_add(const RingPoly& a, const RingPoly& b);
RingPoly poly_sub(const RingPoly& a, const RingPoly& b);
RingPoly poly_scalar_mul(const RingPoly& a, uint64_t c);
RingPoly poly_negate(const RingPoly& a);

// --- RLWE samplers ---

RingPoly sample_uniform(uint64_t p, uint32_t degree_log2, Rng& rng);

// Signed coefficient vectors; reduced per prime by the caller.
std::vector<int8_t> sample_ternary(std::size_t n, Rng& rng);
std::vector<int8_t> sample_sparse_ternary(std::size_t n, std::size_t hamming_weight, Rng& rng);
std::vector<int64_t> sample_error(std::size_t n, double stddev, Rng& rng);

// Reduces a signed coefficient vector into [0, p).
RingPoly reduce_signed(std::span<const int64_t> coeffs, uint64_t p, uint32_t degree_log2);
RingPoly reduce_signed(std::span<const int8_t> coeffs, uint64_t p, uint32_t degree_log2);

}  // namespace chelm::ring

#endif
