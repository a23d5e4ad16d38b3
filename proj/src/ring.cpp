#include "chelm/ring.hpp"

#include <algorithm>
#include <cmath>

#include "chelm/error.hpp"

namespace chelm::ring {

namespace {

using u128 = unsigned __int128;

// floor(w * 2^64 / p), the Shoup companion of a fixed multiplicand.
uint64_t shoup_precompute(uint64_t w, uint64_t p) {
    return static_cast<uint64_t>((u128(w) << 64) / p);
}

// Product with a fixed multiplicand w given its companion; result < 2p.
inline uint64_t mul_mod_shoup_lazy(uint64_t x, uint64_t w, uint64_t w_shoup, uint64_t p) {
    uint64_t q = static_cast<uint64_t>((u128(x) * w_shoup) >> 64);
    return x * w - q * p;
}

inline uint64_t mul_mod_shoup(uint64_t x, uint64_t w, uint64_t w_shoup, uint64_t p) {
    uint64_t r = mul_mod_shoup_lazy(x, w, w_shoup, p);
    return r >= p ? r - p : r;
}

uint32_t bit_reverse(uint32_t v, uint32_t bits) {
    uint32_t r = 0;
    for (uint32_t i = 0; i < bits; ++i) {
        r = (r << 1) | ((v >> i) & 1);
    }
    return r;
}

void check_compatible(const RingPoly& a, const RingPoly& b) {
    require(a.modulus == b.modulus, Status::invalid_argument, "ring: modulus mismatch");
    require(a.degree_log2 == b.degree_log2, Status::invalid_argument, "ring: degree mismatch");
}

}  // namespace

uint64_t add_mod(uint64_t a, uint64_t b, uint64_t p) {
    uint64_t s = a + b;
    return s >= p ? s - p : s;
}

uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t p) {
    return a >= b ? a - b : a + p - b;
}

uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t p) {
    return static_cast<uint64_t>(u128(a) * b % p);
}

uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t p) {
    uint64_t acc = 1 % p;
    base %= p;
    while (exp) {
        if (exp & 1) acc = mul_mod(acc, base, p);
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    return acc;
}

uint64_t inv_mod(uint64_t a, uint64_t p) {
    require(a % p != 0, Status::invalid_argument, "inv_mod: zero has no inverse");
    return pow_mod(a, p - 2, p);  // p prime
}

bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    // This witness set is exact for all 64-bit inputs.
    for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

std::vector<uint64_t> find_ntt_primes(uint32_t bits, uint32_t degree_log2,
                                      std::size_t count, uint64_t below) {
    require(bits >= degree_log2 + 2 && bits <= 60, Status::invalid_argument,
            "find_ntt_primes: unsupported bit size");
    uint64_t two_n = uint64_t{1} << (degree_log2 + 1);
    uint64_t top = (below ? below - 1 : (uint64_t{1} << bits));
    uint64_t k = (top - 1) / two_n;
    std::vector<uint64_t> out;
    while (out.size() < count && k > 0) {
        uint64_t cand = k * two_n + 1;
        if (cand < (uint64_t{1} << (bits - 1))) break;  // stay within the requested size
        if (is_prime(cand)) out.push_back(cand);
        --k;
    }
    require(out.size() == count, Status::invalid_argument,
            "find_ntt_primes: not enough primes congruent to 1 mod 2N at this size");
    return out;
}

RingPoly make_zero_poly(uint64_t modulus, uint32_t degree_log2) {
    RingPoly p;
    p.modulus = modulus;
    p.degree_log2 = degree_log2;
    p.coeffs.assign(std::size_t{1} << degree_log2, 0);
    return p;
}

NttTables make_ntt_tables(uint64_t p, uint32_t degree_log2) {
    require(degree_log2 >= 1 && degree_log2 <= 17, Status::invalid_argument,
            "make_ntt_tables: degree_log2 out of range");
    uint64_t n = uint64_t{1} << degree_log2;
    require(is_prime(p), Status::invalid_argument, "make_ntt_tables: modulus is not prime");
    require(p % (2 * n) == 1, Status::invalid_argument,
            "make_ntt_tables: prime not congruent to 1 mod 2N");

    // psi = c^((p-1)/2N) has order dividing 2N; psi^N == -1 pins it to exactly 2N.
    uint64_t psi = 0;
    for (uint64_t cand = 2; cand < p; ++cand) {
        uint64_t t = pow_mod(cand, (p - 1) / (2 * n), p);
        if (pow_mod(t, n, p) == p - 1) {
            psi = t;
            break;
        }
    }
    require(psi != 0, Status::internal, "make_ntt_tables: no primitive 2N-th root found");

    NttTables t;
    t.modulus = p;
    t.root = psi;
    t.degree_log2 = degree_log2;
    t.forward_twiddles.resize(n);
    t.forward_twiddles_shoup.resize(n);
    t.inverse_twiddles.resize(n);
    t.inverse_twiddles_shoup.resize(n);
    uint64_t psi_inv = inv_mod(psi, p);
    std::vector<uint64_t> pow_f(n), pow_i(n);
    pow_f[0] = 1;
    pow_i[0] = 1;
    for (uint64_t i = 1; i < n; ++i) {
        pow_f[i] = mul_mod(pow_f[i - 1], psi, p);
        pow_i[i] = mul_mod(pow_i[i - 1], psi_inv, p);
    }
    for (uint64_t i = 0; i < n; ++i) {
        uint64_t r = bit_reverse(static_cast<uint32_t>(i), degree_log2);
        t.forward_twiddles[i] = pow_f[r];
        t.inverse_twiddles[i] = pow_i[r];
        t.forward_twiddles_shoup[i] = shoup_precompute(pow_f[r], p);
        t.inverse_twiddles_shoup[i] = shoup_precompute(pow_i[r], p);
    }
    t.n_inverse = inv_mod(n % p, p);
    t.n_inverse_shoup = shoup_precompute(t.n_inverse, p);
    return t;
}

void ntt_forward_inplace(std::span<uint64_t> a, const NttTables& t) {
    const uint64_t p = t.modulus;
    const std::size_t n = t.degree();
    require(a.size() == n, Status::invalid_argument, "ntt_forward: length mismatch");
    std::size_t step = n;
    for (std::size_t m = 1; m < n; m <<= 1) {
        step >>= 1;
        for (std::size_t i = 0; i < m; ++i) {
            const uint64_t w = t.forward_twiddles[m + i];
            const uint64_t ws = t.forward_twiddles_shoup[m + i];
            uint64_t* x = a.data() + 2 * i * step;
            uint64_t* y = x + step;
            for (std::size_t j = 0; j < step; ++j) {
                uint64_t u = x[j];
                uint64_t v = mul_mod_shoup(y[j], w, ws, p);
                x[j] = add_mod(u, v, p);
                y[j] = sub_mod(u, v, p);
            }
        }
    }
}

void ntt_inverse_inplace(std::span<uint64_t> a, const NttTables& t) {
    const uint64_t p = t.modulus;
    const std::size_t n = t.degree();
    require(a.size() == n, Status::invalid_argument, "ntt_inverse: length mismatch");
    std::size_t step = 1;
    for (std::size_t m = n >> 1; m >= 1; m >>= 1) {
        for (std::size_t i = 0; i < m; ++i) {
            const uint64_t w = t.inverse_twiddles[m + i];
            const uint64_t ws = t.inverse_twiddles_shoup[m + i];
            uint64_t* x = a.data() + 2 * i * step;
            uint64_t* y = x + step;
            for (std::size_t j = 0; j < step; ++j) {
                uint64_t u = x[j];
                uint64_t v = y[j];
                x[j] = add_mod(u, v, p);
                y[j] = mul_mod_shoup(sub_mod(u, v, p), w, ws, p);
            }
        }
        step <<= 1;
    }
    for (std::size_t j = 0; j < n; ++j) {
        a[j] = mul_mod_shoup(a[j], t.n_inverse, t.n_inverse_shoup, p);
    }
}

std::vector<uint64_t> ntt_forward(const RingPoly& a, const NttTables& t) {
    require(a.modulus == t.modulus, Status::invalid_argument, "ntt_forward: modulus mismatch");
    require(a.degree_log2 == t.degree_log2, Status::invalid_argument, "ntt_forward: degree mismatch");
    std::vector<uint64_t> evals = a.coeffs;
    ntt_forward_inplace(evals, t);
    return evals;
}

RingPoly ntt_inverse(std::span<const uint64_t> evals, const NttTables& t) {
    require(evals.size() == t.degree(), Status::invalid_argument, "ntt_inverse: length mismatch");
    RingPoly out;
    out.modulus = t.modulus;
    out.degree_log2 = t.degree_log2;
    out.coeffs.assign(evals.begin(), evals.end());
    ntt_inverse_inplace(out.coeffs, t);
    return out;
}

RingPoly negacyclic_mul(const RingPoly& a, const RingPoly& b, const NttTables& t) {
    check_compatible(a, b);
    require(a.modulus == t.modulus && a.degree_log2 == t.degree_log2,
            Status::invalid_argument, "negacyclic_mul: tables mismatch");
    std::vector<uint64_t> ea = a.coeffs;
    std::vector<uint64_t> eb = b.coeffs;
    ntt_forward_inplace(ea, t);
    ntt_forward_inplace(eb, t);
    for (std::size_t i = 0; i < ea.size(); ++i) {
        ea[i] = mul_mod(ea[i], eb[i], t.modulus);
    }
    ntt_inverse_inplace(ea, t);
    RingPoly out;
    out.modulus = a.modulus;
    out.degree_log2 = a.degree_log2;
    out.coeffs = std::move(ea);
    return out;
}

RingPoly poly_add(const RingPoly& a, const RingPoly& b) {
    check_compatible(a, b);
    RingPoly out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        out.coeffs[i] = add_mod(out.coeffs[i], b.coeffs[i], a.modulus);
    }
    return out;
}

RingPoly poly_sub(const RingPoly& a, const RingPoly& b) {
    check_compatible(a, b);
    RingPoly out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        out.coeffs[i] = sub_mod(out.coeffs[i], b.coeffs[i], a.modulus);
    }
    return out;
}

RingPoly poly_scalar_mul(const RingPoly& a, uint64_t c) {
    RingPoly out = a;
    c %= a.modulus;
    for (auto& x : out.coeffs) x = mul_mod(x, c, a.modulus);
    return out;
}

RingPoly poly_negate(const RingPoly& a) {
    RingPoly out = a;
    for (auto& x : out.coeffs) x = x == 0 ? 0 : a.modulus - x;
    return out;
}

RingPoly sample_uniform(uint64_t p, uint32_t degree_log2, Rng& rng) {
    RingPoly out = make_zero_poly(p, degree_log2);
    // Rejection below the largest multiple of p to keep the draw unbiased.
    uint64_t bound = UINT64_MAX - UINT64_MAX % p;
    for (auto& c : out.coeffs) {
        uint64_t v = rng.next_u64();
        while (v >= bound) v = rng.next_u64();
        c = v % p;
    }
    return out;
}

std::vector<int8_t> sample_ternary(std::size_t n, Rng& rng) {
    std::vector<int8_t> out(n);
    for (auto& c : out) c = static_cast<int8_t>(rng.next_below(3)) - 1;
    return out;
}

std::vector<int8_t> sample_sparse_ternary(std::size_t n, std::size_t hamming_weight, Rng& rng) {
    require(hamming_weight <= n, Status::invalid_argument,
            "sample_sparse_ternary: weight exceeds length");
    std::vector<int8_t> out(n, 0);
    std::size_t placed = 0;
    while (placed < hamming_weight) {
        std::size_t pos = rng.next_below(n);
        if (out[pos] != 0) continue;
        out[pos] = rng.next_below(2) ? 1 : -1;
        ++placed;
    }
    return out;
}

std::vector<int64_t> sample_error(std::size_t n, double stddev, Rng& rng) {
    require(stddev > 0.0, Status::invalid_argument, "sample_error: stddev must be positive");
    std::vector<int64_t> out(n);
    for (auto& c : out) c = std::llround(rng.next_gaussian(stddev));
    return out;
}

namespace {
template <typename T>
RingPoly reduce_signed_impl(std::span<const T> coeffs, uint64_t p, uint32_t degree_log2) {
    require(coeffs.size() == (std::size_t{1} << degree_log2), Status::invalid_argument,
            "reduce_signed: length mismatch");
    RingPoly out = make_zero_poly(p, degree_log2);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        int64_t v = static_cast<int64_t>(coeffs[i]);
        int64_t r = v % static_cast<int64_t>(p);
        if (r < 0) r += static_cast<int64_t>(p);
        out.coeffs[i] = static_cast<uint64_t>(r);
    }
    return out;
}
}  // namespace

RingPoly reduce_signed(std::span<const int64_t> coeffs, uint64_t p, uint32_t degree_log2) {
    return reduce_signed_impl(coeffs, p, degree_log2);
}

RingPoly reduce_signed(std::span<const int8_t> coeffs, uint64_t p, uint32_t degree_log2) {
    return reduce_signed_impl(coeffs, p, degree_log2);
}

}  // namespace chelm::ring
