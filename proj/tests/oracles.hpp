// Independent reference implementations used only by tests. These stay
// deliberately naive so that they cannot share a bug with the fast paths
// they check.
#ifndef CHELM_TESTS_ORACLES_HPP
#define CHELM_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracles {

// O(N^2) negacyclic convolution: c_k = sum_{i+j=k} a_i b_j - sum_{i+j=k+N} a_i b_j.
inline std::vector<uint64_t> schoolbook_negacyclic(const std::vector<uint64_t>& a,
                                                   const std::vector<uint64_t>& b,
                                                   uint64_t p) {
    const std::size_t n = a.size();
    std::vector<uint64_t> c(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            unsigned __int128 prod = static_cast<unsigned __int128>(a[i]) * b[j] % p;
            std::size_t k = i + j;
            if (k < n) {
                c[k] = static_cast<uint64_t>((c[k] + prod) % p);
            } else {
                uint64_t q = static_cast<uint64_t>(prod);
                c[k - n] = c[k - n] >= q ? c[k - n] - q : c[k - n] + p - q;
            }
        }
    }
    return c;
}

// Trial-division primality, for cross-checking the Miller-Rabin path.
inline bool slow_is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

inline double reference_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace oracles

#endif
