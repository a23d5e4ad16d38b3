#ifndef CHELM_CKKS_HPP
#define CHELM_CKKS_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "chelm/ring.hpp"
#include "chelm/rng.hpp"

namespace chelm::ckks {

// One ring element in RNS form: one residue polynomial per prime.
using RnsPoly = std::vector<ring::RingPoly>;

struct CkksParams {
    uint32_t degree_log2 = 13;
    // Bit sizes of the modulus chain: first prime, intermediates, and a final
    // special prime reserved for key switching. The intermediates are the
    // rescale budget.
    std::vector<uint32_t> coeff_modulus_bits = {40, 21, 21, 21, 21, 21, 21, 40};
    uint32_t scale_bits = 21;
    double error_stddev = 3.2;
    // Sparse ternary secret weight. Together with encrypting at the raised
    // modulus this keeps fresh-ciphertext noise at the rounding floor.
    uint32_t secret_hamming_weight = 64;

    // Table 5-style settings from the reproduced experiments.
    static CkksParams paper_profile();
    // Small ring for CI; explicitly not a security-bearing configuration.
    static CkksParams test_profile();

    void validate() const;
    uint64_t hash() const;
    double scale() const { return std::ldexp(1.0, static_cast<int>(scale_bits)); }
};

// Immutable after construction; shareable across threads.
class CkksContext {
  public:
    static CkksContext create(const CkksParams& params);

    const CkksParams& params() const { return params_; }
    uint32_t degree_log2() const { return params_.degree_log2; }
    std::size_t degree() const { return std::size_t{1} << params_.degree_log2; }
    std::size_t slot_count() const { return degree() / 2; }

    // Data primes are q_0..q_L; the special prime sits at index L+1.
    const std::vector<uint64_t>& modulus_chain() const { return modulus_chain_; }
    std::size_t data_prime_count() const { return modulus_chain_.size() - 1; }
    uint64_t special_prime() const { return modulus_chain_.back(); }
    const ring::NttTables& tables(std::size_t prime_index) const { return tables_[prime_index]; }

    // Highest level of a fresh ciphertext == number of rescales available
    // == count of intermediate primes.
    int max_level() const { return static_cast<int>(data_prime_count()) - 1; }

    uint64_t params_hash() const { return params_hash_; }
    bool security_budget_enforced() const { return budget_enforced_; }

    // canonical-embedding tables
    const std::vector<std::complex<double>>& root_powers() const { return root_powers_; }
    const std::vector<uint32_t>& rot_group() const { return rot_group_; }

    // CRT recombination data for decoding at a given level.
    struct CrtLevel {
        std::vector<std::array<uint64_t, 8>> punctured;  // Q_l / q_i as little-endian limbs
        std::vector<uint64_t> punctured_inv;             // (Q_l/q_i)^-1 mod q_i
        std::array<uint64_t, 8> modulus;                 // Q_l
        std::array<uint64_t, 8> half_modulus;            // Q_l / 2
    };
    const CrtLevel& crt_level(int level) const { return crt_levels_.at(level); }

    // inv(q_i mod q_j) for i != j; used by rescale and key-switch mod-down.
    uint64_t prime_inv_mod(std::size_t i, std::size_t j) const {
        return prime_inv_mod_[i * modulus_chain_.size() + j];
    }

  private:
    CkksContext() = default;

    CkksParams params_;
    std::vector<uint64_t> modulus_chain_;
    std::vector<ring::NttTables> tables_;
    std::vector<std::complex<double>> root_powers_;
    std::vector<uint32_t> rot_group_;
    std::vector<CrtLevel> crt_levels_;
    std::vector<uint64_t> prime_inv_mod_;
    uint64_t params_hash_ = 0;
    bool budget_enforced_ = false;
};

// Encoded vector: residues over the active data primes of its level.
struct PlaintextPoly {
    RnsPoly rns;
    double scale = 0.0;
    int level = 0;
};

struct Ciphertext {
    std::vector<RnsPoly> parts;  // 2 normally, 3 transiently inside multiply
    double scale = 0.0;
    int level = 0;

    std::size_t size() const { return parts.size(); }
};

struct SecretKey {
    std::vector<int8_t> coeffs;                     // ternary
    std::vector<std::vector<uint64_t>> ntt;         // per prime, evaluation domain
    std::vector<std::vector<uint64_t>> squared_ntt; // s^2 per prime
    uint64_t params_hash = 0;
};

// Key-switching key: one (b, a) RLWE row per (source prime, digit). Rows are
// stored in evaluation domain over the full chain including the special prime.
struct KswKey {
    struct Entry {
        std::vector<std::vector<uint64_t>> b;
        std::vector<std::vector<uint64_t>> a;
    };
    std::vector<std::vector<Entry>> rows;  // [source prime][digit]
    uint64_t galois_elt = 0;               // 0 for the relinearization key
};

struct PublicKeySet {
    std::array<std::vector<std::vector<uint64_t>>, 2> pk;  // [part][prime] evals
    KswKey relin;
    std::map<uint32_t, KswKey> rotation;  // power-of-two step -> key
    uint64_t params_hash = 0;

    bool has_rotation(uint32_t step) const { return rotation.count(step) != 0; }
};

struct KeySet {
    SecretKey secret;
    PublicKeySet pub;
};

KeySet keygen(const CkksContext& ctx, Rng& rng);

// --- encode / decode ---

// Public contract: scale is a power of two >= 2 and bounded by the first
// prime. Values shorter than slot_count are zero-padded.
PlaintextPoly encode(std::span<const double> values, double scale, const CkksContext& ctx);
// Evaluator-internal variant: arbitrary positive scale, arbitrary level.
// Exact-scale constants keep every addition in a circuit scale-matched.
PlaintextPoly encode_at(std::span<const double> values, double scale, int level,
                        const CkksContext& ctx);
std::vector<double> decode(const PlaintextPoly& pt, const CkksContext& ctx);

// --- encrypt / decrypt ---

// Encryption runs at the raised modulus Q*P and scales down by the special
// prime, so fresh noise lands at the rounding floor rather than sigma*N.
Ciphertext encrypt(const PlaintextPoly& pt, const PublicKeySet& pub, const CkksContext& ctx,
                   Rng& rng);
PlaintextPoly decrypt(const Ciphertext& ct, const SecretKey& sk, const CkksContext& ctx);

// --- evaluator ---
// All operations are pure: inputs are never mutated.

Ciphertext add_ct(const Ciphertext& a, const Ciphertext& b, const CkksContext& ctx);
Ciphertext sub_ct(const Ciphertext& a, const Ciphertext& b, const CkksContext& ctx);
Ciphertext add_plain(const Ciphertext& a, const PlaintextPoly& pt, const CkksContext& ctx);
Ciphertext mul_plain(const Ciphertext& a, const PlaintextPoly& pt, const CkksContext& ctx);
// Returns a relinearized (2-part) ciphertext at scale a.scale*b.scale.
Ciphertext mul_ct(const Ciphertext& a, const Ciphertext& b, const KswKey& relin_key,
                  const CkksContext& ctx);
// Drops the top prime and divides the scale by it; throws level_exhausted at
// level 0.
Ciphertext rescale(const Ciphertext& a, const CkksContext& ctx);
Ciphertext mod_switch_to(const Ciphertext& a, int level, const CkksContext& ctx);
PlaintextPoly mod_switch_to(const PlaintextPoly& pt, int level, const CkksContext& ctx);

// Cyclic left rotation of the slot vector by k; arbitrary k composes from the
// power-of-two keys.
Ciphertext rotate(const Ciphertext& a, std::size_t k, const PublicKeySet& keys,
                  const CkksContext& ctx);
// Rotate-and-add ladder. Exact when slots n..next_pow2(n) are zero; with
// n == slot_count the total lands replicated in every slot.
Ciphertext sum_slots(const Ciphertext& a, std::size_t n, const PublicKeySet& keys,
                     const CkksContext& ctx);
// Slot 0 (and, by full-ladder replication, every slot) decrypts to <a, b>.
// Consumes exactly one level.
Ciphertext dot_product(const Ciphertext& a, const Ciphertext& b, std::size_t n,
                       const PublicKeySet& keys, const CkksContext& ctx);

// --- serialization (length-prefixed binary; bit-exact across runs) ---

void save_ciphertext(const Ciphertext& ct, std::ostream& os, const CkksContext& ctx);
Ciphertext load_ciphertext(std::istream& is, const CkksContext& ctx);
void save_public_keys(const PublicKeySet& keys, std::ostream& os, const CkksContext& ctx);
PublicKeySet load_public_keys(std::istream& is, const CkksContext& ctx);
// Secret material is deliberately kept out of the public bundle format.
void save_secret_key(const SecretKey& sk, std::ostream& os, const CkksContext& ctx);
SecretKey load_secret_key(std::istream& is, const CkksContext& ctx);

void save_ciphertext_file(const Ciphertext& ct, const std::string& path, const CkksContext& ctx);
Ciphertext load_ciphertext_file(const std::string& path, const CkksContext& ctx);
void save_public_keys_file(const PublicKeySet& keys, const std::string& path, const CkksContext& ctx);
PublicKeySet load_public_keys_file(const std::string& path, const CkksContext& ctx);
void save_secret_key_file(const SecretKey& sk, const std::string& path, const CkksContext& ctx);
SecretKey load_secret_key_file(const std::string& path, const CkksContext& ctx);

}  // namespace chelm::ckks

#endif
