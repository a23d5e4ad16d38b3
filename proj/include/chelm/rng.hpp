#ifndef CHELM_RNG_HPP
#define CHELM_RNG_HPP

#include <cstdint>
#include <random>

namespace chelm {

// Deterministic randomness source. Every randomized operation takes an
// explicit Rng so that experiments replay bit-identically from a seed.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed ^ 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double next_unit() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    double next_gaussian(double stddev) {
        return std::normal_distribution<double>(0.0, stddev)(gen_);
    }

    uint64_t next_below(uint64_t bound) {
        return std::uniform_int_distribution<uint64_t>(0, bound - 1)(gen_);
    }

    // Derives an independent stream; used to give parallel experiment arms
    // their own generators without sharing mutable state.
    Rng fork(uint64_t stream) {
        uint64_t mixed = gen_() ^ (stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL);
        return Rng(mixed);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace chelm

#endif
