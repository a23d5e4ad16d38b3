#include <cmath>
#include <complex>

#include "chelm/ckks.hpp"
#include "chelm/error.hpp"

namespace chelm::ckks {

namespace {

using cplx = std::complex<double>;

void array_bit_reverse(std::vector<cplx>& v) {
    const std::size_t n = v.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
}

// Special FFT over the orbit of 5 mod 2N: slot j corresponds to evaluation at
// zeta^(5^j). Rotation by one slot is then exactly the X -> X^5 automorphism.
void fft_special(std::vector<cplx>& vals, const CkksContext& ctx) {
    const std::size_t size = vals.size();
    const std::size_t m = 2 * ctx.degree();
    const auto& rot = ctx.rot_group();
    const auto& ksi = ctx.root_powers();
    array_bit_reverse(vals);
    for (std::size_t len = 2; len <= size; len <<= 1) {
        for (std::size_t i = 0; i < size; i += len) {
            const std::size_t lenh = len >> 1;
            const std::size_t lenq = len << 2;
            for (std::size_t j = 0; j < lenh; ++j) {
                std::size_t idx = (rot[j] % lenq) * (m / lenq);
                cplx u = vals[i + j];
                cplx v = vals[i + j + lenh] * ksi[idx];
                vals[i + j] = u + v;
                vals[i + j + lenh] = u - v;
            }
        }
    }
}

void fft_special_inv(std::vector<cplx>& vals, const CkksContext& ctx) {
    const std::size_t size = vals.size();
    const std::size_t m = 2 * ctx.degree();
    const auto& rot = ctx.rot_group();
    const auto& ksi = ctx.root_powers();
    for (std::size_t len = size; len >= 2; len >>= 1) {
        for (std::size_t i = 0; i < size; i += len) {
            const std::size_t lenh = len >> 1;
            const std::size_t lenq = len << 2;
            for (std::size_t j = 0; j < lenh; ++j) {
                std::size_t idx = (lenq - (rot[j] % lenq)) * (m / lenq);
                cplx u = vals[i + j] + vals[i + j + lenh];
                cplx v = (vals[i + j] - vals[i + j + lenh]) * ksi[idx];
                vals[i + j] = u;
                vals[i + j + lenh] = v;
            }
        }
    }
    array_bit_reverse(vals);
    for (auto& v : vals) v /= static_cast<double>(size);
}

bool is_power_of_two_scale(double scale) {
    if (scale < 2.0 || !std::isfinite(scale)) return false;
    double l = std::log2(scale);
    return std::abs(l - std::round(l)) < 1e-12;
}

}  // namespace

PlaintextPoly encode_at(std::span<const double> values, double scale, int level,
                        const CkksContext& ctx) {
    require(values.size() <= ctx.slot_count(), Status::invalid_argument,
            "encode: more values than slots");
    require(scale > 1.0 && std::isfinite(scale), Status::invalid_argument,
            "encode: scale must exceed 1");
    require(level >= 0 && level <= ctx.max_level(), Status::invalid_argument,
            "encode: level out of range");

    const std::size_t nh = ctx.slot_count();
    std::vector<cplx> u(nh, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < values.size(); ++i) u[i] = cplx{values[i], 0.0};
    fft_special_inv(u, ctx);

    // Real parts fill the low coefficient half, imaginary parts the high half.
    const std::size_t n = ctx.degree();
    std::vector<int64_t> coeffs(n);
    for (std::size_t i = 0; i < nh; ++i) {
        coeffs[i] = std::llround(u[i].real() * scale);
        coeffs[i + nh] = std::llround(u[i].imag() * scale);
    }

    PlaintextPoly pt;
    pt.scale = scale;
    pt.level = level;
    for (int i = 0; i <= level; ++i) {
        pt.rns.push_back(ring::reduce_signed(std::span<const int64_t>(coeffs),
                                             ctx.modulus_chain()[i], ctx.degree_log2()));
    }
    return pt;
}

PlaintextPoly encode(std::span<const double> values, double scale, const CkksContext& ctx) {
    require(is_power_of_two_scale(scale), Status::invalid_argument,
            "encode: scale must be a power of two >= 2");
    // The first prime bounds the plaintext; leave headroom for one squaring.
    require(std::log2(scale) <= ctx.params().coeff_modulus_bits.front() - 1,
            Status::invalid_argument, "encode: scale too large for the first prime");
    return encode_at(values, scale, ctx.max_level(), ctx);
}

std::vector<double> decode(const PlaintextPoly& pt, const CkksContext& ctx) {
    require(!pt.rns.empty() && pt.scale > 0, Status::invalid_argument, "decode: empty plaintext");
    require(pt.level >= 0 && pt.level <= ctx.max_level() &&
                pt.rns.size() == static_cast<std::size_t>(pt.level) + 1,
            Status::invalid_argument, "decode: level inconsistent with residue count");

    const auto& crt = ctx.crt_level(pt.level);
    const std::size_t active = pt.rns.size();
    const std::size_t n = ctx.degree();
    const std::size_t nh = n / 2;

    // Recombine each coefficient over the active primes and center mod Q.
    std::vector<double> coeff(n);
    std::array<uint64_t, 8> acc{};
    for (std::size_t c = 0; c < n; ++c) {
        acc.fill(0);
        for (std::size_t i = 0; i < active; ++i) {
            uint64_t t = ring::mul_mod(pt.rns[i].coeffs[c], crt.punctured_inv[i],
                                       ctx.modulus_chain()[i]);
            unsigned __int128 carry = 0;
            for (std::size_t k = 0; k < acc.size(); ++k) {
                unsigned __int128 cur = static_cast<unsigned __int128>(crt.punctured[i][k]) * t +
                                        acc[k] + carry;
                acc[k] = static_cast<uint64_t>(cur);
                carry = cur >> 64;
            }
        }
        auto geq = [](const std::array<uint64_t, 8>& a, const std::array<uint64_t, 8>& b) {
            for (std::size_t k = a.size(); k-- > 0;) {
                if (a[k] != b[k]) return a[k] > b[k];
            }
            return true;
        };
        auto sub = [](std::array<uint64_t, 8>& a, const std::array<uint64_t, 8>& b) {
            uint64_t borrow = 0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                uint64_t t0 = a[k] - b[k];
                uint64_t borrow2 = (a[k] < b[k]) || (t0 < borrow);
                a[k] = t0 - borrow;
                borrow = borrow2;
            }
        };
        while (geq(acc, crt.modulus)) sub(acc, crt.modulus);
        bool negative = geq(acc, crt.half_modulus) && acc != crt.half_modulus;
        if (negative) {
            auto tmp = crt.modulus;
            sub(tmp, acc);
            acc = tmp;
        }
        double v = 0.0;
        for (std::size_t k = acc.size(); k-- > 0;) v = v * 18446744073709551616.0 + static_cast<double>(acc[k]);
        coeff[c] = negative ? -v : v;
    }

    std::vector<cplx> u(nh);
    for (std::size_t i = 0; i < nh; ++i) {
        u[i] = cplx{coeff[i] / pt.scale, coeff[i + nh] / pt.scale};
    }
    fft_special(u, ctx);
    std::vector<double> out(nh);
    for (std::size_t i = 0; i < nh; ++i) out[i] = u[i].real();
    return out;
}

}  // namespace chelm::ckks
