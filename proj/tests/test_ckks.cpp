#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chelm/ckks.hpp"
#include "chelm/error.hpp"

using namespace chelm;
using namespace chelm::ckks;

namespace {

// Small ring with generous precision for unit tests; not a security setting.
CkksParams unit_params() {
    CkksParams p;
    p.degree_log2 = 8;  // N=256, 128 slots
    p.coeff_modulus_bits = {40, 30, 30, 30, 40};
    p.scale_bits = 30;
    return p;
}

const CkksContext& unit_ctx() {
    static CkksContext ctx = CkksContext::create(unit_params());
    return ctx;
}

const KeySet& unit_keys() {
    static KeySet keys = [] {
        Rng rng(99);
        return keygen(unit_ctx(), rng);
    }();
    return keys;
}

std::vector<double> roundtrip(const std::vector<double>& v, double scale) {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    Rng rng(5);
    auto ct = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
    return decode(decrypt(ct, keys.secret, ctx), ctx);
}

double max_abs_diff(const std::vector<double>& got, const std::vector<double>& want) {
    double m = 0;
    for (std::size_t i = 0; i < want.size(); ++i) m = std::max(m, std::abs(got[i] - want[i]));
    return m;
}

}  // namespace

TEST_CASE("context accepts paper parameters and rejects an oversized budget") {
    auto ctx = CkksContext::create(CkksParams::paper_profile());
    CHECK(ctx.degree() == 8192);
    CHECK(ctx.slot_count() == 4096);
    CHECK(ctx.max_level() == 6);
    CHECK(ctx.modulus_chain().size() == 8);
    for (uint64_t p : ctx.modulus_chain()) {
        CHECK(p % (2 * 8192) == 1);
    }
    // distinct primes
    for (std::size_t i = 0; i < ctx.modulus_chain().size(); ++i) {
        for (std::size_t j = i + 1; j < ctx.modulus_chain().size(); ++j) {
            CHECK(ctx.modulus_chain()[i] != ctx.modulus_chain()[j]);
        }
    }
    CHECK(ctx.security_budget_enforced());

    CkksParams over;
    over.degree_log2 = 13;
    over.coeff_modulus_bits = {60, 60, 60, 60};
    over.scale_bits = 21;
    CHECK_THROWS_AS(CkksContext::create(over), Error);
}

TEST_CASE("tiny test context builds") {
    CkksParams p;
    p.degree_log2 = 4;
    p.coeff_modulus_bits = {30, 20, 30};
    p.scale_bits = 20;
    p.secret_hamming_weight = 4;
    auto ctx = CkksContext::create(p);
    CHECK(ctx.max_level() == 1);
    CHECK(ctx.slot_count() == 8);
    CHECK_FALSE(ctx.security_budget_enforced());
    for (uint64_t q : ctx.modulus_chain()) CHECK(q % 32 == 1);
}

TEST_CASE("encode/decode roundtrip") {
    const auto& ctx = unit_ctx();
    double scale = ctx.params().scale();

    SUBCASE("all zeros stay exactly zero") {
        std::vector<double> z(ctx.slot_count(), 0.0);
        auto out = decode(encode(z, scale, ctx), ctx);
        for (double v : out) CHECK(std::abs(v) < std::ldexp(1.0, -15));
    }
    SUBCASE("short vectors are zero padded and recovered") {
        std::vector<double> v = {0.5, -1.25, 3.0};
        auto out = decode(encode(v, scale, ctx), ctx);
        CHECK(max_abs_diff({out[0], out[1], out[2]}, v) < std::ldexp(1.0, -10));
        for (std::size_t i = 3; i < out.size(); ++i) CHECK(std::abs(out[i]) < 1e-6);
    }
    SUBCASE("plaintext addition is linear") {
        std::vector<double> v(ctx.slot_count()), w(ctx.slot_count());
        Rng rng(3);
        for (auto& x : v) x = 2.0 * rng.next_unit() - 1.0;
        for (auto& x : w) x = 2.0 * rng.next_unit() - 1.0;
        auto pv = encode(v, scale, ctx);
        auto pw = encode(w, scale, ctx);
        PlaintextPoly sum = pv;
        for (std::size_t i = 0; i < sum.rns.size(); ++i) {
            sum.rns[i] = ring::poly_add(pv.rns[i], pw.rns[i]);
        }
        auto out = decode(sum, ctx);
        std::vector<double> want(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) want[i] = v[i] + w[i];
        CHECK(max_abs_diff(out, want) < std::ldexp(1.0, -12));
    }
    SUBCASE("validation") {
        std::vector<double> too_long(ctx.slot_count() + 1, 0.0);
        CHECK_THROWS_AS(encode(too_long, scale, ctx), Error);
        CHECK_THROWS_AS(encode(std::vector<double>{1.0}, 3.0, ctx), Error);      // not a power of two
        CHECK_THROWS_AS(encode(std::vector<double>{1.0}, std::ldexp(1.0, 45), ctx), Error);
    }
}

TEST_CASE("paper-scale encode/decode at delta 2^21") {
    auto ctx = CkksContext::create(CkksParams::paper_profile());
    std::vector<double> v = {0.5, -1.25, 3.0};
    auto out = decode(encode(v, std::ldexp(1.0, 21), ctx), ctx);
    CHECK(max_abs_diff({out[0], out[1], out[2]}, v) < std::ldexp(1.0, -10));
}

TEST_CASE("keygen properties") {
    const auto& ctx = unit_ctx();
    Rng r1(1), r2(2);
    auto k1 = keygen(ctx, r1);
    auto k2 = keygen(ctx, r2);
    CHECK(k1.secret.coeffs != k2.secret.coeffs);

    // rotation keys cover {1, 2, 4, ..., slot_count/2}
    for (std::size_t step = 1; step <= ctx.slot_count() / 2; step <<= 1) {
        CHECK(k1.pub.has_rotation(static_cast<uint32_t>(step)));
    }
    CHECK(k1.pub.rotation.size() == static_cast<std::size_t>(std::log2(ctx.slot_count())));
}

TEST_CASE("encrypt/decrypt") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();

    SUBCASE("roundtrip accuracy") {
        std::vector<double> v(ctx.slot_count());
        Rng rng(17);
        for (auto& x : v) x = 2.0 * rng.next_unit() - 1.0;
        auto out = roundtrip(v, scale);
        CHECK(max_abs_diff(out, v) < std::ldexp(1.0, -10));
    }
    SUBCASE("encryption is randomized") {
        Rng rng(23);
        auto pt = encode(std::vector<double>{1.0}, scale, ctx);
        auto c1 = encrypt(pt, keys.pub, ctx, rng);
        auto c2 = encrypt(pt, keys.pub, ctx, rng);
        CHECK(c1.parts[0][0].coeffs != c2.parts[0][0].coeffs);
    }
    SUBCASE("wrong key decrypts to garbage, loudly") {
        Rng rng(29), other(31);
        auto wrong = keygen(ctx, other);
        auto pt = encode(std::vector<double>{1.0}, scale, ctx);
        auto ct = encrypt(pt, keys.pub, ctx, rng);
        auto out = decode(decrypt(ct, wrong.secret, ctx), ctx);
        CHECK(std::abs(out[0] - 1.0) > 1.0);
    }
}

TEST_CASE("additive homomorphism") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();
    Rng rng(41);

    SUBCASE("example: [1,2] + [3,4]") {
        auto a = encrypt(encode(std::vector<double>{1, 2}, scale, ctx), keys.pub, ctx, rng);
        auto b = encrypt(encode(std::vector<double>{3, 4}, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(add_ct(a, b, ctx), keys.secret, ctx), ctx);
        CHECK(max_abs_diff({out[0], out[1]}, {4, 6}) < std::ldexp(1.0, -8));
    }
    SUBCASE("adding encrypted zero is the identity") {
        std::vector<double> v = {0.25, -0.75, 0.5};
        auto a = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        auto z = encrypt(encode(std::vector<double>{}, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(add_ct(a, z, ctx), keys.secret, ctx), ctx);
        CHECK(max_abs_diff({out[0], out[1], out[2]}, v) < std::ldexp(1.0, -8));
    }
    SUBCASE("random vectors stay within 2^-8") {
        std::vector<double> v(64), w(64);
        for (auto& x : v) x = 2.0 * rng.next_unit() - 1.0;
        for (auto& x : w) x = 2.0 * rng.next_unit() - 1.0;
        auto a = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        auto b = encrypt(encode(w, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(add_ct(a, b, ctx), keys.secret, ctx), ctx);
        std::vector<double> want(64);
        for (int i = 0; i < 64; ++i) want[i] = v[i] + w[i];
        CHECK(max_abs_diff(out, want) < std::ldexp(1.0, -8));
    }
    SUBCASE("scale mismatch is rejected") {
        auto a = encrypt(encode(std::vector<double>{1}, scale, ctx), keys.pub, ctx, rng);
        auto b = encrypt(encode(std::vector<double>{1}, scale / 2, ctx), keys.pub, ctx, rng);
        CHECK_THROWS_AS(add_ct(a, b, ctx), Error);
    }
}

TEST_CASE("multiplication, relinearization and rescaling") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();
    Rng rng(53);

    SUBCASE("0.5 * 0.5 = 0.25") {
        auto a = encrypt(encode(std::vector<double>{0.5}, scale, ctx), keys.pub, ctx, rng);
        auto prod = mul_ct(a, a, keys.pub.relin, ctx);
        CHECK(prod.size() == 2);  // relinearized before return
        CHECK(prod.scale == doctest::Approx(scale * scale));
        auto res = rescale(prod, ctx);
        CHECK(res.level == a.level - 1);
        auto out = decode(decrypt(res, keys.secret, ctx), ctx);
        CHECK(std::abs(out[0] - 0.25) < std::ldexp(1.0, -6));
    }
    SUBCASE("multiplying by an encoded one is the identity") {
        std::vector<double> v = {0.1, -0.9, 0.33};
        auto a = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        std::vector<double> ones(ctx.slot_count(), 1.0);
        auto res = rescale(mul_plain(a, encode(ones, scale, ctx), ctx), ctx);
        auto out = decode(decrypt(res, keys.secret, ctx), ctx);
        CHECK(max_abs_diff({out[0], out[1], out[2]}, v) < std::ldexp(1.0, -6));
    }
    SUBCASE("random products stay within 2^-6") {
        std::vector<double> v(32), w(32);
        for (auto& x : v) x = 2.0 * rng.next_unit() - 1.0;
        for (auto& x : w) x = 2.0 * rng.next_unit() - 1.0;
        auto a = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        auto b = encrypt(encode(w, scale, ctx), keys.pub, ctx, rng);
        auto res = rescale(mul_ct(a, b, keys.pub.relin, ctx), ctx);
        auto out = decode(decrypt(res, keys.secret, ctx), ctx);
        std::vector<double> want(32);
        for (int i = 0; i < 32; ++i) want[i] = v[i] * w[i];
        CHECK(max_abs_diff(out, want) < std::ldexp(1.0, -6));
    }
    SUBCASE("rescale tracks the dropped prime exactly") {
        auto a = encrypt(encode(std::vector<double>{0.5}, scale, ctx), keys.pub, ctx, rng);
        auto prod = mul_ct(a, a, keys.pub.relin, ctx);
        auto res = rescale(prod, ctx);
        uint64_t dropped = ctx.modulus_chain()[a.level];
        CHECK(res.scale == prod.scale / static_cast<double>(dropped));
        CHECK(res.level == a.level - 1);
    }
}

TEST_CASE("depth capacity equals the intermediate prime count") {
    auto ctx = CkksContext::create(CkksParams::test_profile());
    Rng rng(61);
    auto keys = keygen(ctx, rng);
    double scale = ctx.params().scale();

    auto ct = encrypt(encode(std::vector<double>{1.0}, scale, ctx), keys.pub, ctx, rng);
    CHECK(ct.level == 6);
    for (int i = 0; i < 6; ++i) {
        auto pt = encode_at(std::vector<double>{1.0}, scale, ct.level, ctx);
        ct = rescale(mul_plain(ct, pt, ctx), ctx);
    }
    CHECK(ct.level == 0);
    auto out = decode(decrypt(ct, keys.secret, ctx), ctx);
    CHECK(std::abs(out[0] - 1.0) < 0.1);  // six rescales of drifted scale, still ~1

    auto pt = encode_at(std::vector<double>{1.0}, scale, ct.level, ctx);
    auto stuck = mul_plain(ct, pt, ctx);
    CHECK_THROWS_AS(rescale(stuck, ctx), Error);
    try {
        rescale(stuck, ctx);
    } catch (const Error& e) {
        CHECK(e.status() == Status::level_exhausted);
    }
}

TEST_CASE("rotation and slot sums") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();
    Rng rng(71);

    SUBCASE("rotate by one brings slot 1 into slot 0") {
        std::vector<double> v(ctx.slot_count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
        auto ct = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(rotate(ct, 1, keys.pub, ctx), keys.secret, ctx), ctx);
        CHECK(std::abs(out[0] - 2.0) < std::ldexp(1.0, -6));
        CHECK(std::abs(out.back() - 1.0) < std::ldexp(1.0, -6));  // cyclic wrap
    }
    SUBCASE("composite rotation steps") {
        std::vector<double> v(ctx.slot_count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
        auto ct = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(rotate(ct, 5, keys.pub, ctx), keys.secret, ctx), ctx);
        CHECK(std::abs(out[0] - 5.0) < std::ldexp(1.0, -5));
    }
    SUBCASE("sum of the first four slots") {
        auto ct = encrypt(encode(std::vector<double>{1, 2, 3, 4}, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(sum_slots(ct, 4, keys.pub, ctx), keys.secret, ctx), ctx);
        CHECK(std::abs(out[0] - 10.0) < std::ldexp(1.0, -6));
    }
    SUBCASE("sum of 64 random slots matches the plaintext sum") {
        std::vector<double> v(64);
        double total = 0;
        for (auto& x : v) {
            x = 2.0 * rng.next_unit() - 1.0;
            total += x;
        }
        auto ct = encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
        auto out = decode(decrypt(sum_slots(ct, 64, keys.pub, ctx), keys.secret, ctx), ctx);
        CHECK(std::abs(out[0] - total) < std::ldexp(1.0, -6));
    }
    SUBCASE("missing key is reported") {
        PublicKeySet stripped = keys.pub;
        stripped.rotation.erase(1);
        auto ct = encrypt(encode(std::vector<double>{1, 2}, scale, ctx), keys.pub, ctx, rng);
        CHECK_THROWS_AS(rotate(ct, 1, stripped, ctx), Error);
    }
}

TEST_CASE("dot products") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();
    Rng rng(83);

    auto enc = [&](const std::vector<double>& v) {
        return encrypt(encode(v, scale, ctx), keys.pub, ctx, rng);
    };

    SUBCASE("orthogonal vectors") {
        auto out = decode(
            decrypt(dot_product(enc({1, 0}), enc({0, 1}), 2, keys.pub, ctx), keys.secret, ctx),
            ctx);
        CHECK(std::abs(out[0]) < std::ldexp(1.0, -6));
    }
    SUBCASE("<[1,2,3],[4,5,6]> = 32") {
        auto ct = dot_product(enc({1, 2, 3}), enc({4, 5, 6}), 3, keys.pub, ctx);
        CHECK(ct.level == unit_ctx().max_level() - 1);  // exactly one level consumed
        auto out = decode(decrypt(ct, keys.secret, ctx), ctx);
        CHECK(std::abs(out[0] - 32.0) < std::ldexp(1.0, -5));
        // full ladder replicates the result across slots
        CHECK(std::abs(out[7] - 32.0) < std::ldexp(1.0, -5));
    }
    SUBCASE("random length-9 vectors in [-3,3]") {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> v(9), w(9);
            double want = 0;
            for (int i = 0; i < 9; ++i) {
                v[i] = 6.0 * rng.next_unit() - 3.0;
                w[i] = 6.0 * rng.next_unit() - 3.0;
                want += v[i] * w[i];
            }
            auto out = decode(
                decrypt(dot_product(enc(v), enc(w), 9, keys.pub, ctx), keys.secret, ctx), ctx);
            CHECK(std::abs(out[0] - want) < std::ldexp(1.0, -5));
        }
    }
}

TEST_CASE("level alignment on add") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();
    Rng rng(91);

    auto a = encrypt(encode(std::vector<double>{0.5}, scale, ctx), keys.pub, ctx, rng);
    auto b = encrypt(encode(std::vector<double>{0.25}, scale, ctx), keys.pub, ctx, rng);
    auto low = mod_switch_to(a, a.level - 2, ctx);
    auto sum = add_ct(low, b, ctx);  // b switched down automatically
    CHECK(sum.level == a.level - 2);
    auto out = decode(decrypt(sum, keys.secret, ctx), ctx);
    CHECK(std::abs(out[0] - 0.75) < std::ldexp(1.0, -8));
}

TEST_CASE("serialization is bit exact and separates secret material") {
    const auto& ctx = unit_ctx();
    const auto& keys = unit_keys();
    double scale = ctx.params().scale();
    Rng rng(97);

    auto ct = encrypt(encode(std::vector<double>{0.5, -0.5}, scale, ctx), keys.pub, ctx, rng);

    std::stringstream s1, s2;
    save_ciphertext(ct, s1, ctx);
    auto back = load_ciphertext(s1, ctx);
    CHECK(back.scale == ct.scale);
    CHECK(back.level == ct.level);
    CHECK(back.parts[0][0].coeffs == ct.parts[0][0].coeffs);
    save_ciphertext(back, s2, ctx);
    CHECK(s1.str() == s2.str());

    std::stringstream pub_stream;
    save_public_keys(keys.pub, pub_stream, ctx);
    auto pub2 = load_public_keys(pub_stream, ctx);
    // a freshly loaded public bundle still encrypts; the original secret decrypts
    auto ct2 = encrypt(encode(std::vector<double>{0.125}, scale, ctx), pub2, ctx, rng);
    auto out = decode(decrypt(ct2, keys.secret, ctx), ctx);
    CHECK(std::abs(out[0] - 0.125) < std::ldexp(1.0, -10));

    std::stringstream sk_stream;
    save_secret_key(keys.secret, sk_stream, ctx);
    auto sk2 = load_secret_key(sk_stream, ctx);
    CHECK(sk2.coeffs == keys.secret.coeffs);

    // a ciphertext stream does not parse as a key bundle
    std::stringstream s3;
    save_ciphertext(ct, s3, ctx);
    CHECK_THROWS_AS(load_public_keys(s3, ctx), Error);
}
