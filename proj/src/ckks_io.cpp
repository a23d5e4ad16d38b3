#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "chelm/ckks.hpp"
#include "chelm/error.hpp"
#include "ckks_internal.hpp"

namespace chelm::ckks {

namespace {

constexpr char kMagic[4] = {'C', 'H', 'L', 'M'};
constexpr uint8_t kVersion = 1;
enum class Kind : uint8_t { ciphertext = 1, plaintext = 2, public_keys = 3, secret_key = 4 };

void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    require(os.good(), Status::io_error, "serialize: write failed");
}

void read_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    require(is.good(), Status::io_error, "serialize: unexpected end of stream");
}

void write_u8(std::ostream& os, uint8_t v) { write_bytes(os, &v, 1); }
void write_u32(std::ostream& os, uint32_t v) {
    uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    write_bytes(os, b, 4);
}
void write_u64(std::ostream& os, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    write_bytes(os, b, 8);
}
void write_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}
uint8_t read_u8(std::istream& is) {
    uint8_t v;
    read_bytes(is, &v, 1);
    return v;
}
uint32_t read_u32(std::istream& is) {
    uint8_t b[4];
    read_bytes(is, b, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}
uint64_t read_u64(std::istream& is) {
    uint8_t b[8];
    read_bytes(is, b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}
double read_f64(std::istream& is) {
    uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_header(std::ostream& os, Kind kind, const CkksContext& ctx) {
    write_bytes(os, kMagic, 4);
    write_u8(os, kVersion);
    write_u8(os, static_cast<uint8_t>(kind));
    write_u64(os, ctx.params_hash());
}

void read_header(std::istream& is, Kind expected, const CkksContext& ctx) {
    char magic[4];
    read_bytes(is, magic, 4);
    require(std::memcmp(magic, kMagic, 4) == 0, Status::parse_error,
            "serialize: bad magic");
    require(read_u8(is) == kVersion, Status::parse_error, "serialize: unsupported version");
    require(read_u8(is) == static_cast<uint8_t>(expected), Status::parse_error,
            "serialize: unexpected object kind");
    require(read_u64(is) == ctx.params_hash(), Status::invalid_argument,
            "serialize: parameter hash mismatch with context");
}

void write_residues(std::ostream& os, const std::vector<uint64_t>& v) {
    for (uint64_t x : v) write_u64(os, x);
}

std::vector<uint64_t> read_residues(std::istream& is, std::size_t n) {
    std::vector<uint64_t> v(n);
    for (auto& x : v) x = read_u64(is);
    return v;
}

void write_rns(std::ostream& os, const RnsPoly& p) {
    write_u32(os, static_cast<uint32_t>(p.size()));
    for (const auto& row : p) write_residues(os, row.coeffs);
}

RnsPoly read_rns(std::istream& is, const CkksContext& ctx) {
    uint32_t count = read_u32(is);
    require(count >= 1 && count <= ctx.modulus_chain().size(), Status::parse_error,
            "serialize: residue row count out of range");
    RnsPoly out;
    for (uint32_t i = 0; i < count; ++i) {
        ring::RingPoly r;
        r.modulus = ctx.modulus_chain()[i];
        r.degree_log2 = ctx.degree_log2();
        r.coeffs = read_residues(is, ctx.degree());
        for (uint64_t c : r.coeffs) {
            require(c < r.modulus, Status::parse_error, "serialize: residue out of range");
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_eval_rows(std::ostream& os, const std::vector<std::vector<uint64_t>>& rows) {
    write_u32(os, static_cast<uint32_t>(rows.size()));
    for (const auto& row : rows) write_residues(os, row);
}

std::vector<std::vector<uint64_t>> read_eval_rows(std::istream& is, const CkksContext& ctx) {
    uint32_t count = read_u32(is);
    require(count == ctx.modulus_chain().size(), Status::parse_error,
            "serialize: key rows must span the full chain");
    std::vector<std::vector<uint64_t>> rows(count);
    for (auto& row : rows) row = read_residues(is, ctx.degree());
    return rows;
}

void write_ksw(std::ostream& os, const KswKey& key) {
    write_u64(os, key.galois_elt);
    write_u32(os, static_cast<uint32_t>(key.rows.size()));
    for (const auto& digits : key.rows) {
        write_u32(os, static_cast<uint32_t>(digits.size()));
        for (const auto& entry : digits) {
            write_eval_rows(os, entry.b);
            write_eval_rows(os, entry.a);
        }
    }
}

KswKey read_ksw(std::istream& is, const CkksContext& ctx) {
    KswKey key;
    key.galois_elt = read_u64(is);
    uint32_t rows = read_u32(is);
    require(rows == ctx.data_prime_count(), Status::parse_error,
            "serialize: key switching rows mismatch");
    key.rows.resize(rows);
    for (auto& digits : key.rows) {
        uint32_t dc = read_u32(is);
        require(dc >= 1 && dc <= 4, Status::parse_error, "serialize: digit count out of range");
        for (uint32_t k = 0; k < dc; ++k) {
            KswKey::Entry e;
            e.b = read_eval_rows(is, ctx);
            e.a = read_eval_rows(is, ctx);
            digits.push_back(std::move(e));
        }
    }
    return key;
}

}  // namespace

void save_ciphertext(const Ciphertext& ct, std::ostream& os, const CkksContext& ctx) {
    write_header(os, Kind::ciphertext, ctx);
    write_u32(os, ctx.degree_log2());
    write_u32(os, static_cast<uint32_t>(ct.level));
    write_f64(os, ct.scale);
    write_u8(os, static_cast<uint8_t>(ct.size()));
    for (const auto& part : ct.parts) write_rns(os, part);
}

Ciphertext load_ciphertext(std::istream& is, const CkksContext& ctx) {
    read_header(is, Kind::ciphertext, ctx);
    require(read_u32(is) == ctx.degree_log2(), Status::parse_error,
            "serialize: ring degree mismatch");
    Ciphertext ct;
    ct.level = static_cast<int>(read_u32(is));
    ct.scale = read_f64(is);
    uint8_t parts = read_u8(is);
    require(parts == 2 || parts == 3, Status::parse_error, "serialize: bad part count");
    for (uint8_t p = 0; p < parts; ++p) ct.parts.push_back(read_rns(is, ctx));
    require(ct.level >= 0 && ct.level <= ctx.max_level() &&
                ct.parts[0].size() == static_cast<std::size_t>(ct.level) + 1,
            Status::parse_error, "serialize: ciphertext level inconsistent");
    return ct;
}

void save_public_keys(const PublicKeySet& keys, std::ostream& os, const CkksContext& ctx) {
    write_header(os, Kind::public_keys, ctx);
    write_eval_rows(os, keys.pk[0]);
    write_eval_rows(os, keys.pk[1]);
    write_ksw(os, keys.relin);
    write_u32(os, static_cast<uint32_t>(keys.rotation.size()));
    for (const auto& [step, key] : keys.rotation) {
        write_u32(os, step);
        write_ksw(os, key);
    }
}

PublicKeySet load_public_keys(std::istream& is, const CkksContext& ctx) {
    read_header(is, Kind::public_keys, ctx);
    PublicKeySet keys;
    keys.params_hash = ctx.params_hash();
    keys.pk[0] = read_eval_rows(is, ctx);
    keys.pk[1] = read_eval_rows(is, ctx);
    keys.relin = read_ksw(is, ctx);
    uint32_t rot_count = read_u32(is);
    for (uint32_t i = 0; i < rot_count; ++i) {
        uint32_t step = read_u32(is);
        keys.rotation[step] = read_ksw(is, ctx);
    }
    return keys;
}

void save_secret_key(const SecretKey& sk, std::ostream& os, const CkksContext& ctx) {
    write_header(os, Kind::secret_key, ctx);
    for (int8_t c : sk.coeffs) write_u8(os, static_cast<uint8_t>(c + 1));
}

SecretKey load_secret_key(std::istream& is, const CkksContext& ctx) {
    read_header(is, Kind::secret_key, ctx);
    SecretKey sk;
    sk.params_hash = ctx.params_hash();
    sk.coeffs.resize(ctx.degree());
    for (auto& c : sk.coeffs) {
        uint8_t raw = read_u8(is);
        require(raw <= 2, Status::parse_error, "serialize: secret coefficient out of range");
        c = static_cast<int8_t>(raw) - 1;
    }
    const std::size_t prime_count = ctx.modulus_chain().size();
    sk.ntt.resize(prime_count);
    sk.squared_ntt.resize(prime_count);
    for (std::size_t i = 0; i < prime_count; ++i) {
        const auto& t = ctx.tables(i);
        auto poly = ring::reduce_signed(std::span<const int8_t>(sk.coeffs), t.modulus,
                                        ctx.degree_log2());
        ring::ntt_forward_inplace(poly.coeffs, t);
        sk.ntt[i] = poly.coeffs;
        sk.squared_ntt[i].resize(ctx.degree());
        for (std::size_t c = 0; c < ctx.degree(); ++c) {
            sk.squared_ntt[i][c] = ring::mul_mod(sk.ntt[i][c], sk.ntt[i][c], t.modulus);
        }
    }
    return sk;
}

namespace {

template <typename Fn>
void with_output_file(const std::string& path, Fn&& fn) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(os.is_open(), Status::io_error, "cannot open for writing: " + path);
    fn(os);
}

template <typename Fn>
auto with_input_file(const std::string& path, Fn&& fn) {
    std::ifstream is(path, std::ios::binary);
    require(is.is_open(), Status::io_error, "cannot open for reading: " + path);
    return fn(is);
}

}  // namespace

void save_ciphertext_file(const Ciphertext& ct, const std::string& path, const CkksContext& ctx) {
    with_output_file(path, [&](std::ostream& os) { save_ciphertext(ct, os, ctx); });
}

Ciphertext load_ciphertext_file(const std::string& path, const CkksContext& ctx) {
    return with_input_file(path, [&](std::istream& is) { return load_ciphertext(is, ctx); });
}

void save_public_keys_file(const PublicKeySet& keys, const std::string& path,
                           const CkksContext& ctx) {
    with_output_file(path, [&](std::ostream& os) { save_public_keys(keys, os, ctx); });
}

PublicKeySet load_public_keys_file(const std::string& path, const CkksContext& ctx) {
    return with_input_file(path, [&](std::istream& is) { return load_public_keys(is, ctx); });
}

void save_secret_key_file(const SecretKey& sk, const std::string& path, const CkksContext& ctx) {
    with_output_file(path, [&](std::ostream& os) { save_secret_key(sk, os, ctx); });
}

SecretKey load_secret_key_file(const std::string& path, const CkksContext& ctx) {
    return with_input_file(path, [&](std::istream& is) { return load_secret_key(is, ctx); });
}

}  // namespace chelm::ckks
