#include "qrng/checksum.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <vector>

#include <openssl/evp.h>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw Error("sha256 init failed");
        }
    }
    void update(const void* data, std::size_t size) {
        if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw Error("sha256 update failed");
    }
    std::array<std::uint8_t, 32> digest() {
        std::array<std::uint8_t, 32> out{};
        unsigned len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1) {
            throw Error("sha256 final failed");
        }
        return out;
    }

private:
    MdCtx ctx_;
};

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 15]);
    }
    return s;
}

void put_le64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> data) {
    Sha256 h;
    h.update(data.data(), data.size());
    const auto d = h.digest();
    return to_hex(d);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Sha256 h;
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    const auto d = h.digest();
    return to_hex(d);
}

std::vector<std::uint8_t> expand_seed_bytes(std::uint64_t seed, std::string_view label,
                                            std::size_t count) {
    std::vector<std::uint8_t> out;
    out.reserve(count + 32);
    for (std::uint64_t counter = 0; out.size() < count; ++counter) {
        Sha256 h;
        h.update(label.data(), label.size());
        std::uint8_t le[16];
        put_le64(le, seed);
        put_le64(le + 8, counter);
        h.update(le, sizeof le);
        const auto d = h.digest();
        out.insert(out.end(), d.begin(), d.end());
    }
    out.resize(count);
    return out;
}

}  // namespace qrng
