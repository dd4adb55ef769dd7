#include "qrng/extractor.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>

#include "extractor_kernels.hpp"
#include "qrng/checksum.hpp"
#include "qrng/errors.hpp"
#include "qrng/parallel.hpp"
#include "qrng/rng.hpp"

static_assert(std::endian::native == std::endian::little, "word packing assumes little endian");

namespace qrng {

namespace {

std::uint64_t load_be64(const std::uint8_t* p) {
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    return __builtin_bswap64(v);
}

void store_be64(std::uint8_t* p, std::uint64_t v) {
    v = __builtin_bswap64(v);
    std::memcpy(p, &v, 8);
}

void put_le32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_le32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

// Appends `count` low bits of `value`, most significant first.
void append_bits(std::vector<std::uint8_t>& bytes, std::size_t& bit_len, std::uint32_t value,
                 int count) {
    for (int b = count - 1; b >= 0; --b) {
        if ((bit_len & 7) == 0) bytes.push_back(0);
        if ((value >> b) & 1u) bytes.back() |= static_cast<std::uint8_t>(0x80u >> (bit_len & 7));
        ++bit_len;
    }
}

}  // namespace

BitBlock::BitBlock(std::size_t bits, std::vector<std::uint8_t> bytes)
    : bits_(bits), bytes_(std::move(bytes)) {
    if (bytes_.size() != (bits + 7) / 8) throw InvalidParameter("bit block byte count mismatch");
    if (bits % 8 != 0) bytes_.back() &= static_cast<std::uint8_t>(0xFF00u >> (bits % 8));
}

BitBlock BitBlock::from_bits(std::span<const std::uint8_t> one_bit_per_element) {
    BitBlock b(one_bit_per_element.size());
    for (std::size_t i = 0; i < one_bit_per_element.size(); ++i) {
        b.set(i, one_bit_per_element[i] != 0);
    }
    return b;
}

void BitBlock::set(std::size_t i, bool v) {
    const auto mask = static_cast<std::uint8_t>(0x80u >> (i & 7));
    if (v) {
        bytes_[i >> 3] |= mask;
    } else {
        bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
    }
}

BitBlock BitBlock::operator^(const BitBlock& other) const {
    if (other.bits_ != bits_) throw InvalidParameter("xor of bit blocks of different length");
    BitBlock r = *this;
    for (std::size_t i = 0; i < bytes_.size(); ++i) r.bytes_[i] ^= other.bytes_[i];
    return r;
}

ToeplitzSeed::ToeplitzSeed(std::uint32_t n, std::uint32_t m, BitBlock bits)
    : n_(n), m_(m), bits_(std::move(bits)) {
    if (n == 0 || m == 0) throw InvalidParameter("toeplitz dimensions must be positive");
    if (m > n) throw InvalidParameter("toeplitz output length m must not exceed n");
    if (bits_.size() != static_cast<std::size_t>(n) + m - 1) {
        throw InvalidParameter("toeplitz seed must hold exactly n + m - 1 bits");
    }
}

std::string ToeplitzSeed::fingerprint() const {
    const auto data = serialize();
    return sha256_hex(data);
}

std::vector<std::uint8_t> ToeplitzSeed::serialize() const {
    const auto bytes = bits_.bytes();
    std::vector<std::uint8_t> out(8 + bytes.size());
    put_le32(out.data(), n_);
    put_le32(out.data() + 4, m_);
    std::copy(bytes.begin(), bytes.end(), out.begin() + 8);
    return out;
}

ToeplitzSeed ToeplitzSeed::deserialize(std::span<const std::uint8_t> data) {
    if (data.size() < 8) throw IoError("seed file shorter than its 8-byte header");
    const std::uint32_t n = get_le32(data.data());
    const std::uint32_t m = get_le32(data.data() + 4);
    const std::size_t need = seed_bytes_required(n, m);
    if (data.size() != 8 + need) {
        throw IoError("seed file holds " + std::to_string(data.size() - 8) + " bytes; (n=" +
                      std::to_string(n) + ", m=" + std::to_string(m) + ") needs " +
                      std::to_string(need));
    }
    std::vector<std::uint8_t> bytes(data.begin() + 8, data.end());
    return ToeplitzSeed(n, m, BitBlock(static_cast<std::size_t>(n) + m - 1, std::move(bytes)));
}

ToeplitzSeed derive_seed(std::span<const std::uint8_t> entropy_source, std::uint32_t n,
                         std::uint32_t m) {
    if (n == 0 || m == 0 || m > n) throw InvalidParameter("invalid toeplitz dimensions");
    const std::size_t need = seed_bytes_required(n, m);
    if (entropy_source.size() < need) {
        throw InvalidParameter("seed source has " + std::to_string(entropy_source.size()) +
                               " bytes; (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                               ") needs " + std::to_string(need));
    }
    std::vector<std::uint8_t> bytes(entropy_source.begin(),
                                    entropy_source.begin() + static_cast<std::ptrdiff_t>(need));
    return ToeplitzSeed(n, m, BitBlock(static_cast<std::size_t>(n) + m - 1, std::move(bytes)));
}

std::string_view to_string(Kernel kernel) {
    switch (kernel) {
        case Kernel::Naive: return "naive";
        case Kernel::WordParallel: return "word-parallel";
        case Kernel::Clmul: return "pclmul";
        case Kernel::Vpclmul: return "vpclmul-avx512";
        case Kernel::Auto: return "auto";
    }
    return "unknown";
}

bool kernel_available(Kernel kernel) {
    switch (kernel) {
        case Kernel::Clmul: return detail::cpu_has_clmul();
        case Kernel::Vpclmul: return detail::cpu_has_vpclmul();
        default: return true;
    }
}

Kernel best_kernel() {
    if (detail::cpu_has_vpclmul()) return Kernel::Vpclmul;
    if (detail::cpu_has_clmul()) return Kernel::Clmul;
    return Kernel::WordParallel;
}

struct ToeplitzExtractor::Impl {
    ToeplitzSeed seed;
    Kernel kernel;
    detail::PolySeed poly;

    Impl(const ToeplitzSeed& s, Kernel k) : seed(s), kernel(k) {
        const std::uint32_t n = s.n();
        const std::uint32_t m = s.m();
        const std::size_t len = s.length();
        poly.n = n;
        poly.m = m;
        poly.in_words = (n + 63) / 64;
        poly.in_words_pad = (poly.in_words + 7) / 8 * 8;
        poly.out_words = (m + 63) / 64;
        poly.base_word = (n - 1) / 64;
        poly.shift = (n - 1) % 64;

        const std::size_t seed_words = (len + 63) / 64;
        std::vector<std::uint64_t> words(seed_words + 2, 0);
        for (std::size_t k2 = 0; k2 < len; ++k2) {
            if (s.bit(len - 1 - k2)) words[k2 / 64] |= std::uint64_t{1} << (k2 % 64);
        }

        // Kernels address S' words in [-in_words_pad, in_words + out_words].
        poly.rev_origin = poly.in_words + poly.out_words + 8;
        poly.rev.assign(poly.rev_origin + poly.in_words_pad + 16, 0);
        for (std::size_t j = 0; j < seed_words; ++j) poly.rev[poly.rev_origin - j] = words[j];

        poly.stride = seed_words + poly.out_words + 2;
        poly.shifted.assign(64 * poly.stride, 0);
        auto word_at = [&](std::size_t w) { return w < words.size() ? words[w] : 0; };
        for (unsigned sh = 0; sh < 64; ++sh) {
            for (std::size_t w = 0; w < poly.stride; ++w) {
                const std::uint64_t v = sh == 0 ? word_at(w)
                                                : (word_at(w) >> sh) | (word_at(w + 1) << (64 - sh));
                poly.shifted[sh * poly.stride + w] = v;
            }
        }
        if (k == Kernel::Vpclmul) detail::prepare_split(poly);
    }

    void multiply(const std::uint64_t* x, std::uint64_t* out, std::uint64_t* scratch) const {
        switch (kernel) {
            case Kernel::Vpclmul: detail::multiply_vpclmul(poly, x, out, scratch); break;
            case Kernel::Clmul: detail::multiply_clmul(poly, x, out, scratch); break;
            default: detail::multiply_word_parallel(poly, x, out, scratch); break;
        }
    }

    BitBlock naive(const BitBlock& input) const {
        BitBlock out(seed.m());
        for (std::uint32_t i = 0; i < seed.m(); ++i) {
            bool acc = false;
            for (std::uint32_t j = 0; j < seed.n(); ++j) acc ^= seed.entry(i, j) && input.get(j);
            out.set(i, acc);
        }
        return out;
    }

    struct Buffers {
        std::vector<std::uint64_t> x, out, scratch;
    };

    Buffers& buffers() const {
        thread_local Buffers b;
        b.x.resize(poly.in_words_pad);
        b.out.resize(poly.out_words);
        b.scratch.resize(poly.scratch_words());
        return b;
    }
};

ToeplitzExtractor::ToeplitzExtractor(const ToeplitzSeed& seed, Kernel kernel) {
    if (kernel == Kernel::Auto) kernel = best_kernel();
    if (!kernel_available(kernel)) {
        throw InvalidParameter("kernel " + std::string(to_string(kernel)) +
                               " is not supported by this CPU");
    }
    impl_ = std::make_unique<Impl>(seed, kernel);
}

ToeplitzExtractor::~ToeplitzExtractor() = default;
ToeplitzExtractor::ToeplitzExtractor(ToeplitzExtractor&&) noexcept = default;
ToeplitzExtractor& ToeplitzExtractor::operator=(ToeplitzExtractor&&) noexcept = default;

std::uint32_t ToeplitzExtractor::n() const { return impl_->seed.n(); }
std::uint32_t ToeplitzExtractor::m() const { return impl_->seed.m(); }
Kernel ToeplitzExtractor::kernel() const { return impl_->kernel; }

BitBlock ToeplitzExtractor::extract(const BitBlock& input) const {
    const std::uint32_t n = impl_->seed.n();
    const std::uint32_t m = impl_->seed.m();
    if (input.size() != n) {
        throw InvalidParameter("input block has " + std::to_string(input.size()) +
                               " bits; extractor expects " + std::to_string(n));
    }
    if (impl_->kernel == Kernel::Naive) return impl_->naive(input);
    if (n % 64 == 0 && m % 64 == 0) {
        BitBlock out(m);
        extract_bytes(input.bytes().data(), out.bytes().data());
        return out;
    }
    auto& buf = impl_->buffers();
    std::fill(buf.x.begin(), buf.x.end(), 0);
    for (std::size_t t = 0; t < n; ++t) {
        if (input.get(n - 1 - t)) buf.x[t / 64] |= std::uint64_t{1} << (t % 64);
    }
    impl_->multiply(buf.x.data(), buf.out.data(), buf.scratch.data());
    BitBlock out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t t = m - 1 - i;
        out.set(i, (buf.out[t / 64] >> (t % 64)) & 1);
    }
    return out;
}

void ToeplitzExtractor::extract_bytes(const std::uint8_t* in, std::uint8_t* out) const {
    const std::uint32_t n = impl_->seed.n();
    const std::uint32_t m = impl_->seed.m();
    if (n % 8 != 0 || m % 8 != 0) throw InvalidParameter("extract_bytes needs byte-aligned n, m");
    if (impl_->kernel == Kernel::Naive || n % 64 != 0 || m % 64 != 0) {
        BitBlock input(n, std::vector<std::uint8_t>(in, in + n / 8));
        const BitBlock r = impl_->kernel == Kernel::Naive ? impl_->naive(input) : extract(input);
        std::memcpy(out, r.bytes().data(), m / 8);
        return;
    }
    auto& buf = impl_->buffers();
    const std::size_t nw = impl_->poly.in_words;
    const std::size_t mw = impl_->poly.out_words;
    for (std::size_t a = 0; a < nw; ++a) buf.x[a] = load_be64(in + 8 * (nw - 1 - a));
    impl_->multiply(buf.x.data(), buf.out.data(), buf.scratch.data());
    for (std::size_t r = 0; r < mw; ++r) store_be64(out + 8 * (mw - 1 - r), buf.out[r]);
}

BitBlock toeplitz_extract(const ToeplitzSeed& seed, const BitBlock& input, Kernel kernel) {
    return ToeplitzExtractor(seed, kernel).extract(input);
}

StreamExtractor::StreamExtractor(const ToeplitzExtractor& extractor, int adc_bits,
                                 unsigned workers)
    : extractor_(extractor), adc_bits_(adc_bits), workers_(std::max(1u, workers)) {
    if (adc_bits < 1 || adc_bits > 16) throw InvalidParameter("adc bits must lie in [1, 16]");
    if (extractor.n() % static_cast<std::uint32_t>(adc_bits) != 0) {
        throw InvalidParameter("toeplitz n must be divisible by the adc bit width");
    }
}

void StreamExtractor::push(std::span<const std::uint16_t> codes) {
    const std::uint32_t limit = 1u << adc_bits_;
    for (auto c : codes) {
        if (c >= limit) throw InvalidParameter("code exceeds adc bit width");
    }
    if (adc_bits_ == 8 && pending_bits_ % 8 == 0) {
        pending_.reserve(pending_.size() + codes.size());
        for (auto c : codes) pending_.push_back(static_cast<std::uint8_t>(c));
        pending_bits_ += 8 * codes.size();
    } else {
        for (auto c : codes) append_bits(pending_, pending_bits_, c, adc_bits_);
    }
    pending_samples_ += codes.size();
    flush_blocks();
}

void StreamExtractor::flush_blocks() {
    const std::size_t n = extractor_.n();
    const std::size_t m = extractor_.m();
    const std::size_t blocks = pending_bits_ / n;
    if (blocks == 0) return;

    if (n % 8 == 0 && m % 8 == 0 && result_.output_bits % 8 == 0) {
        const std::size_t base = result_.bytes.size();
        result_.bytes.resize(base + blocks * (m / 8));
        constexpr std::size_t kBlocksPerTask = 64;
        const std::size_t tasks = (blocks + kBlocksPerTask - 1) / kBlocksPerTask;
        parallel_for(tasks, workers_, [&](std::size_t t) {
            const std::size_t end = std::min(blocks, (t + 1) * kBlocksPerTask);
            for (std::size_t b = t * kBlocksPerTask; b < end; ++b) {
                extractor_.extract_bytes(pending_.data() + b * (n / 8),
                                         result_.bytes.data() + base + b * (m / 8));
            }
        });
    } else {
        std::vector<BitBlock> outs(blocks);
        parallel_for(blocks, workers_, [&](std::size_t b) {
            BitBlock in(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t bit = b * n + i;
                in.set(i, (pending_[bit >> 3] >> (7 - (bit & 7))) & 1);
            }
            outs[b] = extractor_.extract(in);
        });
        std::size_t bit_len = result_.output_bits;
        for (const auto& o : outs) {
            for (std::size_t i = 0; i < m; ++i) {
                append_bits(result_.bytes, bit_len, o.get(i) ? 1u : 0u, 1);
            }
        }
    }
    result_.output_bits += blocks * m;
    result_.blocks += blocks;

    // Drop the consumed input bits.
    const std::size_t consumed = blocks * n;
    if (consumed % 8 == 0) {
        pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(consumed / 8));
    } else {
        std::vector<std::uint8_t> rest;
        std::size_t rest_bits = 0;
        for (std::size_t bit = consumed; bit < pending_bits_; ++bit) {
            append_bits(rest, rest_bits, (pending_[bit >> 3] >> (7 - (bit & 7))) & 1u, 1);
        }
        pending_ = std::move(rest);
    }
    pending_bits_ -= consumed;
    pending_samples_ = pending_bits_ / static_cast<std::size_t>(adc_bits_);
}

StreamResult StreamExtractor::finish() {
    result_.discarded_samples = pending_samples_;
    pending_.clear();
    pending_bits_ = 0;
    pending_samples_ = 0;
    return std::exchange(result_, StreamResult{});
}

StreamResult extract_stream(const ToeplitzSeed& seed, const QuantizedTrace& codes,
                            unsigned workers, Kernel kernel) {
    if (codes.codes.empty()) throw InvalidParameter("cannot extract from an empty trace");
    const auto k = static_cast<std::uint32_t>(codes.adc.bits);
    if (seed.n() % k != 0) throw InvalidParameter("toeplitz n must be divisible by adc bits");
    if (codes.codes.size() < seed.n() / k) {
        throw InvalidParameter("trace holds " + std::to_string(codes.codes.size()) +
                               " samples; one block needs " + std::to_string(seed.n() / k));
    }
    const ToeplitzExtractor extractor(seed, kernel);
    StreamExtractor stream(extractor, codes.adc.bits, workers);
    stream.push(codes.codes);
    return stream.finish();
}

ThroughputReport throughput_benchmark(const ToeplitzSeed& seed, std::size_t payload_bytes,
                                      int runs, unsigned workers, Kernel kernel) {
    if (payload_bytes < (1u << 20)) throw InvalidParameter("benchmark payload must be >= 1 MiB");
    if (runs < 1) throw InvalidParameter("benchmark needs at least one run");
    if (seed.n() % 8 != 0 || seed.m() % 8 != 0) {
        throw InvalidParameter("benchmark needs byte-aligned n and m");
    }
    const ToeplitzExtractor extractor(seed, kernel);
    const std::size_t in_bytes = seed.n() / 8;
    const std::size_t out_bytes = seed.m() / 8;
    const std::size_t blocks = payload_bytes / in_bytes;

    std::vector<std::uint8_t> payload(blocks * in_bytes);
    Rng rng(0x5EED);
    for (std::size_t i = 0; i + 8 <= payload.size(); i += 8) {
        const std::uint64_t v = rng.next_u64();
        std::memcpy(payload.data() + i, &v, 8);
    }
    std::vector<std::uint8_t> output(blocks * out_bytes);

    const unsigned w = std::max(1u, workers);
    auto run_once = [&] {
        const std::size_t per = (blocks + w - 1) / w;
        parallel_for(w, w, [&](std::size_t t) {
            const std::size_t end = std::min(blocks, (t + 1) * per);
            for (std::size_t b = t * per; b < end; ++b) {
                extractor.extract_bytes(payload.data() + b * in_bytes,
                                        output.data() + b * out_bytes);
            }
        });
    };
    run_once();  // warm-up

    ThroughputReport r;
    r.n = seed.n();
    r.m = seed.m();
    r.payload_bytes = payload.size();
    r.workers = w;
    r.runs = runs;
    r.kernel = extractor.kernel();
    for (int i = 0; i < runs; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        run_once();
        const auto t1 = std::chrono::steady_clock::now();
        r.run_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::vector<double> sorted = r.run_seconds;
    std::sort(sorted.begin(), sorted.end());
    r.median_seconds = sorted[sorted.size() / 2];
    r.input_bits_per_second = static_cast<double>(blocks) * seed.n() / r.median_seconds;
    r.output_bits_per_second = static_cast<double>(blocks) * seed.m() / r.median_seconds;
    return r;
}

}  // namespace qrng
