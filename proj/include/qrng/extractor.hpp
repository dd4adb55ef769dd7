#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qrng/digitizer.hpp"

namespace qrng {

/// A packed bit string, MSB-first within each byte: bit i is byte i/8, mask 0x80 >> (i%8).
class BitBlock {
public:
    BitBlock() = default;
    explicit BitBlock(std::size_t bits) : bits_(bits), bytes_((bits + 7) / 8, 0) {}
    BitBlock(std::size_t bits, std::vector<std::uint8_t> bytes);

    static BitBlock from_bits(std::span<const std::uint8_t> one_bit_per_element);

    std::size_t size() const { return bits_; }
    bool get(std::size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1; }
    void set(std::size_t i, bool v);
    std::span<const std::uint8_t> bytes() const { return bytes_; }
    std::span<std::uint8_t> bytes() { return bytes_; }

    BitBlock operator^(const BitBlock& other) const;
    bool operator==(const BitBlock&) const = default;

private:
    std::size_t bits_ = 0;
    std::vector<std::uint8_t> bytes_;
};

/// The n+m-1 seed bits of an m x n Toeplitz matrix, T[i][j] = seed[i - j + n - 1].
class ToeplitzSeed {
public:
    ToeplitzSeed(std::uint32_t n, std::uint32_t m, BitBlock bits);

    std::uint32_t n() const { return n_; }
    std::uint32_t m() const { return m_; }
    std::size_t length() const { return bits_.size(); }
    bool bit(std::size_t k) const { return bits_.get(k); }
    bool entry(std::uint32_t row, std::uint32_t col) const { return bit(row + n_ - 1 - col); }
    const BitBlock& bits() const { return bits_; }

    /// SHA-256 over (n, m, packed seed bits).
    std::string fingerprint() const;

    /// Seed file: le32 n, le32 m, then the packed bits.
    std::vector<std::uint8_t> serialize() const;
    static ToeplitzSeed deserialize(std::span<const std::uint8_t> data);

private:
    std::uint32_t n_;
    std::uint32_t m_;
    BitBlock bits_;
};

inline std::size_t seed_bytes_required(std::uint32_t n, std::uint32_t m) {
    return (static_cast<std::size_t>(n) + m - 1 + 7) / 8;
}

/// Unpacks the first n+m-1 bits of `entropy_source` MSB-first.
ToeplitzSeed derive_seed(std::span<const std::uint8_t> entropy_source, std::uint32_t n,
                         std::uint32_t m);

enum class Kernel { Naive, WordParallel, Clmul, Vpclmul, Auto };

std::string_view to_string(Kernel kernel);
bool kernel_available(Kernel kernel);
/// Fastest kernel this CPU supports.
Kernel best_kernel();

/// GF(2) Toeplitz hashing with a fixed seed. Immutable after construction and safe to
/// share between threads.
class ToeplitzExtractor {
public:
    explicit ToeplitzExtractor(const ToeplitzSeed& seed, Kernel kernel = Kernel::Auto);
    ~ToeplitzExtractor();
    ToeplitzExtractor(ToeplitzExtractor&&) noexcept;
    ToeplitzExtractor& operator=(ToeplitzExtractor&&) noexcept;

    std::uint32_t n() const;
    std::uint32_t m() const;
    Kernel kernel() const;

    BitBlock extract(const BitBlock& input) const;

    /// Byte-aligned fast path: `in` holds n/8 bytes, `out` receives m/8 bytes.
    /// Requires n % 8 == 0 and m % 8 == 0.
    void extract_bytes(const std::uint8_t* in, std::uint8_t* out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// output[i] = XOR_j T[i][j] & input[j].
BitBlock toeplitz_extract(const ToeplitzSeed& seed, const BitBlock& input,
                          Kernel kernel = Kernel::Auto);

struct StreamResult {
    std::vector<std::uint8_t> bytes;  // packed output, MSB-first
    std::size_t output_bits = 0;
    std::size_t blocks = 0;
    std::size_t discarded_samples = 0;
};

/// Incremental extraction over a code stream. Codes are packed MSB-first, adc_bits each,
/// into n-bit blocks; output is identical however the input is split across push() calls.
class StreamExtractor {
public:
    StreamExtractor(const ToeplitzExtractor& extractor, int adc_bits, unsigned workers = 1);

    void push(std::span<const std::uint16_t> codes);
    /// Discards the trailing partial block and returns the accumulated result.
    StreamResult finish();

private:
    void flush_blocks();

    const ToeplitzExtractor& extractor_;
    int adc_bits_;
    unsigned workers_;
    std::vector<std::uint8_t> pending_;  // packed input bits not yet consumed
    std::size_t pending_bits_ = 0;
    std::size_t pending_samples_ = 0;
    StreamResult result_;
};

/// Packs codes into blocks, hashes each and concatenates the outputs.
StreamResult extract_stream(const ToeplitzSeed& seed, const QuantizedTrace& codes,
                            unsigned workers = 1, Kernel kernel = Kernel::Auto);

struct ThroughputReport {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::size_t payload_bytes = 0;
    unsigned workers = 1;
    int runs = 0;
    Kernel kernel = Kernel::Auto;
    double median_seconds = 0.0;
    double input_bits_per_second = 0.0;
    double output_bits_per_second = 0.0;
    std::vector<double> run_seconds;
};

/// Median-of-runs extraction throughput over a pseudo-random payload (at least 1 MiB).
ThroughputReport throughput_benchmark(const ToeplitzSeed& seed, std::size_t payload_bytes,
                                      int runs = 5, unsigned workers = 1,
                                      Kernel kernel = Kernel::Auto);

}  // namespace qrng
