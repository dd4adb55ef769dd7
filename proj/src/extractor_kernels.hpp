#pragma once

// Toeplitz hashing as a carry-less polynomial product.
//
// With the input reversed (c_t = b_{n-1-t}) and the seed reversed (s'_k = s_{n+m-2-k}),
// the reversed output satisfies out'_i = [S'(z) X(z)]_{i+n-1}. Reading an MSB-first
// bit string as one big-endian integer performs exactly that reversal, so the kernels
// only ever see little-endian 64-bit polynomial words.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qrng::detail {

struct PolySeed {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::size_t in_words = 0;      // ceil(n / 64)
    std::size_t in_words_pad = 0;  // rounded up to a multiple of 8
    std::size_t out_words = 0;     // ceil(m / 64)
    std::size_t base_word = 0;     // (n - 1) / 64
    unsigned shift = 0;            // (n - 1) % 64

    // Reversed seed polynomial: word j of S' is rev[rev_origin - j], zero outside [0, L).
    std::vector<std::uint64_t> rev;
    std::size_t rev_origin = 0;

    // shifted[k * stride + w] = bits [64 w + k, 64 w + k + 63] of S'.
    std::vector<std::uint64_t> shifted;
    std::size_t stride = 0;

    // Split path: the word-level Toeplitz product over tile x tile blocks is halved
    // recursively, T = [T1 T0; T2 T1] -> T1 (x0 + x1), (T0 + T1) x1, (T2 + T1) x0, down
    // to 8 x 8 leaves. Leaf generators depend only on the seed and are stored here, 16
    // words each with leaf[7 - i + j] = t[i - j]. tile == 0 disables the path.
    std::size_t tile = 0;
    std::size_t leaves_per_tile = 0;
    std::vector<std::uint64_t> leaves;

    /// Words of scratch the kernels need per call.
    std::size_t scratch_words() const { return 3 * (out_words + 2) + 8 * out_words + 9 * tile + 16; }

    std::uint64_t seed_word(std::ptrdiff_t j) const {
        return rev[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(rev_origin) - j)];
    }
};

/// `x` holds in_words_pad words (zero beyond in_words); `out` receives out_words words;
/// `scratch` holds scratch_words() words.
void multiply_word_parallel(const PolySeed& seed, const std::uint64_t* x, std::uint64_t* out,
                            std::uint64_t* scratch);
void multiply_clmul(const PolySeed& seed, const std::uint64_t* x, std::uint64_t* out,
                    std::uint64_t* scratch);
void multiply_vpclmul(const PolySeed& seed, const std::uint64_t* x, std::uint64_t* out,
                      std::uint64_t* scratch);

/// Fills the split-path tables when out_words and in_words share a tile size >= 16.
void prepare_split(PolySeed& seed);

bool cpu_has_clmul();
bool cpu_has_vpclmul();

}  // namespace qrng::detail
