#include "extractor_kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cstring>

namespace qrng::detail {

namespace {

// Product words p[w] = lo(acc[w]) ^ hi(acc[w - 1]) for w in [base, base + out_words];
// the output is those words shifted down by `shift`, the top word masked to m bits.
void finish_output(const PolySeed& seed, const std::uint64_t* lo, const std::uint64_t* hi,
                   std::uint64_t* p, std::uint64_t* out) {
    // lo[i], hi[i] belong to diagonal base - 1 + i.
    const std::size_t words = seed.out_words + 1;
    for (std::size_t i = 0; i < words; ++i) p[i] = lo[i + 1] ^ hi[i];
    const unsigned sh = seed.shift;
    for (std::size_t r = 0; r < seed.out_words; ++r) {
        out[r] = sh == 0 ? p[r] : (p[r] >> sh) | (p[r + 1] << (64 - sh));
    }
    const unsigned tail = seed.m % 64;
    if (tail != 0) out[seed.out_words - 1] &= (std::uint64_t{1} << tail) - 1;
}

constexpr std::size_t kLeaf = 8;

// g holds the generator t[u], u in [-(k - 1), k - 1], at index u + k - 1.
void build_leaves(const std::vector<std::uint64_t>& g, std::size_t k,
                  std::vector<std::uint64_t>& leaves) {
    if (k == kLeaf) {
        for (std::size_t j = 0; j < 15; ++j) leaves.push_back(g[14 - j]);
        leaves.push_back(0);
        return;
    }
    const std::size_t h = k / 2;
    std::vector<std::uint64_t> a(2 * h - 1), b(2 * h - 1), c(2 * h - 1);
    for (std::size_t v = 0; v < 2 * h - 1; ++v) {
        // u = v - (h - 1); g index of t[u] is u + k - 1.
        const std::size_t at = v + h;
        a[v] = g[at];
        b[v] = g[at - h] ^ g[at];
        c[v] = g[at + h] ^ g[at];
    }
    build_leaves(a, h, leaves);
    build_leaves(b, h, leaves);
    build_leaves(c, h, leaves);
}

}  // namespace

void prepare_split(PolySeed& seed) {
    seed.tile = 0;
    seed.leaves.clear();
    if (seed.out_words % 16 != 0 || seed.in_words % 16 != 0) return;
    std::size_t tile = 16;
    while (seed.out_words % (2 * tile) == 0 && seed.in_words % (2 * tile) == 0) tile *= 2;
    std::size_t per_tile = 1;
    for (std::size_t k = tile; k > kLeaf; k /= 2) per_tile *= 3;

    const auto base = static_cast<std::ptrdiff_t>(seed.base_word) - 1;
    const auto t = static_cast<std::ptrdiff_t>(tile);
    for (std::size_t rt = 0; rt < seed.out_words / tile; ++rt) {
        for (std::size_t ct = 0; ct < seed.in_words / tile; ++ct) {
            // Block entry (i, j) is s[base + (rt - ct) tile + i - j].
            std::vector<std::uint64_t> g(2 * tile - 1);
            const std::ptrdiff_t origin = base + (static_cast<std::ptrdiff_t>(rt) -
                                                  static_cast<std::ptrdiff_t>(ct)) * t;
            for (std::ptrdiff_t u = -(t - 1); u <= t - 1; ++u) {
                const std::ptrdiff_t j = origin + u;
                const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(seed.rev_origin) - j;
                g[static_cast<std::size_t>(u + t - 1)] =
                    idx >= 0 && idx < static_cast<std::ptrdiff_t>(seed.rev.size())
                        ? seed.rev[static_cast<std::size_t>(idx)]
                        : 0;
            }
            build_leaves(g, tile, seed.leaves);
        }
    }
    seed.tile = tile;
    seed.leaves_per_tile = per_tile;
}

void multiply_word_parallel(const PolySeed& seed, const std::uint64_t* x, std::uint64_t* out,
                            std::uint64_t* /*scratch*/) {
    const std::size_t mw = seed.out_words;
    for (std::size_t r = 0; r < mw; ++r) out[r] = 0;
    const std::uint64_t* shifted = seed.shifted.data();
    for (std::size_t a = 0; a < seed.in_words; ++a) {
        std::uint64_t word = x[a];
        while (word != 0) {
            const unsigned u = static_cast<unsigned>(std::countr_zero(word));
            word &= word - 1;
            const std::size_t t = 64 * a + u;
            const std::size_t start = seed.n - 1 - t;
            const std::uint64_t* window = shifted + (start % 64) * seed.stride + start / 64;
            for (std::size_t r = 0; r < mw; ++r) out[r] ^= window[r];
        }
    }
    const unsigned tail = seed.m % 64;
    if (tail != 0) out[mw - 1] &= (std::uint64_t{1} << tail) - 1;
}

__attribute__((target("pclmul,sse4.1"))) void multiply_clmul(const PolySeed& seed,
                                                             const std::uint64_t* x,
                                                             std::uint64_t* out,
                                                             std::uint64_t* scratch) {
    const std::size_t diags = seed.out_words + 2;
    std::uint64_t* lo = scratch;
    std::uint64_t* hi = scratch + diags;
    const auto base = static_cast<std::ptrdiff_t>(seed.base_word) - 1;
    const std::uint64_t* rev = seed.rev.data();
    const std::size_t words = seed.in_words + (seed.in_words & 1);
    for (std::size_t i = 0; i < diags; ++i) {
        const std::ptrdiff_t d = base + static_cast<std::ptrdiff_t>(i);
        // s[d - a - t] = rev[origin - d + a + t], ascending in a.
        const std::uint64_t* s = rev + (static_cast<std::ptrdiff_t>(seed.rev_origin) - d);
        __m128i acc0 = _mm_setzero_si128();
        __m128i acc1 = _mm_setzero_si128();
        for (std::size_t a = 0; a < words; a += 2) {
            const __m128i xv = _mm_loadu_si128(reinterpret_cast<const __m128i*>(x + a));
            const __m128i sv = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + a));
            acc0 = _mm_xor_si128(acc0, _mm_clmulepi64_si128(xv, sv, 0x00));
            acc1 = _mm_xor_si128(acc1, _mm_clmulepi64_si128(xv, sv, 0x11));
        }
        const __m128i acc = _mm_xor_si128(acc0, acc1);
        lo[i] = static_cast<std::uint64_t>(_mm_cvtsi128_si64(acc));
        hi[i] = static_cast<std::uint64_t>(_mm_extract_epi64(acc, 1));
    }
    finish_output(seed, lo, hi, hi + diags, out);
}

namespace {

#define QRNG_VPCLMUL_TARGET __attribute__((target("avx512f,vpclmulqdq,pclmul,sse4.1")))

// acc[i] ^= (T x)[i] for a k x k block; rows stay as four unreduced 128-bit lanes.
QRNG_VPCLMUL_TARGET void split_multiply(const std::uint64_t*& leaf, const std::uint64_t* x,
                                        std::size_t k, __m512i* acc, std::uint64_t* temp) {
    if (k == kLeaf) {
        const __m512i xv = _mm512_loadu_si512(x);
        for (std::size_t i = 0; i < kLeaf; ++i) {
            const __m512i sv = _mm512_loadu_si512(leaf + 7 - i);
            acc[i] = _mm512_ternarylogic_epi64(acc[i], _mm512_clmulepi64_epi128(xv, sv, 0x00),
                                               _mm512_clmulepi64_epi128(xv, sv, 0x11), 0x96);
        }
        leaf += 16;
        return;
    }
    const std::size_t h = k / 2;
    std::uint64_t* xs = temp;
    auto* p0 = reinterpret_cast<__m512i*>(temp + h);
    std::uint64_t* deeper = temp + h + 8 * h;
    for (std::size_t w = 0; w < h; w += 8) {
        _mm512_storeu_si512(xs + w, _mm512_xor_si512(_mm512_loadu_si512(x + w),
                                                      _mm512_loadu_si512(x + h + w)));
    }
    for (std::size_t i = 0; i < h; ++i) p0[i] = _mm512_setzero_si512();
    split_multiply(leaf, xs, h, p0, deeper);
    split_multiply(leaf, x + h, h, acc, deeper);
    split_multiply(leaf, x, h, acc + h, deeper);
    for (std::size_t i = 0; i < h; ++i) {
        acc[i] = _mm512_xor_si512(acc[i], p0[i]);
        acc[h + i] = _mm512_xor_si512(acc[h + i], p0[i]);
    }
}

QRNG_VPCLMUL_TARGET void reduce_lanes(__m512i v, std::uint64_t& lo, std::uint64_t& hi) {
    alignas(64) std::uint64_t q[8];
    _mm512_store_si512(q, v);
    lo = q[0] ^ q[2] ^ q[4] ^ q[6];
    hi = q[1] ^ q[3] ^ q[5] ^ q[7];
}

// One diagonal d = base - 1 + row computed directly.
QRNG_VPCLMUL_TARGET void direct_row(const PolySeed& seed, const std::uint64_t* x, std::size_t row,
                                    std::uint64_t& lo, std::uint64_t& hi) {
    const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(seed.base_word) - 1 +
                             static_cast<std::ptrdiff_t>(row);
    const std::uint64_t* s = seed.rev.data() + (static_cast<std::ptrdiff_t>(seed.rev_origin) - d);
    __m512i a0 = _mm512_setzero_si512();
    for (std::size_t a = 0; a < seed.in_words_pad; a += 8) {
        const __m512i xv = _mm512_loadu_si512(x + a);
        const __m512i sv = _mm512_loadu_si512(s + a);
        a0 = _mm512_ternarylogic_epi64(a0, _mm512_clmulepi64_epi128(xv, sv, 0x00),
                                       _mm512_clmulepi64_epi128(xv, sv, 0x11), 0x96);
    }
    reduce_lanes(a0, lo, hi);
}

QRNG_VPCLMUL_TARGET void multiply_split(const PolySeed& seed, const std::uint64_t* x,
                                        std::uint64_t* out, std::uint64_t* scratch) {
    const std::size_t diags = seed.out_words + 2;
    std::uint64_t* lo = scratch;
    std::uint64_t* hi = scratch + diags;
    std::uint64_t* p = hi + diags;
    // 64-byte aligned accumulators after the lo / hi / p arrays.
    auto addr = reinterpret_cast<std::uintptr_t>(p + diags);
    auto* acc = reinterpret_cast<__m512i*>((addr + 63) & ~std::uintptr_t{63});
    auto* temp = reinterpret_cast<std::uint64_t*>(acc + seed.out_words);

    for (std::size_t r = 0; r < seed.out_words; ++r) acc[r] = _mm512_setzero_si512();
    const std::size_t tile = seed.tile;
    const std::uint64_t* leaf = seed.leaves.data();
    for (std::size_t rt = 0; rt < seed.out_words / tile; ++rt) {
        for (std::size_t ct = 0; ct < seed.in_words / tile; ++ct) {
            split_multiply(leaf, x + ct * tile, tile, acc + rt * tile, temp);
        }
    }
    for (std::size_t r = 0; r < seed.out_words; ++r) reduce_lanes(acc[r], lo[r], hi[r]);
    for (std::size_t r = seed.out_words; r < diags; ++r) direct_row(seed, x, r, lo[r], hi[r]);
    finish_output(seed, lo, hi, p, out);
}

}  // namespace

QRNG_VPCLMUL_TARGET void multiply_vpclmul(const PolySeed& seed, const std::uint64_t* x,
                                          std::uint64_t* out, std::uint64_t* scratch) {
    if (seed.tile != 0) {
        multiply_split(seed, x, out, scratch);
        return;
    }
    const std::size_t diags = seed.out_words + 2;
    std::uint64_t* lo = scratch;
    std::uint64_t* hi = scratch + diags;
    const auto base = static_cast<std::ptrdiff_t>(seed.base_word) - 1;
    const std::uint64_t* rev = seed.rev.data();
    const std::size_t words = seed.in_words_pad;

    // Two diagonals per pass share the input loads.
    std::size_t i = 0;
    for (; i + 1 < diags; i += 2) {
        const std::ptrdiff_t d = base + static_cast<std::ptrdiff_t>(i);
        const std::uint64_t* s0 = rev + (static_cast<std::ptrdiff_t>(seed.rev_origin) - d);
        const std::uint64_t* s1 = s0 - 1;
        __m512i a0 = _mm512_setzero_si512();
        __m512i a1 = _mm512_setzero_si512();
        __m512i b0 = _mm512_setzero_si512();
        __m512i b1 = _mm512_setzero_si512();
        for (std::size_t a = 0; a < words; a += 8) {
            const __m512i xv = _mm512_loadu_si512(x + a);
            const __m512i sv0 = _mm512_loadu_si512(s0 + a);
            const __m512i sv1 = _mm512_loadu_si512(s1 + a);
            a0 = _mm512_xor_si512(a0, _mm512_clmulepi64_epi128(xv, sv0, 0x00));
            a1 = _mm512_xor_si512(a1, _mm512_clmulepi64_epi128(xv, sv0, 0x11));
            b0 = _mm512_xor_si512(b0, _mm512_clmulepi64_epi128(xv, sv1, 0x00));
            b1 = _mm512_xor_si512(b1, _mm512_clmulepi64_epi128(xv, sv1, 0x11));
        }
        alignas(64) std::uint64_t la[8];
        alignas(64) std::uint64_t lb[8];
        _mm512_store_si512(la, _mm512_xor_si512(a0, a1));
        _mm512_store_si512(lb, _mm512_xor_si512(b0, b1));
        lo[i] = la[0] ^ la[2] ^ la[4] ^ la[6];
        hi[i] = la[1] ^ la[3] ^ la[5] ^ la[7];
        lo[i + 1] = lb[0] ^ lb[2] ^ lb[4] ^ lb[6];
        hi[i + 1] = lb[1] ^ lb[3] ^ lb[5] ^ lb[7];
    }
    for (; i < diags; ++i) {
        const std::ptrdiff_t d = base + static_cast<std::ptrdiff_t>(i);
        const std::uint64_t* s = rev + (static_cast<std::ptrdiff_t>(seed.rev_origin) - d);
        __m512i a0 = _mm512_setzero_si512();
        __m512i a1 = _mm512_setzero_si512();
        for (std::size_t a = 0; a < words; a += 8) {
            const __m512i xv = _mm512_loadu_si512(x + a);
            const __m512i sv = _mm512_loadu_si512(s + a);
            a0 = _mm512_xor_si512(a0, _mm512_clmulepi64_epi128(xv, sv, 0x00));
            a1 = _mm512_xor_si512(a1, _mm512_clmulepi64_epi128(xv, sv, 0x11));
        }
        alignas(64) std::uint64_t la[8];
        _mm512_store_si512(la, _mm512_xor_si512(a0, a1));
        lo[i] = la[0] ^ la[2] ^ la[4] ^ la[6];
        hi[i] = la[1] ^ la[3] ^ la[5] ^ la[7];
    }
    finish_output(seed, lo, hi, hi + diags, out);
}

bool cpu_has_clmul() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1");
}

bool cpu_has_vpclmul() {
    __builtin_cpu_init();
    return cpu_has_clmul() && __builtin_cpu_supports("avx512f") &&
           __builtin_cpu_supports("vpclmulqdq");
}

}  // namespace qrng::detail
