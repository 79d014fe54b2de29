// AVX2 scan kernel. Compiled with -mavx2 in its own translation unit;
// callers must gate on detail::avx2_available().

#include "ocshield/ocspace.hpp"

#include <immintrin.h>

namespace ocshield::ocspace::detail {

std::uint32_t scan_avx2(const std::uint8_t* col_major, std::size_t physical_rows,
                        std::size_t n_trees, const std::uint8_t* oc) {
    const __m256i one = _mm256_set1_epi8(1);
    // 32 running minima, initialized to 255; mismatch counts fit in a
    // byte because n_trees <= 255.
    __m256i acc = _mm256_set1_epi8(static_cast<char>(0xFF));

    for (std::size_t i = 0; i < physical_rows; i += 32) {
        __m256i sum = _mm256_setzero_si256();
        for (std::size_t m = 0; m < n_trees; ++m) {
            const __m256i query = _mm256_set1_epi8(static_cast<char>(oc[m]));
            const __m256i rows = _mm256_loadu_si256(
                reinterpret_cast<const __m256i*>(col_major + m * physical_rows + i));
            // (query != rows) & 1 per lane, accumulated into sum.
            const __m256i eq = _mm256_cmpeq_epi8(query, rows);
            sum = _mm256_add_epi8(sum, _mm256_andnot_si256(eq, one));
        }
        acc = _mm256_min_epu8(acc, sum);
    }

    alignas(32) std::uint8_t lanes[32];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    std::uint8_t best = lanes[0];
    for (int j = 1; j < 32; ++j) best = std::min(best, lanes[j]);
    return best;
}

} // namespace ocshield::ocspace::detail
