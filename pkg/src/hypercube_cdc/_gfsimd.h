/* dst ^= c * src over GF(2^8) for rows padded to 16-byte multiples.
 *
 * With SSSE3 each byte is split into nibbles and both halves are looked up
 * with PSHUFB in 16-entry tables (lo[c][v] = c*v, hi[c][v] = c*(v<<4)).
 * Without it the scalar loop runs against the full product table.
 */
#ifndef HCDC_GFSIMD_H
#define HCDC_GFSIMD_H

#include <stddef.h>
#include <stdint.h>

#if defined(__SSSE3__)
#include <tmmintrin.h>
#define HCDC_HAVE_SSSE3 1
#else
#define HCDC_HAVE_SSSE3 0
#endif

static inline void hcdc_axpy_padded(uint8_t *dst, const uint8_t *src, const uint8_t *lo,
                                    const uint8_t *hi, const uint8_t *full, size_t chunks)
{
#if HCDC_HAVE_SSSE3
    const __m128i tlo = _mm_loadu_si128((const __m128i *)lo);
    const __m128i thi = _mm_loadu_si128((const __m128i *)hi);
    const __m128i mask = _mm_set1_epi8(0x0f);
    size_t i;
    (void)full;
    for (i = 0; i < chunks; i++) {
        __m128i v = _mm_loadu_si128((const __m128i *)(src + 16 * i));
        __m128i l = _mm_and_si128(v, mask);
        __m128i h = _mm_and_si128(_mm_srli_epi64(v, 4), mask);
        __m128i p = _mm_xor_si128(_mm_shuffle_epi8(tlo, l), _mm_shuffle_epi8(thi, h));
        __m128i d = _mm_loadu_si128((const __m128i *)(dst + 16 * i));
        _mm_storeu_si128((__m128i *)(dst + 16 * i), _mm_xor_si128(d, p));
    }
#else
    size_t j, n = 16 * chunks;
    (void)lo;
    (void)hi;
    for (j = 0; j < n; j++)
        dst[j] ^= full[src[j]];
#endif
}

#endif
