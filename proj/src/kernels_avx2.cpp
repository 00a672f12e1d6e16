// AVX2 kernel variants (x86-64 only). Functions carry the avx2 target
// attribute so the translation unit builds without global -mavx2 and the
// dispatcher can gate them behind a runtime CPU check. Elementwise kernels
// use mul+add rather than FMA to stay bit-exact with the scalar reference.

#include "fedsim/kernels.hpp"

#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#define FEDSIM_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#endif

namespace fedsim::kernels {

#if FEDSIM_HAVE_AVX2_BUILD

namespace {

__attribute__((target("avx2"))) double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double out = hsum(acc);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

__attribute__((target("avx2"))) double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double out = hsum(acc);
    for (; i < n; ++i) out += x[i];
    return out;
}

__attribute__((target("avx2"))) double sumsq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double out = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        out += d * d;
    }
    return out;
}

__attribute__((target("avx2"))) void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

__attribute__((target("avx2"))) void scale_avx2(double* x, std::size_t n, double s) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), sv));
    for (; i < n; ++i) x[i] *= s;
}

__attribute__((target("avx2"))) void add_avx2(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

__attribute__((target("avx2"))) void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

__attribute__((target("avx2"))) void elem_min_avx2(const double* x, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(acc + i, _mm256_min_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(acc + i)));
    for (; i < n; ++i) acc[i] = x[i] < acc[i] ? x[i] : acc[i];
}

__attribute__((target("avx2"))) void elem_max_avx2(const double* x, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(acc + i, _mm256_max_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(acc + i)));
    for (; i < n; ++i) acc[i] = x[i] > acc[i] ? x[i] : acc[i];
}

__attribute__((target("avx2"))) void acc_sq_diff_avx2(const double* x, const double* c, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(c + i));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(d, d)));
    }
    for (; i < n; ++i) {
        const double d = x[i] - c[i];
        acc[i] += d * d;
    }
}

const Ops kAvx2 = {
    "avx2",
    dot_avx2,  sum_avx2,   sumsq_diff_avx2,
    axpy_avx2, scale_avx2, add_avx2, sub_avx2,
    elem_min_avx2, elem_max_avx2, acc_sq_diff_avx2,
};

} // namespace

bool avx2_available() { return __builtin_cpu_supports("avx2") != 0; }

const Ops& avx2_ops() {
    if (!avx2_available()) throw std::logic_error("avx2 kernels unavailable on this cpu");
    return kAvx2;
}

#else

bool avx2_available() { return false; }

const Ops& avx2_ops() { throw std::logic_error("avx2 kernels not built on this architecture"); }

#endif

} // namespace fedsim::kernels
