// NEON kernel variants (aarch64 only, where NEON is a baseline feature).
// Mechanically parallel to the scalar reference: two doubles per vector,
// mul+add instead of fused ops so elementwise kernels stay bit-exact.

#include "fedsim/kernels.hpp"

#include <stdexcept>

#if defined(__aarch64__)
#define FEDSIM_HAVE_NEON_BUILD 1
#include <arm_neon.h>
#endif

namespace fedsim::kernels {

#if FEDSIM_HAVE_NEON_BUILD

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) out += x[i];
    return out;
}

double sumsq_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        out += d * d;
    }
    return out;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double* x, std::size_t n, double s) {
    const float64x2_t sv = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), sv));
    for (; i < n; ++i) x[i] *= s;
}

void add_neon(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void sub_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void elem_min_neon(const double* x, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(acc + i, vminq_f64(vld1q_f64(x + i), vld1q_f64(acc + i)));
    for (; i < n; ++i) acc[i] = x[i] < acc[i] ? x[i] : acc[i];
}

void elem_max_neon(const double* x, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(acc + i, vmaxq_f64(vld1q_f64(x + i), vld1q_f64(acc + i)));
    for (; i < n; ++i) acc[i] = x[i] > acc[i] ? x[i] : acc[i];
}

void acc_sq_diff_neon(const double* x, const double* c, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(c + i));
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vmulq_f64(d, d)));
    }
    for (; i < n; ++i) {
        const double d = x[i] - c[i];
        acc[i] += d * d;
    }
}

const Ops kNeon = {
    "neon",
    dot_neon,  sum_neon,   sumsq_diff_neon,
    axpy_neon, scale_neon, add_neon, sub_neon,
    elem_min_neon, elem_max_neon, acc_sq_diff_neon,
};

} // namespace

bool neon_available() { return true; }

const Ops& neon_ops() { return kNeon; }

#else

bool neon_available() { return false; }

const Ops& neon_ops() { throw std::logic_error("neon kernels not built on this architecture"); }

#endif

} // namespace fedsim::kernels
