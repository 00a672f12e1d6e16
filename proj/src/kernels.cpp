#include "fedsim/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

namespace fedsim::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void add_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void elem_min_scalar(const double* x, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = std::min(acc[i], x[i]);
}

void elem_max_scalar(const double* x, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = std::max(acc[i], x[i]);
}

void acc_sq_diff_scalar(const double* x, const double* c, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - c[i];
        acc[i] += d * d;
    }
}

const Ops kScalar = {
    "scalar",
    dot_scalar,  sum_scalar,   sumsq_diff_scalar,
    axpy_scalar, scale_scalar, add_scalar, sub_scalar,
    elem_min_scalar, elem_max_scalar, acc_sq_diff_scalar,
};

std::atomic<const Ops*> g_active{nullptr};

const Ops* detect_best() {
    if (avx2_available()) return &avx2_ops();
    if (neon_available()) return &neon_ops();
    return &kScalar;
}

} // namespace

const Ops& scalar_ops() { return kScalar; }

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = detect_best();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void force_backend(Backend b) {
    switch (b) {
    case Backend::scalar: g_active.store(&kScalar, std::memory_order_release); return;
    case Backend::avx2:   g_active.store(&avx2_ops(), std::memory_order_release); return;
    case Backend::neon:   g_active.store(&neon_ops(), std::memory_order_release); return;
    }
    throw std::logic_error("force_backend: unknown backend");
}

void reset_backend() { g_active.store(detect_best(), std::memory_order_release); }

} // namespace fedsim::kernels
