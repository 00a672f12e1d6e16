#pragma once
// Dense double-precision kernels behind the simulator's vector math.
// A scalar reference implementation always exists; AVX2 (x86) and NEON
// (aarch64) variants are selected at runtime and equivalence-tested
// against the reference. Elementwise kernels (axpy, scale, add, sub,
// elem_min, elem_max, acc_sq_diff) preserve scalar operation order and
// avoid FMA, so they are bit-exact across backends. Reduction kernels
// (dot, sum, sumsq_diff) use per-lane accumulators and may differ from
// the reference in the last bits.

#include <cstddef>

namespace fedsim::kernels {

enum class Backend { scalar, avx2, neon };

struct Ops {
    const char* name;
    // reductions
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sumsq_diff)(const double* a, const double* b, std::size_t n);
    // elementwise
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);   // y += alpha*x
    void (*scale)(double* x, std::size_t n, double s);                       // x *= s
    void (*add)(const double* x, double* y, std::size_t n);                  // y += x
    void (*sub)(const double* a, const double* b, double* out, std::size_t n); // out = a-b
    void (*elem_min)(const double* x, double* acc, std::size_t n);           // acc = min(acc,x)
    void (*elem_max)(const double* x, double* acc, std::size_t n);           // acc = max(acc,x)
    void (*acc_sq_diff)(const double* x, const double* c, double* acc, std::size_t n); // acc += (x-c)^2
};

const Ops& scalar_ops();

bool avx2_available();        // true only on x86 hosts whose CPU reports AVX2
const Ops& avx2_ops();        // throws std::logic_error when unavailable

bool neon_available();        // true on aarch64 builds (NEON is baseline there)
const Ops& neon_ops();        // throws std::logic_error when unavailable

// Runtime-selected backend: best available unless overridden.
const Ops& active();
void force_backend(Backend b);   // tests: pin a specific backend
void reset_backend();            // back to auto-detection

} // namespace fedsim::kernels
