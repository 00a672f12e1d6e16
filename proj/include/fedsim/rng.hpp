#pragma once
// Deterministic, labeled random streams. A stream is identified by
// (root seed, label path); identical pairs produce bit-identical draw
// sequences on every platform. The engine is std::mt19937_64 (exactly
// specified by the standard) and every distribution transform here is
// hand-rolled from exact IEEE operations — no std::*_distribution and no
// libm log/cos, whose last-bit behaviour differs between C libraries.

#include <cstdint>
#include <string>
#include <string_view>
#include <random>
#include <vector>

namespace fedsim {

// ln(x) for finite x > 0 from exact primitives (frexp + atanh series);
// bit-identical across platforms, error within ~2 ulp.
double portable_log(double x);

// Inverse standard-normal CDF (rational approximation, |rel err| < 2e-9),
// defined for p in (0,1). Built on portable_log, so platform-stable.
double inverse_normal_cdf(double p);

class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    // Child stream addressed by label path; independent of parent's
    // consumed state, so derivation order never matters.
    RngStream sub(std::string_view label) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform();
    // Uniform on [lo, hi); requires lo < hi.
    double uniform(double lo, double hi);
    // Standard normal via inverse-CDF transform of an open-interval uniform.
    double normal();
    double normal(double mean, double stddev);
    // Unbiased integer in [0, n) via rejection; requires n > 0.
    std::size_t uniform_index(std::size_t n);

    // Fisher–Yates shuffle driven by this stream.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Sample k distinct indices from [0, n), returned sorted ascending.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }

private:
    std::uint64_t seed_;
    std::string label_;
    std::mt19937_64 engine_;
};

} // namespace fedsim
