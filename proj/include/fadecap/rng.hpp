#pragma once

// Counter-based random generator keyed by (seed, stream). Draw n of stream s
// is a pure function of (seed, s, n), so parallel sweeps can hand each task
// its own stream and reproduce the serial results exactly.

#include <cmath>
#include <complex>
#include <cstdint>

namespace fadecap::rng {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(a ^ 0x2545f4914f6cdd1dULL);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return mix64(h + 0x452821e638d01377ULL);
}

}  // namespace detail

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t next_u64() { return detail::mix3(seed_, stream_, counter_++); }

    /// Uniform in (0, 1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (consumes two uniforms).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Proper complex normal with E|z|^2 = 1 (independent re/im, variance 1/2).
    std::complex<double> complex_normal() {
        const double s = std::sqrt(0.5);
        double re = normal();
        double im = normal();
        return {s * re, s * im};
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fadecap::rng
