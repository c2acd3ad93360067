#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace isac {

// Counter-based deterministic RNG. Every consumer derives its own stream from
// a (seed, tags...) key, so parallel trials / pulses reproduce bit-identically
// regardless of scheduling. Output does not depend on libstdc++ distribution
// internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) { next(); next(); }

    // Derive a sub-stream keyed by up to four tags.
    static Rng stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                      std::uint64_t c = 0, std::uint64_t d = 0) {
        std::uint64_t h = seed;
        h = mix(h ^ 0x9e3779b97f4a7c15ULL, a);
        h = mix(h, b);
        h = mix(h, c);
        h = mix(h, d);
        return Rng(h);
    }

    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t uniform_index(std::uint64_t n) { return next() % n; }

    // Standard normal via Box-Muller.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double phi = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    // Circularly-symmetric complex Gaussian with E|z|^2 = var.
    std::complex<double> cgauss(double var) {
        double s = std::sqrt(var / 2.0);
        return {s * gauss(), s * gauss()};
    }

private:
    static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
        return h ^ (h >> 27);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace isac
