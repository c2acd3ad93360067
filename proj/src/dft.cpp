#include "isac/dft.hpp"

#include <cmath>

namespace isac {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble u = a[i + k];
                cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

std::vector<cdouble> dft(const std::vector<cdouble>& x, bool inverse) {
    const std::size_t n = x.size();
    std::vector<cdouble> out(x);
    if (n <= 1) return out;
    if (is_pow2(n)) {
        fft_radix2(out, inverse);
    } else {
        const double sign = inverse ? 2.0 : -2.0;
        for (std::size_t k = 0; k < n; ++k) {
            cdouble acc(0.0, 0.0);
            for (std::size_t l = 0; l < n; ++l) {
                const double ang = sign * kPi * static_cast<double>(k * l % n) / static_cast<double>(n);
                acc += x[l] * cdouble(std::cos(ang), std::sin(ang));
            }
            out[k] = acc;
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : out) v *= scale;
    }
    return out;
}

}  // namespace isac
