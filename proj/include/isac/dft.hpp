#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace isac {

using cdouble = std::complex<double>;

// Forward DFT: X[n] = sum_l x[l] e^{-j 2 pi n l / N}  (no 1/N factor).
// Inverse DFT: x[l] = (1/N) sum_n X[n] e^{+j 2 pi n l / N}.
// Radix-2 in-place when N is a power of two, direct evaluation otherwise
// (transform lengths here are a few hundred at most).
std::vector<cdouble> dft(const std::vector<cdouble>& x, bool inverse = false);

inline std::vector<cdouble> idft(const std::vector<cdouble>& x) { return dft(x, true); }

}  // namespace isac
