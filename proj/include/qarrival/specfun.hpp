#pragma once

#include <complex>

namespace qarrival::specfun {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
// Relative error <= 1e-12 for |z| <= 1e4 and Im z >= -26.
// Throws OverflowError deep in the lower half-plane where exp(-z^2)
// leaves the representable range.
std::complex<double> faddeeva_w(std::complex<double> z);

// dw/dz = -2 z w(z) + 2i/sqrt(pi)
std::complex<double> faddeeva_w_prime(std::complex<double> z);

}  // namespace qarrival::specfun
