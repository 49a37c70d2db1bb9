// Faddeeva function after the algorithm of Poppe & Wijers (ACM TOMS 680):
// power series near the origin, truncated Taylor/recurrence scheme in an
// intermediate annulus, Laplace continued fraction far out.  Upper
// half-plane (and real axis) is evaluated directly; the lower half-plane
// uses w(z) = 2 exp(-z^2) - w(-z).

#include "qarrival/specfun.hpp"

#include <cmath>

#include "qarrival/errors.hpp"

namespace qarrival::specfun {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628695;  // 1/sqrt(pi)

// Core evaluation for y = Im z >= 0.  x, y finite.
std::complex<double> wofz_upper(double x, double y) {
    const double xabs = std::fabs(x);
    const double yabs = y;
    // scaled coordinates used for regime selection
    const double xq = xabs / 6.3;
    const double yq = yabs / 4.4;
    const double qrho2 = xq * xq + yq * yq;

    const double xquad = (xabs - yabs) * (xabs + yabs);  // x^2 - y^2
    const double yquad = 2.0 * xabs * yabs;

    double u = 0.0, v = 0.0;

    if (qrho2 < 0.085264) {
        // Maclaurin series for the "plasma dispersion"-like part.
        const double qrho = (1.0 - 0.85 * yq) * std::sqrt(qrho2);
        const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
        double xsum = 1.0 / static_cast<double>(2 * n + 1);
        double ysum = 0.0;
        for (int i = n; i >= 1; --i) {
            const double xaux = (xsum * xquad - ysum * yquad) / static_cast<double>(i);
            ysum = (xsum * yquad + ysum * xquad) / static_cast<double>(i);
            xsum = xaux + 1.0 / static_cast<double>(2 * i - 1);
        }
        const double u1 = -2.0 * kInvSqrtPi * (xsum * yabs + ysum * xabs) + 1.0;
        const double v1 = 2.0 * kInvSqrtPi * (xsum * xabs - ysum * yabs);
        const double daux = std::exp(-xquad);
        const double u2 = daux * std::cos(yquad);
        const double v2 = -daux * std::sin(yquad);
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        double h = 0.0, h2 = 0.0, qlambda = 0.0;
        int kapn = 0, nu = 0;
        const double qrho = std::sqrt(qrho2);
        if (qrho < 1.0) {
            const double c = (1.0 - yq) * std::sqrt(1.0 - qrho2);
            h = 1.88 * c;
            h2 = 2.0 * h;
            kapn = static_cast<int>(std::lround(7.0 + 34.0 * c));
            nu = static_cast<int>(std::lround(16.0 + 26.0 * c));
        } else {
            h = 0.0;
            kapn = 0;
            nu = static_cast<int>(3.0 + 1442.0 / (26.0 * qrho + 77.0));
        }
        const bool use_h = (h > 0.0);
        if (use_h) qlambda = std::pow(h2, kapn);

        double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
        for (int n = nu; n >= 0; --n) {
            const int np1 = n + 1;
            const double tx = yabs + h + np1 * rx;
            const double ty = xabs - np1 * ry;
            double c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if (use_h && n <= kapn) {
                const double tx2 = qlambda + sx;
                sx = rx * tx2 - ry * sy;
                sy = ry * tx2 + rx * sy;
                qlambda /= h2;
            }
        }
        if (h == 0.0) {
            u = 2.0 * kInvSqrtPi * rx;
            v = 2.0 * kInvSqrtPi * ry;
        } else {
            u = 2.0 * kInvSqrtPi * sx;
            v = 2.0 * kInvSqrtPi * sy;
        }
        if (yabs == 0.0) u = std::exp(-xabs * xabs);
    }

    // map back from |x| to the requested sign: w(-x+iy) = conj(w(x+iy))
    if (x < 0.0) v = -v;
    return {u, v};
}

}  // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
    const double x = z.real();
    const double y = z.imag();
    if (std::isnan(x) || std::isnan(y)) {
        throw ValidationError("faddeeva_w: NaN argument");
    }
    if (y >= 0.0) {
        return wofz_upper(x, y);
    }
    // lower half-plane: w(z) = 2 exp(-z^2) - w(-z)
    const double xquad = (x - y) * (x + y);  // x^2 - y^2
    if (-xquad > 708.0) {
        throw OverflowError("faddeeva_w: exp(-z^2) overflows for Im z < 0");
    }
    const double yquad = 2.0 * x * y;
    const double e = std::exp(-xquad);
    const std::complex<double> twoexp(2.0 * e * std::cos(yquad),
                                      -2.0 * e * std::sin(yquad));
    return twoexp - wofz_upper(-x, -y);
}

std::complex<double> faddeeva_w_prime(std::complex<double> z) {
    return -2.0 * z * faddeeva_w(z) + std::complex<double>(0.0, 2.0 * kInvSqrtPi);
}

}  // namespace qarrival::specfun
