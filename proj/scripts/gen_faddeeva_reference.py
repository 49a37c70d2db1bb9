#!/usr/bin/env python3
"""Generate the reference grid for the Faddeeva function tests.

Evaluates w(z) = exp(-z^2) erfc(-iz) in 50-digit arithmetic on a grid
covering |z| up to 1e4 and Im z down to -26, and writes
data/faddeeva_reference.txt with one record per line:

    Re(z) Im(z) Re(w) Im(w)

Run from the repository root:  python3 scripts/gen_faddeeva_reference.py
"""

import random

from mpmath import mp, mpc, exp, erfc

mp.dps = 50


def w(z):
    return exp(-z * z) * erfc(-1j * z)


def main():
    rng = random.Random(20240817)
    pts = []

    # log-radial sweep, all quadrants (Im >= -26)
    radii = [10 ** (k / 8.0) for k in range(-16, 33)]  # 1e-2 .. 1e4
    for r in radii:
        for m in range(16):
            theta = 2 * 3.14159265358979323846 * (m + 0.31) / 16
            x = r * mp.cos(theta)
            y = r * mp.sin(theta)
            if y < -26:
                continue
            pts.append(mpc(x, y))

    # real axis and near-real strips
    for k in range(60):
        x = -12 + 24 * k / 59.0
        pts.append(mpc(x, 0))
        pts.append(mpc(x, 1e-8))
        pts.append(mpc(x, -1e-8))
        pts.append(mpc(x, 1e-3))
        pts.append(mpc(x, -1e-3))

    # imaginary axis down to the overflow margin
    for k in range(40):
        y = -25 + 35 * k / 39.0
        pts.append(mpc(0.05, y))

    # random cloud in the working box
    for _ in range(600):
        x = rng.uniform(-30, 30)
        y = rng.uniform(-20, 30)
        pts.append(mpc(x, y))

    with open("data/faddeeva_reference.txt", "w") as f:
        f.write("# Re(z) Im(z) Re(w) Im(w)   [w(z)=exp(-z^2)erfc(-iz), 50-digit reference]\n")
        for z in pts:
            # skip points where exp(-z^2) overflows double precision
            if z.imag < 0 and (z.imag ** 2 - z.real ** 2) > 705:
                continue
            v = w(z)
            if abs(v) > 1e300 or abs(v) < 1e-300:
                continue
            f.write(
                "%.17e %.17e %s %s\n"
                % (
                    float(z.real),
                    float(z.imag),
                    mp.nstr(v.real, 20, strip_zeros=False),
                    mp.nstr(v.imag, 20, strip_zeros=False),
                )
            )


if __name__ == "__main__":
    main()
