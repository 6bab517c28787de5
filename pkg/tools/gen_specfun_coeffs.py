#!/usr/bin/env python3
"""Regenerate the frozen coefficient tables in osmkit/specfun.py.

Fits Chebyshev expansions to the cylinder Bessel functions with mpmath at
40-digit precision:

  small arguments (x <= 8), in t = (x/8)^2:
      J0(x),  J1(x)/x,
      Y0(x) - (2/pi) ln(x/2) J0(x),
      [Y1(x) - (2/pi) (ln(x/2) J1(x) - 1/x)] / x
  large arguments (x > 8), amplitude/phase pair in v = (8/x)^2:
      P0, x*Q0, P1, x*Q1   where
      J0 = sqrt(2/(pi x)) (P0 cos xn - Q0 sin xn),  xn = x - pi/4
      Y0 = sqrt(2/(pi x)) (P0 sin xn + Q0 cos xn)
      J1, Y1 likewise with xn = x - 3 pi/4.

Run `python tools/gen_specfun_coeffs.py` and paste the output into
src/osmkit/specfun.py.  Also prints max abs error of a float64 Clenshaw
evaluation against mpmath on dense grids, which must stay below 1e-12.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 40

N_FIT = 64          # Chebyshev-Gauss nodes used for the fit
TRUNC = mp.mpf("1e-19")  # drop trailing coefficients below this


def cheb_fit(f, n=N_FIT):
    """Chebyshev coefficients c_j of f on [-1,1], f(s) = sum c_j T_j(s).

    c_0 already includes the conventional 1/2 factor, so Clenshaw can use
    the plain sum.
    """
    nodes = [mp.cos(mp.pi * (mp.mpf(i) + mp.mpf("0.5")) / n) for i in range(n)]
    fv = [f(s) for s in nodes]
    coeffs = []
    for j in range(n):
        acc = mp.mpf(0)
        for i in range(n):
            acc += fv[i] * mp.cos(j * mp.pi * (mp.mpf(i) + mp.mpf("0.5")) / n)
        c = 2 * acc / n
        coeffs.append(c / 2 if j == 0 else c)
    # truncate once the tail is negligible
    last = len(coeffs)
    while last > 1 and abs(coeffs[last - 1]) < TRUNC:
        last -= 1
    return coeffs[:last]


def clenshaw(coeffs, s):
    b1 = b2 = 0.0
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * s * b1 - b2 + float(c), b1
    return s * b1 - b2 + float(coeffs[0])


TWO_OVER_PI = 2 / mp.pi


def small_funcs():
    def j0s(s):
        t = (s + 1) / 2
        return mp.besselj(0, 8 * mp.sqrt(t))

    def j1s(s):
        t = (s + 1) / 2
        x = 8 * mp.sqrt(t)
        return mp.besselj(1, x) / x if x > 0 else mp.mpf("0.5")

    def y0s(s):
        t = (s + 1) / 2
        x = 8 * mp.sqrt(t)
        if x == 0:
            return TWO_OVER_PI * mp.euler
        return mp.bessely(0, x) - TWO_OVER_PI * mp.log(x / 2) * mp.besselj(0, x)

    def y1s(s):
        t = (s + 1) / 2
        x = 8 * mp.sqrt(t)
        if x == 0:
            # limit of [Y1 - (2/pi)(ln(x/2) J1 - 1/x)]/x
            return (2 * mp.euler - 1) / (2 * mp.pi)
        g = mp.bessely(1, x) - TWO_OVER_PI * (mp.log(x / 2) * mp.besselj(1, x) - 1 / x)
        return g / x

    return {"J0_SMALL": j0s, "J1_SMALL": j1s, "Y0_SMALL": y0s, "Y1_SMALL": y1s}


def large_funcs():
    def pq(order, x):
        xn = x - (mp.pi / 4 if order == 0 else 3 * mp.pi / 4)
        c = mp.sqrt(2 / (mp.pi * x))
        j = mp.besselj(order, x)
        y = mp.bessely(order, x)
        p = (j * mp.cos(xn) + y * mp.sin(xn)) / c
        q = (-j * mp.sin(xn) + y * mp.cos(xn)) / c
        return p, q

    def make(order, which):
        def f(s):
            v = (s + 1) / 2
            if v == 0:
                return mp.mpf(1) if which == "p" else (
                    -mp.mpf("0.125") if order == 0 else mp.mpf("0.375"))
            x = 8 / mp.sqrt(v)
            p, q = pq(order, x)
            return p if which == "p" else q * x
        return f

    return {
        "P0_LARGE": make(0, "p"), "Q0X_LARGE": make(0, "q"),
        "P1_LARGE": make(1, "p"), "Q1X_LARGE": make(1, "q"),
    }


def emit(name, coeffs):
    print(f"{name} = np.array([")
    for c in coeffs:
        print(f"    {mp.nstr(c, 20, strip_zeros=False)},")
    print("])")


def verify_small(name, coeffs, exact, xs):
    errs = []
    for x in xs:
        s = 2 * (x / 8) ** 2 - 1
        errs.append(abs(clenshaw(coeffs, float(s)) - float(exact(x))))
    print(f"# {name}: n={len(coeffs)} max abs err {max(errs):.3e}")


def main():
    sf = small_funcs()
    lf = large_funcs()
    fits = {}
    for name, f in {**sf, **lf}.items():
        fits[name] = cheb_fit(f)

    xs_small = [mp.mpf(i) / 256 * 8 for i in range(1, 257)]
    verify_small("J0_SMALL", fits["J0_SMALL"], lambda x: mp.besselj(0, x), xs_small)
    verify_small("J1_SMALL", fits["J1_SMALL"], lambda x: mp.besselj(1, x) / x, xs_small)
    verify_small(
        "Y0_SMALL", fits["Y0_SMALL"],
        lambda x: mp.bessely(0, x) - TWO_OVER_PI * mp.log(x / 2) * mp.besselj(0, x),
        xs_small)
    verify_small(
        "Y1_SMALL", fits["Y1_SMALL"],
        lambda x: (mp.bessely(1, x) - TWO_OVER_PI * (mp.log(x / 2) * mp.besselj(1, x) - 1 / x)) / x,
        xs_small)

    # large-argument check: reconstruct J/Y from the fitted P, Q in float64
    xs_large = np.exp(np.linspace(np.log(8.0), np.log(1e4), 400))
    for order in (0, 1):
        pj = fits[f"P{order}_LARGE"]
        qj = fits[f"Q{order}X_LARGE"]
        errj = erry = 0.0
        for x in xs_large:
            v = (8.0 / x) ** 2
            s = 2 * v - 1
            p = clenshaw(pj, s)
            q = clenshaw(qj, s) / x
            xn = x - (np.pi / 4 if order == 0 else 3 * np.pi / 4)
            c = np.sqrt(2 / (np.pi * x))
            jv = c * (p * np.cos(xn) - q * np.sin(xn))
            yv = c * (p * np.sin(xn) + q * np.cos(xn))
            errj = max(errj, abs(jv - float(mp.besselj(order, x))))
            erry = max(erry, abs(yv - float(mp.bessely(order, x))))
        print(f"# order {order}: n_P={len(pj)} n_Q={len(qj)} "
              f"max abs err J {errj:.3e}  Y {erry:.3e}")

    print()
    for name, coeffs in fits.items():
        emit(name, coeffs)


if __name__ == "__main__":
    main()
