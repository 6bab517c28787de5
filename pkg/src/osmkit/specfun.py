"""Cylinder and spherical Bessel functions for the Helmholtz kernels.

Provides J0, J1, Y0, Y1, the outgoing Hankel functions H0^(1), H1^(1), and
the spherical j0.  Evaluation is piecewise: Chebyshev expansions in (x/8)^2
on [0, 8], amplitude/phase expansions in (8/x)^2 beyond.  Coefficients are
frozen from tools/gen_specfun_coeffs.py (mpmath fits, max abs error below
5e-15 on [0, 1e4]).

All routines accept scalars or numpy arrays and are pure functions.
"""

from __future__ import annotations

import numpy as np

TWO_OVER_PI = 2.0 / np.pi
PI_OVER_4 = np.pi / 4.0
THREE_PI_OVER_4 = 3.0 * np.pi / 4.0

# -- Chebyshev tables (see tools/gen_specfun_coeffs.py) ---------------------

J0_SMALL = np.array([
    0.15772797147489011956,
    -0.0087234423528522212908,
    0.26517861320333680987,
    -0.37009499387264977903,
    0.15806710233209726128,
    -0.034893769411408885163,
    0.0048191800694676044968,
    -0.00046062616620627504750,
    0.000032460328821005080806,
    -1.7619469077621507495e-6,
    7.6081635924187818670e-8,
    -2.6792535305576728983e-9,
    7.8486963144794644165e-11,
    -1.9438346867370165706e-12,
    4.1253205956343739326e-14,
    -7.5885081254475463376e-16,
    1.2218515873961411034e-17,
    -1.7367896077002367683e-19,
])
J1_SMALL = np.array([
    0.081044846325658115105,
    -0.14897514506765210906,
    0.16099926235720970255,
    -0.082680491766817906597,
    0.022213639654966035410,
    -0.0036469406007692759578,
    0.00040503377283548218331,
    -0.000032555548668572585168,
    1.9858774049915167414e-6,
    -9.5219847567504361821e-8,
    3.6871337590971482385e-9,
    -1.1780266226958848398e-10,
    3.1601545803480033215e-12,
    -7.2217552396517734285e-14,
    1.4232144003513942316e-15,
    -2.4441972916190463893e-17,
    3.6912682997929332622e-19,
])
Y0_SMALL = np.array([
    0.036454698091160443610,
    -0.27832370940758248315,
    0.29604999902071481676,
    0.098255084081878640577,
    -0.10755155280627783505,
    0.031799074084414515427,
    -0.0051613971058107149490,
    0.00054985253200390115387,
    -0.000041996983149420130705,
    2.4290361107923793976e-6,
    -1.1049969793472956112e-7,
    4.0665173659791104930e-9,
    -1.2374148898289852487e-10,
    3.1685725528945944421e-12,
    -6.9269560324310010835e-14,
    1.3086308625876684015e-15,
    -2.1586201986914483197e-17,
    3.1368631824799381496e-19,
])
Y1_SMALL = np.array([
    0.038300769852423778829,
    -0.081825614127328264064,
    -0.024867707612196400509,
    0.047967452752746982920,
    -0.018525884510898022173,
    0.0036806076878235111017,
    -0.00046272540602933687152,
    0.000040694002695808698676,
    -2.6617695125295626191e-6,
    1.3506026913254338045e-7,
    -5.4835241103362765753e-9,
    1.8245086841229007743e-10,
    -5.0706666365911291344e-12,
    1.1956162517587949013e-13,
    -2.4231624427124732278e-15,
    4.2681265130729623577e-17,
    -6.5960609787230412421e-19,
])
P0_LARGE = np.array([
    0.99946034934751866537,
    -0.00053652204681321174247,
    3.0751847875194746219e-6,
    -5.1705945376060977010e-8,
    1.6306464635151383095e-9,
    -7.8640913772370699990e-11,
    5.1682623873491924622e-12,
    -4.3045788699253912224e-13,
    4.3265957431549405642e-14,
    -5.0690340959352360775e-15,
    6.7480722157338737041e-16,
    -1.0011513723467785834e-16,
    1.6305919233744184736e-17,
    -2.8808661694828712020e-18,
    5.4680827832590383688e-19,
    -1.1062036496829716611e-19,
])
Q0X_LARGE = np.array([
    -0.12444683684269607280,
    0.00054708159540893196795,
    -5.9315987288485178116e-6,
    1.4377965798375193428e-7,
    -5.8175327494930559835e-9,
    3.3760975237349907551e-10,
    -2.5653979367973077957e-11,
    2.4049161002813650490e-12,
    -2.6690625482579415976e-13,
    3.4041800321963688986e-14,
    -4.8799441053120400078e-15,
    7.7297031762426053902e-16,
    -1.3348852171502517040e-16,
    2.4865952389390515470e-17,
    -4.9528926298865159420e-18,
    1.0473158973776097239e-18,
    -2.3369301722114218905e-19,
])
P1_LARGE = np.array([
    1.0009030408600136999,
    0.00089898983308594085557,
    -3.9872843004889085228e-6,
    6.1776339606442985349e-8,
    -1.8718907491063066087e-9,
    8.8168986595823388985e-11,
    -5.7048636403956447019e-12,
    4.6991955152305423752e-13,
    -4.6842237839904892216e-14,
    5.4526748960447171683e-15,
    -7.2211808422740179189e-16,
    1.0667689114335412457e-16,
    -1.7312313216116334973e-17,
    3.0492991197665872261e-18,
    -5.7724216549874536589e-19,
    1.1650571755711490528e-19,
])
Q1X_LARGE = np.array([
    0.37422229655628260193,
    -0.00077021788393256634594,
    7.3108922063643632996e-6,
    -1.6767825107266737968e-7,
    6.5833546621204433032e-9,
    -3.7490909505415561844e-10,
    2.8121750359748864681e-11,
    -2.6114525394623199408e-12,
    2.8774212663332233544e-13,
    -3.6490019160618377554e-14,
    5.2066263662267071631e-15,
    -8.2153180254585942908e-16,
    1.4141084390211833283e-16,
    -2.6267615898385291684e-17,
    5.2192649196714082425e-18,
    -1.1012617187879590425e-18,
    2.4525932320263115111e-19,
])


def _clenshaw(coeffs: np.ndarray, s: np.ndarray) -> np.ndarray:
    b1 = np.zeros_like(s)
    b2 = np.zeros_like(s)
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * s * b1 - b2 + c, b1
    return s * b1 - b2 + coeffs[0]


def _check_domain(x, name: str, positive: bool):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name}: argument must be finite")
    if positive:
        if np.any(x <= 0):
            raise ValueError(f"{name}: argument must be > 0")
    elif np.any(x < 0):
        raise ValueError(f"{name}: argument must be >= 0")
    return x


def _amp_phase(x: np.ndarray, order: int):
    """P, Q of the amplitude/phase form for x > 8."""
    v = (8.0 / x) ** 2
    s = 2.0 * v - 1.0
    if order == 0:
        return _clenshaw(P0_LARGE, s), _clenshaw(Q0X_LARGE, s) / x
    return _clenshaw(P1_LARGE, s), _clenshaw(Q1X_LARGE, s) / x


def _cyl_pair(x: np.ndarray, order: int):
    """(J_order, Y_order) on x > 0, piecewise evaluation."""
    j = np.empty_like(x)
    y = np.empty_like(x)
    small = x <= 8.0
    if np.any(small):
        xs = x[small]
        s = 2.0 * (xs / 8.0) ** 2 - 1.0
        log_half = np.log(xs / 2.0)
        if order == 0:
            j0 = _clenshaw(J0_SMALL, s)
            j[small] = j0
            y[small] = TWO_OVER_PI * log_half * j0 + _clenshaw(Y0_SMALL, s)
        else:
            j1 = _clenshaw(J1_SMALL, s) * xs
            j[small] = j1
            y[small] = (TWO_OVER_PI * (log_half * j1 - 1.0 / xs)
                        + _clenshaw(Y1_SMALL, s) * xs)
    big = ~small
    if np.any(big):
        xb = x[big]
        p, q = _amp_phase(xb, order)
        xn = xb - (PI_OVER_4 if order == 0 else THREE_PI_OVER_4)
        c = np.sqrt(TWO_OVER_PI / xb)
        cos_xn, sin_xn = np.cos(xn), np.sin(xn)
        j[big] = c * (p * cos_xn - q * sin_xn)
        y[big] = c * (p * sin_xn + q * cos_xn)
    return j, y


def _scalarize(x, values):
    if np.isscalar(x) or np.ndim(x) == 0:
        v = values[()]
        return complex(v) if np.iscomplexobj(values) else float(v)
    return values


def bessel_j0(x):
    """Bessel function of the first kind, order 0, for x >= 0."""
    xa = _check_domain(x, "bessel_j0", positive=False)
    out = np.empty_like(xa)
    small = xa <= 8.0
    out[small] = _clenshaw(J0_SMALL, 2.0 * (xa[small] / 8.0) ** 2 - 1.0)
    if np.any(~small):
        out[~small] = _cyl_pair(xa[~small], 0)[0]
    return _scalarize(x, out)


def bessel_j1(x):
    """Bessel function of the first kind, order 1, for x >= 0."""
    xa = _check_domain(x, "bessel_j1", positive=False)
    out = np.empty_like(xa)
    small = xa <= 8.0
    xs = xa[small]
    out[small] = _clenshaw(J1_SMALL, 2.0 * (xs / 8.0) ** 2 - 1.0) * xs
    if np.any(~small):
        out[~small] = _cyl_pair(xa[~small], 1)[0]
    return _scalarize(x, out)


def bessel_y0(x):
    """Bessel function of the second kind, order 0, for x > 0."""
    xa = _check_domain(x, "bessel_y0", positive=True)
    return _scalarize(x, _cyl_pair(xa, 0)[1])


def bessel_y1(x):
    """Bessel function of the second kind, order 1, for x > 0."""
    xa = _check_domain(x, "bessel_y1", positive=True)
    return _scalarize(x, _cyl_pair(xa, 1)[1])


def hankel1(order: int, x):
    """Outgoing Hankel function H_order^(1)(x) = J + iY for x > 0, order 0 or 1."""
    if order not in (0, 1):
        raise ValueError("hankel1: order must be 0 or 1")
    xa = _check_domain(x, "hankel1", positive=True)
    j, y = _cyl_pair(xa, order)
    return _scalarize(x, j + 1j * y)


def spherical_j0(x):
    """Spherical Bessel j0(x) = sin(x)/x with j0(0) = 1, for x >= 0."""
    xa = _check_domain(x, "spherical_j0", positive=False)
    out = np.empty_like(xa)
    tiny = xa < 1e-4
    xt = xa[tiny]
    # two series terms keep the relative error below 1e-17 on [0, 1e-4)
    out[tiny] = 1.0 - xt * xt / 6.0 * (1.0 - xt * xt / 20.0)
    out[~tiny] = np.sin(xa[~tiny]) / xa[~tiny]
    return _scalarize(x, out)
