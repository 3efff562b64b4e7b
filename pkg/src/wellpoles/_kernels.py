"""Numeric kernels for the channel pole functions.

Every hot loop in the engine (axis scans, Newton polishing, continuation
correctors, winding contours) bottoms out in the scalar kernels here. The
kernels are written once as plain functions; when numba is importable and the
environment variable ``WELLPOLES_NUMBA`` is not set to ``0``, they are wrapped
with ``numba.njit(cache=True)``. Vectorized numpy twins of the grid drivers
are always available and become the public grid entry points on the pure
path, so both paths stay exercised.

Scaling convention
------------------
For complex momentum k the interior phase z = a*K (K the interior momentum)
can have |Im z| in the hundreds, where cos/sin overflow. All kernel values
carry the factor E = exp(-|Im z|):

    C_s = cos(z) * E,   S_s = sin(z) * E

computed branch-free from exact half-angle identities, so they never
overflow. Every returned denominator/derivative here is the true value times
the same E, which cancels in Newton ratios and winding arguments. ``E`` is
returned alongside so callers can unscale when the true magnitude is needed.

Channel conventions
-------------------
ch = 0 selects the even channel denominator

    d_plus(k) = k*cos(aK) - i*K*sin(aK)

written in the manifestly even-in-K form k*C - i*a*w*Z with w = K^2 and
Z = sinc(aK). ch = 1 selects the *regularized* odd channel pole function

    d_minus(k) = cos(aK) - i*a*k*sinc(aK)  =  (K*cos(aK) - i*k*sin(aK)) / K

which shares the zeros of the literal odd denominator except the spurious
K = 0 one, is even in K, and is entire in k^2.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("WELLPOLES_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "no", "off")

USING_NUMBA = False
if _want_numba:
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:
        USING_NUMBA = False


def _jit(fn):
    if USING_NUMBA:
        return _njit(cache=True)(fn)
    return fn


CH_PLUS = 0
CH_MINUS = 1

# series cutoffs: sinc below 1e-4 (next omitted term ~1e-18), the curvature
# block G below 0.1 (series truncation error ~1e-14 relative)
_SINC_CUT = 1e-4
_G_CUT = 0.1


@_jit
def trig_scaled(z):
    """Scaled trig blocks at complex z.

    Returns (C, S, Z, G, E) where C = cos(z)*E, S = sin(z)*E, Z = sinc(z)*E,
    G = ((cos(z) - sinc(z))/z**2)*E and E = exp(-|Im z|). Exact half-angle
    forms keep everything finite for arbitrarily large |Im z|.
    """
    x = z.real
    y = z.imag
    ay = abs(y)
    sgn = 1.0 if y >= 0.0 else -1.0
    e2 = np.exp(-2.0 * ay)
    cp = 0.5 * (1.0 + e2)
    cm = 0.5 * (1.0 - e2)
    cx = np.cos(x)
    sx = np.sin(x)
    C = complex(cx * cp, -sgn * sx * cm)
    S = complex(sx * cp, sgn * cx * cm)
    E = np.exp(-ay)
    az = abs(z)
    if az >= _SINC_CUT:
        Z = S / z
    else:
        z2 = z * z
        Z = (1.0 - z2 / 6.0 + z2 * z2 / 120.0) * E
    if az >= _G_CUT:
        G = (C - Z) / (z * z)
    else:
        z2 = z * z
        G = (-1.0 / 3.0 + z2 / 30.0 - z2 * z2 / 840.0 + z2 * z2 * z2 / 45360.0) * E
    return C, S, Z, G, E


@_jit
def denom_scaled(k, gamma, m, a, U, ch):
    """Channel pole function and derivatives, scaled by E = exp(-|Im aK|).

    Returns (d, dk, da, E): the pole function, its k-derivative, and its
    derivative along the coupling phase alpha (gamma = e^{i alpha}), all
    carrying the common factor E.
    """
    w = k * k + 2.0 * m * gamma * U
    z = a * np.sqrt(w)
    C, S, Z, G, E = trig_scaled(z)
    if ch == CH_PLUS:
        d = k * C - 1j * a * w * Z
        dk = C - (a * a) * (k * k) * Z - 1j * a * k * (Z + C)
        dw = -0.5 * (a * a) * k * Z - 0.5j * a * (Z + C)
    else:
        d = C - 1j * a * k * Z
        dk = -1j * a * Z - (a * a) * k * Z - 1j * (a * a * a) * (k * k) * G
        dw = -0.5 * (a * a) * (Z + 1j * a * k * G)
    da = dw * (2j * m * U * gamma)
    return d, dk, da, E


@_jit
def newton_pole(k0, gamma, m, a, U, ch, step_tol, max_iter):
    """Newton iteration on the channel pole function.

    Stops when |step| < step_tol*(1+|k|). Returns (k, iterations, converged).
    The ratio d/dk is scale-invariant, so overflow never enters.
    """
    k = k0
    for it in range(max_iter):
        d, dk, da, E = denom_scaled(k, gamma, m, a, U, ch)
        if dk == 0.0:
            return k, it, False
        step = d / dk
        k = k - step
        if abs(step) < step_tol * (1.0 + abs(k)):
            return k, it + 1, True
    return k, max_iter, False


def _axis_phi_loop(kappas, gamma, m, a, U, ch):
    """Real pole function along the imaginary axis k = i*kappa, real gamma.

    For the even channel phi = Re(-i * d_plus(i kappa)); for the odd channel
    phi = Re(d_minus(i kappa)). Both are real-valued up to roundoff when
    gamma is real. Values carry the scaling factor E (positive), which does
    not affect sign changes.
    """
    n = kappas.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        k = 1j * kappas[i]
        d, dk, da, E = denom_scaled(k, gamma, m, a, U, ch)
        if ch == CH_PLUS:
            out[i] = (-1j * d).real
        else:
            out[i] = d.real
    return out


def _grid_denom_dk_loop(ks, gamma, m, a, U, ch):
    """Scaled pole function and k-derivative on an array of momenta."""
    n = ks.shape[0]
    d_out = np.empty(n, dtype=np.complex128)
    dk_out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        d, dk, da, E = denom_scaled(ks[i], gamma, m, a, U, ch)
        d_out[i] = d
        dk_out[i] = dk
    return d_out, dk_out


def _trig_scaled_numpy(z):
    """Vectorized twin of trig_scaled over a complex array."""
    x = z.real
    y = z.imag
    ay = np.abs(y)
    sgn = np.where(y >= 0.0, 1.0, -1.0)
    e2 = np.exp(-2.0 * ay)
    cp = 0.5 * (1.0 + e2)
    cm = 0.5 * (1.0 - e2)
    cx = np.cos(x)
    sx = np.sin(x)
    C = cx * cp - 1j * sgn * sx * cm
    S = sx * cp + 1j * sgn * cx * cm
    E = np.exp(-ay)
    az = np.abs(z)
    zsafe = np.where(az >= _SINC_CUT, z, 1.0)
    z2 = z * z
    Z = np.where(az >= _SINC_CUT, S / zsafe, (1.0 - z2 / 6.0 + z2 * z2 / 120.0) * E)
    zsafe2 = np.where(az >= _G_CUT, z, 1.0)
    G = np.where(
        az >= _G_CUT,
        (C - Z) / (zsafe2 * zsafe2),
        (-1.0 / 3.0 + z2 / 30.0 - z2 * z2 / 840.0 + z2 * z2 * z2 / 45360.0) * E,
    )
    return C, S, Z, G, E


def denom_scaled_numpy(ks, gamma, m, a, U, ch):
    """Vectorized twin of denom_scaled over an array of momenta."""
    k = np.asarray(ks, dtype=np.complex128)
    w = k * k + 2.0 * m * gamma * U
    z = a * np.sqrt(w)
    C, S, Z, G, E = _trig_scaled_numpy(z)
    if ch == CH_PLUS:
        d = k * C - 1j * a * w * Z
        dk = C - (a * a) * (k * k) * Z - 1j * a * k * (Z + C)
        dw = -0.5 * (a * a) * k * Z - 0.5j * a * (Z + C)
    else:
        d = C - 1j * a * k * Z
        dk = -1j * a * Z - (a * a) * k * Z - 1j * (a * a * a) * (k * k) * G
        dw = -0.5 * (a * a) * (Z + 1j * a * k * G)
    da = dw * (2j * m * U * gamma)
    return d, dk, da, E


def axis_phi_numpy(kappas, gamma, m, a, U, ch):
    """Vectorized twin of the axis driver."""
    ks = 1j * np.asarray(kappas, dtype=np.float64)
    d, dk, da, E = denom_scaled_numpy(ks, gamma, m, a, U, ch)
    if ch == CH_PLUS:
        return (-1j * d).real.copy()
    return d.real.copy()


def grid_denom_dk_numpy(ks, gamma, m, a, U, ch):
    """Vectorized twin of the grid driver."""
    d, dk, da, E = denom_scaled_numpy(ks, gamma, m, a, U, ch)
    return d, dk


# keep undecorated references for cross-path agreement tests
axis_phi_loop_py = _axis_phi_loop
grid_denom_dk_loop_py = _grid_denom_dk_loop

if USING_NUMBA:
    axis_phi = _jit(_axis_phi_loop)
    grid_denom_dk = _jit(_grid_denom_dk_loop)
else:
    axis_phi = axis_phi_numpy
    grid_denom_dk = grid_denom_dk_numpy


def denom_plain(k, gamma, m, a, U, ch):
    """Unscaled channel pole function and k-derivative.

    Overflows to inf when |Im aK| exceeds ~709; use the scaled form there.
    """
    d, dk, da, E = denom_scaled(complex(k), complex(gamma), m, a, U, ch)
    return d / E, dk / E
