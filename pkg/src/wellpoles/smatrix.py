"""Closed-form S-matrix of the 1D symmetric rectangular potential.

The potential is -gamma*U on the interval [-a, a] (zero outside), with
complex coupling gamma = e^{i alpha} rotating the well from attractive
(alpha = 0) to repulsive (alpha = pi). Units: hbar = 1, energy = k^2/(2m).

Parity decouples the 2x2 S-matrix into even ('plus') and odd ('minus')
channels; the similarity transform between the plane-wave basis and the
parity basis is exposed for testing. Channel poles are zeros of the channel
denominators, tracked everywhere through the kernels in ``_kernels``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import PoleHit

POLE_HIT_SCALE = 1e-13


class Channel(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, name: str) -> "Channel":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown channel {name!r}; expected 'plus' or 'minus'") from None

    @property
    def code(self) -> int:
        return _k.CH_PLUS if self is Channel.PLUS else _k.CH_MINUS


@dataclass(frozen=True)
class PotentialSpec:
    """Rectangular well parameters: mass m, half-width a, depth scale U >= 0."""

    m: float = 1.0
    a: float = 1.5
    U: float = 1.0

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise ValueError(f"mass must be positive and finite, got {self.m}")
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError(f"half-width must be positive and finite, got {self.a}")
        if not (self.U >= 0.0 and math.isfinite(self.U)):
            raise ValueError(f"depth must be nonnegative and finite, got {self.U}")


def _phase_to_gamma(alpha: float) -> complex:
    """e^{i alpha}, exact at multiples of pi/2 built as n*(pi/2) products.

    Exactness at the axes matters: anchor couplings at alpha = n*pi/2 must
    reduce to gamma in {1, i, -1, -i} so on-axis pole conditions coincide
    bit-for-bit with the real-coupling scan.
    """
    half = math.pi / 2.0
    n = round(alpha / half)
    if alpha == n * half:
        r = n % 4
        if r == 0:
            return 1.0 + 0.0j
        if r == 1:
            return 0.0 + 1.0j
        if r == 2:
            return -1.0 + 0.0j
        return 0.0 - 1.0j
    return complex(math.cos(alpha), math.sin(alpha))


@dataclass(frozen=True)
class ComplexCoupling:
    """Coupling phase alpha; the multiplicative coupling is gamma = e^{i alpha}."""

    alpha: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError(f"coupling phase must be finite, got {self.alpha}")

    @property
    def gamma(self) -> complex:
        return _phase_to_gamma(self.alpha)

    @property
    def is_real(self) -> bool:
        return self.gamma.imag == 0.0

    def conjugate(self) -> "ComplexCoupling":
        return ComplexCoupling(-self.alpha)

    @classmethod
    def attractive(cls) -> "ComplexCoupling":
        return cls(0.0)

    @classmethod
    def repulsive(cls) -> "ComplexCoupling":
        return cls(math.pi)


@dataclass(frozen=True)
class InteriorMomentum:
    """Interior momentum K with its square w = k^2 + 2 m gamma U."""

    K: complex
    w: complex

    @property
    def is_branch_point(self) -> bool:
        return self.w == 0.0


def interior_momentum(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> InteriorMomentum:
    """Principal-branch interior momentum K = sqrt(k^2 + 2 m gamma U)."""
    w = complex(k) * complex(k) + 2.0 * spec.m * coupling.gamma * spec.U
    return InteriorMomentum(K=np.sqrt(w), w=w)


def denom_plus(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> complex:
    """Even-channel denominator k*cos(aK) - i*K*sin(aK).

    Even under K -> -K, entire in k. Its zeros are the even-channel S poles.
    """
    d, dk = _k.denom_plain(k, coupling.gamma, spec.m, spec.a, spec.U, _k.CH_PLUS)
    return d


def denom_minus_reduced(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> complex:
    """Regularized odd-channel pole function cos(aK) - i*a*k*sinc(aK).

    Equals the literal odd denominator divided by K; even under K -> -K and
    free of the spurious K = 0 zero. All odd-channel root finding uses this.
    """
    d, dk = _k.denom_plain(k, coupling.gamma, spec.m, spec.a, spec.U, _k.CH_MINUS)
    return d


def denom_minus(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> complex:
    """Odd-channel denominator K*cos(aK) - i*k*sin(aK) (literal form).

    Odd under K -> -K; vanishes at K = 0 where the odd S stays finite
    (the numerator shares that zero). Use denom_minus_reduced for roots.
    """
    Ki = interior_momentum(k, coupling, spec)
    return Ki.K * denom_minus_reduced(k, coupling, spec)


def pole_function(k: complex, coupling: ComplexCoupling, spec: PotentialSpec, channel: Channel) -> complex:
    """The channel function whose zeros are the S-matrix poles."""
    if channel is Channel.PLUS:
        return denom_plus(k, coupling, spec)
    return denom_minus_reduced(k, coupling, spec)


def denom_full(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> complex:
    """Two-channel denominator 2*k*K*cos(2aK) - i*(k^2+K^2)*sin(2aK).

    Computed from double-angle blocks directly, not from the channel
    denominators, so the factorization identity stays an honest check.
    """
    kc = complex(k)
    Ki = interior_momentum(kc, coupling, spec)
    z2 = 2.0 * spec.a * Ki.K
    C, S, Z, G, E = _k.trig_scaled(z2)
    return (2.0 * kc * Ki.K * C - 1j * (kc * kc + Ki.K * Ki.K) * S) / E


def _pole_guard(k: complex, coupling: ComplexCoupling, spec: PotentialSpec, channels, label: str):
    """Raise PoleHit when any listed channel pole function is at a zero."""
    kc = complex(k)
    Ki = interior_momentum(kc, coupling, spec)
    scale = POLE_HIT_SCALE * (1.0 + abs(kc) + abs(Ki.K))
    for ch in channels:
        d, dk = _k.denom_plain(kc, coupling.gamma, spec.m, spec.a, spec.U, ch.code)
        if abs(d) < scale:
            raise PoleHit(kc, label)


def s_plus(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> complex:
    """Even-channel S-matrix eigenvalue."""
    _pole_guard(k, coupling, spec, (Channel.PLUS,), "plus")
    kc = complex(k)
    Ki = interior_momentum(kc, coupling, spec)
    z = spec.a * Ki.K
    C, S, Z, G, E = _k.trig_scaled(z)
    num = kc * C + 1j * spec.a * Ki.w * Z
    den = kc * C - 1j * spec.a * Ki.w * Z
    return np.exp(-2j * kc * spec.a) * num / den


def s_minus(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> complex:
    """Odd-channel S-matrix eigenvalue.

    Evaluated from the reduced (K-free) forms, so the K = 0 branch point is
    a regular point as it must be.
    """
    _pole_guard(k, coupling, spec, (Channel.MINUS,), "minus")
    kc = complex(k)
    Ki = interior_momentum(kc, coupling, spec)
    z = spec.a * Ki.K
    C, S, Z, G, E = _k.trig_scaled(z)
    num = C + 1j * spec.a * kc * Z
    den = C - 1j * spec.a * kc * Z
    return np.exp(-2j * kc * spec.a) * num / den


@dataclass(frozen=True)
class SMatrixValue:
    """Full 2x2 S-matrix value in the plane-wave basis.

    Built from (s11, s12) with the symmetric structure S11 = S22 and
    S12 = S21, which the rectangular well obeys identically.
    """

    k: complex
    s11: complex
    s12: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s12, self.s11]], dtype=complex)


def s_full(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> SMatrixValue:
    """Full 2x2 S-matrix (transmission/reflection) of the well.

    Regular at the interior branch point K = 0: elements are computed from
    reduced forms that strip the spurious K factor of the raw denominator.
    """
    _pole_guard(k, coupling, spec, (Channel.PLUS, Channel.MINUS), "full")
    kc = complex(k)
    Ki = interior_momentum(kc, coupling, spec)
    z2 = 2.0 * spec.a * Ki.K
    C, S, Z, G, E = _k.trig_scaled(z2)
    # F = D_full / (2K): regular in K, scaled by E like the trig blocks
    F = kc * C - 1j * (kc * kc + Ki.K * Ki.K) * spec.a * Z
    phase = np.exp(-2j * kc * spec.a)
    s11 = kc * phase / (F / E)
    s12 = -1j * (kc * kc - Ki.K * Ki.K) * spec.a * (Z / E) * phase / (F / E)
    return SMatrixValue(k=kc, s11=s11, s12=s12)


_PARITY_BASIS = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)


def parity_channels(value: SMatrixValue) -> tuple[complex, complex]:
    """Diagonalize a full S value into (s_plus, s_minus) via the parity basis."""
    hat = _PARITY_BASIS @ value.matrix @ _PARITY_BASIS.T
    return hat[0, 0], hat[1, 1]


def _msinc(z: complex) -> complex:
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return np.sin(z) / z


def well_layers(spec: PotentialSpec) -> list[tuple[float, complex]]:
    """The rectangular well as a single transfer-matrix layer."""
    return [(2.0 * spec.a, complex(-spec.U))]


def transfer_matrix_s(
    k: complex,
    coupling: ComplexCoupling,
    layers: list[tuple[float, complex]],
    m: float = 1.0,
) -> SMatrixValue:
    """Numerical S-matrix of a piecewise-constant potential, via transfer matrices.

    ``layers`` is a list of (width, bare potential value); the coupling
    multiplies every layer value. Layers are laid symmetrically about the
    origin. Propagation runs in (psi, psi') variables, whose layer matrix is
    entire in the squared local momentum: a layer at zero interior momentum
    automatically takes its linear-solution limit, no special casing.

    Independent of the closed forms; used as their oracle.
    """
    kc = complex(k)
    if kc == 0.0:
        raise ValueError("transfer matrix S undefined at k = 0 (exterior threshold)")
    total = sum(w for w, _ in layers)
    x0 = -0.5 * total
    P = np.eye(2, dtype=complex)
    for width, value in layers:
        if width <= 0.0:
            raise ValueError(f"layer width must be positive, got {width}")
        q2 = kc * kc - 2.0 * m * coupling.gamma * complex(value)
        q = np.sqrt(q2)
        c = np.cos(q * width)
        so = width * _msinc(q * width)  # sin(q w)/q, regular at q = 0
        P = np.array([[c, so], [-q2 * so, c]], dtype=complex) @ P
    xN = x0 + total
    B = np.array([[1.0, 1.0], [1j * kc, -1j * kc]], dtype=complex)
    M = np.linalg.inv(B) @ P @ B
    detM = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    s11 = np.exp(1j * kc * (x0 - xN)) * detM / M[1, 1]
    s12 = M[0, 1] / M[1, 1] * np.exp(-2j * kc * xN)
    return SMatrixValue(k=kc, s11=s11, s12=s12)


def verify_relations(k: complex, coupling: ComplexCoupling, spec: PotentialSpec) -> dict[str, float]:
    """Residuals of the three analytic S-matrix relations at (k, coupling).

    Returns max-norm residuals of: transpose-inverse S^T(k) S(-k) = 1,
    hermitian-adjoint S^dag(k, gamma) S(k*, gamma*) = 1, and conjugation
    S*(-k*, gamma*) = S(k, gamma).
    """
    kc = complex(k)
    conj = coupling.conjugate()
    eye = np.eye(2)
    S = s_full(kc, coupling, spec).matrix
    S_mk = s_full(-kc, coupling, spec).matrix
    S_cc = s_full(np.conj(kc), conj, spec).matrix
    S_rc = s_full(-np.conj(kc), conj, spec).matrix
    r_ti = np.abs(S.T @ S_mk - eye).max()
    r_ha = np.abs(S.conj().T @ S_cc - eye).max()
    r_cj = np.abs(np.conj(S_rc) - S).max()
    return {
        "transpose_inverse": float(r_ti),
        "hermitian_adjoint": float(r_ha),
        "conjugation": float(r_cj),
    }
