"""
Stationary states of the wall + delta potential

Units are hbar = m = 1 throughout. The wall sits at x = 0 and the delta barrier
of strength V0 at x = L. Energies are the independent variable; the momentum
p = sqrt(2E) is always derived, never stored.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PotentialConfig:
    """Well length L (position of the barrier) and barrier strength V0"""
    L: float = 3.0
    V0: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise DomainError(f"L must be a positive finite number, got {self.L!r}")
        # V0 = 0 is the free-particle limit
        if not (np.isfinite(self.V0) and self.V0 >= 0):
            raise DomainError(f"V0 must be a non-negative finite number, got {self.V0!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EigenCoeffs:
    """Region II coefficients (c2 sin px + c3 cos px) and orthogonality weight of one stationary state"""
    E: float
    c1: float
    c2: float
    c3: float
    w: float

    @property
    def p(self):
        return np.sqrt(2 * np.asarray(self.E))


class JumpReport(NamedTuple):
    left_slope: float
    right_slope: float
    jump: float


def momentum(E):
    """
    Momentum p = sqrt(2E) for strictly positive energies

    Raises:
        DomainError: any E <= 0
    """
    E = np.asarray(E, dtype=float)
    if np.any(~(E > 0)):
        raise DomainError("momentum must be positive")
    return np.sqrt(2 * E)


def eigen_coeffs(E, cfg, c1=1.0):
    """
    Coefficients of the stationary state at energy E

    Args:
        E (float | numpy.ndarray): Energy (> 0)
        cfg (PotentialConfig): Potential
        c1 (float): Amplitude inside the well

    Returns:
        EigenCoeffs: c2, c3 and the orthogonality weight w
    """
    p = momentum(E)
    s, c = np.sin(p * cfg.L), np.cos(p * cfg.L)
    g = 2 * cfg.V0 / p
    c2 = c1 * (1 + g * s * c)
    c3 = -c1 * g * s * s
    w = 0.5 * np.pi * (c2 ** 2 + c3 ** 2)
    return EigenCoeffs(E=E, c1=c1, c2=c2, c3=c3, w=w)


def orthogonality_weight(E, cfg, c1=1.0):
    """w(E) = (pi/2)(c2^2 + c3^2)"""
    return eigen_coeffs(E, cfg, c1).w


def orthogonality_weight_expanded(E, cfg, c1=1.0):
    """w(E) = |c1|^2 (pi / 2p^2) [p^2 + 2V0^2 (1 - cos 2pL) + 2pV0 sin 2pL]"""
    p = momentum(E)
    V0, L = cfg.V0, cfg.L
    # 1 - cos(2pL) as 2 sin^2(pL)
    bracket = p ** 2 + 4 * V0 ** 2 * np.sin(p * L) ** 2 + 2 * p * V0 * np.sin(2 * p * L)
    return abs(c1) ** 2 * np.pi / (2 * p ** 2) * bracket


def stationary_state(p, x, cfg, c1=1.0):
    """
    Eigenfunction as a function of (possibly complex) momentum, broadcast over p and x

    Region II uses c1 [sin px + (2V0/p) sin(pL) sin(p(x - L))], which equals
    c2 sin px + c3 cos px without the large cancelling terms at complex p.
    """
    p = np.asarray(p)
    x = np.asarray(x, dtype=float)
    L = cfg.L
    inside = np.sin(p * x)
    outside = inside + (2 * cfg.V0 / p) * np.sin(p * L) * np.sin(p * (x - L))
    return c1 * np.where(x <= 0, 0.0, np.where(x <= L, inside, outside))


def eigenfunction(E, x, cfg, c1=1.0):
    """
    Stationary state at energy E evaluated at positions x

    Returns 0 for x <= 0, c1 sin(px) on [0, L] and c2 sin(px) + c3 cos(px)
    for x >= L.
    """
    coeffs = eigen_coeffs(E, cfg, c1)
    p = coeffs.p
    x = np.asarray(x, dtype=float)
    region_one = c1 * np.sin(p * x)
    region_two = coeffs.c2 * np.sin(p * x) + coeffs.c3 * np.cos(p * x)
    return np.where(x <= 0, 0.0, np.where(x <= cfg.L, region_one, region_two))


def derivative_jump(E, cfg, c1=1.0):
    """
    Analytic slopes of the eigenfunction on both sides of the barrier

    `jump` is right_slope - left_slope, which equals 2 V0 Psi(L) for the
    repulsive barrier.

    Returns:
        JumpReport: (left_slope, right_slope, jump)
    """
    coeffs = eigen_coeffs(E, cfg, c1)
    p, L = coeffs.p, cfg.L
    left = c1 * p * np.cos(p * L)
    right = p * (coeffs.c2 * np.cos(p * L) - coeffs.c3 * np.sin(p * L))
    return JumpReport(left_slope=left, right_slope=right, jump=right - left)


def _cos_integral(k, L):
    # integral of cos(k x) over [0, L]
    return L * np.sinc(k * L / np.pi)


def inner_product(E, E2, cfg, epsilon, c1=1.0):
    """
    Regularized overlap of two stationary states

    The region II part carries a damping factor exp(-epsilon (x - L)) and is
    integrated in closed form, so no quadrature touches the infinite tail.

    Args:
        E (float): First energy (> 0)
        E2 (float): Second energy (> 0)
        cfg (PotentialConfig): Potential
        epsilon (float): Damping rate (> 0)
        c1 (float): Amplitude inside the well

    Returns:
        float: The overlap, symmetric in E and E2
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    first, second = eigen_coeffs(E, cfg, c1), eigen_coeffs(E2, cfg, c1)
    p, q, L = first.p, second.p, cfg.L
    d, s = p - q, p + q

    region_one = 0.5 * c1 ** 2 * (_cos_integral(d, L) - _cos_integral(s, L))

    def shifted(coeffs, k):
        # c2 sin(kx) + c3 cos(kx) rewritten as A sin(ky) + B cos(ky) with y = x - L
        a = coeffs.c2 * np.cos(k * L) - coeffs.c3 * np.sin(k * L)
        b = coeffs.c2 * np.sin(k * L) + coeffs.c3 * np.cos(k * L)
        return a, b

    a1, b1 = shifted(first, p)
    a2, b2 = shifted(second, q)

    def damped_cos(k):
        return epsilon / (epsilon ** 2 + k ** 2)

    def damped_sin(k):
        return k / (epsilon ** 2 + k ** 2)

    region_two = 0.5 * (
        a1 * a2 * (damped_cos(d) - damped_cos(s))
        + a1 * b2 * (damped_sin(s) + damped_sin(d))
        + b1 * a2 * (damped_sin(s) - damped_sin(d))
        + b1 * b2 * (damped_cos(d) + damped_cos(s))
    )
    return float(region_one + region_two)


def lorentzian_delta(x, epsilon):
    """epsilon / (pi (x^2 + epsilon^2)), which tends to delta(x) as epsilon -> 0"""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    x = np.asarray(x, dtype=float)
    return epsilon / (np.pi * (x ** 2 + epsilon ** 2))
