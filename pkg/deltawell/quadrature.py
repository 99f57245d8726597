"""
Adaptive Gauss-Legendre panel quadrature

Every integral in the package goes through `integrate`: the caller supplies
panel edges that already resolve the oscillation of the integrand, and each
panel is accepted once the order-n and order-n/2 rules agree within its share
of the tolerance. Rejected panels are bisected. The integrand may return a
leading batch axis so one call integrates many positions at once.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_TOL_ABS = 1e-10
DEFAULT_TOL_REL = 1e-8
DEFAULT_MAX_SUBDIVISIONS = 20_000
DEFAULT_ORDER = 16

_RULES = {order: leggauss(order) for order in (8, 16, 32)}


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value (scalar or batch array), summed panel error estimate, accepted panel count"""
    value: np.ndarray
    error: float
    panels: int


def _panel_sums(f, lo, hi, order):
    nodes, weights = _RULES[order]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    points = mid[:, None] + half[:, None] * nodes[None, :]
    values = np.asarray(f(points.ravel()))
    values = values.reshape(values.shape[:-1] + points.shape)
    return (values * weights).sum(axis=-1) * half


def integrate(f, edges, tol_abs=DEFAULT_TOL_ABS, tol_rel=DEFAULT_TOL_REL,
              max_subdivisions=DEFAULT_MAX_SUBDIVISIONS, order=DEFAULT_ORDER):
    """
    Integrate a vectorized function over the union of panels given by `edges`

    Args:
        f (callable): Maps a 1-D array of abscissae of length m to an array of
            shape (..., m); leading axes are integrated independently
        edges (array_like): Increasing panel boundaries
        tol_abs (float): Absolute tolerance on the whole integral
        tol_rel (float): Relative tolerance on the whole integral
        max_subdivisions (int): Bisections allowed before giving up
        order (int): Gauss-Legendre order of the accepting rule (16 or 32)

    Returns:
        QuadratureResult: value, error estimate and number of panels used

    Raises:
        ConvergenceError: the tolerance was not met within `max_subdivisions`
    """
    if order not in (16, 32):
        raise DomainError(f"unsupported quadrature order {order}")
    if tol_abs <= 0 or tol_rel <= 0:
        raise DomainError("quadrature tolerances must be positive")

    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) < 0):
        raise DomainError("panel edges must be an increasing sequence of at least two points")

    lo, hi = edges[:-1], edges[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    span = edges[-1] - edges[0]
    if lo.size == 0:
        return QuadratureResult(value=np.float64(0.0), error=0.0, panels=0)

    coarse_order = order // 2

    total = 0.0
    error = 0.0
    accepted = 0
    subdivisions = 0

    while lo.size:
        fine = _panel_sums(f, lo, hi, order)
        coarse = _panel_sums(f, lo, hi, coarse_order)
        deviation = np.abs(fine - coarse)
        panel_error = deviation.reshape(-1, lo.size).max(axis=0)

        estimate = total + fine.sum(axis=-1)
        budget = max(tol_abs, tol_rel * float(np.max(np.abs(estimate))))
        ok = panel_error <= budget * (hi - lo) / span

        total = total + fine[..., ok].sum(axis=-1)
        error += float(panel_error[ok].sum())
        accepted += int(ok.sum())
        if ok.all():
            break

        bad_lo, bad_hi = lo[~ok], hi[~ok]
        subdivisions += bad_lo.size
        if subdivisions > max_subdivisions:
            remaining = float(panel_error[~ok].sum())
            raise ConvergenceError("adaptive quadrature exceeded its subdivision budget",
                                   estimate=error + remaining, tolerance=budget)
        middle = 0.5 * (bad_lo + bad_hi)
        lo = np.concatenate([bad_lo, middle])
        hi = np.concatenate([middle, bad_hi])

    logger.debug("quadrature: %d panels, %d subdivisions, error %.2e", accepted, subdivisions, error)
    return QuadratureResult(value=total, error=error, panels=accepted)


def phase_edges(p_max, rate_linear, rate_quadratic=0.0, max_phase=np.pi / 4, max_width=0.5):
    """
    Panel edges on [0, p_max] so that each panel spans at most `max_phase` of
    the phase rate_linear*p + rate_quadratic*p**2/2 and at most `max_width`

    Args:
        p_max (float): Upper limit
        rate_linear (float): Linear phase coefficient (>= 0)
        rate_quadratic (float): Quadratic phase coefficient (>= 0)

    Returns:
        numpy.ndarray: Increasing edges starting at 0 and ending at p_max
    """
    rate_linear = abs(rate_linear)
    rate_quadratic = abs(rate_quadratic)
    total_phase = rate_linear * p_max + 0.5 * rate_quadratic * p_max ** 2
    count = int(np.ceil(total_phase / max_phase))
    phases = np.linspace(0.0, total_phase, count + 1) if count > 0 else np.array([0.0])
    if rate_quadratic > 0:
        # stable inverse of phi = u p + q p^2 / 2
        by_phase = 2 * phases / (rate_linear + np.sqrt(rate_linear ** 2 + 2 * rate_quadratic * phases))
    elif rate_linear > 0:
        by_phase = phases / rate_linear
    else:
        by_phase = np.array([0.0])
    uniform = np.linspace(0.0, p_max, int(np.ceil(p_max / max_width)) + 1)
    edges = np.union1d(np.append(by_phase, p_max), uniform)
    return edges[(edges >= 0) & (edges <= p_max)]
