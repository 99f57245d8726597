"""
Time-dependent wavefunction psi(x, t)

psi(x, t) is the energy superposition of stationary states weighted by
phi(E) exp(-iEt). Three evaluation paths are provided and must agree where
they overlap:

- closed form (gaussian spectral function, and the square pulse through
  complex-argument error functions)
- direct adaptive quadrature over the energy
- quadrature along the negative imaginary energy axis (t > 0)
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import spectral
from .eigenbasis import PotentialConfig, stationary_state
from .errors import ConvergenceError, DomainError, UnsupportedError
from .quadrature import (DEFAULT_MAX_SUBDIVISIONS, DEFAULT_TOL_ABS, DEFAULT_TOL_REL,
                         integrate, phase_edges)

logger = logging.getLogger(__name__)

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
CONTOUR = "contour"
MODES = (CLOSED_FORM, QUADRATURE, CONTOUR)

# large-t factor of psi / (c1 phi(0) shape(x) t^-3/2)
ASYMPTOTIC_CONSTANT = np.exp(-0.75j * np.pi) * np.sqrt(np.pi / 2)

MAX_CUTOFF_ENERGY = 1e8
# e-folds below the envelope peak where the rotated integral is cut
CONTOUR_DECAY = 46.0
X_CHUNK = 64


@dataclass(frozen=True)
class ComplexTimeFactor:
    """a = K^2 + it, with Re(a) = K^2 > 0 so the principal branch never crosses its cut"""
    K: float
    t: float

    @property
    def value(self):
        return self.K ** 2 + 1j * np.asarray(self.t)

    def power(self, exponent=-1.5):
        return self.value ** exponent


def _require_positive_k(K):
    if not (np.isfinite(K) and K > 0):
        raise DomainError(f"K must be positive, got {K!r}")


def normalization_c1(K, cfg):
    """Closed-form c1 that normalizes the gaussian-spectrum state"""
    _require_positive_k(K)
    L, V0 = cfg.L, cfg.V0
    overlap = np.exp(-L ** 2 / K ** 2)
    scale = np.pi ** 1.5
    bracket = (scale / (8 * K ** 3)
               + overlap * L * scale * V0 / (2 * K ** 3)
               + scale * V0 ** 2 / (2 * K)
               - overlap * scale * V0 ** 2 / (2 * K))
    return float(bracket ** -0.5)


def square_pulse_c1(cfg):
    """c1 that normalizes the square-pulse state: flat top on (0, L/2) plus a tent at 2L"""
    return float((np.pi / 8 * (1 + cfg.V0 ** 2 * cfg.L ** 2 / 6)) ** -0.5)


def psi_closed_form(x, t, K, cfg, c1):
    """
    psi(x, t) for phi(E) = exp(-K^2 E), broadcast over x and t

    Region II is summed as exp(-x^2/2a)(x - V0 a) + V0 a exp(-(x - 2L)^2/2a)
    so that each exponential is evaluated on its own.
    """
    _require_positive_k(K)
    x = np.asarray(x, dtype=float)
    factor = ComplexTimeFactor(K, t)
    a = factor.value
    prefactor = c1 * np.sqrt(np.pi / 2) * factor.power()
    base = np.exp(-x ** 2 / (2 * a))
    region_one = prefactor * x * base
    region_two = prefactor * (base * (x - cfg.V0 * a)
                              + cfg.V0 * a * np.exp(-(x - 2 * cfg.L) ** 2 / (2 * a)))
    return np.where(x <= 0, 0j, np.where(x <= cfg.L, region_one, region_two))


def _step_kernels(u, t):
    # free evolution of sign(u) and of (pi/2)|u|; t may be complex with Im(t) <= 0
    still = t == 0
    c = np.sqrt(2j * np.where(still, 1.0, t))
    z = u / c
    spread = erf(z)
    ramp = 0.5 * np.pi * (u * spread + c / np.sqrt(np.pi) * (np.exp(-z ** 2) - 1))
    step = np.where(still, np.sign(u), spread)
    kink = np.where(still, 0.5 * np.pi * np.abs(u), ramp)
    return step, kink


def psi_square_pulse(x, t, cfg, c1):
    """
    psi(x, t) for the square-pulse spectral function, broadcast over x and t

    t may carry a non-positive imaginary part, which is how a Gaussian
    energy damping exp(-2 delta E) enters (t - 2i delta).
    """
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=complex))
    L, V0 = cfg.L, cfg.V0
    b = 0.5 * L

    def step(u):
        return _step_kernels(u, t)[0]

    def kink(u):
        return _step_kernels(u, t)[1]

    def tent(u):
        return -kink(u) + 0.5 * kink(u + b) + 0.5 * kink(u - b)

    flat = 0.5 * np.pi * (step(x) - 0.5 * step(x + b) - 0.5 * step(x - b))
    prefactor = -1j * c1 / np.sqrt(np.pi * L)
    region_one = prefactor * flat
    region_two = prefactor * (flat + V0 * (tent(x - 2 * L) - tent(x)))
    return np.where(x <= 0, 0j, np.where(x <= L, region_one, region_two))


@dataclass(frozen=True, eq=False)
class WaveField:
    """
    Immutable evaluator of psi(x, t)

    Build it with `WaveField.build`, which picks c1 from the closed form when
    one exists and from the energy-space normalization otherwise.
    """
    cfg: PotentialConfig
    sf: spectral.SpectralFunction
    c1: float
    mode: str = CLOSED_FORM
    tol_abs: float = DEFAULT_TOL_ABS
    tol_rel: float = DEFAULT_TOL_REL
    regularization: float = 0.0
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown evaluation mode {self.mode!r}")
        if self.mode == CLOSED_FORM and not _has_closed_form(self.sf, self.cfg):
            raise DomainError(f"no closed form for spectral function kind {self.sf.kind!r}")
        if not self.c1 > 0:
            raise DomainError("c1 must be positive")
        if not (self.tol_abs > 0 and self.tol_rel > 0):
            raise DomainError("tolerances must be positive")
        if self.regularization < 0:
            raise DomainError("regularization must be non-negative")

    @classmethod
    def build(cls, cfg, sf, mode=None, **options):
        if sf.kind == spectral.GAUSSIAN:
            c1 = normalization_c1(sf.params["K"], cfg)
        elif _has_closed_form(sf, cfg):
            c1 = square_pulse_c1(cfg)
        else:
            tolerances = {key: options[key] for key in ("tol_abs", "tol_rel") if key in options}
            c1 = float(spectral.normalization_integral(sf, cfg, 1.0, **tolerances) ** -0.5)
        if mode is None:
            mode = CLOSED_FORM if _has_closed_form(sf, cfg) else QUADRATURE
        logger.debug("wave field: kind=%s mode=%s c1=%.12g", sf.kind, mode, c1)
        return cls(cfg=cfg, sf=sf, c1=c1, mode=mode, **options)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def psi(self, x, t):
        """psi(x, t); quadrature and contour modes take a scalar t"""
        if self.mode == CLOSED_FORM:
            if self.sf.kind == spectral.GAUSSIAN:
                return psi_closed_form(x, t, self.sf.params["K"], self.cfg, self.c1)
            return psi_square_pulse(x, t, self.cfg, self.c1)
        if np.ndim(t):
            raise DomainError(f"{self.mode} evaluation takes a scalar time")
        if self.mode == QUADRATURE:
            return psi_quadrature(x, t, self)
        return psi_contour(x, t, self)

    def density(self, x, t):
        return np.abs(self.psi(x, t)) ** 2

    def extent(self, t):
        """Position beyond which the density has fallen by about exp(-60)"""
        L = self.cfg.L
        if self.sf.kind == spectral.GAUSSIAN:
            K = self.sf.params["K"]
            return 2 * L + np.sqrt(60 * (K ** 4 + t ** 2)) / K
        if self.sf.kind == spectral.SQUARE_PULSE and t == 0:
            return 2.5 * L
        raise UnsupportedError("the density tail is only bounded for the gaussian spectrum or at t = 0")


def _has_closed_form(sf, cfg):
    if sf.kind == spectral.GAUSSIAN:
        return True
    return sf.kind == spectral.SQUARE_PULSE and np.isclose(sf.params["L"], cfg.L, rtol=1e-15, atol=0)


def _momentum_cutoff(wf):
    """Smallest doubling energy where the bounded energy tail drops below tol_abs / 10"""
    sf, c1, V0 = wf.sf, wf.c1, wf.cfg.V0
    target = wf.tol_abs / 10
    E = min(1.0, sf.max_energy)
    while True:
        # |c1| + |c2| + |c3| <= |c1| (2 + 3 V0 / p)
        bound = sf.tail_integral(E, wf.regularization) * c1 * (2 + 3 * V0 / np.sqrt(2 * E))
        if bound < target:
            break
        if E >= sf.max_energy:
            raise ConvergenceError("energy tail bound not reached inside the tabulated grid",
                                   estimate=bound, tolerance=target)
        if E > MAX_CUTOFF_ENERGY:
            raise ConvergenceError("energy tail bound not reached; phi decays too slowly "
                                   "(add regularization)", estimate=bound, tolerance=target)
        E = min(2 * E, sf.max_energy)
    logger.debug("energy cutoff %.4g (tail bound %.2e)", E, bound)
    return float(np.sqrt(2 * E))


def _batched(x, evaluate_chunk):
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    pieces = [evaluate_chunk(flat[start:start + X_CHUNK]) for start in range(0, flat.size, X_CHUNK)]
    values = np.concatenate(pieces) if pieces else np.zeros(0, dtype=complex)
    values = values.reshape(x.shape)
    return values if x.ndim else complex(values)


def psi_quadrature(x, t, wf):
    """
    psi(x, t) by adaptive quadrature of the energy superposition

    The integral runs over p = sqrt(2E) with panels spanning at most pi/4 of
    the phase t p^2/2 + u p, up to a cutoff from the tail bound of phi.

    Raises:
        DomainError: phi is not admissible
        ConvergenceError: tail bound or tolerance not reached
    """
    if not wf.sf.admissibility.admissible:
        raise DomainError("spectral function is not admissible")
    t = float(t)
    p_cut = _momentum_cutoff(wf)
    damping = wf.regularization

    def evaluate_chunk(xs):
        u = float(np.max(np.abs(xs), initial=0.0)) + 2 * wf.cfg.L + wf.sf.oscillation_length
        edges = phase_edges(p_cut, u, abs(t))

        def integrand(p):
            E = np.minimum(0.5 * p ** 2, wf.sf.max_energy)
            weight = spectral.evaluate(wf.sf, E) * np.exp(-1j * E * t - 2 * damping * E) * p
            return stationary_state(p[None, :], xs[:, None], wf.cfg, wf.c1) * weight[None, :]

        result = integrate(integrand, edges, tol_abs=wf.tol_abs, tol_rel=wf.tol_rel,
                           max_subdivisions=wf.max_subdivisions)
        return np.asarray(result.value)

    return _batched(x, evaluate_chunk)


def psi_contour(x, t, wf):
    """
    psi(x, t) from the energy integral rotated onto E = -iy

    psi = -i * integral over y > 0 of phi(-iy) Psi_{-iy}(x) exp(-yt) dy,
    computed with y = s^2. The integrand is damped, not oscillatory; its
    growth exp(x sqrt(y)) limits the path to moderate x / t.

    Raises:
        DomainError: t <= 0
        UnsupportedError: phi has no analytic continuation
    """
    t = float(t)
    if not t > 0:
        raise DomainError("contour evaluation requires t > 0")
    wf.sf.continued(0.0)
    K = wf.sf.params.get("K", 0.0)

    def evaluate_chunk(xs):
        u = float(np.max(np.abs(xs), initial=0.0)) + wf.sf.oscillation_length
        s_cut = u / (2 * t) + np.sqrt(CONTOUR_DECAY / t)
        edges = phase_edges(s_cut, u + 1.0, 2 * K ** 2, max_width=0.25)

        def integrand(s):
            y = s ** 2
            p = np.sqrt(-2j * y)
            weight = -1j * wf.sf.continued(-1j * y) * np.exp(-y * t) * 2 * s
            return stationary_state(p[None, :], xs[:, None], wf.cfg, wf.c1) * weight[None, :]

        result = integrate(integrand, edges, tol_abs=wf.tol_abs, tol_rel=wf.tol_rel,
                           max_subdivisions=wf.max_subdivisions)
        return np.asarray(result.value)

    return _batched(x, evaluate_chunk)


def _asymptotic_shape(x, cfg):
    x = np.asarray(x, dtype=float)
    outside = x + 2 * cfg.V0 * cfg.L * (x - cfg.L)
    return np.where(x <= 0, 0.0, np.where(x <= cfg.L, x, outside))


def asymptotic_psi(x, t, wf):
    """Leading large-t form c1 phi(0) shape(x) M t^-3/2, with shape(x) = x inside the well"""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("asymptotic form requires t > 0")
    return wf.c1 * wf.sf.value_at_zero * _asymptotic_shape(x, wf.cfg) * ASYMPTOTIC_CONSTANT * t ** -1.5


def asymptotic_survival_coefficient(wf, upper=None):
    """Constant A in P_in(t) ~ A t^-3 for the probability on [0, upper] (default L)"""
    L, V0 = wf.cfg.L, wf.cfg.V0
    upper = L if upper is None else float(upper)
    if not upper > 0:
        raise DomainError("upper must be positive")
    inside = min(upper, L) ** 3 / 3
    outside = 0.0
    if upper > L:
        # shape = slope x - offset on x >= L, equal to L at x = L
        slope, offset = 1 + 2 * V0 * L, 2 * V0 * L ** 2
        outside = ((slope * upper - offset) ** 3 - L ** 3) / (3 * slope)
    return float(wf.c1 ** 2 * abs(wf.sf.value_at_zero) ** 2 * 0.5 * np.pi * (inside + outside))


def _density_breakpoints(wf):
    L = wf.cfg.L
    points = [L]
    if wf.sf.kind == spectral.SQUARE_PULSE:
        points += [0.5 * L, 1.5 * L, 2 * L, 2.5 * L]
    return points


def integrate_density(wf, t, lo, hi, moment=0):
    """
    Integral of x^moment |psi(x, t)|^2 over [lo, hi]

    Returns:
        QuadratureResult
    """
    if not hi > lo:
        raise DomainError("integration interval must have hi > lo")
    t = float(t)
    K = wf.sf.params.get("K", 0.0)
    width = 0.25 if K == 0 else min(0.25, 0.5 * K)
    if t != 0:
        # phase of psi grows like x t / (K^4 + t^2)
        rate = (hi + 2 * wf.cfg.L) * abs(t) / (K ** 4 + t ** 2)
        width = min(width, 0.25 * np.pi / rate)
    edges = np.linspace(lo, hi, int(np.ceil((hi - lo) / width)) + 1)
    inner = [point for point in _density_breakpoints(wf) if lo < point < hi]
    edges = np.union1d(edges, inner)

    def integrand(x):
        return wf.density(x, t) * x ** moment

    return integrate(integrand, edges, tol_abs=wf.tol_abs, tol_rel=wf.tol_rel,
                     max_subdivisions=wf.max_subdivisions)


def norm(wf, t):
    """Total probability on [0, extent(t)]"""
    return float(integrate_density(wf, t, 0.0, wf.extent(t)).value)


def region_two_centroid(wf, t=0.0):
    """Density-weighted mean position over x >= L"""
    upper = wf.extent(t)
    mass = integrate_density(wf, t, wf.cfg.L, upper).value
    first = integrate_density(wf, t, wf.cfg.L, upper, moment=1).value
    return float(first / mass)
