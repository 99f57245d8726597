"""
Survival probability, decay rate and decay-law fits
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy.optimize import OptimizeWarning, curve_fit, minimize_scalar
from scipy.signal import argrelextrema
from scipy.special import gammainc
from scipy.stats import linregress

from .errors import DomainError, FitError, InsufficientDataError
from .propagator import WaveField, integrate_density, normalization_c1
from .spectral import gaussian

logger = logging.getLogger(__name__)

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
SOURCES = (CLOSED_FORM, QUADRATURE)

MIN_SLOPE_POINTS = 8
MIN_FIT_POINTS = 10
MAX_FIT_EVALUATIONS = 2000
PEAK_GRID_POINTS = 4001


@dataclass(frozen=True, eq=False)
class DecayCurve:
    """Sampled P_in(t) with its decay rate lambda(t) = -d ln P_in / dt"""
    times: np.ndarray
    p_in: np.ndarray
    lam: np.ndarray
    source: str

    def __post_init__(self):
        for name in ("times", "p_in", "lam"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.source not in SOURCES:
            raise DomainError(f"unknown curve source {self.source!r}")
        if self.times.ndim != 1 or self.times.size < 2:
            raise DomainError("a decay curve needs at least two samples")
        if self.p_in.shape != self.times.shape or self.lam.shape != self.times.shape:
            raise DomainError("times, p_in and lambda must have the same length")
        if self.times[0] < 0 or np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be non-negative and strictly increasing")
        if np.any(self.p_in <= 0) or np.any(self.p_in > 1 + 1e-9):
            raise DomainError("survival probabilities must lie in (0, 1]")

    def log_derivative_mismatch(self, floor=1e-8):
        """Largest relative gap between -d ln P / dt (midpoint differences) and the stored lambda"""
        slope = -np.diff(np.log(self.p_in)) / np.diff(self.times)
        middle = 0.5 * (self.lam[1:] + self.lam[:-1])
        mask = np.abs(middle) > floor
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(slope[mask] - middle[mask]) / np.abs(middle[mask])))

    def to_frame(self):
        return pd.DataFrame({"t": self.times, "p_in": self.p_in, "lambda": self.lam})


@dataclass(frozen=True)
class ExpFitResult:
    """Least-squares fit of a exp(-b t) over a time window"""
    a: float
    b: float
    window: tuple
    chi2_per_dof: float
    n_points: int

    def to_block(self):
        lo, hi = self.window
        return "\n".join([
            f"a={self.a!r}",
            f"b={self.b!r}",
            f"window={lo!r}:{hi!r}",
            f"chi2_per_dof={self.chi2_per_dof!r}",
            f"n={self.n_points}",
        ])


class LambdaPeak(NamedTuple):
    t_peak: float
    height: float


def _require_positive_k(K):
    if not (np.isfinite(K) and K > 0):
        raise DomainError(f"K must be positive, got {K!r}")


def _as_output(values, like):
    return values if np.ndim(like) else float(values)


def survival_closed_form(t, K, cfg):
    """
    P_in(t) on [0, L] for the gaussian spectrum

    Uses C1^2 pi^{3/2} / (8K^3) * P(3/2, z^2) with z = KL / sqrt(K^4 + t^2),
    the regularized incomplete gamma form of erf(z) - 2z exp(-z^2)/sqrt(pi).
    """
    _require_positive_k(K)
    times = np.asarray(t, dtype=float)
    c1 = normalization_c1(K, cfg)
    z2 = (K * cfg.L) ** 2 / (K ** 4 + times ** 2)
    values = c1 ** 2 * np.pi ** 1.5 / (8 * K ** 3) * gammainc(1.5, z2)
    return _as_output(values, t)


def large_l_limit(K, V0):
    """P_in(0) as L / K -> infinity: 1 / (1 + 4 K^2 V0^2)"""
    return 1.0 / (1.0 + 4 * K ** 2 * V0 ** 2)


def decay_rate(t, K, cfg):
    """
    lambda(t) = 4 z^3 exp(-z^2) t / ((K^4 + t^2) G(z)) with G(z) = sqrt(pi) erf z - 2z exp(-z^2)

    C1 cancels, so lambda does not depend on V0.
    """
    _require_positive_k(K)
    times = np.asarray(t, dtype=float)
    if np.any(times < 0):
        raise DomainError("decay rate is defined for t >= 0")
    spread = K ** 4 + times ** 2
    z2 = (K * cfg.L) ** 2 / spread
    z = np.sqrt(z2)
    shape = np.sqrt(np.pi) * gammainc(1.5, z2)
    values = 4 * z ** 3 * np.exp(-z2) * times / (spread * shape)
    return _as_output(values, t)


def survival_quadrature(t, wf: WaveField, upper=None):
    """
    Probability on [0, upper] by integrating the density of `wf`

    upper defaults to L; np.inf integrates over the whole tail.
    """
    upper = wf.cfg.L if upper is None else upper
    if not upper > 0:
        raise DomainError("upper must be positive")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    values = np.empty(times.shape)
    for index, time in enumerate(times):
        limit = wf.extent(time) if np.isinf(upper) else upper
        values[index] = float(integrate_density(wf, time, 0.0, limit).value)
    return _as_output(values, t)


def decay_curve(K, cfg, times):
    """Closed-form DecayCurve on the given grid"""
    times = np.asarray(times, dtype=float)
    return DecayCurve(times=times, p_in=survival_closed_form(times, K, cfg),
                      lam=decay_rate(times, K, cfg), source=CLOSED_FORM)


def quadrature_curve(wf, times, upper=None):
    """DecayCurve from integrated densities, lambda from numerical log differences"""
    times = np.asarray(times, dtype=float)
    p_in = survival_quadrature(times, wf, upper=upper)
    lam = -np.gradient(np.log(p_in), times)
    return DecayCurve(times=times, p_in=p_in, lam=lam, source=QUADRATURE)


def modified_survival_curve(K, cfg, times, upper_factor=4.0, **options):
    """P_in(t) on the extended region [0, upper_factor * L] for the gaussian spectrum"""
    wf = WaveField.build(cfg, gaussian(K), **options)
    logger.info("modified survival on [0, %.3g] at %d times", upper_factor * cfg.L, np.size(times))
    return quadrature_curve(wf, times, upper=upper_factor * cfg.L)


def survival_ratio(curve):
    """N(t) / N(0) read as P_in(t) / P_in(0)"""
    return curve.p_in / curve.p_in[0]


def asymptotic_slope(curve, t_min):
    """
    Least-squares slope of ln P_in against ln t for t >= t_min

    Raises:
        InsufficientDataError: fewer than eight samples, or less than a decade above t_min
    """
    if not t_min > 0:
        raise DomainError("t_min must be positive")
    mask = curve.times >= t_min
    if mask.sum() < MIN_SLOPE_POINTS:
        raise InsufficientDataError(f"need at least {MIN_SLOPE_POINTS} samples with t >= {t_min}")
    if curve.times[mask][-1] < 10 * t_min:
        raise InsufficientDataError("curve must cover at least one decade above t_min")
    fit = linregress(np.log(curve.times[mask]), np.log(curve.p_in[mask]))
    return float(fit.slope)


def _exponential(t, a, b):
    return a * np.exp(-b * t)


def fit_exponential(curve, window):
    """
    Fit a exp(-b t) to P_in over `window` with unit weights

    Raises:
        DomainError: window outside the curve
        InsufficientDataError: fewer than ten samples in the window
        FitError: the least-squares iteration did not converge
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise DomainError("fit window needs lo < hi")
    slack = 1e-9 * max(1.0, abs(hi))
    if lo < curve.times[0] - slack or hi > curve.times[-1] + slack:
        raise DomainError("fit window lies outside the sampled times")
    mask = (curve.times >= lo - slack) & (curve.times <= hi + slack)
    t, p = curve.times[mask], curve.p_in[mask]
    if t.size < MIN_FIT_POINTS:
        raise InsufficientDataError(f"need at least {MIN_FIT_POINTS} samples in the fit window")

    guess = linregress(t, np.log(p))
    start = (float(np.exp(guess.intercept)), float(-guess.slope))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            (a, b), _ = curve_fit(_exponential, t, p, p0=start, maxfev=MAX_FIT_EVALUATIONS)
    except RuntimeError as error:
        residual = float(np.sum((p - _exponential(t, *start)) ** 2))
        raise FitError(f"exponential fit did not converge: {error}", residual=residual) from error

    residuals = p - _exponential(t, a, b)
    chi2 = float(np.sum(residuals ** 2) / (t.size - 2))
    return ExpFitResult(a=float(a), b=float(b), window=(lo, hi), chi2_per_dof=chi2, n_points=int(t.size))


def lambda_peak(K, cfg):
    """Location and height of the maximum of lambda(t)"""
    _require_positive_k(K)
    scale = K * cfg.L + K ** 2
    grid = np.linspace(0.0, 10 * scale, PEAK_GRID_POINTS)
    index = int(np.argmax(decay_rate(grid, K, cfg)))
    lo, hi = grid[max(index - 1, 0)], grid[min(index + 1, grid.size - 1)]
    found = minimize_scalar(lambda time: -decay_rate(time, K, cfg), bounds=(lo, hi),
                            method="bounded", options={"xatol": 1e-10 * scale})
    return LambdaPeak(t_peak=float(found.x), height=float(-found.fun))


def step_features(curve, t_max=20.0):
    """Times of the local minima of dP/dt in (0, t_max]"""
    slope = np.gradient(curve.p_in, curve.times)
    minima = argrelextrema(slope, np.less)[0]
    times = curve.times[minima]
    return times[(times > 0) & (times <= t_max)]


def is_smoothed_monotone(curve, window=0.5, tolerance=1e-4):
    """True when the moving average of P_in over `window` never rises by more than `tolerance`"""
    steps = np.diff(curve.times)
    if not np.allclose(steps, steps[0], rtol=1e-6):
        raise DomainError("smoothing needs a uniform time grid")
    width = max(1, int(round(window / steps[0])))
    smoothed = np.convolve(curve.p_in, np.ones(width) / width, mode="valid")
    return bool(np.all(np.diff(smoothed) <= tolerance))
