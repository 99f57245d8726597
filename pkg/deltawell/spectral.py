"""
Spectral functions phi(E) and the energy-space side of normalization

Three kinds are supported: the gaussian exp(-K^2 E), the square pulse that
produces a flat initial density on (0, L/2), and tabulated data interpolated
with a monotone cubic. Stationary states carry the amplitude c1; phi never
does.
"""
from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import integrate as sp_integrate
from scipy.interpolate import PchipInterpolator
from scipy.signal import argrelextrema
from scipy.special import exp1
from scipy.stats import linregress

from .eigenbasis import eigen_coeffs, momentum, stationary_state
from .errors import ConvergenceError, DomainError, RangeError, UnsupportedError
from .quadrature import DEFAULT_TOL_ABS, DEFAULT_TOL_REL, integrate

logger = logging.getLogger(__name__)

GAUSSIAN = "gaussian_in_E"
SQUARE_PULSE = "square_pulse"
TABULATED = "tabulated"
KINDS = (GAUSSIAN, SQUARE_PULSE, TABULATED)

# below this energy the square pulse uses its Taylor series
SERIES_THRESHOLD = 1e-8
ENVELOPE_FIT_RANGE = (1e2, 1e6)
ENVELOPE_FIT_SAMPLES = 20001
NEGLIGIBLE_INTEGRAND = 1e-16
MAX_NORMALIZATION_MOMENTUM = 2048.0
# exp(-K^2 p^2) is below exp(-144) past p = 12/K
GAUSSIAN_REACH = 12.0


def _frozen_array(values, dtype):
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class AdmissibilityReport(NamedTuple):
    finite_at_zero: bool
    decay_exponent: float
    admissible: bool


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """
    Immutable phi(E) of one of the supported kinds

    Use the `gaussian`, `square_pulse` and `tabulated` constructors instead of
    calling this directly.
    """
    kind: str
    params: Mapping = field(default_factory=dict)
    value_at_zero: complex = 0j

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown spectral function kind {self.kind!r}")
        params = dict(self.params)
        if self.kind == TABULATED:
            energies = params["energies"] = _frozen_array(params["energies"], float)
            values = params["values"] = _frozen_array(params["values"], complex)
            object.__setattr__(self, "_real", PchipInterpolator(energies, values.real, extrapolate=True))
            object.__setattr__(self, "_imag", PchipInterpolator(energies, values.imag, extrapolate=True))
        object.__setattr__(self, "params", MappingProxyType(params))

    def __call__(self, E):
        return evaluate(self, E)

    def __repr__(self):
        shown = {key: value for key, value in self.params.items() if np.isscalar(value)}
        return f"SpectralFunction(kind={self.kind!r}, params={shown})"

    @property
    def max_energy(self):
        """Largest energy at which the function may be evaluated"""
        if self.kind == TABULATED:
            return float(self.params["energies"][-1])
        return np.inf

    @property
    def oscillation_length(self):
        """Length scale u for which phi(p^2/2) oscillates like cos(u p)"""
        if self.kind == SQUARE_PULSE:
            return 0.5 * self.params["L"]
        return 0.0

    @cached_property
    def admissibility(self):
        return check_admissibility(self)

    def continued(self, E):
        """
        Analytic continuation of phi to complex energies

        Raises:
            UnsupportedError: tabulated data has no continuation rule
        """
        E = np.asarray(E, dtype=complex)
        if self.kind == GAUSSIAN:
            return np.exp(-self.params["K"] ** 2 * E)
        if self.kind == SQUARE_PULSE:
            return _square_pulse_values(E, self.params["L"])
        raise UnsupportedError("tabulated spectral functions have no analytic continuation")

    def envelope(self, E):
        """Upper bound of |phi(E)| for E >= 0"""
        E = np.asarray(E, dtype=float)
        if self.kind == GAUSSIAN:
            return np.exp(-self.params["K"] ** 2 * E)
        if self.kind == SQUARE_PULSE:
            L = self.params["L"]
            peak = abs(self.value_at_zero)
            with np.errstate(divide="ignore"):
                return np.minimum(peak, 1.0 / (E * np.sqrt(np.pi * L)))
        return self._tabulated_envelope(E)

    def _tabulated_envelope(self, E):
        energies = self.params["energies"]
        top = energies[-1]
        inside = np.abs(evaluate(self, np.clip(E, energies[0], top)))
        edge = abs(evaluate(self, top))
        beyond = edge * (np.maximum(E, top) / top) ** self.params["decay_exponent"]
        return np.where(E <= top, inside, beyond)

    def tail_integral(self, E_cut, damping=0.0):
        """
        Bound of the integral of envelope(E) exp(-2 damping E) over [E_cut, inf)

        Returns inf when the bound diverges.
        """
        if self.kind == GAUSSIAN:
            rate = self.params["K"] ** 2 + 2 * damping
            return float(np.exp(-rate * E_cut) / rate)
        if self.kind == SQUARE_PULSE:
            if damping <= 0:
                return np.inf
            return float(exp1(2 * damping * E_cut) / np.sqrt(np.pi * self.params["L"]))
        if damping <= 0 and self.params["decay_exponent"] >= -1:
            return np.inf
        value, _ = sp_integrate.quad(lambda E: float(self.envelope(E)) * np.exp(-2 * damping * E),
                                     E_cut, np.inf, limit=200)
        return float(value)


def gaussian(K):
    """phi(E) = exp(-K^2 E)"""
    if not (np.isfinite(K) and K > 0):
        raise DomainError(f"K must be positive, got {K!r}")
    return SpectralFunction(kind=GAUSSIAN, params={"K": float(K)}, value_at_zero=1.0 + 0j)


def square_pulse(L):
    """phi(E) = -i [1 - cos((L/2) sqrt(2E))] / (2E sqrt(pi L))"""
    if not (np.isfinite(L) and L > 0):
        raise DomainError(f"L must be positive, got {L!r}")
    value_at_zero = -1j * L ** 2 / (8 * np.sqrt(np.pi * L))
    return SpectralFunction(kind=SQUARE_PULSE, params={"L": float(L)}, value_at_zero=value_at_zero)


def tabulated(energies, values, decay_exponent, value_at_zero=None):
    """
    Tabulated phi on a strictly increasing energy grid

    Args:
        energies (array_like): Energies (>= 0, strictly increasing, at least 2); a grid
            starting above zero gets a leading node at E = 0 holding value_at_zero
        values (array_like): Complex phi at each energy
        decay_exponent (float): Declared large-E power law of |phi|
        value_at_zero (complex, optional): phi(0); extrapolated from the grid when omitted
    """
    energies = np.asarray(energies, dtype=float)
    values = np.asarray(values, dtype=complex)
    if energies.ndim != 1 or energies.size < 2 or energies.shape != values.shape:
        raise DomainError("tabulated spectral function needs matching 1-D grids of at least two points")
    if energies[0] < 0 or np.any(np.diff(energies) <= 0):
        raise DomainError("energy grid must be non-negative and strictly increasing")
    if value_at_zero is None:
        real = PchipInterpolator(energies, values.real, extrapolate=True)(0.0)
        imag = PchipInterpolator(energies, values.imag, extrapolate=True)(0.0)
        value_at_zero = complex(real + 1j * imag)
    if energies[0] > 0:
        # the grid always reaches E = 0, where integrals over p start
        energies = np.concatenate(([0.0], energies))
        values = np.concatenate(([value_at_zero], values))
    params = {"energies": energies, "values": values, "decay_exponent": float(decay_exponent)}
    return SpectralFunction(kind=TABULATED, params=params, value_at_zero=complex(value_at_zero))


def _square_pulse_values(E, L):
    small = np.abs(E) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, E)
    u = 0.5 * L * np.sqrt(2 * safe)
    # (1 - cos u) / 2E with 1 - cos u = 2 sin^2(u/2)
    regular = np.sin(0.5 * u) ** 2 / safe
    series = L ** 2 / 8 - L ** 4 * E / 192 + L ** 6 * E ** 2 / 11520
    return -1j * np.where(small, series, regular) / np.sqrt(np.pi * L)


def evaluate(sf, E):
    """
    phi(E) for E >= 0; E = 0 returns the stored limit

    Raises:
        DomainError: negative energy
        RangeError: tabulated function evaluated outside its grid
    """
    E_array = np.asarray(E, dtype=float)
    if np.any(E_array < 0):
        raise DomainError("spectral functions are defined for E >= 0 only")
    if sf.kind == GAUSSIAN:
        values = np.exp(-sf.params["K"] ** 2 * E_array) + 0j
    elif sf.kind == SQUARE_PULSE:
        values = _square_pulse_values(E_array, sf.params["L"])
    else:
        energies = sf.params["energies"]
        outside = E_array > energies[-1]
        if np.any(outside):
            raise RangeError(f"energy outside tabulated grid [{energies[0]}, {energies[-1]}]")
        values = sf._real(E_array) + 1j * sf._imag(E_array)
    values = np.where(E_array == 0, sf.value_at_zero, values)
    return values if np.ndim(E) else complex(values)


def _envelope_exponent(sf):
    if sf.kind == TABULATED:
        return sf.params["decay_exponent"]
    if sf.kind == GAUSSIAN:
        return -np.inf
    energies = np.geomspace(*ENVELOPE_FIT_RANGE, ENVELOPE_FIT_SAMPLES)
    magnitude = np.abs(evaluate(sf, energies))
    peaks = argrelextrema(magnitude, np.greater)[0]
    if peaks.size >= 2:
        energies, magnitude = energies[peaks], magnitude[peaks]
    if np.any(magnitude <= 0) or np.any(~np.isfinite(magnitude)):
        return -np.inf
    return float(linregress(np.log(energies), np.log(magnitude)).slope)


def check_admissibility(sf):
    """
    Report whether phi is finite at E = 0 and decays faster than 1/sqrt(E)

    The gaussian decays faster than any power and reports -inf; tabulated data
    reports its declared exponent. Otherwise the exponent comes from a log-log
    fit of the local maxima of |phi| over [1e2, 1e6].
    """
    finite_at_zero = bool(np.isfinite(sf.value_at_zero))
    exponent = _envelope_exponent(sf)
    return AdmissibilityReport(finite_at_zero=finite_at_zero, decay_exponent=exponent,
                               admissible=finite_at_zero and exponent < -0.5)


def _weight_bound(p, cfg, c1):
    # |c2|^2 + |c3|^2 <= c1^2 (1 + 2V0/p)^2
    return 0.5 * np.pi * c1 ** 2 * (1 + 2 * cfg.V0 / p) ** 2


def normalization_integral(sf, cfg, c1=1.0, measure="momentum",
                           tol_abs=DEFAULT_TOL_ABS, tol_rel=DEFAULT_TOL_REL):
    """
    Integral of w(E) |phi(E)|^2 over E >= 0

    Args:
        sf (SpectralFunction): Admissible spectral function
        cfg (PotentialConfig): Potential
        c1 (float): Amplitude inside the well
        measure (str): "momentum" integrates w |phi|^2 p dE, consistent with
            delta normalization in p and with the position-space norm;
            "energy" integrates w |phi|^2 dE
        tol_abs (float): Absolute tolerance
        tol_rel (float): Relative tolerance

    Returns:
        float: The integral; c1 = 1/sqrt(value) normalizes the state when called with c1 = 1

    Raises:
        DomainError: phi is not admissible or the measure is unknown
    """
    if measure not in ("momentum", "energy"):
        raise DomainError(f"unknown measure {measure!r}")
    report = sf.admissibility
    if not report.admissible:
        raise DomainError("normalization integral diverges")

    # dE = p dp, so the momentum measure picks up p^2 and the energy measure p
    power = 2 if measure == "momentum" else 1

    def integrand(p):
        E = np.minimum(0.5 * p ** 2, sf.max_energy)
        return eigen_coeffs(E, cfg, c1).w * np.abs(evaluate(sf, E)) ** 2 * p ** power

    p_support = min(np.sqrt(2 * sf.max_energy), MAX_NORMALIZATION_MOMENTUM)
    if sf.kind == GAUSSIAN:
        p_support = max(p_support, GAUSSIAN_REACH / sf.params["K"])
    width = min(0.25, np.pi / (8 * (cfg.L + sf.oscillation_length)))

    total, previous, latest = 0.0, None, None
    lo, hi = 0.0, min(1.0, p_support)
    while lo < p_support:
        edges = np.linspace(lo, hi, int(np.ceil((hi - lo) / width)) + 1)
        piece = float(integrate(integrand, edges, tol_abs=tol_abs * 1e-2, tol_rel=tol_rel).value)
        total += piece
        previous, latest = latest, piece
        bound = _weight_bound(hi, cfg, c1) * float(sf.envelope(0.5 * hi ** 2)) ** 2 * hi ** power
        if np.isneginf(report.decay_exponent) and bound < NEGLIGIBLE_INTEGRAND:
            logger.debug("normalization: exponential tail negligible beyond p=%.3g", hi)
            return total
        lo, hi = hi, min(2 * hi, p_support)

    if sf.kind == TABULATED:
        total += _tabulated_tail(sf, cfg, c1, power)
    elif previous and latest:
        ratio = latest / previous
        if not 0 < ratio < 1:
            raise ConvergenceError("normalization tail does not decay geometrically", estimate=abs(latest))
        # windows double in p, so power-law tails shrink by a fixed ratio
        total += latest * ratio / (1 - ratio)
    return total


def _tabulated_tail(sf, cfg, c1, power):
    top = sf.max_energy
    exponent = 2 * sf.params["decay_exponent"] + 0.5 * (power - 1)
    if exponent >= -1:
        raise DomainError("normalization integral diverges")
    edge = abs(evaluate(sf, top)) ** 2 * 0.5 * np.pi * c1 ** 2 * (2 * top) ** (0.5 * (power - 1))
    return edge * top / (-exponent - 1)


def _decay_extent(psi0, step=0.05, run=10, threshold=1e-12, limit=1e4):
    # end of the last run of `run` quiet samples, confirmed quiet out to twice that distance
    reach = 10.0
    while reach <= limit:
        x = step * np.arange(1, int(reach / step) + 1)
        loud = np.flatnonzero(np.abs(psi0(x)) >= threshold)
        last = loud[-1] + 1 if loud.size else 0
        end = last + run
        if end < x.size and x[-1] >= 2 * x[end]:
            return float(x[end])
        reach *= 2
    raise ConvergenceError("initial state does not decay within the search range", estimate=limit)


def reconstruct_spectral(psi0, cfg, c1, E_grid, tol_abs=DEFAULT_TOL_ABS, tol_rel=DEFAULT_TOL_REL):
    """
    Project an initial state on the stationary states

    phi(E) = integral of Psi_E(x) psi0(x) dx / (p w(E)), truncated where
    |psi0| stays below 1e-12 for ten consecutive samples.

    Args:
        psi0 (callable): Vectorized initial wavefunction x -> complex
        cfg (PotentialConfig): Potential
        c1 (float): Amplitude carried by the stationary states
        E_grid (array_like): Strictly positive increasing energies

    Returns:
        SpectralFunction: tabulated phi on E_grid
    """
    E_grid = np.asarray(E_grid, dtype=float)
    if E_grid.ndim != 1 or E_grid.size < 2:
        raise DomainError("energy grid needs at least two points")
    if np.any(E_grid <= 0) or np.any(np.diff(E_grid) <= 0):
        raise DomainError("energy grid must be strictly positive and increasing")

    p = momentum(E_grid)
    x_max = _decay_extent(psi0)
    width = min(0.25, np.pi / (4 * p[-1]))
    edges = np.linspace(0.0, x_max, int(np.ceil(x_max / width)) + 1)
    if cfg.L < x_max:
        edges = np.union1d(edges, [cfg.L])

    def integrand(x):
        return stationary_state(p[:, None], x[None, :], cfg, c1) * psi0(x)[None, :]

    projection = integrate(integrand, edges, tol_abs=tol_abs, tol_rel=tol_rel).value
    values = np.asarray(projection) / (p * eigen_coeffs(E_grid, cfg, c1).w)
    logger.info("reconstructed phi on %d energies with x_max=%.3g", E_grid.size, x_max)
    return tabulated(E_grid, values, decay_exponent=_grid_exponent(E_grid, values))


def _grid_exponent(energies, values):
    magnitude = np.abs(values)
    tail = slice(3 * len(energies) // 4, None)
    if len(energies[tail]) < 2 or np.any(magnitude[tail] <= 0):
        return -np.inf
    return float(linregress(np.log(energies[tail]), np.log(magnitude[tail])).slope)


def save_tabulated(sf, path):
    """Write a tabulated phi as CSV with columns E, re_phi, im_phi"""
    if sf.kind != TABULATED:
        raise UnsupportedError("only tabulated spectral functions can be saved")
    frame = pd.DataFrame({
        "E": sf.params["energies"],
        "re_phi": sf.params["values"].real,
        "im_phi": sf.params["values"].imag,
    })
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# decay_exponent={sf.params['decay_exponent']!r}\n")
        frame.to_csv(handle, index=False, float_format="%.16e", lineterminator="\n")


def load_tabulated(path):
    """Read a CSV written by `save_tabulated` (or by hand in the same layout)"""
    path = Path(path)
    exponent = None
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "decay_exponent":
                exponent = float(value)
    if exponent is None:
        raise DomainError(f"{path}: missing '# decay_exponent=' header")
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    missing = {"E", "re_phi", "im_phi"} - set(frame.columns)
    if missing:
        raise DomainError(f"{path}: missing columns {sorted(missing)}")
    values = frame["re_phi"].to_numpy() + 1j * frame["im_phi"].to_numpy()
    return tabulated(frame["E"].to_numpy(), values, decay_exponent=exponent)
