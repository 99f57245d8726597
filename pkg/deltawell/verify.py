"""
Invariant suite behind `deltawell verify`

Each check measures one property of the solution for the configured
potential and compares it with a tolerance. Numerical failures become failed
checks instead of aborting the run.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .eigenbasis import (derivative_jump, eigen_coeffs, eigenfunction, orthogonality_weight,
                         orthogonality_weight_expanded)
from .errors import ConvergenceError, DeltaWellError
from .observables import (asymptotic_slope, decay_curve, decay_rate, large_l_limit,
                          survival_closed_form, survival_quadrature)
from .propagator import (CONTOUR, QUADRATURE, WaveField, norm, normalization_c1, psi_closed_form,
                         region_two_centroid)
from .spectral import gaussian, normalization_integral, reconstruct_spectral

logger = logging.getLogger(__name__)

SAMPLE_ENERGIES = (0.1, 0.5, 2.0, 7.3)
UNITARITY_TIMES = (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)


@dataclass
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    config: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def to_dict(self):
        return {
            "generated_by": f"deltawell {__version__}",
            "config": self.config,
            "passed": self.passed,
            "checks": [asdict(check) for check in self.checks],
        }


def _relative(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.maximum(np.abs(b), 1e-300)))


def check_continuity(cfg, K, tol_abs, tol_rel):
    gaps = []
    for E in SAMPLE_ENERGIES:
        coeffs = eigen_coeffs(E, cfg)
        p = coeffs.p
        outside = coeffs.c2 * np.sin(p * cfg.L) + coeffs.c3 * np.cos(p * cfg.L)
        gaps.append(abs(outside - np.sin(p * cfg.L)) / max(1.0, abs(np.sin(p * cfg.L))))
    return float(max(gaps)), 1e-12


def check_jump(cfg, K, tol_abs, tol_rel):
    h = 1e-6
    L = cfg.L
    gaps = []
    for E in SAMPLE_ENERGIES:
        coeffs = eigen_coeffs(E, cfg)
        p = coeffs.p

        def inside(x):
            return np.sin(p * x)

        def outside(x):
            return coeffs.c2 * np.sin(p * x) + coeffs.c3 * np.cos(p * x)

        # central differences of each branch continued across L
        left = (inside(L + h) - inside(L - h)) / (2 * h)
        right = (outside(L + h) - outside(L - h)) / (2 * h)
        expected = 2 * cfg.V0 * eigenfunction(E, L, cfg)
        gaps.append(abs((right - left) - expected))
        gaps.append(abs(derivative_jump(E, cfg).jump - expected))
    return float(max(gaps)), 1e-6


def check_weight_forms(cfg, K, tol_abs, tol_rel):
    energies = np.geomspace(1e-6, 1e3, 200)
    return _relative(orthogonality_weight_expanded(energies, cfg), orthogonality_weight(energies, cfg)), 1e-12


def check_free_limit(cfg, K, tol_abs, tol_rel):
    coeffs = eigen_coeffs(np.array(SAMPLE_ENERGIES), cfg)
    return float(np.max(np.abs(coeffs.c3)) + np.max(np.abs(coeffs.c2 - 1))), 1e-15


def check_normalization_routes(cfg, K, tol_abs, tol_rel):
    value = normalization_integral(gaussian(K), cfg, 1.0, tol_abs=tol_abs, tol_rel=tol_rel)
    return _relative(value ** -0.5, normalization_c1(K, cfg)), 1e-8


def check_unitarity(cfg, K, tol_abs, tol_rel):
    wf = WaveField.build(cfg, gaussian(K), tol_abs=tol_abs, tol_rel=tol_rel)
    return float(max(abs(norm(wf, t) - 1) for t in UNITARITY_TIMES)), 1e-6


def check_quadrature_oracle(cfg, K, tol_abs, tol_rel):
    wf = WaveField.build(cfg, gaussian(K), mode=QUADRATURE, tol_abs=tol_abs, tol_rel=tol_rel)
    x = np.array([0.5, cfg.L + 0.1, 2 * cfg.L])
    gaps = [np.max(np.abs(wf.psi(x, t) - psi_closed_form(x, t, K, cfg, wf.c1))) for t in (0.0, 1.5)]
    return float(max(gaps)), 1e-7


def check_contour_oracle(cfg, K, tol_abs, tol_rel):
    wf = WaveField.build(cfg, gaussian(K), mode=CONTOUR, tol_abs=tol_abs, tol_rel=tol_rel)
    x = np.array([0.5, cfg.L + 0.1, 2 * cfg.L])
    gaps = [np.max(np.abs(wf.psi(x, t) - psi_closed_form(x, t, K, cfg, wf.c1))) for t in (1.5, 5.0)]
    return float(max(gaps)), 1e-7


def check_survival_oracle(cfg, K, tol_abs, tol_rel):
    wf = WaveField.build(cfg, gaussian(K), tol_abs=tol_abs, tol_rel=tol_rel)
    times = np.array([0.0, 2.0, 20.0])
    return float(np.max(np.abs(survival_quadrature(times, wf) - survival_closed_form(times, K, cfg)))), 1e-7


def check_decay_rate(cfg, K, tol_abs, tol_rel):
    gaps = []
    for t in (0.5, 2.0, 10.0, 50.0):
        h = 1e-5 * max(1.0, t)
        difference = -(np.log(survival_closed_form(t + h, K, cfg))
                       - np.log(survival_closed_form(t - h, K, cfg))) / (2 * h)
        gaps.append(_relative(difference, decay_rate(t, K, cfg)))
    return float(max(gaps)), 1e-5


def check_asymptotic_slope(cfg, K, tol_abs, tol_rel):
    curve = decay_curve(K, cfg, np.geomspace(50.0, 1000.0, 40))
    return abs(asymptotic_slope(curve, 50.0) + 3), 0.05


def check_large_l_limit(cfg, K, tol_abs, tol_rel):
    far = cfg.replace(L=max(cfg.L, 40 * K))
    return abs(survival_closed_form(0.0, K, far) - large_l_limit(K, cfg.V0)), 1e-3


def check_centroid(cfg, K, tol_abs, tol_rel):
    wf = WaveField.build(cfg, gaussian(K), tol_abs=tol_abs, tol_rel=tol_rel)
    return abs(region_two_centroid(wf, 0.0) - 2 * cfg.L), 1e-3


def check_round_trip(cfg, K, tol_abs, tol_rel):
    c1 = normalization_c1(K, cfg)
    energies = np.array([0.5, 2.0, 5.0])

    def initial(x):
        return psi_closed_form(x, 0.0, K, cfg, c1)

    rebuilt = reconstruct_spectral(initial, cfg, c1, energies, tol_abs=tol_abs, tol_rel=tol_rel)
    return float(np.max(np.abs(rebuilt(energies) - np.exp(-K ** 2 * energies)))), 1e-6


CHECKS = {
    "continuity_at_L": check_continuity,
    "derivative_jump": check_jump,
    "weight_forms": check_weight_forms,
    "normalization_routes": check_normalization_routes,
    "unitarity": check_unitarity,
    "oracle_closed_vs_quadrature": check_quadrature_oracle,
    "oracle_closed_vs_contour": check_contour_oracle,
    "survival_closed_vs_quadrature": check_survival_oracle,
    "decay_rate_log_derivative": check_decay_rate,
    "asymptotic_slope": check_asymptotic_slope,
    "large_L_limit": check_large_l_limit,
    "region_two_centroid": check_centroid,
    "spectral_round_trip": check_round_trip,
}


def run_checks(config):
    """
    Run the invariant suite for a RunConfig (gaussian spectrum with its K)

    Returns:
        VerificationReport
    """
    cfg, K = config.potential, config.K
    report = VerificationReport(config={"L": config.L, "V0": config.V0, "K": K,
                                        "tol_abs": config.tol_abs, "tol_rel": config.tol_rel})
    checks = dict(CHECKS)
    if cfg.V0 == 0:
        # no barrier: region II is not separated from the well
        checks.pop("region_two_centroid")
        checks["free_particle_limit"] = check_free_limit

    for name, check in checks.items():
        try:
            measured, tolerance = check(cfg, K, config.tol_abs, config.tol_rel)
            passed = bool(np.isfinite(measured) and measured <= tolerance)
            result = CheckResult(name, float(measured), tolerance, passed)
        except ConvergenceError as error:
            result = CheckResult(name, float(error.estimate), float(error.tolerance), False, str(error))
        except DeltaWellError as error:
            result = CheckResult(name, float("nan"), float("nan"), False, str(error))
        logger.info("check %s: %s (%.3e vs %.1e)", name, "pass" if result.passed else "FAIL",
                    result.measured, result.tolerance)
        report.checks.append(result)
    return report
