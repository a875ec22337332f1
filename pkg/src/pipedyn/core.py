"""Unit conventions and the stationary-regime primitives."""

from __future__ import annotations

import logging
import math

import numpy as np

from pipedyn.errors import DomainError, NumericalError
from pipedyn.models import SeriesControl, SteadyState, UnitScale

logger = logging.getLogger(__name__)

# Euler's constant as used by the valve-timing formulas, 6 digits.
EULER_C = 0.577215

# The classic engineering pressure unit: 1 kgf/m² taken as 10 Pa.
PA_PER_KGF_M2 = 10.0

_SCALE_TO_PA = {
    UnitScale.pa: 1.0,
    UnitScale.pa_1e4: 1e4,
    UnitScale.mpa_1e2: 1e4,  # 1e-2 MPa == 1e4 Pa
}


def to_pascal(value: float, scale: UnitScale) -> float:
    return value * _SCALE_TO_PA[UnitScale(scale)]


def from_pascal(value: float, scale: UnitScale) -> float:
    return value / _SCALE_TO_PA[UnitScale(scale)]


def sound_speed(z: float, R: float, T: float) -> float:
    """Isothermal sound speed c = sqrt(zRT)."""
    if z <= 0 or R <= 0 or T <= 0:
        raise DomainError(f"sound speed needs positive z, R, T (got {z}, {R}, {T})")
    return math.sqrt(z * R * T)


def charny_linearization(lambda_h: float, v_mean: float, d: float) -> float:
    """Linearization coefficient 2a = lambda·v / (2d)."""
    if d <= 0:
        raise DomainError(f"diameter must be positive, got {d}")
    if lambda_h < 0 or v_mean < 0:
        raise DomainError("lambda_h and v_mean must be non-negative")
    return lambda_h * v_mean / (2 * d)


def mean_velocity(two_a: float, lambda_h: float, d: float) -> float:
    """Inverse of charny_linearization for the mean velocity."""
    if lambda_h <= 0 or d <= 0:
        raise DomainError("lambda_h and d must be positive")
    return two_a * 2 * d / lambda_h


def steady_profile(steady: SteadyState, two_a: float, x: float, length: float) -> float:
    """Linear stationary profile P(x) = p_start - 2a·g0·x."""
    check_coordinate(x, length)
    return steady.p_start - two_a * steady.g0 * x


def check_coordinate(x: float, length: float) -> None:
    if not 0 <= x <= length:
        raise DomainError(f"x={x} outside [0, {length}]")


def modes(control: SeriesControl) -> np.ndarray:
    """Summation indices 1..n_terms as floats."""
    return np.arange(1, control.n_terms + 1, dtype=float)


_unconverged: set[str] = set()


def sum_series(terms: np.ndarray, control: SeriesControl, label: str = "series") -> float:
    """Sum truncated series terms.

    A last term above tail_tol (relative to the sum) logs one warning per
    label; a non-finite sum raises NumericalError.
    """
    total = float(np.sum(terms))
    if not math.isfinite(total):
        raise NumericalError(f"{label}: series sum is {total}")
    if terms.size:
        tail = abs(float(terms[-1]))
        if tail > control.tail_tol * max(abs(total), 1.0) and label not in _unconverged:
            _unconverged.add(label)
            logger.warning(
                "%s: last of %d terms is %.3e, above tail_tol=%.1e; raise n_terms",
                label,
                terms.size,
                tail,
                control.tail_tol,
            )
    return total
