"""Finite measures on [0, 1] used to drive coalescent rates.

A measure is stored as an optional atom at 0, an optional atom at 1, and a
density on the open interval (0, 1).  The density callable must accept numpy
arrays.  Named families (Kingman, Beta, Uniform) carry a tag so downstream
code can switch to closed-form rate formulas; anything else is integrated
numerically.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import betaln

from .errors import (DomainError, OutOfRange, QuadratureDivergence,
                     SingularEndpoint)

DEFAULT_TOL = 1e-10

# Endpoint panels shrink geometrically toward 0 and 1 by this factor.
_PANEL_SHRINK = 0.25
_PANEL_FLOOR = 1e-14


class Family(enum.Enum):
    KINGMAN = "kingman"
    BETA = "beta"
    UNIFORM = "uniform"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LambdaMeasure:
    """Finite measure atom0*delta_0 + atom1*delta_1 + density(x) dx on [0, 1]."""

    atom0: float = 0.0
    atom1: float = 0.0
    density: Callable[[np.ndarray], np.ndarray] | None = None
    family: Family = Family.CUSTOM
    beta: float | None = None
    label: str = field(default="custom")

    def __post_init__(self):
        if self.atom0 < 0 or self.atom1 < 0:
            raise OutOfRange("atom masses must be nonnegative")

    def has_density(self) -> bool:
        return self.density is not None

    def __repr__(self) -> str:  # keep hashes/logs short
        return f"LambdaMeasure({self.label})"


def kingman(mass: float = 1.0) -> LambdaMeasure:
    """Point mass at 0; every pair merges at rate `mass`."""
    if mass <= 0:
        raise OutOfRange("mass must be positive")
    return LambdaMeasure(atom0=mass, family=Family.KINGMAN,
                         label=f"kingman({mass:g})")


def _check_unit_interval(x: np.ndarray):
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("density evaluated outside [0, 1]")


def uniform() -> LambdaMeasure:
    """Lebesgue measure on [0, 1] (Bolthausen-Sznitman rates)."""

    def dens(x):
        x = np.asarray(x, dtype=float)
        _check_unit_interval(x)
        return np.ones_like(x)

    return LambdaMeasure(density=dens, family=Family.UNIFORM, label="uniform")


def beta_measure(beta: float) -> LambdaMeasure:
    """Beta(2 - beta, beta) density; beta must lie in (0, 2)."""
    if not 0.0 < beta < 2.0:
        raise OutOfRange(f"beta={beta} outside (0, 2)")
    lognorm = betaln(2.0 - beta, beta)

    def dens(x, _b=beta, _ln=lognorm):
        x = np.asarray(x, dtype=float)
        _check_unit_interval(x)
        with np.errstate(divide="ignore"):    # endpoints map to 0 or inf
            return np.exp((1.0 - _b) * np.log(x)
                          + (_b - 1.0) * np.log1p(-x) - _ln)

    return LambdaMeasure(density=dens, family=Family.BETA, beta=beta,
                         label=f"beta({beta:g})")


def custom(atom0: float = 0.0, atom1: float = 0.0,
           density: Callable[[np.ndarray], np.ndarray] | None = None,
           label: str = "custom") -> LambdaMeasure:
    return LambdaMeasure(atom0=atom0, atom1=atom1, density=density,
                         label=label)


def from_table(xs: Sequence[float], ys: Sequence[float],
               atom0: float = 0.0, atom1: float = 0.0,
               label: str = "table") -> LambdaMeasure:
    """Piecewise-linear density through (xs, ys); xs must cover (0, 1)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise OutOfRange("xs must be strictly increasing with >= 2 knots")
    if np.any(ys < 0):
        raise OutOfRange("density table values must be nonnegative")

    def dens(x, _xs=xs, _ys=ys):
        x = np.asarray(x, dtype=float)
        _check_unit_interval(x)
        return np.interp(x, _xs, _ys)

    return LambdaMeasure(atom0=atom0, atom1=atom1, density=dens, label=label)


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

def _panel_edges() -> np.ndarray:
    """Panel boundaries on (0, 1), geometrically refined toward both ends."""
    left = [_PANEL_FLOOR]
    while left[-1] < 0.25:
        left.append(left[-1] / _PANEL_SHRINK)
    left = np.asarray(left)
    right = 1.0 - left[::-1]
    return np.concatenate([[0.0], left, [0.5], right, [1.0]])


def _integrate_density(fn: Callable[[np.ndarray], np.ndarray],
                       tol: float) -> float:
    """Integrate fn over (0, 1) with certified absolute error <= tol.

    fn is only evaluated at interior points, so integrable endpoint
    singularities are fine.  Raises QuadratureDivergence when the error
    estimate cannot be brought under tol.
    """
    scalar = lambda x: float(fn(np.asarray([x]))[0])
    with np.errstate(all="ignore"), warnings.catch_warnings():
        # the whole-interval attempt is allowed to fail; the panel pass is
        # the real safety net, so its warnings carry no information
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(scalar, 0.0, 1.0,
                                      epsabs=tol * 0.5, epsrel=0.0, limit=300)
            if math.isfinite(val) and err <= tol:
                return val
        except Exception:
            pass
        # panel fallback: refine toward the endpoints explicitly
        edges = _panel_edges()
        total = 0.0
        total_err = 0.0
        per_panel = tol / (2.0 * len(edges))
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                v, e = integrate.quad(scalar, a, b, epsabs=per_panel,
                                      epsrel=1e-12, limit=200)
            except Exception as exc:
                raise QuadratureDivergence(
                    f"integration failed on panel ({a:g}, {b:g}): {exc}")
            total += v
            total_err += e
        if not math.isfinite(total) or total_err > tol:
            raise QuadratureDivergence(
                f"error estimate {total_err:.3g} exceeds tol {tol:.3g}")
        return total


def total_mass(measure: LambdaMeasure, tol: float = DEFAULT_TOL) -> float:
    """Total mass Lambda([0, 1]); atoms plus the integrated density."""
    dens_part = 0.0
    if measure.density is not None:
        dens_part = _integrate_density(measure.density, tol)
    return measure.atom0 + measure.atom1 + dens_part


def moment_integral(measure: LambdaMeasure,
                    f: Callable[[np.ndarray], np.ndarray],
                    tol: float = DEFAULT_TOL) -> float:
    """Integral of f against the measure.

    Atoms contribute f at the endpoints, so f(0) (resp. f(1)) must be finite
    whenever the corresponding atom has positive mass; otherwise
    SingularEndpoint is raised.  The density part is integrated adaptively.
    """
    total = 0.0
    for atom, point in ((measure.atom0, 0.0), (measure.atom1, 1.0)):
        if atom > 0.0:
            with np.errstate(all="ignore"):
                val = float(np.asarray(f(np.asarray([point])))[0])
            if not math.isfinite(val):
                raise SingularEndpoint(
                    f"f has no finite value at x={point:g} but the measure "
                    f"carries an atom there")
            total += atom * val
    if measure.density is not None:
        dens = measure.density
        total += _integrate_density(lambda x: np.asarray(f(x)) * dens(x), tol)
    return total
