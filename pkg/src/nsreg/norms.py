"""Spatial L^p and fractional Sobolev norms, and L^theta norms in time.

Vector fields are measured through their pointwise Euclidean magnitude and
a uniform lattice quadrature; ``p = inf`` is the collocation maximum, which
underestimates the true supremum by O(n^-2) for smooth fields.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidExponentError, NormChainViolation
from .fields import PhysicalVectorField, SpectralVectorField, to_physical
from .operators import a_power


class Verdict(enum.Enum):
    FINITE = "FINITE"
    DIVERGED = "DIVERGED"


class SpatialKind(enum.Enum):
    LEBESGUE = "LEBESGUE"
    NEG_SOBOLEV = "NEG_SOBOLEV"


@dataclass(frozen=True)
class NormSpec:
    spatial_kind: SpatialKind
    p: float
    sobolev_order: float = 0.0

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidExponentError(f"p must exceed 1, got {self.p}")
        if self.spatial_kind is SpatialKind.NEG_SOBOLEV and not self.sobolev_order < 0:
            raise ValueError("NEG_SOBOLEV norms need a negative sobolev_order")
        if self.spatial_kind is SpatialKind.LEBESGUE and self.sobolev_order != 0:
            raise ValueError("LEBESGUE norms have sobolev_order 0")

    def __call__(self, f: SpectralVectorField) -> float:
        if self.spatial_kind is SpatialKind.LEBESGUE:
            return lp_norm(to_physical(f), self.p)
        return sobolev_norm(f, self.sobolev_order, self.p)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Norm samples at strictly increasing times.

    ``diverged`` marks a series whose sampling stopped at a non-finite value;
    ``times``/``values`` then hold only the finite prefix.
    """

    times: np.ndarray
    values: np.ndarray
    diverged: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if len(t) == 0 and not self.diverged:
            raise ValueError("a finite series needs at least one sample")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("values must be finite and nonnegative")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def from_samples(cls, times: Sequence[float], values: Sequence[float]) -> TimeSeries:
        """Build a series, truncating at the first non-finite value (flagged diverged)."""
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        bad = ~np.isfinite(v)
        if bad.any():
            i = int(np.argmax(bad))
            return cls(t[:i], v[:i], diverged=True)
        return cls(t, v)


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1:
        raise InvalidExponentError(f"Lebesgue exponent must exceed 1, got {p}")
    return p


def _lp_of_magnitude(mag: np.ndarray, p: float, cell_volume: float) -> float:
    m = float(np.max(mag)) if mag.size else 0.0
    if math.isinf(p) or m == 0.0:
        return m
    # scale by the max to keep |v|^p representable for large p
    return m * (cell_volume * np.sum((mag / m) ** p)) ** (1.0 / p)


def lp_norm(f: PhysicalVectorField, p: float) -> float:
    p = _check_p(p)
    return _lp_of_magnitude(f.magnitude(), p, f.grid.cell_volume)


def sobolev_norm(f: SpectralVectorField, s: float, p: float) -> float:
    """``||A^(s/2) f||_p``; ``s`` is the Sobolev index."""
    p = _check_p(p)
    return lp_norm(to_physical(a_power(s / 2.0, f)), p)


def sobolev_norm_plancherel(f: SpectralVectorField, s: float) -> float:
    """L2-based Sobolev norm from the coefficient sum (independent of the transform)."""
    g = f.grid
    ksq = g.ksq.copy()
    ksq[0, 0, 0] = 1.0
    w = ksq**s
    w[0, 0, 0] = 0.0 if s != 0 else 1.0
    return float(np.sqrt(g.volume * np.sum(w * np.sum(np.abs(f.coeffs) ** 2, axis=0))))


def lebesgue_chain_check(f: PhysicalVectorField, r: float) -> tuple[float, float]:
    """Return ``(||f||_r, |Omega|^(1/r) ||f||_inf)``; raise if the bound fails.

    When ``|Omega| >= 1`` the coarser bound ``||f||_r <= |Omega| ||f||_inf`` is
    checked as well.
    """
    r = float(r)
    if r < 1:
        raise InvalidExponentError(f"r must be >= 1, got {r}")
    mag = f.magnitude()
    vol = f.grid.volume
    sup = float(np.max(mag))
    lhs = _lp_of_magnitude(mag, r, f.grid.cell_volume) if r > 1 else float(
        f.grid.cell_volume * np.sum(mag)
    )
    bound = vol ** (1.0 / r) * sup
    if lhs > bound * (1 + 1e-12):
        raise NormChainViolation(f"||f||_{r} = {lhs!r} exceeds {bound!r}")
    if vol >= 1 and lhs > vol * sup * (1 + 1e-12):
        raise NormChainViolation(f"||f||_{r} = {lhs!r} exceeds |Omega| ||f||_inf = {vol * sup!r}")
    return lhs, bound


def linf_limit_probe(f: PhysicalVectorField, r_list: Sequence[float]) -> np.ndarray:
    """``||f||_r`` for each r in an increasing list (r >= 2).

    Divide entry i by ``|Omega|^(1/r_i)`` for the measure-normalized sequence,
    which is nondecreasing and tends to the collocation max.
    """
    r = np.asarray(r_list, dtype=float)
    if r.ndim != 1 or len(r) == 0:
        raise ValueError("r_list must be a nonempty 1-d sequence")
    if np.any(np.diff(r) <= 0) or r[0] < 2:
        raise ValueError("r_list must be increasing with entries >= 2")
    mag = f.magnitude()
    return np.array([_lp_of_magnitude(mag, ri, f.grid.cell_volume) for ri in r])


def trapezoid_running(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral, starting at 0."""
    out = np.zeros(len(times))
    if len(times) > 1:
        out[1:] = np.cumsum(0.5 * np.diff(times) * (values[1:] + values[:-1]))
    return out


def time_lebesgue_norm(series: TimeSeries, theta: float) -> float | Verdict:
    """L^theta((t0, t_end)) norm by trapezoid quadrature; ``theta = inf`` is the max."""
    theta = float(theta)
    if theta < 1:
        raise InvalidExponentError(f"theta must be >= 1, got {theta}")
    if series.diverged:
        return Verdict.DIVERGED
    if math.isinf(theta):
        return float(np.max(series.values))
    integral = trapezoid_running(series.times, series.values**theta)[-1]
    return float(integral ** (1.0 / theta))
