"""Regularity criteria evaluated on solver trajectories.

A criterion pairs a target field (velocity or vorticity) and a spatial norm
with a time exponent theta, tied to p through ``2/theta + 3/p = scaling_sum``
(``3/inf = 0``). Three families are built in:

* the negative-Sobolev vorticity criterion, ``omega in L^theta(H^{-1,p})``
  with scaling sum 1 and ``p in (3, inf]``;
* the Serrin-type velocity criterion ``u in L^theta(L^p)`` with scaling
  sum 2, the convention under which it is quoted alongside the vorticity
  result (the Ladyzhenskaya-Prodi-Serrin sum 1 is available through
  :class:`CriterionSpec` directly);
* the classical Beale-Kato-Majda integral ``omega in L^1(L^inf)``.

Nothing here decides regularity of a true solution: the monitor reports
time integrals of resolved norms.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidExponentError, InvalidScalingError
from .fields import SpectralVectorField, to_physical
from .norms import NormSpec, SpatialKind, TimeSeries, Verdict, lp_norm, sobolev_norm, trapezoid_running
from .operators import b1_apply, curl
from .solver import Trajectory

SCALING_TOL = 1e-12


class Target(enum.Enum):
    VELOCITY = "VELOCITY"
    VORTICITY = "VORTICITY"


def _three_over(p: float) -> float:
    return 0.0 if math.isinf(p) else 3.0 / p


def theta_from_p(p: float, scaling_sum: float) -> float:
    """Time exponent from ``2/theta + 3/p = scaling_sum``."""
    p = float(p)
    if not p > 3:
        raise InvalidExponentError(f"p must exceed 3, got {p}")
    denom = scaling_sum - _three_over(p)
    if not denom > 0:
        raise InvalidScalingError(
            f"scaling sum {scaling_sum} leaves no positive theta at p={p}"
        )
    return 2.0 / denom


@dataclass(frozen=True)
class CriterionSpec:
    id: str
    target: Target
    norm: NormSpec
    theta: float
    scaling_sum: float

    def __post_init__(self):
        if not self.theta >= 1:
            raise InvalidExponentError(f"theta must be >= 1, got {self.theta}")
        s = 2.0 / self.theta + _three_over(self.norm.p)
        if abs(s - self.scaling_sum) > SCALING_TOL:
            raise InvalidScalingError(
                f"2/theta + 3/p = {s!r} does not match scaling_sum {self.scaling_sum!r}"
            )

    @property
    def p(self) -> float:
        return self.norm.p

    def instantaneous(self, u: SpectralVectorField) -> float:
        """Spatial norm of the target field of velocity ``u``."""
        f = curl(u) if self.target is Target.VORTICITY else u
        return self.norm(f)


def builtin_paper_criterion(p: float = math.inf) -> CriterionSpec:
    theta = theta_from_p(p, 1.0)
    return CriterionSpec(
        id=f"paper_hm1_p{_ptag(p)}",
        target=Target.VORTICITY,
        norm=NormSpec(SpatialKind.NEG_SOBOLEV, float(p), -1.0),
        theta=theta,
        scaling_sum=1.0,
    )


def builtin_serrin(p: float) -> CriterionSpec:
    theta = theta_from_p(p, 2.0)
    return CriterionSpec(
        id=f"serrin_p{_ptag(p)}",
        target=Target.VELOCITY,
        norm=NormSpec(SpatialKind.LEBESGUE, float(p)),
        theta=theta,
        scaling_sum=2.0,
    )


def builtin_bkm_classic() -> CriterionSpec:
    return CriterionSpec(
        id="bkm_classic",
        target=Target.VORTICITY,
        norm=NormSpec(SpatialKind.LEBESGUE, math.inf),
        theta=1.0,
        scaling_sum=2.0,
    )


def _ptag(p: float) -> str:
    p = float(p)
    if math.isinf(p):
        return "inf"
    return f"{p:g}"


@dataclass(frozen=True, eq=False)
class CriterionReport:
    spec: CriterionSpec
    instantaneous: TimeSeries
    running_integral: TimeSeries
    final_value: float | Verdict
    verdict: Verdict


def report_from_series(spec: CriterionSpec, series: TimeSeries) -> CriterionReport:
    """Running ``int_0^t value^theta`` and the final L^theta value of a series."""
    t, v = series.times, series.values
    if math.isinf(spec.theta):
        running = np.maximum.accumulate(v) if len(v) else v
    else:
        running = trapezoid_running(t, v**spec.theta)
    running_ts = TimeSeries(t, running, diverged=series.diverged)
    if series.diverged:
        return CriterionReport(spec, series, running_ts, Verdict.DIVERGED, Verdict.DIVERGED)
    last = float(running[-1])
    final = last if math.isinf(spec.theta) else last ** (1.0 / spec.theta)
    return CriterionReport(spec, series, running_ts, final, Verdict.FINITE)


def instantaneous_series(traj: Trajectory, spec: CriterionSpec) -> TimeSeries:
    if spec.id in traj.diagnostics:
        s = traj.diagnostics[spec.id]
        return TimeSeries(s.times, s.values, diverged=s.diverged or traj.diverged)
    if not traj.snapshots:
        raise InsufficientDataError("trajectory has no snapshots")
    vals = [spec.instantaneous(u) for u in traj.snapshots]
    s = TimeSeries.from_samples(traj.times, vals)
    return TimeSeries(s.times, s.values, diverged=s.diverged or traj.diverged)


def evaluate(traj: Trajectory, spec: CriterionSpec) -> CriterionReport:
    """Evaluate ``spec`` at snapshot cadence; DIVERGED iff the trajectory diverged."""
    return report_from_series(spec, instantaneous_series(traj, spec))


@dataclass(frozen=True, eq=False)
class BlowupIndicator:
    """Running sup of the H^{-1,inf} norm of the vorticity."""

    running_sup: TimeSeries

    @property
    def diverged(self) -> bool:
        return self.running_sup.diverged


def blowup_from_series(series: TimeSeries) -> BlowupIndicator:
    v = np.maximum.accumulate(series.values) if len(series) else series.values
    return BlowupIndicator(TimeSeries(series.times, v, diverged=series.diverged))


def blowup_indicator(traj: Trajectory) -> BlowupIndicator:
    return blowup_from_series(instantaneous_series(traj, builtin_paper_criterion(math.inf)))


@dataclass(frozen=True, eq=False)
class EquivalenceProbe:
    """Velocity L^p norms against vorticity H^{-1,p} norms for one field."""

    p_values: tuple[float, ...]
    velocity_norms: np.ndarray
    vorticity_norms: np.ndarray
    identity_residual: float

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.vorticity_norms / self.velocity_norms

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.velocity_norms.tolist(), self.vorticity_norms.tolist()))


def norm_equivalence_probe(u: SpectralVectorField, p_list: Sequence[float]) -> EquivalenceProbe:
    """Compare ``||u||_p`` with ``||curl u||_{H^{-1,p}}`` for each p.

    ``identity_residual`` is the largest relative gap between
    ``||curl u||_{H^{-1,p}}`` and ``||B1 u||_p`` over the list, which must
    vanish because ``A^-1/2 curl u`` is ``B1 u`` by definition.
    """
    ps = tuple(float(p) for p in p_list)
    w = curl(u)
    b1 = to_physical(b1_apply(u))
    up = to_physical(u)
    vel = np.array([lp_norm(up, p) for p in ps])
    vort = np.array([sobolev_norm(w, -1.0, p) for p in ps])
    b1n = np.array([lp_norm(b1, p) for p in ps])
    scale = np.maximum(np.abs(b1n), np.finfo(float).tiny)
    resid = float(np.max(np.abs(vort - b1n) / scale)) if ps else 0.0
    return EquivalenceProbe(ps, vel, vort, resid)
