"""Projected Navier-Stokes on the periodic box, pseudo-spectral Galerkin.

The state is the velocity's Fourier coefficients, kept solenoidal, mean-free
and dealiased. The nonlinearity is used in rotational form, ``u x omega``,
whose gradient remainder (together with the pressure) is removed by the Leray
projection. Time stepping is fourth-order Runge-Kutta on the integrating
factor ``exp(nu A t)``, so the viscous decay is exact.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import InsufficientDataError, NSRegError, StepRejected, TimeRangeError
from .fields import (
    GridSpec,
    SpectralVectorField,
    dealias,
    fft3,
    half_to_full,
    ifft3,
    leray_project,
    make_mean_free,
    strip_nyquist,
    to_physical,
    to_spectral,
    PhysicalVectorField,
)
from .norms import TimeSeries, Verdict, trapezoid_running
from .operators import a_power, curl

logger = logging.getLogger(__name__)

CFL_EPS = 1e-12


class BlowUpDetected(NSRegError):
    """A non-finite coefficient appeared during a step."""


class Monitor(Protocol):
    id: str

    def instantaneous(self, u: SpectralVectorField) -> float: ...


@dataclass(frozen=True, eq=False)
class SolverConfig:
    grid: GridSpec
    viscosity: float
    dt: float
    horizon: float
    forcing: SpectralVectorField | None = None
    save_every: int = 1
    cfl_safety: float = 0.5

    def __post_init__(self):
        if not self.viscosity > 0:
            raise ValueError(f"viscosity must be positive, got {self.viscosity}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.horizon >= self.dt:
            raise ValueError("horizon must be at least one time step")
        if int(self.save_every) != self.save_every or self.save_every < 1:
            raise ValueError("save_every must be a positive integer")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.forcing is not None:
            if self.forcing.grid != self.grid:
                raise ValueError("forcing lives on a different grid")
            if not self.forcing.is_mean_free:
                raise ValueError("forcing must be mean-free")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class Trajectory:
    """Snapshots and diagnostic series of one run.

    ``diagnostics`` always holds ``energy`` (half the squared L2 norm),
    ``enstrophy`` (half the squared L2 norm of the vorticity) and
    ``vorticity_hm1_inf`` (the H^{-1,inf} norm of the vorticity), plus one
    series per monitor id.
    """

    config: SolverConfig
    snapshots: list[SpectralVectorField] = field(default_factory=list)
    diagnostics: dict[str, TimeSeries] = field(default_factory=dict)
    verdict: Verdict = Verdict.FINITE

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots], dtype=float)

    @property
    def diverged(self) -> bool:
        return self.verdict is Verdict.DIVERGED


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _nonlinear(u: SpectralVectorField) -> tuple[SpectralVectorField, float]:
    # raw transforms: the solver state is symmetric by construction
    up = ifft3(u.coeffs)
    wp = ifft3(curl(u).coeffs)
    prod = u.replace(fft3(_cross(up, wp)))
    umax = float(np.sqrt(np.max(np.sum(up**2, axis=0))))
    return make_mean_free(leray_project(dealias(prod))), umax


def nonlinear_term(u: SpectralVectorField) -> SpectralVectorField:
    """Projected, dealiased ``u x curl(u)``; equals ``-P (u . grad) u``."""
    return _nonlinear(u)[0]


def convective_term(u: SpectralVectorField) -> SpectralVectorField:
    """``-P dealias((u . grad) u)`` evaluated directly from velocity gradients."""
    g = u.grid
    up = to_physical(u).samples
    out = np.zeros_like(up)
    for j, kj in enumerate(g.kvec):
        dj = ifft3(1j * kj * u.coeffs)
        out += up[j] * dj
    adv = to_spectral(PhysicalVectorField(g, out))
    return leray_project(dealias(adv)) * -1.0


def nonlinear_orthogonality_check(u: SpectralVectorField) -> float:
    """``|(N(u), u)| / ||u||^3``; vanishes for the rotational form."""
    nrm = u.l2_norm()
    if nrm == 0:
        return 0.0
    return abs(nonlinear_term(u).inner(u)) / nrm**3


def admissible_dt(grid: GridSpec, umax: float, cfl_safety: float) -> float:
    return cfl_safety * (grid.box_length / grid.n) / max(umax, CFL_EPS)


class _Stepper:
    """IF-RK4 on the ``k_z >= 0`` half spectrum; the full layout is rebuilt on output."""

    def __init__(self, config: SolverConfig):
        self.config = config
        g = config.grid
        self.grid = g
        h = g.n // 2 + 1
        self.kvec = tuple(k[..., :h] if k.shape[-1] > 1 else k for k in g.kvec)
        kx, ky, kz = self.kvec
        k2 = kx**2 + ky**2 + kz**2
        self.inv_k2 = np.where(k2 == 0, 0.0, 1.0 / np.where(k2 == 0, 1.0, k2))
        self.keep = g.dealias_mask[..., :h]
        self.e_half = np.exp(-config.viscosity * g.ksq[..., :h] * (config.dt / 2))
        self.e_full = self.e_half**2
        self.g = config.forcing.coeffs[..., :h] if config.forcing is not None else None
        self.shape = g.shape

    def _ifft(self, c: np.ndarray) -> np.ndarray:
        return sfft.irfftn(c, s=self.shape, axes=(-3, -2, -1), norm="forward")

    def _fft(self, x: np.ndarray) -> np.ndarray:
        return sfft.rfftn(x, axes=(-3, -2, -1), norm="forward")

    def rhs(self, c: np.ndarray) -> tuple[np.ndarray, float]:
        kx, ky, kz = self.kvec
        w = np.empty_like(c)
        w[0] = 1j * (ky * c[2] - kz * c[1])
        w[1] = 1j * (kz * c[0] - kx * c[2])
        w[2] = 1j * (kx * c[1] - ky * c[0])
        up = self._ifft(c)
        wp = self._ifft(w)
        umax = float(np.sqrt(np.max(np.sum(up**2, axis=0))))
        p = self._fft(_cross(up, wp))
        p *= self.keep
        kdotv = (kx * p[0] + ky * p[1] + kz * p[2]) * self.inv_k2
        p[0] -= kx * kdotv
        p[1] -= ky * kdotv
        p[2] -= kz * kdotv
        p[:, 0, 0, 0] = 0
        if self.g is not None:
            p += self.g
        return p, umax

    def advance(self, c: np.ndarray, t: float) -> np.ndarray:
        cfg = self.config
        h = cfg.dt
        if not np.all(np.isfinite(c)):
            raise BlowUpDetected(f"non-finite coefficient in state at t={t}")
        with np.errstate(all="ignore"):
            k1, umax = self.rhs(c)
            dt_max = admissible_dt(self.grid, umax, cfg.cfl_safety)
            if not h <= dt_max:
                raise StepRejected(
                    f"dt={h} violates the CFL guard at t={t} (max |u| = {umax:.6g})",
                    admissible_dt=dt_max,
                )
            eh, ef = self.e_half, self.e_full
            k2, _ = self.rhs(eh * (c + 0.5 * h * k1))
            k3, _ = self.rhs(eh * c + 0.5 * h * k2)
            k4, _ = self.rhs(ef * c + h * eh * k3)
            new = ef * c + (h / 6.0) * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)
        if not np.all(np.isfinite(new)):
            raise BlowUpDetected(f"non-finite coefficient produced by step from t={t}")
        return new

    def to_half(self, u: SpectralVectorField) -> np.ndarray:
        return np.array(u.coeffs[..., : self.grid.n // 2 + 1])

    def to_field(self, c: np.ndarray, like: SpectralVectorField, t: float) -> SpectralVectorField:
        return like.replace(half_to_full(self.grid, c), time=t)

    def __call__(self, u: SpectralVectorField, t: float) -> tuple[SpectralVectorField, float]:
        new = self.advance(self.to_half(u), t)
        return self.to_field(new, u, t + self.config.dt), t + self.config.dt


def step(u: SpectralVectorField, t: float, config: SolverConfig) -> tuple[SpectralVectorField, float]:
    """Advance one integrating-factor RK4 step of size ``config.dt``.

    Raises :class:`StepRejected` when the CFL guard fails and
    :class:`BlowUpDetected` on non-finite coefficients.
    """
    return _Stepper(config)(u, t)


def prepare_initial(u0: SpectralVectorField) -> SpectralVectorField:
    """Mean-free, Leray-projected, dealiased copy of ``u0`` at t = 0."""
    u = dealias(leray_project(strip_nyquist(make_mean_free(u0))))
    if np.max(np.abs(u.coeffs - u0.coeffs), initial=0.0) > 0:
        logger.info("initial condition was projected, mean-freed and dealiased")
    return u.replace(u.coeffs, time=0.0)


def _base_diagnostics(u: SpectralVectorField) -> dict[str, float]:
    w = curl(u)
    hm1 = to_physical(a_power(-0.5, w)).magnitude()
    return {
        "energy": 0.5 * u.l2_norm() ** 2,
        "enstrophy": 0.5 * w.l2_norm() ** 2,
        "vorticity_hm1_inf": float(np.max(hm1)),
    }


def run(
    config: SolverConfig,
    u0: SpectralVectorField,
    monitors: Sequence[Monitor] = (),
) -> Trajectory:
    """Integrate from t = 0 to the horizon, sampling at the snapshot cadence.

    A non-finite state ends the run early with a DIVERGED verdict; every
    diagnostic recorded before that point is kept. CFL rejections propagate
    as :class:`StepRejected`.
    """
    if u0.grid != config.grid:
        raise ValueError("initial condition lives on a different grid")
    ids = [m.id for m in monitors]
    if len(set(ids)) != len(ids):
        raise ValueError("monitor ids must be unique")
    u = prepare_initial(u0)
    stepper = _Stepper(config)
    traj = Trajectory(config)
    rows: dict[str, list[float]] = {}
    times: list[float] = []

    def record(v: SpectralVectorField):
        vals = _base_diagnostics(v)
        for m in monitors:
            vals[m.id] = m.instantaneous(v)
        traj.snapshots.append(v)
        times.append(v.time)
        for key, val in vals.items():
            rows.setdefault(key, []).append(val)
        return all(math.isfinite(x) for x in vals.values())

    ok = record(u)
    n_steps = config.n_steps
    if abs(n_steps * config.dt - config.horizon) > 1e-9 * config.horizon:
        logger.warning("horizon %g is not a multiple of dt %g; stopping at %g",
                       config.horizon, config.dt, n_steps * config.dt)
    c = stepper.to_half(u)
    for i in range(1, n_steps + 1):
        if not ok:
            break
        try:
            c = stepper.advance(c, (i - 1) * config.dt)
        except BlowUpDetected as exc:
            logger.warning("run diverged: %s", exc)
            ok = False
            break
        if i % config.save_every == 0 or i == n_steps:
            ok = record(stepper.to_field(c, u, i * config.dt))
    if not ok:
        traj.verdict = Verdict.DIVERGED
        # keep the common finite prefix of every series and snapshot
        finite = [all(math.isfinite(v[i]) for v in rows.values()) for i in range(len(times))]
        keep = finite.index(False) if False in finite else len(times)
        times = times[:keep]
        rows = {k: v[:keep] for k, v in rows.items()}
        del traj.snapshots[keep:]
    traj.diagnostics = {
        key: TimeSeries(np.asarray(times), np.asarray(vals), diverged=traj.diverged)
        for key, vals in rows.items()
    }
    return traj


def _forcing_power(traj: Trajectory) -> np.ndarray:
    g = traj.config.forcing
    if g is None:
        return np.zeros(len(traj.snapshots))
    return np.array([g.inner(u) for u in traj.snapshots])


def energy_balance_residual(traj: Trajectory) -> float | Verdict:
    """Max relative defect of the energy equality over snapshot pairs.

    For each pair t0 < t the defect is
    ``|E(t) + nu int ||A^1/2 u||^2 - E(t0) - int (g, u)|`` divided by
    ``E(t0) = ||u(t0)||^2 / 2``; integrals use the trapezoid rule on the
    snapshots. Pairs with ``E(t0) = 0`` contribute nothing.
    """
    if traj.diverged:
        return Verdict.DIVERGED
    if len(traj.snapshots) < 2:
        raise InsufficientDataError("energy balance needs at least two snapshots")
    t = traj.times
    nu = traj.config.viscosity
    energy = np.array([0.5 * u.l2_norm() ** 2 for u in traj.snapshots])
    dissip = np.array([a_power(0.5, u).l2_norm() ** 2 for u in traj.snapshots])
    budget = energy + nu * trapezoid_running(t, dissip) - trapezoid_running(t, _forcing_power(traj))
    diff = np.abs(budget[None, :] - budget[:, None])
    iu = np.triu_indices(len(t), k=1)
    e0 = np.broadcast_to(energy[:, None], diff.shape)[iu]
    d = diff[iu]
    mask = e0 > 0
    if not mask.any():
        return 0.0
    return float(np.max(d[mask] / e0[mask]))


def _interp_index(t: np.ndarray, t0: float) -> tuple[int, float]:
    i = int(np.searchsorted(t, t0, side="right") - 1)
    i = min(max(i, 0), len(t) - 2)
    return i, (t0 - t[i]) / (t[i + 1] - t[i])


def _integrate(t: np.ndarray, f: np.ndarray, t0: float, t1: float) -> float:
    """Trapezoid integral of the piecewise-linear interpolant of f over [t0, t1]."""
    grid_t = np.concatenate([[t0], t[(t > t0) & (t < t1)], [t1]])
    return float(np.trapezoid(np.interp(grid_t, t, f), grid_t))


def weak_form_residual(
    traj: Trajectory, v: SpectralVectorField, t0: float, t1: float
) -> float:
    """Normalized defect of the weak formulation tested against a fixed field v.

    Checks ``(u(t1), v) + nu int (A^1/2 u, A^1/2 v) + int ((u . grad) u, v)
    = (u(t0), v) + int (g, v)`` over [t0, t1]; the convective pairing equals
    ``-(N(u), v)`` for solenoidal v. The defect is divided by
    ``||u(t0)|| ||v||`` and returned as 0 when that scale vanishes.
    """
    if traj.diverged:
        raise InsufficientDataError("trajectory diverged")
    if len(traj.snapshots) < 2:
        raise InsufficientDataError("weak form needs at least two snapshots")
    t = traj.times
    tol = 1e-9 * max(1.0, abs(t[-1]))
    if t0 < t[0] - tol or t1 > t[-1] + tol or t1 < t0:
        raise TimeRangeError(f"[{t0}, {t1}] is not inside [{t[0]}, {t[-1]}]")
    t0, t1 = max(t0, t[0]), min(t1, t[-1])
    nu = traj.config.viscosity
    av = a_power(0.5, v)
    pair = np.array([u.inner(v) for u in traj.snapshots])
    visc = np.array([a_power(0.5, u).inner(av) for u in traj.snapshots])
    conv = np.array([-nonlinear_term(u).inner(v) for u in traj.snapshots])
    force = np.zeros_like(pair)
    if traj.config.forcing is not None:
        force[:] = traj.config.forcing.inner(v)
    u_t0 = np.interp(t0, t, pair)
    u_t1 = np.interp(t1, t, pair)
    lhs = u_t1 + nu * _integrate(t, visc, t0, t1) + _integrate(t, conv, t0, t1)
    rhs = u_t0 + _integrate(t, force, t0, t1)
    i, _ = _interp_index(t, t0)
    scale = traj.snapshots[i].l2_norm() * v.l2_norm()
    if scale == 0:
        return 0.0
    return abs(lhs - rhs) / scale
