"""Identity battery run by ``nsreg verify`` and reused by the acceptance tests.

Every check returns a nonnegative residual that is zero in exact arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .fields import (
    GridSpec,
    SpectralScalarField,
    SpectralVectorField,
    divergence,
    divergence_residual,
    gen_beltrami,
    gen_random_field,
    gen_random_solenoidal,
    gradient,
    leray_project,
    to_physical,
    to_spectral,
)
from .norms import lebesgue_chain_check, lp_norm, sobolev_norm
from .operators import (
    a_power,
    b0_apply,
    b1_apply,
    b2_apply,
    b3_apply,
    curl,
    curl_curl_residual,
    theorem1_residual,
)

THEOREM1_ORDERS = (-1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
B3_ORDERS = (-1.0, 0.0, 0.5, 2.0)
CHAIN_EXPONENTS = (2.0, 4.0, 8.0, 16.0)
SHIFT_EXPONENTS = (2.0, 4.0, math.inf)


def solenoidal_corpus(grid: GridSpec, seeds: Iterable[int], decay_exponent: float = 2.0):
    return [gen_random_solenoidal(grid, s, decay_exponent) for s in seeds]


def raw_corpus(grid: GridSpec, seeds: Iterable[int], decay_exponent: float = 1.0):
    return [gen_random_field(grid, s, decay_exponent) for s in seeds]


def _maxabs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _rel_coeff_gap(a: SpectralVectorField, b: SpectralVectorField) -> float:
    scale = max(_maxabs(a.coeffs), _maxabs(b.coeffs))
    return _maxabs(a.coeffs - b.coeffs) / scale if scale else 0.0


def round_trip_residual(fields: Sequence[SpectralVectorField]) -> float:
    """spectral -> physical -> spectral and physical -> spectral -> physical."""
    out = 0.0
    for f in fields:
        p = to_physical(f)
        out = max(out, _rel_coeff_gap(to_spectral(p), f))
        q = to_physical(to_spectral(p))
        scale = _maxabs(p.samples)
        if scale:
            out = max(out, _maxabs(q.samples - p.samples) / scale)
    return out


def leray_idempotence_residual(fields) -> float:
    out = 0.0
    for f in fields:
        once = leray_project(f)
        out = max(out, _rel_coeff_gap(leray_project(once), once))
    return out


def leray_divergence_residual(fields) -> float:
    return max(divergence_residual(leray_project(f)) for f in fields)


def curl_curl_identity_residual(fields) -> float:
    return max(curl_curl_residual(v) for v in fields)


def theorem1_max_residual(fields, orders=THEOREM1_ORDERS) -> float:
    return max(theorem1_residual(u, s) for u in fields for s in orders)


def b0_projection_residual(fields) -> float:
    return max(_rel_coeff_gap(b0_apply(f), leray_project(f)) for f in fields)


def b1_contraction_excess(fields) -> float:
    """``max(0, ||B1 v|| / ||v|| - 1)``."""
    out = 0.0
    for v in fields:
        n = v.l2_norm()
        if n:
            out = max(out, b1_apply(v).l2_norm() / n - 1.0)
    return out


def torus_commutativity_residual(fields, orders=B3_ORDERS) -> float:
    out = 0.0
    for v in fields:
        b1 = b1_apply(v)
        out = max(out, _rel_coeff_gap(b2_apply(v), b1))
        for s in orders:
            out = max(out, _rel_coeff_gap(b3_apply(s, v), b1))
    return out


def norm_chain_excess(fields, exponents=CHAIN_EXPONENTS) -> float:
    """Worst ``lhs / bound - 1`` clipped at 0 (the check itself raises on violation)."""
    out = 0.0
    for f in fields:
        p = to_physical(f)
        for r in exponents:
            lhs, bound = lebesgue_chain_check(p, r)
            if bound:
                out = max(out, lhs / bound - 1.0)
    return max(out, 0.0)


def norm_chain_equality_residual(grid: GridSpec, exponents=CHAIN_EXPONENTS) -> float:
    """Beltrami fields have constant magnitude, so the chain bound is attained."""
    out = 0.0
    for k in range(1, min(grid.cutoff, grid.n // 2 - 1) + 1):
        p = to_physical(gen_beltrami(grid, k))
        for r in exponents:
            lhs, bound = lebesgue_chain_check(p, r)
            out = max(out, abs(lhs / bound - 1.0))
    return out


def plancherel_residual(fields) -> float:
    out = 0.0
    for f in fields:
        ref = f.l2_norm()
        if ref:
            out = max(out, abs(lp_norm(to_physical(f), 2.0) - ref) / ref)
    return out


def shift_identity_residual(fields, exponents=SHIFT_EXPONENTS) -> float:
    """``||curl u||_{H^{-1,p}}`` against ``||B1 u||_p``."""
    out = 0.0
    for u in fields:
        w = curl(u)
        b1 = to_physical(b1_apply(u))
        for p in exponents:
            ref = lp_norm(b1, p)
            if ref:
                out = max(out, abs(sobolev_norm(w, -1.0, p) - ref) / ref)
    return out


def beltrami_shift_residual(grid: GridSpec, exponents=SHIFT_EXPONENTS) -> float:
    out = 0.0
    for k in range(1, min(grid.cutoff, grid.n // 2 - 1) + 1):
        u = gen_beltrami(grid, k)
        up = to_physical(u)
        for p in exponents:
            ref = lp_norm(up, p)
            out = max(out, abs(sobolev_norm(curl(u), -1.0, p) - ref) / ref)
    return out


def null_identities_residual(fields) -> float:
    """curl(grad phi) = 0 and div(curl v) = 0, relative to |k| |input|."""
    out = 0.0
    for v in fields:
        g = v.grid
        phi = SpectralScalarField(g, v.coeffs[0])
        kx, ky, kz = g.kvec
        kmax = float(np.sqrt(np.max(kx**2 + ky**2 + kz**2)))
        scale = kmax**2 * _maxabs(phi.coeffs)
        if scale:
            out = max(out, _maxabs(curl(gradient(phi)).coeffs) / scale)
        scale = kmax**2 * _maxabs(v.coeffs)
        if scale:
            out = max(out, _maxabs(divergence(curl(v)).coeffs) / scale)
    return out


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<32s} residual={self.residual:.3e}  tol={self.tol:.1e}"


def battery(grid: GridSpec, seed: int, count: int = 8) -> list[tuple[str, Callable[[], float]]]:
    """Named residual thunks for the identity suite on a seeded corpus."""
    seeds = [seed + i for i in range(count)]
    sol = solenoidal_corpus(grid, seeds)
    raw = raw_corpus(grid, seeds)
    return [
        ("round_trip", lambda: round_trip_residual(raw)),
        ("leray_idempotence", lambda: leray_idempotence_residual(raw)),
        ("leray_divergence", lambda: leray_divergence_residual(raw)),
        ("curl_curl_identity", lambda: curl_curl_identity_residual(sol)),
        ("theorem1_residual", lambda: theorem1_max_residual(sol)),
        ("b0_equals_projection", lambda: b0_projection_residual(raw)),
        ("b1_l2_contraction", lambda: b1_contraction_excess(sol + raw)),
        ("b1_b2_b3_coincidence", lambda: torus_commutativity_residual(sol)),
        ("norm_chain", lambda: norm_chain_excess(sol)),
        ("norm_chain_equality", lambda: norm_chain_equality_residual(grid)),
        ("plancherel", lambda: plancherel_residual(sol + raw)),
        ("one_derivative_shift", lambda: shift_identity_residual(sol)),
        ("beltrami_shift", lambda: beltrami_shift_residual(grid)),
        ("null_identities", lambda: null_identities_residual(raw)),
    ]


def run_battery(grid: GridSpec, seed: int, tol: float, count: int = 8) -> list[CheckResult]:
    return [CheckResult(name, float(fn()), tol) for name, fn in battery(grid, seed, count)]
