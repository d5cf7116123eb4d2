"""Run manifests: line-oriented ``key = value`` text with ``[section]`` headers.

Example::

    [solver]
    n = 16
    viscosity = 0.1
    dt = 0.001
    horizon = 1.0
    save_every = 10

    [initial]
    kind = beltrami        ; beltrami | taylor_green | random | zero
    k = 1
    amplitude = 1.0

    [run]
    seed = 1

    [criterion paper_inf]
    kind = paper           ; paper | serrin | bkm | custom
    p = inf

Optional keys: ``box_length``, ``dealias_fraction`` and ``cfl_safety`` under
``[solver]``; ``decay_exponent`` for random data; a ``[forcing]`` section with
``kind = zero | beltrami`` (plus ``k``, ``amplitude``); ``out`` under
``[run]``. A ``custom`` criterion takes ``target`` (velocity|vorticity),
``p``, ``sobolev_order`` (0 or negative) and ``scaling_sum``.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .criteria import (
    CriterionSpec,
    Target,
    builtin_bkm_classic,
    builtin_paper_criterion,
    builtin_serrin,
    theta_from_p,
)
from .errors import InvalidExponentError, ManifestError
from .fields import (
    TWO_PI,
    GridSpec,
    SpectralVectorField,
    gen_beltrami,
    gen_random_solenoidal,
    gen_taylor_green,
    zeros,
)
from .norms import NormSpec, SpatialKind
from .solver import SolverConfig

GENERATORS = ("beltrami", "taylor_green", "random", "zero")


@dataclass
class RunManifest:
    config: SolverConfig
    initial_condition: str
    initial_params: dict[str, float]
    monitors: list[CriterionSpec]
    output_dir: Path | None = None
    seed: int = 0
    source: str = field(default="", repr=False)

    def initial_field(self) -> SpectralVectorField:
        return build_field(self.config.grid, self.initial_condition, self.initial_params, self.seed)


def _float(value: str) -> float:
    v = value.strip().lower()
    if v in ("inf", "infinity", "+inf"):
        return math.inf
    if v in ("2pi", "2*pi"):
        return TWO_PI
    return float(v)


def build_field(grid: GridSpec, kind: str, params: dict[str, float], seed: int) -> SpectralVectorField:
    if kind == "beltrami":
        return gen_beltrami(grid, int(params.get("k", 1)), params.get("amplitude", 1.0))
    if kind == "taylor_green":
        return gen_taylor_green(grid)
    if kind == "random":
        return gen_random_solenoidal(grid, seed, params.get("decay_exponent", 2.0))
    if kind == "zero":
        return zeros(grid)
    raise ManifestError(f"unknown generator {kind!r}; expected one of {', '.join(GENERATORS)}")


def _criterion(cid: str, sec: configparser.SectionProxy) -> CriterionSpec:
    kind = sec.get("kind", "paper").strip().lower()
    if kind == "bkm":
        spec = builtin_bkm_classic()
    elif kind in ("paper", "serrin"):
        p = _float(sec.get("p", "inf"))
        spec = builtin_paper_criterion(p) if kind == "paper" else builtin_serrin(p)
    elif kind == "custom":
        p = _float(sec["p"])
        order = _float(sec.get("sobolev_order", "0"))
        ssum = _float(sec["scaling_sum"])
        target = Target(sec.get("target", "vorticity").strip().upper())
        space = SpatialKind.LEBESGUE if order == 0 else SpatialKind.NEG_SOBOLEV
        spec = CriterionSpec(cid, target, NormSpec(space, p, order), theta_from_p(p, ssum), ssum)
    else:
        raise ManifestError(f"criterion {cid!r}: unknown kind {kind!r}")
    return CriterionSpec(cid, spec.target, spec.norm, spec.theta, spec.scaling_sum)


def parse_manifest(text: str) -> RunManifest:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ManifestError(f"unparseable manifest: {exc}") from exc
    if "solver" not in cp:
        raise ManifestError("manifest lacks a [solver] section")
    s = cp["solver"]
    try:
        grid = GridSpec(
            s.getint("n"),
            _float(s.get("box_length", "2pi")),
            _float(s.get("dealias_fraction", repr(2.0 / 3.0))),
        )
        seed = cp.getint("run", "seed", fallback=0)
        forcing = None
        if "forcing" in cp:
            fk = cp["forcing"].get("kind", "zero").strip().lower()
            if fk != "zero":
                params = {k: _float(v) for k, v in cp["forcing"].items() if k != "kind"}
                forcing = build_field(grid, fk, params, seed)
        config = SolverConfig(
            grid=grid,
            viscosity=_float(s["viscosity"]),
            dt=_float(s["dt"]),
            horizon=_float(s["horizon"]),
            forcing=forcing,
            save_every=s.getint("save_every", 1),
            cfl_safety=_float(s.get("cfl_safety", "0.5")),
        )
        ic = cp["initial"] if "initial" in cp else {}
        kind = ic.get("kind", "zero").strip().lower()
        if kind not in GENERATORS:
            raise ManifestError(f"unknown generator {kind!r}")
        params = {k: _float(v) for k, v in ic.items() if k != "kind"}
        monitors = []
        for name in cp.sections():
            if name.lower().startswith("criterion"):
                cid = name[len("criterion"):].strip() or f"criterion{len(monitors)}"
                monitors.append(_criterion(cid, cp[name]))
    except InvalidExponentError:
        raise
    except ManifestError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ManifestError(f"invalid manifest: {exc}") from exc
    out = cp.get("run", "out", fallback=None)
    return RunManifest(
        config=config,
        initial_condition=kind,
        initial_params=params,
        monitors=monitors,
        output_dir=Path(out) if out else None,
        seed=seed,
        source=text,
    )


def load_manifest(path: str | Path) -> RunManifest:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest(text)
