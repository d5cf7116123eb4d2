"""Command-line entry point.

Exit codes: 0 success (DIVERGED runs included), 1 verification failure,
2 usage or input error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .checkpoint import write_checkpoint, read_checkpoint
from .criteria import blowup_indicator, evaluate
from .errors import CheckpointError, InvalidExponentError, ManifestError, NSRegError, StepRejected
from .fields import GridSpec
from .manifest import load_manifest
from .norms import sobolev_norm
from .rundir import (
    CRITERIA_NAME,
    CSV_NAME,
    PLOT_NAME,
    REPORT_NAME,
    SUMMARY_NAME,
    plot_script,
    read_csv,
    reports_from_dir,
    summarize,
    write_criteria,
    write_csv,
)
from .solver import run
from .verify import run_battery

log = logging.getLogger("nsreg")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float_list(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok:
            out.append(math.inf if tok in ("inf", "infinity") else float(tok))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def cmd_verify(n: int, seed: int, tol: float, count: int = 8, out=None) -> int:
    out = out or sys.stdout
    if n < 8 or n % 2:
        print(f"error: n must be an even integer >= 8, got {n}", file=sys.stderr)
        return EXIT_USAGE
    results = run_battery(GridSpec(n), seed, tol, count)
    for r in results:
        print(r.line(), file=out)
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"FAILED: {failed[0].name} (residual {failed[0].residual:.3e} > tol {tol:.1e});"
              f" {len(failed)} of {len(results)} checks failed", file=out)
        return EXIT_FAIL
    print(f"OK: {len(results)} checks passed", file=out)
    return EXIT_OK


def cmd_run(manifest_path: str, out_dir: str | None, out=None) -> int:
    out = out or sys.stdout
    try:
        m = load_manifest(manifest_path)
        u0 = m.initial_field()
    except (ManifestError, InvalidExponentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NSRegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    target = Path(out_dir) if out_dir else m.output_dir
    if target is None:
        print("error: no output directory (use --out or [run] out)", file=sys.stderr)
        return EXIT_USAGE
    try:
        target.mkdir(parents=True, exist_ok=True)
        if any(target.iterdir()):
            print(f"error: output directory {target} is not empty", file=sys.stderr)
            return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot use output directory {target}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        traj = run(m.config, u0, m.monitors)
    except StepRejected as exc:
        print(f"error: {exc}; admissible dt = {exc.admissible_dt:.6g}", file=sys.stderr)
        return EXIT_USAGE

    (target / "manifest.txt").write_text(m.source)
    ckdir = target / "checkpoints"
    ckdir.mkdir()
    for i, snap in enumerate(traj.snapshots):
        write_checkpoint(ckdir / f"snap_{i:05d}.nsck", snap)
    write_csv(target / CSV_NAME, traj.diagnostics)
    cfg = m.config
    write_criteria(
        target / CRITERIA_NAME,
        m.monitors,
        traj.verdict,
        {
            "n": str(cfg.grid.n),
            "box_length": repr(cfg.grid.box_length),
            "viscosity": repr(cfg.viscosity),
            "dt": repr(cfg.dt),
            "horizon": repr(cfg.horizon),
            "seed": str(m.seed),
            "initial_condition": m.initial_condition,
        },
    )
    reports = [evaluate(traj, s) for s in m.monitors]
    text = summarize(reports, blowup_indicator(traj), traj.verdict)
    (target / SUMMARY_NAME).write_text(text)
    print(text, file=out, end="")
    return EXIT_OK


def cmd_norms(field_path: str, p_list: list[float], s_list: list[float], out=None) -> int:
    out = out or sys.stdout
    try:
        f = read_checkpoint(field_path)
    except CheckpointError as exc:
        print(f"error: corrupt checkpoint {field_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot read {field_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{'s':>8s} {'p':>8s} {'norm':>24s}", file=out)
    try:
        for s in s_list:
            for p in p_list:
                val = sobolev_norm(f, s, p)
                print(f"{s:>8g} {p:>8g} {val:>24.16e}", file=out)
    except NSRegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_report(run_dir: str, emit_plot_script: bool = False, out=None) -> int:
    out = out or sys.stdout
    d = Path(run_dir)
    if not (d / CSV_NAME).is_file():
        print(f"error: {d / CSV_NAME} not found", file=sys.stderr)
        return EXIT_USAGE
    if not (d / CRITERIA_NAME).is_file():
        print(f"error: {d / CRITERIA_NAME} not found", file=sys.stderr)
        return EXIT_USAGE
    try:
        reports, indicator, verdict = reports_from_dir(d)
    except (ValueError, KeyError) as exc:
        print(f"error: unreadable run directory: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = summarize(reports, indicator, verdict)
    (d / REPORT_NAME).write_text(text)
    print(text, file=out, end="")
    if emit_plot_script:
        _, cols = read_csv(d / CSV_NAME)
        (d / PLOT_NAME).write_text(plot_script(CSV_NAME, list(cols)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nsreg", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run the operator/norm identity battery")
    v.add_argument("--n", type=int, default=16)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--count", type=int, default=8, help="random fields per corpus")

    r = sub.add_parser("run", help="integrate a manifest and write a run directory")
    r.add_argument("--manifest", required=True)
    r.add_argument("--out")

    nm = sub.add_parser("norms", help="tabulate ||A^{s/2} v||_p for a checkpoint")
    nm.add_argument("--field", required=True)
    nm.add_argument("--p", type=_float_list, required=True)
    nm.add_argument("--s", type=_float_list, default=[0.0])

    rp = sub.add_parser("report", help="aggregate criterion reports of a run directory")
    rp.add_argument("--in", dest="run_dir", required=True)
    rp.add_argument("--emit-plot-script", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "verify":
        return cmd_verify(args.n, args.seed, args.tol, args.count)
    if args.command == "run":
        return cmd_run(args.manifest, args.out)
    if args.command == "norms":
        return cmd_norms(args.field, args.p, args.s)
    return cmd_report(args.run_dir, args.emit_plot_script)


if __name__ == "__main__":
    sys.exit(main())
