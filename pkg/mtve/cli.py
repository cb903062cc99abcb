"""Command line: ``run``, ``export-slice``, ``verify``, ``bound`` and ``oracle``.

Exit codes: 0 success, 1 input error, 2 non-convergence, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .errors import DivergenceError, DomainError, GridMismatchError, ModelError, ScenarioError, VerificationError
from .logging_config import configure_logging
from .oracle import run_oracle_suite
from .paths import resolve_scenario
from .runner import (
    EXIT_INPUT,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_VERIFY,
    build_model,
    export_slice,
    run_scenario,
    verify_run,
)
from .scenario import load_scenario
from .solver import contraction_bound
from .version import VERSION

logger = logging.getLogger("mtve.cli")

_INPUT_ERRORS = (ScenarioError, ModelError, DomainError, GridMismatchError, FileNotFoundError)


def _vector(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtve", description="Multi-time integral equation solver")
    p.add_argument("--version", action="version", version=f"mtve {VERSION}")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default: MTVE_LOG_LEVEL or INFO)")
    sub = p.add_subparsers(dest="cmd", required=True)

    pr = sub.add_parser("run", help="solve a scenario and write a run directory")
    pr.add_argument("scenario", help="scenario .ini path or name under configs/")
    pr.add_argument("--out", default=None, help="run directory (default: $MTVE_OUTPUTS_DIR/<scenario stem>)")
    pr.add_argument("--threads", type=int, default=None, help="worker threads (default: MTVE_THREADS or all cores)")

    pe = sub.add_parser("export-slice", help="tabulate a finished run at fixed times or fixed points")
    pe.add_argument("run_dir")
    fixed = pe.add_mutually_exclusive_group(required=True)
    fixed.add_argument("--eta", nargs=2, type=float, metavar=("ETA1", "ETA2"))
    fixed.add_argument("--x", nargs=2, type=_vector, metavar=("X1", "X2"), help="comma separated coordinates per particle")
    pe.add_argument("--out", required=True, help="output .tsv path")
    pe.add_argument("--heatmap", default=None, help="optional PNG of |chi| over the free axes")

    pv = sub.add_parser("verify", help="check checksums and recompute the residual of a run")
    pv.add_argument("run_dir")

    pb = sub.add_parser("bound", help="print the contraction bound of a scenario's model")
    pb.add_argument("scenario")

    po = sub.add_parser("oracle", help="run the built-in oracle checks")
    po.add_argument("--samples", type=int, default=None, help="Monte Carlo samples (default from config)")
    po.add_argument("--seed", type=int, default=None)
    return p


def _run(args) -> int:
    result = run_scenario(resolve_scenario(args.scenario), args.out, threads=args.threads)
    manifest = result.manifest
    print(f"[mtve] {manifest['status']} after {manifest['iterations']} iterations -> {result.run_dir}")
    for flag in manifest["warnings"]:  # type: ignore[union-attr]
        print(f"[mtve] warning: {flag}")
    return result.exit_code


def _export(args) -> int:
    x = (args.x[0], args.x[1]) if args.x is not None else None
    eta = (args.eta[0], args.eta[1]) if args.eta is not None else None
    export = export_slice(args.run_dir, args.out, eta=eta, x=x, heatmap=args.heatmap)
    for name, (node, distance) in export.snaps.items():
        print(f"[mtve] {name} snapped to {node:.6g} (distance {distance:.3g})")
    print(f"[mtve] wrote {export.rows} rows to {export.path}")
    return EXIT_OK


def _verify(args) -> int:
    report = verify_run(args.run_dir)
    print(f"[mtve] ok: {len(report.files)} files, residual {report.residual:.6e}")
    return EXIT_OK


def _bound(args) -> int:
    model = build_model(load_scenario(resolve_scenario(args.scenario)))
    print(f"{contraction_bound(model):.17g}")
    return EXIT_OK


def _oracle(args) -> int:
    checks = run_oracle_suite(args.samples, args.seed)
    for check in checks:
        status = "ok" if check.passed else "FAIL"
        target = f"<= {check.expected + check.tolerance:.12g}" if check.upper_only else f"{check.expected:.12g} +/- {check.tolerance:.3g}"
        print(f"{check.name:<22} {check.value:.12g} (expected {target}) {status}")
    return EXIT_OK if all(check.passed for check in checks) else EXIT_VERIFY


_COMMANDS = {"run": _run, "export-slice": _export, "verify": _verify, "bound": _bound, "oracle": _oracle}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return _COMMANDS[args.cmd](args)
    except VerificationError as exc:
        print(f"[mtve] verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DivergenceError as exc:
        print(f"[mtve] {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except _INPUT_ERRORS as exc:
        print(f"[mtve] {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
