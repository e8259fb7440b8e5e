"""Command-line entry point.

    ermakov run CONFIG [flags]
    ermakov compare CONFIG [flags]
    ermakov check-constraint CONFIG [flags]
    ermakov catalog

Exit codes: 0 success, 2 configuration error, 3 domain or guard error,
4 tolerance violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Sequence

from .config import load_run_spec
from .errors import ConfigError, DomainError, ErmakovError, StepBudgetError, ToleranceViolation
from .models import CATALOG
from .runner import EXIT_CONFIG, EXIT_DOMAIN, EXIT_OK, EXIT_TOLERANCE, check_constraint, run


def _flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("config", help="TOML or JSON run configuration")
    p.add_argument("--t-end", type=float, help="override run.t_end")
    p.add_argument("--tol-abs", type=float, help="override integrator.abs_tol")
    p.add_argument("--tol-rel", type=float, help="override integrator.rel_tol")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--format", choices=("csv", "json"), help="table format (overrides output.format)")
    p.add_argument("--seed", type=int, help="seed for randomized sampling (check-constraint grid)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ermakov", description="Hamiltonian Ermakov systems toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _flags()
    sub.add_parser("run", parents=[flags], help="run the pipeline selected in the config")
    sub.add_parser("compare", parents=[flags], help="direct vs quadrature vs closed form")
    sub.add_parser("check-constraint", parents=[flags], help="max residual of the compatibility condition")
    sub.add_parser("catalog", help="list built-in systems")
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    for name in ("t_end", "tol_abs", "tol_rel"):
        v = getattr(ns, name)
        if v is not None and not v > 0:
            raise ConfigError(f"must be positive, got {v!r}", "--" + name.replace("_", "-"))
    return {"t_end": ns.t_end, "abs_tol": ns.tol_abs, "rel_tol": ns.tol_rel,
            "out_dir": ns.out, "fmt": ns.format, "seed": ns.seed}


def _catalog() -> int:
    for entry in CATALOG.values():
        print(f"{entry.name:22s} {entry.description}")
        print(f"{'':22s} params: {', '.join(entry.param_names)}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "catalog":
        return _catalog()
    try:
        if ns.command == "check-constraint":
            rs = load_run_spec(ns.config, _overrides(ns), require_run=False)
            result = check_constraint(rs)
        else:
            rs = load_run_spec(ns.config, _overrides(ns))
            if ns.command == "compare":
                rs = replace(rs, pipeline="compare")
            result = run(rs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, StepBudgetError) as exc:
        print(f"domain error{_context(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ToleranceViolation as exc:
        print(f"tolerance violation{_context(exc)}: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except ErmakovError as exc:
        print(f"error{_context(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    for line in result.messages:
        print(line)
    for path in result.outputs:
        print(f"wrote {path}")
    return result.exit_code


def _context(exc: Exception) -> str:
    ctx = getattr(exc, "context", None)
    if not ctx:
        return ""
    return f" in {ctx['pipeline']} (initial state {ctx['initial']})"


if __name__ == "__main__":
    sys.exit(main())
