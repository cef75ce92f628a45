"""Command-line front end.

    pshdef identity|classify|certify|taylor --config FILE|BUILTIN [--seed N] [--json PATH] [--csv PATH]

Exit codes: 0 pass, 1 identity failure, 2 certification fail, 3 inconclusive,
4 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

from .boundary import (ExteriorPointError, FitError, NotOnBoundaryError, ProjectionError,
                       UnsupportedOrderError, project, taylor_A, taylor_A_fit)
from .certify import check_sufficient, sample_boundary
from .domains import ConfigError, DomainConfig, load_config
from .expansion import build_P
from .expr import Const, NonFiniteError, ParseError, Point
from .suites import random_cases, run_identity

SCHEMA = "pshdef/1"
EXIT_OK, EXIT_IDENTITY, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3, 4
TAYLOR_FIELDS = ("r", "levi", "hdet", "B")


class InputError(Exception):
    pass


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays strict."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(payload: dict) -> str:
    return json.dumps(_clean(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit_json(payload: dict, path: Optional[str], stdout) -> None:
    text = dumps(payload)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _header(cmd: str, cfg: DomainConfig, **extra) -> dict:
    out = {"schema": SCHEMA, "command": cmd, "domain": cfg.name, "r": cfg.r}
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_identity(cfg: DomainConfig, n: int, seed: int, threshold: float = 1e-9) -> tuple[int, dict]:
    cases = random_cases(n, seed, r=cfg.r_node, X=cfg.X_node, center=cfg.region.center,
                         radius=cfg.radius)
    res = run_identity(cases, threshold)
    payload = _header("identity", cfg, seed=seed, **res)
    return (EXIT_OK if res["passed"] else EXIT_IDENTITY), payload


CSV_COLUMNS = ("x1", "y1", "x2", "y2", "levi", "hdet", "kind")


def classify_rows(cfg: DomainConfig, n: Optional[int] = None, notes: Optional[list] = None) -> list:
    samples = sample_boundary(cfg.r_node, cfg.region, n or cfg.n_samples,
                              cfg.tol("weak", 1e-9), notes)
    return [(*s.p.as_real(), s.levi, s.hdet_r, s.kind.value) for s in samples]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([repr(float(v)) for v in row[:6]] + [row[6]])
    return buf.getvalue()


def cmd_classify(cfg: DomainConfig, n: Optional[int] = None) -> tuple[int, dict, str]:
    notes: list[str] = []
    rows = classify_rows(cfg, n, notes)
    counts = {k: sum(1 for r in rows if r[6] == k) for k in ("Strong", "Weak", "NonPseudoconvex")}
    payload = _header("classify", cfg, n_samples=len(rows), counts=counts, notes=notes)
    return EXIT_OK, payload, rows_to_csv(rows)


def cmd_certify(cfg: DomainConfig) -> tuple[int, dict]:
    if cfg.X is None:
        raise InputError("certify needs a modification field X in the config")
    rep = check_sufficient(cfg.r_node, cfg.X_node, cfg.base_point, cfg.region,
                           K_grid=cfg.K_grid, L_grid=cfg.L_grid, n_samples=cfg.n_samples,
                           grid_n=cfg.grid_n, psd_tol=cfg.tol("psd", 1e-12),
                           tol_weak=cfg.tol("weak", 1e-9), C_max=cfg.tol("C_max", 1e6))
    code = {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[rep.verdict]
    payload = _header("certify", cfg, X=cfg.X, verdict=rep.verdict, report=rep.to_dict())
    return code, payload


def cmd_taylor(cfg: DomainConfig, field: str, point: Optional[Point], kmax: int) -> tuple[int, dict]:
    if field not in TAYLOR_FIELDS:
        raise InputError(f"field must be one of {TAYLOR_FIELDS}")
    if kmax < 0:
        raise InputError("kmax must be >= 0")
    r = cfg.r_node
    q = point if point is not None else cfg.base_point
    P = build_P(cfg.X_node) if cfg.X_node is not None else Const(1.0)
    try:
        frame = project(r, q)
        p = frame.p
        analytic = [taylor_A(r, field, p, k, P=P) if k <= 2 else None for k in range(kmax + 1)]
        fit = taylor_A_fit(r, field, p, kmax, P=P)
    except (ProjectionError, ExteriorPointError, NotOnBoundaryError, FitError,
            UnsupportedOrderError) as exc:
        raise InputError(f"taylor: {exc}") from exc
    rows = []
    for k in range(kmax + 1):
        a, f = analytic[k], fit[k]
        gap = None if a is None else abs(a - f) / max(1.0, abs(a))
        rows.append({"k": k, "analytic": a, "fit": f, "rel_gap": gap})
    payload = _header("taylor", cfg, field=field, query=list(q.as_real()), foot=list(p.as_real()),
                      distance=frame.d, kmax=kmax, coefficients=rows)
    return EXIT_OK, payload


# ---------------------------------------------------------------------------
# argument handling

def _parse_point(text: str) -> Point:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"cannot read point {text!r}") from None
    if len(parts) != 4:
        raise InputError("a point needs four comma-separated reals x1,y1,x2,y2")
    return Point.from_real(*parts)


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not certification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pshdef", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="YAML file or built-in name (halfspace, ball, example6)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", metavar="PATH", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", metavar="PATH", help="CSV output path (classify)")
        return p

    p = common(sub.add_parser("identity", help="residuals of the r-power grouping"))
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--threshold", type=float, default=1e-9)
    p = common(sub.add_parser("classify", help="boundary samples as CSV"))
    p.add_argument("--n", type=int, default=None)
    common(sub.add_parser("certify", help="search for a plurisubharmonic modification"))
    p = common(sub.add_parser("taylor", help="normal Taylor coefficients of a field"))
    p.add_argument("--field", default="r", choices=TAYLOR_FIELDS)
    p.add_argument("--point", default=None, help="x1,y1,x2,y2 (default: config p0 or center)")
    p.add_argument("--kmax", type=int, default=2)
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "identity":
            if args.n < 1:
                raise InputError("--n must be >= 1")
            code, payload = cmd_identity(cfg, args.n, args.seed, args.threshold)
        elif args.command == "classify":
            code, payload, text = cmd_classify(cfg, args.n)
            if payload["n_samples"] == 0:
                stderr.write("warning: no boundary points found in region\n")
            if args.csv:
                with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            else:
                stdout.write(text)
            if args.json:
                _emit_json(payload, args.json, stdout)
            return code
        elif args.command == "certify":
            code, payload = cmd_certify(cfg)
        else:
            point = _parse_point(args.point) if args.point else None
            code, payload = cmd_taylor(cfg, args.field, point, args.kmax)
    except (InputError, ConfigError, ParseError, NonFiniteError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    _emit_json(payload, args.json, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
