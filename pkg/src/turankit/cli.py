"""``turankit`` command line: evaluation, scans, verification reports and density estimates.

Exit codes: 0 pass, 1 an inequality or identity is violated, 2 a hypothesis
fails so the statement does not apply, 3 usage error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bounds, reference, turan
from .grid import enriched_half_grid, interior_grid
from .polyeval import eval_orthonormal, eval_p, eval_Q, eval_q, eval_qtilde
from .schemes import (BUILTIN_FAMILIES, SchemeError, build_orthonormal, build_scheme,
                      parse_family)

EXIT_PASS, EXIT_FAIL, EXIT_INAPPLICABLE, EXIT_USAGE = 0, 1, 2, 3

EVAL_KINDS = ("p", "P", "q", "qtilde", "Q")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments, which would collide with "inapplicable"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    family: dict
    n_max: int
    grid_count: int
    spacing: str
    tol: Optional[float]
    out: Optional[str]
    fmt: str

    def __post_init__(self):
        if self.n_max < 2:
            raise UsageError("--n-max must be at least 2")
        if self.grid_count < 3:
            raise UsageError("--grid must be at least 3")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")

    def grid(self) -> np.ndarray:
        return interior_grid(self.grid_count, self.spacing)


# --------------------------------------------------------------------------
# Formatting


def fmt_float(v) -> str:
    """17 significant digits in scientific notation, independent of locale."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v + 0.0:.16e}"  # + 0.0 folds -0.0 into 0.0


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _finite(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def json_text(obj) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. `| head`); silence the flush at interpreter exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())


# --------------------------------------------------------------------------
# Commands


def _parse_x(values: Sequence[str]) -> np.ndarray:
    xs = []
    for v in values:
        for part in v.split(","):
            if part.strip():
                try:
                    xs.append(float(part))
                except ValueError:
                    raise UsageError(f"--x value {part!r} is not a number") from None
    if not xs:
        raise UsageError("--x needs at least one value")
    return np.array(xs)


def cmd_eval(cfg: RunConfig, kind: str, x: np.ndarray, n: int) -> int:
    if kind == "P":
        values = eval_orthonormal(build_orthonormal(cfg.family, max_n=n + 2), n, x).values
    else:
        s = build_scheme(cfg.family, max_n=n + 3)
        fn = {"p": eval_p, "q": eval_q, "qtilde": eval_qtilde, "Q": eval_Q}[kind]
        values = fn(s, n, x).values
    if cfg.fmt == "json":
        text = json_text({"family": cfg.family, "kind": kind, "x": x, "values": values})
    else:
        rows = ((k, xi, values[k, j]) for k in range(n + 1) for j, xi in enumerate(x))
        text = csv_text(("n", "x", kind), rows)
    _emit(text, cfg.out)
    return EXIT_PASS


def cmd_turan(cfg: RunConfig, x: np.ndarray, n: int) -> int:
    s = build_scheme(cfg.family, max_n=n + 3)
    sc = turan.turan_scan(s, n, x)
    _emit(json_text(sc.to_json_dict()) if cfg.fmt == "json"
          else csv_text(("n", "x", "delta", "normalized"), sc.rows()), cfg.out)
    return EXIT_PASS


def cmd_scan(cfg: RunConfig) -> int:
    s = build_scheme(cfg.family, max_n=cfg.n_max + 3)
    sc = turan.turan_scan(s, cfg.n_max, cfg.grid())
    _emit(json_text(sc.to_json_dict()) if cfg.fmt == "json"
          else csv_text(("n", "x", "delta", "normalized"), sc.rows()), cfg.out)
    return EXIT_PASS


def cmd_density(cfg: RunConfig, n: int) -> int:
    lam = build_orthonormal(cfg.family, max_n=2 * n + 3)
    est = bounds.density_estimate(lam, n, cfg.grid())
    _emit(json_text(est.to_dict()) if cfg.fmt == "json"
          else csv_text(("x", "g", "g_2n", "bound"), est.rows()), cfg.out)
    return EXIT_PASS


def cmd_families(cfg_fmt: str, out: Optional[str]) -> int:
    if cfg_fmt == "json":
        text = json_text(BUILTIN_FAMILIES)
    else:
        text = csv_text(("family", "description"), sorted(BUILTIN_FAMILIES.items()))
    _emit(text, out)
    return EXIT_PASS


def _family_param(desc: dict, family: str, *keys: str) -> list[float]:
    if desc["family"] != family:
        raise UsageError(f"this check needs a {family} family, got {desc['family']!r}")
    vals = []
    for key in keys:
        for k in key.split("|"):
            if k in desc:
                vals.append(float(desc[k]))
                break
        else:
            raise UsageError(f"family descriptor lacks {key!r}")
    return vals


def _run_verify(tag: str, cfg: RunConfig, constant: str):
    """Dispatch a theorem tag; returns a certificate or identity report."""
    desc, N, grid = cfg.family, cfg.n_max, cfg.grid()
    kw = {} if cfg.tol is None else {"tol": cfg.tol}
    idkw = {} if cfg.tol is None else {"base_tol": cfg.tol}
    if tag in ("lb", "prop31", "cor33"):
        lam = build_orthonormal(desc, max_n=N + 2)
        cert = bounds.lb_infimum_scan(lam, N, enriched_half_grid(cfg.grid_count, N), **kw)
        if tag == "cor33":
            cert.theorem = "cor33_jacobi_LB"
        return cert
    if tag == "perturbed":
        return bounds.verify_perturbed_chebyshev(build_orthonormal(desc, max_n=N + 2), N, **kw)
    if tag == "thm41":
        q, b = _family_param(desc, "q_ultra", "q", "beta|b")
        return bounds.verify_thm41(q, b, N, grid, **kw)
    if tag == "cor12":
        (a,) = _family_param(desc, "jacobi", "alpha|a")
        return reference.check_cor12(a, N, grid, **kw)
    s = build_scheme(desc, max_n=N + 4)
    if tag == "thm2":
        return bounds.verify_thm2_lower(s, N, grid, **kw)
    if tag == "thm2a":
        return bounds.verify_thm2a_upper(s, N, grid, constant=constant, **kw)
    if tag == "sandwich":
        return bounds.verify_origin_sandwich(s, N, **kw)
    if tag == "positivity":
        return bounds.verify_positivity(s, N, grid)
    if tag == "prop29":
        return bounds.verify_prop29_turan_q(s, N, grid, **kw)
    if tag == "prop21":
        return turan.check_prop21(s, (1, N), grid, **idkw)
    if tag == "fund":
        return turan.check_fundamental(s, (1, N), grid, **idkw)
    if tag == "turanturan":
        return turan.check_turanturan(s, (1, N), grid, **idkw)
    raise UsageError(f"unknown theorem tag {tag!r}")


VERIFY_TAGS = ("thm2", "thm2a", "sandwich", "positivity", "prop29", "prop31", "lb", "cor33", "thm41",
               "cor12", "perturbed", "prop21", "fund", "turanturan")


def cmd_verify(cfg: RunConfig, tag: str, constant: str = "stated") -> int:
    result = _run_verify(tag, cfg, constant)
    if isinstance(result, turan.IdentityResidualReport):
        status = result.verdict
        skipped = set(result.skipped)
        ns = [n for n in range(result.n_range[0], result.n_range[1] + 1) if n not in skipped]
        rows = list(zip(ns, result.per_n))
        header = ("n", "max_residual")
    else:
        status = result.status
        rows = result.margin_rows()
        header = ("n", "min_margin")
    text = json_text(result.to_dict()) if cfg.fmt == "json" else csv_text(header, rows)
    _emit(text, cfg.out)
    if cfg.out:
        sys.stdout.write(f"{tag}: {status}\n")
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inapplicable": EXIT_INAPPLICABLE}[status]


# --------------------------------------------------------------------------
# Argument parsing


def _common(p: argparse.ArgumentParser, family: bool = True) -> None:
    if family:
        p.add_argument("--family", required=True,
                       help="JSON descriptor or shorthand such as jacobi:0, qultra:0.5,0.25, remark28:0.05")
    p.add_argument("--n-max", type=int, default=100, help="largest degree (default 100)")
    p.add_argument("--grid", type=int, default=bounds.DEFAULT_GRID, help="number of grid points")
    p.add_argument("--spacing", choices=("chebyshev", "uniform"), default="chebyshev")
    p.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="turankit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="values of p, P, q, q~ or Q at given points")
    _common(p)
    p.add_argument("--kind", choices=EVAL_KINDS, default="p")
    p.add_argument("--x", action="append", required=True, help="abscissae, comma separated or repeated")
    p.add_argument("--n", type=int, default=None, help="largest degree (defaults to --n-max)")

    p = sub.add_parser("turan", help="Turán determinants at given points")
    _common(p)
    p.add_argument("--x", action="append", required=True)
    p.add_argument("--n", type=int, default=None)

    p = sub.add_parser("verify", help="check one identity or inequality")
    p.add_argument("tag", choices=VERIFY_TAGS)
    _common(p)
    p.add_argument("--constant", choices=("stated", "derived"), default="stated",
                   help="constant for thm2a: 2*gamma_2 (stated) or 2*alpha_1*gamma_2/gamma_1 (derived)")

    p = sub.add_parser("scan", help="Turán determinant table over a grid")
    _common(p)

    p = sub.add_parser("density", help="density estimate from orthonormal Turán determinants")
    _common(p)
    p.add_argument("--n", type=int, default=None)

    p = sub.add_parser("families", help="list built-in families")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "families":
            return cmd_families(args.format, args.out)
        n = getattr(args, "n", None)
        n_max = args.n_max if n is None else max(n, 2)
        if n is not None and n < 0:
            raise UsageError("--n must be non-negative")
        cfg = RunConfig(parse_family(args.family), n_max, args.grid, args.spacing, args.tol,
                        args.out, args.format)
        n = args.n_max if n is None else n
        if args.command == "eval":
            return cmd_eval(cfg, args.kind, _parse_x(args.x), n)
        if args.command == "turan":
            if n < 1:
                raise UsageError("--n must be at least 1")
            return cmd_turan(cfg, _parse_x(args.x), n)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "density":
            return cmd_density(cfg, n)
        return cmd_verify(cfg, args.tag, args.constant)
    except (UsageError, SchemeError) as exc:
        sys.stderr.write(f"turankit: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
