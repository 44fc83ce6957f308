"""Turán determinants, normalized Turán determinants and the structural identities between them.

Determinants are evaluated through one-step-eliminated forms such as
``gamma_n Delta_n = alpha_n p_{n-1}^2 + gamma_n p_n^2 - x p_{n-1} p_n``; the raw
difference ``p_n^2 - p_{n-1} p_{n+1}`` is kept as a cross-check only.
Tables are indexed by ``n`` in their first axis; entries for ``n`` outside
the defined range are ``nan``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .grid import map_grid
from .polyeval import (
    eval_orthonormal,
    eval_p,
    eval_q,
    eval_qtilde,
    p_at_zero,
)
from .schemes import OrthonormalScheme, RecurrenceScheme

__all__ = [
    "BOUNDARY_BAND",
    "RESIDUAL_FLOOR",
    "IdentityResidualReport",
    "TuranScan",
    "relative_residual",
    "scaled_tolerance",
    "delta_table",
    "delta_raw_table",
    "turan_delta",
    "turan_delta_raw",
    "fund_table",
    "normalized_table",
    "normalized_turan",
    "turanturan_table",
    "D_table",
    "script_D_table",
    "D_n",
    "script_D_n",
    "delta_zero",
    "delta_zero_scaled",
    "turan_polynomial",
    "check_prop21",
    "check_fundamental",
    "check_turanturan",
    "check_D_step",
    "check_script_D_step",
    "turan_scan",
]

BOUNDARY_BAND = 1e-8
RESIDUAL_FLOOR = 1e-30


def relative_residual(lhs, rhs, floor: float = RESIDUAL_FLOOR) -> np.ndarray:
    """``|lhs - rhs| / max(|lhs|, |rhs|, floor)``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), floor)
    return np.abs(lhs - rhs) / scale


def scaled_tolerance(base: float, n) -> np.ndarray:
    """Forward recurrences accumulate rounding roughly linearly in ``n``."""
    return base * (1.0 + np.asarray(n, dtype=float) / 50.0)


def _col(v, ndim):
    return np.asarray(v, dtype=float).reshape((-1,) + (1,) * (ndim - 1))


# --------------------------------------------------------------------------
# Delta_n and the normalized determinant


def delta_table(s: RecurrenceScheme, N: int, x) -> np.ndarray:
    """``Delta_n(x)`` for ``n = 0..N`` (row 0 is ``nan``) by the eliminated form."""
    p = eval_p(s, N, x).values
    alpha, gamma = s.coefficients(N)
    out = np.full_like(p, np.nan)
    if N >= 1:
        a, g = _col(alpha[1:], p.ndim), _col(gamma[1:], p.ndim)
        x = np.asarray(x, dtype=float)
        out[1:] = (a * p[:-1] ** 2 + g * p[1:] ** 2 - x * p[:-1] * p[1:]) / g
    return out


def delta_raw_table(s: RecurrenceScheme, N: int, x) -> np.ndarray:
    """``p_n^2 - p_{n-1} p_{n+1}`` for ``n = 0..N`` (row 0 is ``nan``)."""
    p = eval_p(s, N + 1, x).values
    out = np.full_like(p[:-1], np.nan)
    out[1:] = p[1:-1] ** 2 - p[:-2] * p[2:]
    return out


def turan_delta(s: RecurrenceScheme, n: int, x):
    if n < 1:
        raise ValueError("Turán determinant needs n >= 1")
    return delta_table(s, n, x)[n]


def turan_delta_raw(s: RecurrenceScheme, n: int, x):
    if n < 1:
        raise ValueError("Turán determinant needs n >= 1")
    return delta_raw_table(s, n, x)[n]


def fund_table(s: RecurrenceScheme, N: int, x) -> np.ndarray:
    """``alpha_n gamma_n q_{n-1}^2 - alpha_{n-1} gamma_{n+1} q_{n-2} q_n`` for ``n = 0..N``.

    A polynomial in ``x`` equal to ``Delta_n(x) / (1 - x^2)``; ``q_{-1} = 0``.
    """
    s.require_normalized()
    q = eval_q(s, max(N, 1), x).values
    alpha, gamma = s.coefficients(N + 1)
    nd = q.ndim
    out = np.full((N + 1,) + q.shape[1:], np.nan)
    if N >= 1:
        out[1] = alpha[1] * gamma[1] * q[0] ** 2
    if N >= 2:
        n = np.arange(2, N + 1)
        out[2:] = (_col(alpha[n] * gamma[n], nd) * q[n - 1] ** 2
                   - _col(alpha[n - 1] * gamma[n + 1], nd) * q[n - 2] * q[n])
    return out


def normalized_table(s: RecurrenceScheme, N: int, x) -> np.ndarray:
    """``Delta_n(x) / (1 - x^2)`` for ``n = 0..N`` (row 0 is ``nan``).

    Inside ``|1 - x^2| <= BOUNDARY_BAND`` the polynomial q-form is used.
    """
    s.require_normalized()
    x = np.asarray(x, dtype=float)
    den = (1.0 - x) * (1.0 + x)
    near = np.abs(den) <= BOUNDARY_BAND
    with np.errstate(divide="ignore", invalid="ignore"):
        out = delta_table(s, N, x) / den
    if np.any(near):
        if x.ndim == 0:
            return fund_table(s, N, x)
        out[:, near] = fund_table(s, N, x[near])
    return out


def normalized_turan(s: RecurrenceScheme, n: int, x):
    """``Delta_n(x) / (1 - x^2)``, finite up to and including ``x = +-1``."""
    if n < 1:
        raise ValueError("normalized Turán determinant needs n >= 1")
    return normalized_table(s, n, x)[n]


def turanturan_table(s: RecurrenceScheme, N: int, x) -> np.ndarray:
    """Scaled order ``n-1`` Turán determinant of ``q~``:
    ``(gamma_n/alpha_n) (alpha_1..alpha_n / gamma_1..gamma_n)^2 [q~_{n-1}^2 - q~_{n-2} q~_n]``."""
    s.require_normalized()
    qt = eval_qtilde(s, max(N, 1), x).values
    alpha, gamma = s.coefficients(N)
    nd = qt.ndim
    out = np.full((N + 1,) + qt.shape[1:], np.nan)
    if N < 1:
        return out
    ratio = np.cumprod(alpha[1:] / gamma[1:])          # index n-1 -> n
    pref = gamma[1:] / alpha[1:] * ratio ** 2
    det = np.empty((N,) + qt.shape[1:])
    det[0] = qt[0] ** 2
    if N >= 2:
        det[1:] = qt[1:N] ** 2 - qt[: N - 1] * qt[2: N + 1]
    out[1:] = _col(pref, nd) * det
    return out


# --------------------------------------------------------------------------
# Auxiliary determinants


def D_table(s: RecurrenceScheme, N: int, x) -> np.ndarray:
    """``D_n = alpha_{n-1} q_{n-2}^2 + gamma_n q_{n-1}^2 - x q_{n-2} q_{n-1}`` for ``n = 0..N`` (rows 0, 1 ``nan``)."""
    s.require_normalized()
    q = eval_q(s, max(N - 1, 0), x).values
    alpha, gamma = s.coefficients(N)
    out = np.full((N + 1,) + q.shape[1:], np.nan)
    if N >= 2:
        n = np.arange(2, N + 1)
        x = np.asarray(x, dtype=float)
        out[2:] = (_col(alpha[n - 1], q.ndim) * q[n - 2] ** 2 + _col(gamma[n], q.ndim) * q[n - 1] ** 2
                   - x * q[n - 2] * q[n - 1])
    return out


def D_n(s: RecurrenceScheme, n: int, x):
    if n < 2:
        raise ValueError("D_n needs n >= 2")
    return D_table(s, n, x)[n]


def script_D_table(lam: OrthonormalScheme, N: int, x) -> np.ndarray:
    """``lambda_{n-1} (P_{n-1}^2 + P_n^2) - x P_{n-1} P_n`` for ``n = 0..N`` (row 0 ``nan``)."""
    P = eval_orthonormal(lam, N, x).values
    out = np.full_like(P, np.nan)
    if N >= 1:
        l = _col(lam.lams(N - 1), P.ndim)
        x = np.asarray(x, dtype=float)
        out[1:] = l * (P[:-1] ** 2 + P[1:] ** 2) - x * P[:-1] * P[1:]
    return out


def script_D_n(lam: OrthonormalScheme, n: int, x):
    if n < 1:
        raise ValueError("script D_n needs n >= 1")
    return script_D_table(lam, n, x)[n]


# --------------------------------------------------------------------------
# Values at the origin


def delta_zero(s: RecurrenceScheme, n: int) -> float:
    """``Delta_n(0)``: ``p_{2m}(0)^2`` for ``n = 2m`` and ``-p_{2m}(0) p_{2m+2}(0)`` for ``n = 2m+1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2 == 0:
        return p_at_zero(s, n) ** 2
    return -p_at_zero(s, n - 1) * p_at_zero(s, n + 1)


def delta_zero_scaled(s: RecurrenceScheme, N: int) -> np.ndarray:
    """``Delta_n(0) h_n`` for ``n = 0..N`` with ``h_n = gamma_1..gamma_n / alpha_1..alpha_n``.

    Evaluated as ``prod_{k<=m} (alpha_{2k-1}/alpha_{2k}) (gamma_{2k}/gamma_{2k-1})`` with
    ``m = floor(n/2)``; entry 0 is ``nan``.
    """
    alpha, gamma = s.coefficients(max(N, 2))
    M = N // 2
    k = np.arange(1, M + 1)
    factors = (alpha[2 * k - 1] / alpha[2 * k]) * (gamma[2 * k] / gamma[2 * k - 1])
    partial = np.concatenate(([1.0], np.cumprod(factors)))
    out = np.full(N + 1, np.nan)
    n = np.arange(1, N + 1)
    out[1:] = partial[n // 2]
    return out


# --------------------------------------------------------------------------
# Exact polynomial expansion


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = a + [Fraction(0)] * (n - len(a))
    b = b + [Fraction(0)] * (n - len(b))
    return [u - v for u, v in zip(a, b)]


def turan_polynomial(s: RecurrenceScheme, n: int, kind: str = "qtilde") -> list[Fraction]:
    """Exact coefficients (ascending powers of ``x``) of an order-``n`` Turán determinant.

    ``kind="qtilde"`` expands ``q~_n^2 - q~_{n-1} q~_{n+1}``; ``kind="p"`` expands
    ``p_n^2 - p_{n-1} p_{n+1}``. The binary64 coefficients of ``s`` are taken as
    exact rationals, so the expansion has no rounding.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha, gamma = s.coefficients(n + 2)
    A = [Fraction(float(v)) for v in alpha]
    G = [Fraction(float(v)) for v in gamma]
    X = [Fraction(0), Fraction(1)]
    if kind == "qtilde":
        a_next = lambda k: A[k + 1]
        b_prev = lambda k: G[k + 1]
    elif kind == "p":
        a_next = lambda k: G[k]
        b_prev = lambda k: A[k]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    seq = [[Fraction(1)]]
    prev = [Fraction(0)]
    for k in range(n + 1):
        nxt = _poly_sub(_poly_mul(X, seq[k]), [b_prev(k) * c for c in prev])
        nxt = [c / a_next(k) for c in nxt]
        prev = seq[k]
        seq.append(nxt)
    det = _poly_sub(_poly_mul(seq[n], seq[n]), _poly_mul(seq[n - 1], seq[n + 1]))
    while len(det) > 1 and det[-1] == 0:
        det.pop()
    return det


# --------------------------------------------------------------------------
# Identity residual reports


@dataclass
class IdentityResidualReport:
    """Maximum relative residual of an identity over ``n`` and a grid."""

    identity: str
    family: dict
    n_range: tuple[int, int]
    grid_size: int
    max_residual: float
    worst_n: Optional[int]
    worst_x: Optional[float]
    base_tol: float
    skipped: list[int] = field(default_factory=list)
    per_n: Optional[np.ndarray] = None
    passed: bool = True

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "family": self.family,
            "n_range": list(self.n_range),
            "grid_size": self.grid_size,
            "max_residual": self.max_residual,
            "worst_n": self.worst_n,
            "worst_x": self.worst_x,
            "base_tol": self.base_tol,
            "skipped": self.skipped,
            "verdict": self.verdict,
        }


def _report(identity, family, n_lo, n_hi, grid, lhs, rhs, base_tol, skipped=()):
    """Compare ``lhs[n]`` and ``rhs[n]`` for ``n_lo <= n <= n_hi`` not in ``skipped``."""
    grid = np.asarray(grid, dtype=float)
    ns = np.array([n for n in range(n_lo, n_hi + 1) if n not in set(skipped)], dtype=int)
    per_n = np.zeros(0)
    worst = (0.0, None, None)
    passed = True
    if ns.size:
        res = relative_residual(lhs[ns], rhs[ns])
        res = np.where(np.isnan(res), np.inf, res)
        per_n = res.max(axis=1)
        passed = bool(np.all(per_n < scaled_tolerance(base_tol, ns)))
        i, j = np.unravel_index(int(np.argmax(res)), res.shape)
        worst = (float(res[i, j]), int(ns[i]), float(grid[j]))
    return IdentityResidualReport(identity, family, (n_lo, n_hi), grid.size, worst[0],
                                  worst[1], worst[2], base_tol, sorted(set(skipped)), per_n, passed)


def check_prop21(s: RecurrenceScheme, n_range: tuple[int, int], grid, base_tol: float = 1e-10,
                 threads=None) -> IdentityResidualReport:
    """Residual of the recursion between ``Delta_n`` and ``Delta_{n-1}`` (needs ``alpha_k != gamma_k``).

    ``Delta_n = c1 Delta_{n-1} + c2 (p_{n-1}^2 + p_n^2 - 2x p_{n-1} p_n)`` with
    ``c1 = (gamma_n - alpha_n) alpha_{n-1} / ((gamma_{n-1} - alpha_{n-1}) gamma_n)`` and
    ``c2 = (alpha_n - alpha_{n-1}) / ((gamma_{n-1} - alpha_{n-1}) gamma_n)``.
    """
    n_lo, n_hi = max(n_range[0], 2), n_range[1]
    grid = np.asarray(grid, dtype=float)
    alpha, gamma = s.coefficients(n_hi)
    diff = gamma - alpha
    skipped = [n for n in range(n_lo, n_hi + 1)
               if abs(diff[n]) < 1e-12 or abs(diff[n - 1]) < 1e-12]

    def rhs_fn(x):
        p = eval_p(s, n_hi, x).values
        delta = delta_raw_table(s, n_hi, x)
        out = np.full_like(p, np.nan)
        n = np.arange(n_lo, n_hi + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            den = diff[n - 1] * gamma[n]
            c1 = _col(diff[n] * alpha[n - 1] / den, p.ndim)
            c2 = _col((alpha[n] - alpha[n - 1]) / den, p.ndim)
            out[n] = c1 * delta[n - 1] + c2 * (p[n - 1] ** 2 + p[n] ** 2 - 2 * x * p[n - 1] * p[n])
        return out

    lhs = map_grid(lambda x: delta_table(s, n_hi, x), grid, threads)
    rhs = map_grid(rhs_fn, grid, threads)
    return _report("prop21", s.descriptor, n_lo, n_hi, grid, lhs, rhs, base_tol, skipped)


def check_fundamental(s: RecurrenceScheme, n_range: tuple[int, int], grid,
                      base_tol: float = 1e-10, threads=None) -> IdentityResidualReport:
    """Residual between ``Delta_n / (1 - x^2)`` from ``p_n`` and the q-form on interior points."""
    s.require_normalized()
    grid = np.asarray(grid, dtype=float)
    grid = grid[np.abs((1 - grid) * (1 + grid)) > BOUNDARY_BAND]
    n_lo, n_hi = max(n_range[0], 1), n_range[1]
    den = (1 - grid) * (1 + grid)
    lhs = map_grid(lambda x: delta_table(s, n_hi, x), grid, threads) / den
    rhs = map_grid(lambda x: fund_table(s, n_hi, x), grid, threads)
    return _report("fund", s.descriptor, n_lo, n_hi, grid, lhs, rhs, base_tol)


def check_turanturan(s: RecurrenceScheme, n_range: tuple[int, int], grid,
                     base_tol: float = 1e-10, threads=None) -> IdentityResidualReport:
    """Residual between the normalized Turán determinant and the scaled ``q~`` determinant."""
    s.require_normalized()
    grid = np.asarray(grid, dtype=float)
    n_lo, n_hi = max(n_range[0], 1), n_range[1]
    lhs = map_grid(lambda x: normalized_table(s, n_hi, x), grid, threads)
    rhs = map_grid(lambda x: turanturan_table(s, n_hi, x), grid, threads)
    return _report("turanturan", s.descriptor, n_lo, n_hi, grid, lhs, rhs, base_tol)


def check_D_step(s: RecurrenceScheme, n_range: tuple[int, int], grid,
                 base_tol: float = 1e-10, threads=None) -> IdentityResidualReport:
    """``D_n - (alpha_{n-2}/gamma_n) D_{n-1} = (alpha_{n-1} gamma_n - alpha_{n-2} gamma_{n-1}) q_{n-2}^2 / gamma_n``."""
    grid = np.asarray(grid, dtype=float)
    n_lo, n_hi = max(n_range[0], 3), n_range[1]
    alpha, gamma = s.coefficients(n_hi)
    n = np.arange(n_lo, n_hi + 1)

    def both(x):
        D = D_table(s, n_hi, x)
        q = eval_q(s, n_hi, x).values
        lhs = np.full_like(D, np.nan)
        rhs = np.full_like(D, np.nan)
        # compared as D_n vs (step + increment): the bare difference is often exactly 0
        lhs[n] = D[n]
        rhs[n] = (_col(alpha[n - 2] / gamma[n], D.ndim) * D[n - 1]
                  + _col((alpha[n - 1] * gamma[n] - alpha[n - 2] * gamma[n - 1]) / gamma[n], D.ndim) * q[n - 2] ** 2)
        return np.stack((lhs, rhs))

    lhs, rhs = map_grid(both, grid, threads)
    return _report("Dn_step", s.descriptor, n_lo, n_hi, grid, lhs, rhs, base_tol)


def check_script_D_step(lam: OrthonormalScheme, n_range: tuple[int, int], grid,
                        base_tol: float = 1e-10, threads=None) -> IdentityResidualReport:
    """``D_n - (lambda_{n-2}/lambda_{n-1}) D_{n-1} = (lambda_{n-1}^2 - lambda_{n-2}^2) P_{n-1}^2 / lambda_{n-1}``."""
    grid = np.asarray(grid, dtype=float)
    n_lo, n_hi = max(n_range[0], 2), n_range[1]
    l = np.concatenate(([0.0], lam.lams(n_hi)))    # l[k + 1] = lambda_k, lambda_{-1} = 0
    n = np.arange(n_lo, n_hi + 1)

    def both(x):
        D = script_D_table(lam, n_hi, x)
        P = eval_orthonormal(lam, n_hi, x).values
        lhs = np.full_like(D, np.nan)
        rhs = np.full_like(D, np.nan)
        lhs[n] = D[n]
        rhs[n] = (_col(l[n - 1] / l[n], D.ndim) * D[n - 1]
                  + _col((l[n] ** 2 - l[n - 1] ** 2) / l[n], D.ndim) * P[n - 1] ** 2)
        return np.stack((lhs, rhs))

    lhs, rhs = map_grid(both, grid, threads)
    return _report("script_Dn_step", lam.descriptor, n_lo, n_hi, grid, lhs, rhs, base_tol)


# --------------------------------------------------------------------------
# Scans


@dataclass
class TuranScan:
    """``Delta_n`` and ``Delta_n / (1 - x^2)`` for ``n = 1..N`` over a grid."""

    family: dict
    n_max: int
    grid: np.ndarray
    delta: np.ndarray          # shape (N, m), row i <-> n = i + 1
    normalized: np.ndarray
    delta0: np.ndarray         # Delta_n(0), n = 1..N

    @property
    def ns(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    def summaries(self) -> list[dict]:
        return [{"n": int(n), "min_normalized": float(np.min(row)),
                 "max_normalized": float(np.max(row)), "delta0": float(d0)}
                for n, row, d0 in zip(self.ns, self.normalized, self.delta0)]

    def rows(self):
        for n, drow, frow in zip(self.ns, self.delta, self.normalized):
            for x, d, f in zip(self.grid, drow, frow):
                yield int(n), float(x), float(d), float(f)

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "n_max": self.n_max,
            "grid": self.grid.tolist(),
            "delta": self.delta.tolist(),
            "normalized": self.normalized.tolist(),
            "delta0": self.delta0.tolist(),
            "summaries": self.summaries(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def turan_scan(s: RecurrenceScheme, N: int, grid: Sequence[float], threads=None) -> TuranScan:
    s.require_normalized()
    grid = np.asarray(grid, dtype=float)
    delta = map_grid(lambda x: delta_table(s, N, x), grid, threads)[1:]
    norm = map_grid(lambda x: normalized_table(s, N, x), grid, threads)[1:]
    d0 = np.array([delta_zero(s, n) for n in range(1, N + 1)])
    return TuranScan(s.descriptor, N, grid, delta, norm, d0)
