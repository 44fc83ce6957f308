"""Closed-form ultraspherical reference values.

``mu_n = 2^{-2n} binom(2n, n)`` and ``mu_n^{(a)} = mu_n / binom(n + a, n)`` are
built by telescoping ratios, so they stay in range for large ``n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundCertificate, DEFAULT_GRID
from .grid import interior_grid, map_grid
from .schemes import SchemeError, jacobi_scheme
from .turan import fund_table

__all__ = ["MidBinomialTable", "mu", "mu_alpha", "mu_table", "f_endpoints", "check_cor12"]


@dataclass(frozen=True)
class MidBinomialTable:
    a: float
    mu: np.ndarray
    mu_alpha: np.ndarray


def mu_table(N: int, a: float = 0.0) -> MidBinomialTable:
    """``mu_0..mu_N`` and ``mu_0^{(a)}..mu_N^{(a)}``."""
    if not a > -1:
        raise SchemeError("a must exceed -1")
    k = np.arange(1, N + 1, dtype=float)
    mu_ = np.concatenate(([1.0], np.cumprod((2 * k - 1) / (2 * k))))
    # binom(n + a, n) = prod_{k<=n} (a + k)/k
    mua = np.concatenate(([1.0], np.cumprod((2 * k - 1) / (2 * (a + k)))))
    return MidBinomialTable(a, mu_, mua)


def mu(n: int) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    return float(math.prod((2 * k - 1) / (2 * k) for k in range(1, n + 1)))


def mu_alpha(a: float, n: int) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    if not a > -1:
        raise SchemeError("a must exceed -1")
    return float(math.prod((2 * k - 1) / (2 * (a + k)) for k in range(1, n + 1)))


def f_endpoints(a: float, n: int) -> tuple[float, float]:
    """``(f_n(0), f_n(1)) = (mu^{(a)}_{[n/2]} mu^{(a)}_{[(n+1)/2]}, 1/(2a + 2))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return mu_alpha(a, n // 2) * mu_alpha(a, (n + 1) // 2), 1.0 / (2 * a + 2)


def check_cor12(a: float, N: int, grid=None, tol: float = 1e-12, threads=None) -> BoundCertificate:
    """``f_n(0) (1-x^2) < Delta_n(x) < f_n(1) (1-x^2)`` for ``a > -1/2``, reversed for ``a < -1/2``.

    The sandwich is checked on ``f_n(x) = Delta_n(x)/(1-x^2)`` with margins
    relative to the endpoint values. Both sides are equalities for ``n = 1``
    (``f_1`` is constant) and the lower side is one at ``x = 0``; strictness
    is reported in ``details`` for ``n >= 2`` away from the origin.
    """
    if a == -0.5:
        raise SchemeError("a = -1/2 is the equality case; use a != -1/2")
    s = jacobi_scheme(a)
    grid = interior_grid(DEFAULT_GRID) if grid is None else np.asarray(grid, dtype=float)
    # polynomial form: dividing by 1 - x^2 near the ends costs ~1e-11 for large a
    f = map_grid(lambda x: fund_table(s, N, x), grid, threads)[1:]
    ends = np.array([f_endpoints(a, n) for n in range(1, N + 1)])
    f0, f1 = ends[:, :1], ends[:, 1:]
    sign = 1.0 if a > -0.5 else -1.0
    lower = sign * (f - f0) / f0
    upper = sign * (f1 - f) / f1
    margins = np.minimum(lower, upper)
    off_zero = grid != 0.0
    strict = bool(np.all(lower[1:, off_zero] > 0) and np.all(upper[1:] > 0))
    by_n = margins.min(axis=1)
    i, j = np.unravel_index(int(np.argmin(margins)), margins.shape)
    return BoundCertificate("cor12_ultra_bounds", s.descriptor, None,
                            "f_n(0)=mu_[n/2] mu_[(n+1)/2], f_n(1)=1/(2a+2)", {}, (1, N),
                            grid.size, float(margins.min()), float(margins.max()), tol,
                            (int(i + 1), float(grid[j])), by_n,
                            {"direction": "normal" if sign > 0 else "reversed",
                             "strict_off_origin": strict})
