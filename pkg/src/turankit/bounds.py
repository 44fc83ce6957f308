"""Certificates for the Turán-determinant bounds, (LB) infimum scans and density estimates.

Every bound is conditional on hypotheses about the recurrence coefficients.
Those are checked first (up to the scan limit); when they fail the
certificate is ``inapplicable`` rather than ``fail``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import enriched_half_grid, interior_grid, map_grid
from .polyeval import eval_orthonormal, eval_Q, q_at_one, orthonormal_scale
from .schemes import (
    OrthonormalScheme,
    RecurrenceScheme,
    SchemeError,
    SequenceVerdict,
    check_sequence_property,
    q_ultra_orthonormal,
    q_ultra_scheme,
    scheme_from_orthonormal,
)
from .turan import (
    delta_table,
    delta_zero,
    delta_zero_scaled,
    normalized_table,
    script_D_table,
)

__all__ = [
    "BoundCertificate",
    "DensityEstimate",
    "MonotonicityScan",
    "lower_bound_constant",
    "upper_bound_constant",
    "upper_bound_derived_constant",
    "qultra_lower_constant",
    "verify_thm2_lower",
    "verify_thm2a_upper",
    "verify_origin_sandwich",
    "verify_positivity",
    "verify_prop29_turan_q",
    "lb_infimum",
    "lb_infimum_scan",
    "verify_perturbed_chebyshev",
    "perturbed_chebyshev_closed_form",
    "density_estimate",
    "verify_thm41",
    "detect_nonmonotonicity",
]

DEFAULT_GRID = 201


@dataclass
class BoundCertificate:
    """Result of checking one inequality on a grid and an ``n`` range.

    ``status`` is ``pass`` when every hypothesis holds and the smallest margin is
    at least ``-tolerance``, ``fail`` when a margin goes below that, and
    ``inapplicable`` when a hypothesis fails.
    """

    theorem: str
    family: dict
    constant: Optional[float]
    constant_formula: str
    hypotheses: dict[str, SequenceVerdict]
    n_range: tuple[int, int]
    grid_size: int
    min_margin: float
    max_margin: float
    tolerance: float
    worst: Optional[tuple[int, float]] = None
    margin_by_n: Optional[np.ndarray] = None
    details: dict = field(default_factory=dict)
    status: str = ""

    def __post_init__(self):
        if not self.status:
            if not all(v.holds for v in self.hypotheses.values()):
                self.status = "inapplicable"
            elif self.min_margin >= -self.tolerance:
                self.status = "pass"
            else:
                self.status = "fail"

    @property
    def applicable(self) -> bool:
        return self.status != "inapplicable"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "family": self.family,
            "constant": {"value": self.constant, "formula": self.constant_formula},
            "hypotheses": {k: v.to_dict() for k, v in self.hypotheses.items()},
            "n_range": list(self.n_range),
            "grid_size": self.grid_size,
            "min_margin": self.min_margin,
            "max_margin": self.max_margin,
            "tolerance": self.tolerance,
            "worst": None if self.worst is None else {"n": self.worst[0], "x": self.worst[1]},
            "details": _jsonable(self.details),
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def margin_rows(self):
        """``(n, min margin)`` pairs for CSV export."""
        if self.margin_by_n is None:
            return []
        lo = self.n_range[0]
        return [(lo + i, float(m)) for i, m in enumerate(self.margin_by_n)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (SequenceVerdict,)):
        return obj.to_dict()
    if isinstance(obj, BoundCertificate):
        return obj.to_dict()
    return obj


def _grid(grid):
    return interior_grid(DEFAULT_GRID) if grid is None else np.asarray(grid, dtype=float)


def _margin_summary(margins, grid, n_lo):
    """Reduce an ``(n, x)`` margin matrix to min/max, the worst point and per-n minima."""
    by_n = margins.min(axis=1)
    i, j = np.unravel_index(int(np.argmin(margins)), margins.shape)
    return float(margins.min()), float(margins.max()), (int(n_lo + i), float(grid[j])), by_n


# --------------------------------------------------------------------------
# Bounds relative to Delta_n(0)


def lower_bound_constant(s: RecurrenceScheme) -> float:
    """``c = 2 alpha_1 gamma_2 / gamma_1``."""
    return 2.0 * s.alpha(1) * s.gamma(2) / s.gamma(1)


def upper_bound_constant(s: RecurrenceScheme) -> float:
    """``C = 2 gamma_2``."""
    return 2.0 * s.gamma(2)


def upper_bound_derived_constant(s: RecurrenceScheme) -> float:
    """``2 alpha_1 gamma_2 / gamma_1``: the constant the upper-bound argument actually yields.

    Mirroring the lower-bound proof gives ``f_n <= A_n 2 alpha_1 gamma_2 / gamma_1``
    and ``A_n <= Delta_n(0)`` when ``alpha_n`` decreases. ``2 gamma_2`` is at most 1
    under the same hypotheses while ``f_n(0) = Delta_n(0)``, so it cannot bound ``f_n``.
    """
    return lower_bound_constant(s)


def qultra_lower_constant(s: RecurrenceScheme) -> float:
    """``c = 2 alpha_1 (1 - alpha_2) / (1 - alpha_1)``, the q-ultraspherical form of ``lower_bound_constant``."""
    a1, a2 = s.alpha(1), s.alpha(2)
    return 2.0 * a1 * (1.0 - a2) / (1.0 - a1)


def lower_bound_hypotheses(s: RecurrenceScheme, N: int) -> dict[str, SequenceVerdict]:
    return {
        "increasing": check_sequence_property(s, "increasing", N),
        "bounded_by_half": check_sequence_property(s, "bounded_by_half", N),
        "qconcave": check_sequence_property(s, "qconcave", N + 1),
    }


def upper_bound_hypotheses(s: RecurrenceScheme, N: int) -> dict[str, SequenceVerdict]:
    return {
        "decreasing": check_sequence_property(s, "decreasing", N, start=2),
        "at_least_half": check_sequence_property(s, "at_least_half", N),
        "qconcave2": check_sequence_property(s, "qconcave2", N + 1),
    }


def _relative_bound_scan(s, N, grid, constant, upper, threads):
    """Relative margins of ``f_n(x)`` against ``constant * Delta_n(0)``."""
    f = map_grid(lambda x: normalized_table(s, N, x), grid, threads)[1:]
    d0 = np.array([delta_zero(s, n) for n in range(1, N + 1)])[:, None]
    bound = constant * d0
    margins = (bound - f) / bound if upper else (f - bound) / bound
    return margins


def verify_thm2_lower(s: RecurrenceScheme, N: int, grid=None, tol: float = 1e-10,
                      constant: Optional[float] = None, theorem: str = "thm2_lower",
                      formula: str = "2*alpha_1*gamma_2/gamma_1",
                      threads=None) -> BoundCertificate:
    """``Delta_n(x)/(1-x^2) >= c Delta_n(0)`` on ``(-1, 1)`` for ``1 <= n <= N``.

    Needs ``alpha_n`` increasing, ``alpha_n <= 1/2`` and ``alpha_n gamma_{n+1}``
    increasing. Margins are relative: ``(f_n(x) - c Delta_n(0)) / (c Delta_n(0))``.
    """
    s.require_normalized()
    grid = _grid(grid)
    hyp = lower_bound_hypotheses(s, N)
    c = lower_bound_constant(s) if constant is None else constant
    if not all(v.holds for v in hyp.values()):
        return BoundCertificate(theorem, s.descriptor, c, formula, hyp, (1, N), grid.size,
                                math.nan, math.nan, tol)
    margins = _relative_bound_scan(s, N, grid, c, upper=False, threads=threads)
    lo, hi, worst, by_n = _margin_summary(margins, grid, 1)
    return BoundCertificate(theorem, s.descriptor, c, formula, hyp, (1, N), grid.size,
                            lo, hi, tol, worst, by_n)


def verify_thm2a_upper(s: RecurrenceScheme, N: int, grid=None, tol: float = 1e-10,
                       constant: str = "stated", threads=None) -> BoundCertificate:
    """``Delta_n(x)/(1-x^2) <= C Delta_n(0)``.

    Needs ``alpha_n`` decreasing and ``>= 1/2`` for ``n >= 1`` and
    ``alpha_n gamma_{n+1}`` decreasing for ``n >= 2``. ``constant="stated"``
    uses ``C = 2 gamma_2``; ``constant="derived"`` uses
    :func:`upper_bound_derived_constant`. Margins are ``(C Delta_n(0) - f_n(x)) / (C Delta_n(0))``.
    """
    s.require_normalized()
    grid = _grid(grid)
    hyp = upper_bound_hypotheses(s, N)
    if constant == "stated":
        C, formula = upper_bound_constant(s), "2*gamma_2"
    elif constant == "derived":
        C, formula = upper_bound_derived_constant(s), "2*alpha_1*gamma_2/gamma_1"
    else:
        raise ValueError(f"constant must be 'stated' or 'derived', got {constant!r}")
    if not all(v.holds for v in hyp.values()):
        return BoundCertificate("thm2a_upper", s.descriptor, C, formula, hyp, (1, N),
                                grid.size, math.nan, math.nan, tol)
    margins = _relative_bound_scan(s, N, grid, C, upper=True, threads=threads)
    lo, hi, worst, by_n = _margin_summary(margins, grid, 1)
    return BoundCertificate("thm2a_upper", s.descriptor, C, formula, hyp, (1, N),
                            grid.size, lo, hi, tol, worst, by_n)


def verify_origin_sandwich(s: RecurrenceScheme, N: int, tol: float = 0.0) -> BoundCertificate:
    """``Delta_n(0) <= alpha_1..alpha_n / gamma_1..gamma_n <= (gamma_1/alpha_1) Delta_n(0)``.

    Checked in the scaled form ``alpha_1/gamma_1 <= Delta_n(0) h_n <= 1``; the
    product form of ``Delta_n(0) h_n`` is cross-checked against ``Delta_n(0)``
    from ``p_n(0)`` and the explicit ratio products.
    """
    s.require_normalized()
    hyp = lower_bound_hypotheses(s, N)
    r = delta_zero_scaled(s, N)[1:]
    alpha, gamma = s.coefficients(N)
    low = alpha[1] / gamma[1]
    upper_margin = 1.0 - r
    lower_margin = r - low
    margins = np.minimum(upper_margin, lower_margin)
    # Delta_n(0) and A_n = alpha_1..alpha_n / gamma_1..gamma_n computed directly
    d0 = np.array([delta_zero(s, n) for n in range(1, N + 1)])
    log_A = np.cumsum(np.log(alpha[1:]) - np.log(gamma[1:]))
    cross = np.abs(d0 / np.exp(log_A) - r) / r
    details = {"max_cross_check_residual": float(cross.max()),
               "alpha1_over_gamma1": float(low)}
    i = int(np.argmin(margins))
    return BoundCertificate("origin_sandwich", s.descriptor, low, "alpha_1/gamma_1", hyp, (1, N), 0,
                            float(margins.min()), float(margins.max()), tol,
                            (i + 1, 0.0), margins, details)


def verify_positivity(s: RecurrenceScheme, N: int, grid=None, threads=None) -> BoundCertificate:
    """``Delta_n(x) > 0`` on the interior grid when ``alpha_n`` is increasing and
    ``<= 1/2``, or decreasing and ``>= 1/2``."""
    grid = _grid(grid)
    inc = {"increasing": check_sequence_property(s, "increasing", N),
           "bounded_by_half": check_sequence_property(s, "bounded_by_half", N)}
    dec = {"decreasing": check_sequence_property(s, "decreasing", N, start=2),
           "at_least_half": check_sequence_property(s, "at_least_half", N)}
    hyp = inc if all(v.holds for v in inc.values()) else dec
    case = "i" if hyp is inc else "ii"
    if case == "ii" and not s.normalized:
        g0, g1 = s.gamma(0), s.gamma(1)
        hyp = dict(hyp, gamma0=SequenceVerdict("gamma0", N, g0 <= g1 / (1 - g1),
                                               None if g0 <= g1 / (1 - g1) else (0, g1 / (1 - g1) - g0)))
    delta = map_grid(lambda x: delta_table(s, N, x), grid, threads)[1:]
    lo, hi, worst, by_n = _margin_summary(delta, grid, 1)
    cert = BoundCertificate("positivity", s.descriptor, None, "", hyp, (1, N), grid.size,
                            lo, hi, 0.0, worst, by_n, {"case": case})
    if cert.applicable and lo <= 0:
        cert.status = "fail"
    return cert


def verify_prop29_turan_q(s: RecurrenceScheme, N: int, grid=None, tol: float = 1e-11,
                          threads=None) -> BoundCertificate:
    """``Q_n^2 - Q_{n-1} Q_{n+1} >= 0`` for ``Q_n = q_n / q_n(1)``.

    Also checks that ``c_n = gamma_{n+2} q_{n+1}(1) / q_n(1)`` starts at 1, is
    decreasing and stays ``>= 1/2``.
    """
    s.require_normalized()
    grid = _grid(grid)
    hyp = lower_bound_hypotheses(s, N)
    q1 = q_at_one(s, N + 1)
    alpha, gamma = s.coefficients(N + 2)
    c = gamma[2: N + 3] * q1[1:] / q1[:-1]             # c_0 .. c_N
    hyp["c_decreasing"] = check_sequence_property(c, "decreasing", N)
    hyp["c_at_least_half"] = check_sequence_property(c, "at_least_half", N, start=0, tol=1e-12)
    details = {"c0": float(c[0]), "c_min": float(c.min()), "c_tail": float(c[-1])}
    if not all(v.holds for v in hyp.values()):
        return BoundCertificate("prop29_turan_q", s.descriptor, None, "", hyp, (1, N), grid.size,
                                math.nan, math.nan, tol, details=details)

    def qturan(x):
        Q = eval_Q(s, N + 1, x).values
        n = np.arange(1, N + 1)
        cn = c[n].reshape((-1,) + (1,) * (Q.ndim - 1))
        # c_n (Q_n^2 - Q_{n-1} Q_{n+1}) = (1 - c_n) Q_{n-1}^2 + c_n Q_n^2 - x Q_{n-1} Q_n
        return ((1 - cn) * Q[n - 1] ** 2 + cn * Q[n] ** 2 - x * Q[n - 1] * Q[n]) / cn

    T = map_grid(qturan, grid, threads)
    lo, hi, worst, by_n = _margin_summary(T, grid, 1)
    details["c0_residual"] = abs(float(c[0]) - 1.0)
    return BoundCertificate("prop29_turan_q", s.descriptor, None, "", hyp, (1, N), grid.size,
                            lo, hi, tol, worst, by_n, details)


# --------------------------------------------------------------------------
# (LB) condition


def lb_infimum(lam: OrthonormalScheme, N: int, grid=None, threads=None):
    """Empirical ``min P_n^2 + P_{n-1}^2`` over ``1 <= n <= N`` and the grid.

    Returns ``(value, n, x, per_n_minima)``. The default grid is
    :func:`enriched_half_grid`; evenness and growth on ``[1, inf)`` reduce the
    infimum over the real line to ``[0, 1]``.
    """
    grid = enriched_half_grid(DEFAULT_GRID, N) if grid is None else np.asarray(grid, dtype=float)

    def sums(x):
        P = eval_orthonormal(lam, N, x).values
        return P[1:] ** 2 + P[:-1] ** 2

    S = map_grid(sums, grid, threads)
    value, _, (n, x), by_n = _margin_summary(S, grid, 1)
    return value, n, x, by_n


def lb_infimum_scan(lam: OrthonormalScheme, N: int, grid=None, L: Optional[float] = None,
                    tol: float = 1e-9, threads=None) -> BoundCertificate:
    """(LB) bound ``P_n^2 + P_{n-1}^2 >= lambda_0^2 / (2 L^2)`` for increasing ``lambda_n``.

    ``L`` defaults to the known limit of the family, else the largest computed
    ``lambda_n``. The margin is ``inf - bound``.
    """
    grid = enriched_half_grid(DEFAULT_GRID, N) if grid is None else np.asarray(grid, dtype=float)
    hyp = {"lambda_increasing": check_sequence_property(lam, "increasing", N)}
    lams = lam.lams(N)
    if L is None:
        L = lam.limit_L if lam.limit_L is not None else float(lams.max())
    bound = lams[0] ** 2 / (2.0 * L * L)
    value, n, x, by_n = lb_infimum(lam, N, grid, threads)
    return BoundCertificate("prop31_LB", lam.descriptor, bound, "lambda_0^2/(2 L^2)", hyp, (1, N),
                            grid.size, value - bound, float(by_n.max()) - bound, tol, (n, x),
                            by_n - bound, {"inf_estimate": value, "bound": bound, "L": L})


def perturbed_chebyshev_closed_form(lambda0: float, x):
    """``(2/lambda_0^2) [lambda_0^4 - (lambda_0^2 - 1/4) x^2]``."""
    x = np.asarray(x, dtype=float)
    l2 = lambda0 * lambda0
    return 2.0 / l2 * (l2 * l2 - (l2 - 0.25) * x * x)


def verify_perturbed_chebyshev(lam: OrthonormalScheme, N: int, grid=None, tol: float = 1e-12,
                    threads=None) -> BoundCertificate:
    """For ``lambda_n = 1/2`` (``n >= 1``) and ``1/2 < lambda_0 < 1/sqrt(2)``:
    ``script D_n`` equals the closed form for ``n >= 2`` and
    ``P_n^2 + P_{n-1}^2 >= (2/lambda_0^2)(lambda_0^2 - 1/2)^2``.

    ``min_margin`` is the (LB) margin; the closed-form agreement is in ``details``,
    measured against ``max |closed form|`` over the grid.
    """
    lams = lam.lams(N)
    lambda0 = float(lams[0])
    off = np.flatnonzero(lams[1:] != 0.5)
    in_range = 0.5 < lambda0 < 1 / math.sqrt(2)
    hyp = {"lambda_tail_half": SequenceVerdict("lambda_tail_half", N, off.size == 0,
                                               None if off.size == 0 else (int(off[0]) + 1, float(lams[off[0] + 1] - 0.5))),
           "lambda0_range": SequenceVerdict("lambda0_range", 0, in_range,
                                            None if in_range else (0, lambda0))}
    grid = interior_grid(11, "uniform") if grid is None else np.asarray(grid, dtype=float)
    bound = 2.0 / lambda0 ** 2 * (lambda0 ** 2 - 0.5) ** 2
    if not all(v.holds for v in hyp.values()):
        return BoundCertificate("perturbed_chebyshev", lam.descriptor, bound, "(2/l0^2)(l0^2-1/2)^2", hyp,
                                (2, N), grid.size, math.nan, math.nan, tol)
    D = map_grid(lambda x: script_D_table(lam, N, x), grid, threads)[2:]
    closed = perturbed_chebyshev_closed_form(lambda0, grid)
    # normwise errors; pointwise ones lose ~1/(l0^2 - 1/2)^2 to cancellation near x = +-1
    scale = float(np.max(np.abs(closed)))
    closed_err = float(np.max(np.abs(D - closed))) / scale
    spread = float(np.max(np.abs(D - D[0]))) / scale
    value, n, x, by_n = lb_infimum(lam, N, enriched_half_grid(DEFAULT_GRID, N), threads)
    details = {"closed_form_max_rel_error": closed_err, "n_spread_max_rel": spread,
               "closed_form_pointwise_rel_error": float(np.max(np.abs(D - closed) / np.abs(closed))),
               "inf_estimate": value, "lambda0": lambda0}
    cert = BoundCertificate("perturbed_chebyshev", lam.descriptor, bound, "(2/l0^2)(l0^2-1/2)^2", hyp,
                            (2, N), grid.size, value - bound, float(by_n.max()) - bound, tol,
                            (n, x), by_n - bound, details)
    if closed_err > tol or spread > tol:
        cert.status = "fail"
    return cert


# --------------------------------------------------------------------------
# Density


@dataclass
class DensityEstimate:
    """Finite-``n`` estimate ``g_n(x) = 2 sqrt(1-x^2) / (pi (P_n^2 - P_{n-1} P_{n+1}))``."""

    family: dict
    n: int
    grid: np.ndarray
    g: np.ndarray
    g_double: np.ndarray
    delta_n: Optional[float]
    k_n: Optional[float]
    bound_curve: Optional[np.ndarray]
    bound_formula: str
    flagged: np.ndarray

    @property
    def convergence(self) -> float:
        """``max |g_{2n} - g_n|`` over finite grid points."""
        ok = np.isfinite(self.g) & np.isfinite(self.g_double)
        return float(np.max(np.abs(self.g_double[ok] - self.g[ok]))) if ok.any() else math.nan

    @property
    def envelope(self) -> tuple[float, float]:
        """``(inf, sup)`` of ``g_n(x) sqrt(1 - x^2)`` over the grid."""
        w = self.g * np.sqrt((1 - self.grid) * (1 + self.grid))
        w = w[np.isfinite(w)]
        return float(w.min()), float(w.max())

    def bound_ratio(self) -> Optional[float]:
        """``max g_n / bound`` on the grid when a bound curve applies."""
        if self.bound_curve is None:
            return None
        ok = np.isfinite(self.g) & (self.bound_curve > 0)
        return float(np.max(self.g[ok] / self.bound_curve[ok]))

    def rows(self):
        bc = self.bound_curve if self.bound_curve is not None else np.full_like(self.g, np.nan)
        for x, g, g2, b in zip(self.grid, self.g, self.g_double, bc):
            yield float(x), float(g), float(g2), float(b)

    def to_dict(self) -> dict:
        lo, hi = self.envelope
        return {
            "family": self.family,
            "n": self.n,
            "grid": self.grid.tolist(),
            "g": self.g.tolist(),
            "g_2n": self.g_double.tolist(),
            "delta_n": self.delta_n,
            "k_n": self.k_n,
            "bound_formula": self.bound_formula,
            "bound_curve": None if self.bound_curve is None else self.bound_curve.tolist(),
            "bound_ratio": self.bound_ratio(),
            "convergence_g2n_minus_gn": self.convergence,
            "envelope_g_sqrt": {"inf": lo, "sup": hi},
            "flagged": self.flagged.tolist(),
        }


def _orthonormal_turan(lam: OrthonormalScheme, n: int, x):
    """``P_n^2 - P_{n-1} P_{n+1} = (lambda_n P_n^2 - x P_{n-1} P_n + lambda_{n-1} P_{n-1}^2) / lambda_n``."""
    P = eval_orthonormal(lam, n, x).values
    l = lam.lams(n)
    lp = l[n - 1] if n >= 1 else 0.0
    return (l[n] * P[n] ** 2 - x * P[n - 1] * P[n] + lp * P[n - 1] ** 2) / l[n]


def density_estimate(lam: OrthonormalScheme, n: int, grid=None, threads=None) -> DensityEstimate:
    """Density estimate from the limit ``P_n^2 - P_{n-1} P_{n+1} -> 2 sqrt(1-x^2) / (pi g(x))``.

    When ``lambda_n`` is increasing up to ``2n`` with limit 1/2, the curve
    ``sqrt(1-x^2) / (2 pi lambda_0^2)`` is attached as an upper bound. Grid
    points where the Turán value is not positive are flagged and set to ``nan``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = interior_grid(DEFAULT_GRID) if grid is None else np.asarray(grid, dtype=float)
    root = np.sqrt((1 - grid) * (1 + grid))

    def estimate(m):
        T = map_grid(lambda x: _orthonormal_turan(lam, m, x), grid, threads)
        bad = T <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(bad, np.nan, 2.0 * root / (np.pi * T))
        return g, bad

    g, flagged = estimate(n)
    g2, _ = estimate(2 * n)
    delta_n = k_n = None
    try:
        s = scheme_from_orthonormal(lam, max_n=n + 2)
        d = orthonormal_scale(s, n + 1)
        delta_n = float(d[n])
        k_n = float(d[n] ** 2 / (d[n - 1] * d[n + 1]))
    except SchemeError:
        pass
    inc = check_sequence_property(lam, "increasing", 2 * n)
    bound = None
    formula = ""
    if inc.holds and lam.limit_L == 0.5:
        bound = root / (2.0 * np.pi * lam.lam(0) ** 2)
        formula = "sqrt(1-x^2)/(2 pi lambda_0^2)"
    return DensityEstimate(lam.descriptor, n, grid, g, g2, delta_n, k_n, bound, formula, flagged)


# --------------------------------------------------------------------------
# q-ultraspherical


def verify_thm41(q: float, b: float, N: int, grid=None, tol: float = 1e-10,
                 threads=None) -> BoundCertificate:
    """Case (i) ``b <= q``: ``lambda_n`` increasing and (LB). Case (ii) ``q <= b``:
    ``lambda_n`` decreasing, ``alpha_n`` increasing and concave, and the lower
    bound with ``c = 2 alpha_1 (1 - alpha_2) / (1 - alpha_1)``."""
    lam = q_ultra_orthonormal(q, b)
    s = q_ultra_scheme(q, b)
    cases = {}
    hyp = {}
    margins = []
    if b <= q:
        lb = lb_infimum_scan(lam, N, None, tol=1e-9, threads=threads)
        cases["i"] = lb
        hyp["i_lambda_increasing"] = lb.hypotheses["lambda_increasing"]
        margins.append(lb.min_margin)
    if q <= b:
        hyp["ii_lambda_decreasing"] = check_sequence_property(lam, "decreasing", N)
        hyp["ii_alpha_increasing"] = check_sequence_property(s, "increasing", N)
        hyp["ii_alpha_concave"] = check_sequence_property(s, "concave", N + 1, tol=1e-15)
        lower = verify_thm2_lower(s, N, grid, tol, constant=qultra_lower_constant(s), theorem="thm41_lower",
                                  formula="2*alpha_1*(1-alpha_2)/(1-alpha_1)", threads=threads)
        cases["ii"] = lower
        margins.append(lower.min_margin)
    c = qultra_lower_constant(s) if q <= b else None
    if not all(v.holds for v in hyp.values()) or any(not v.applicable for v in cases.values()):
        status = "inapplicable"
    else:
        status = "pass" if all(v.passed for v in cases.values()) else "fail"
    return BoundCertificate("thm41_qultra", {"family": "q_ultra", "q": q, "beta": b}, c,
                            "2*alpha_1*(1-alpha_2)/(1-alpha_1)" if c is not None else "",
                            hyp, (1, N), DEFAULT_GRID if grid is None else len(grid),
                            float(min(margins)), float(max(margins)), tol,
                            details={"cases": {k: v.to_dict() for k, v in cases.items()},
                                     "lambda_constant": bool(np.all(lam.lams(N) == lam.lam(0)))},
                            status=status)


# --------------------------------------------------------------------------
# Monotonicity in x


@dataclass
class MonotonicityScan:
    """Shape of ``x -> Delta_n(x)/(1-x^2)`` along an increasing grid."""

    n: int
    is_monotone: bool
    direction: str                       # increasing | decreasing | constant | mixed
    witnesses: list[tuple[float, str]]   # interior extrema (x, "min" | "max")

    def to_dict(self) -> dict:
        return {"n": self.n, "is_monotone": self.is_monotone, "direction": self.direction,
                "witnesses": [{"x": x, "kind": k} for x, k in self.witnesses]}


def detect_nonmonotonicity(s: RecurrenceScheme, n: int, grid=None, rtol: float = 1e-13) -> MonotonicityScan:
    """Look for strict interior extrema of the normalized Turán determinant on ``(0, 1)``.

    Steps smaller than ``rtol`` times the largest value are treated as flat.
    Extremum locations are refined by a parabola through the three grid values.
    """
    s.require_normalized()
    grid = np.linspace(0.0, 1.0, 2001)[1:-1] if grid is None else np.asarray(grid, dtype=float)
    f = normalized_table(s, n, grid)[n]
    step = np.diff(f)
    thresh = rtol * float(np.max(np.abs(f)))
    sign = np.where(step > thresh, 1, np.where(step < -thresh, -1, 0))
    nz = np.flatnonzero(sign)
    witnesses = []
    for a, b in zip(nz[:-1], nz[1:]):
        if sign[a] != sign[b]:
            j = b if sign[a] < 0 else a + 1
            j = min(max(j, 1), grid.size - 2)
            kind = "min" if sign[a] < 0 else "max"
            witnesses.append((_parabola_vertex(grid[j - 1: j + 2], f[j - 1: j + 2]), kind))
    if nz.size == 0:
        direction = "constant"
    elif not witnesses:
        direction = "increasing" if sign[nz[0]] > 0 else "decreasing"
    else:
        direction = "mixed"
    return MonotonicityScan(n, not witnesses, direction, witnesses)


def _parabola_vertex(x, y) -> float:
    (x0, x1, x2), (y0, y1, y2) = x, y
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
    if A == 0:
        return float(x1)
    return float(-B / (2 * A))
