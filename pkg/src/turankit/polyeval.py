"""Forward three-term recurrence evaluation of ``p_n``, ``P_n``, ``q_n``, ``q~_n`` and ``Q_n``.

Every function accepts a scalar abscissa or an array of abscissae; the
returned ``values`` array has shape ``(N + 1,) + np.shape(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .schemes import OrthonormalScheme, RecurrenceScheme

__all__ = [
    "EvalSequence",
    "eval_p",
    "eval_orthonormal",
    "eval_q",
    "eval_q_quotient",
    "eval_qtilde",
    "eval_Q",
    "q_at_one",
    "p_at_zero",
    "qtilde_scale",
    "orthonormal_scale",
    "QUOTIENT_BAND",
]

ArrayLike = Union[float, np.ndarray]

# q_n by the quotient (p_{n+2} - p_n)/(x^2 - 1) is only used outside this band
QUOTIENT_BAND = 1e-8


@dataclass(frozen=True)
class EvalSequence:
    """Values ``f_0(x) .. f_N(x)`` of one polynomial sequence."""

    kind: str
    x: ArrayLike
    values: np.ndarray
    route: str = "recurrence"

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    def __getitem__(self, n):
        return self.values[n]


def _three_term(x, N, first, a_next, b_prev):
    """Generic ``f_{n+1} = (x f_n - b_prev[n] f_{n-1}) / a_next[n]`` with ``f_{-1} = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((N + 1,) + x.shape)
    out[0] = first
    prev = np.zeros(x.shape)
    for n in range(N):
        out[n + 1] = (x * out[n] - b_prev[n] * prev) / a_next[n]
        prev = out[n]
    return out


def eval_p(s: RecurrenceScheme, N: int, x: ArrayLike) -> EvalSequence:
    """``p_0..p_N`` from ``p_{n+1} = (x p_n - alpha_n p_{n-1}) / gamma_n``, ``p_0 = 1``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    alpha, gamma = s.coefficients(max(N - 1, 0))
    return EvalSequence("p", x, _three_term(x, N, 1.0, gamma, alpha))


def eval_orthonormal(lam: OrthonormalScheme, N: int, x: ArrayLike) -> EvalSequence:
    """``P_0..P_N`` from ``P_{n+1} = (x P_n - lambda_{n-1} P_{n-1}) / lambda_n``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    l = lam.lams(max(N - 1, 0))
    lprev = np.concatenate(([0.0], l[:-1]))
    return EvalSequence("P", x, _three_term(x, N, 1.0, l, lprev))


def eval_q(s: RecurrenceScheme, N: int, x: ArrayLike) -> EvalSequence:
    """``q_n = (p_{n+2} - p_n)/(x^2 - 1)`` via ``x q_n = gamma_{n+2} q_{n+1} + alpha_n q_{n-1}``."""
    s.require_normalized()
    if N < 0:
        raise ValueError("N must be non-negative")
    alpha, gamma = s.coefficients(N + 1)
    return EvalSequence("q", x, _three_term(x, N, 1.0 / gamma[1], gamma[2:], alpha))


def eval_q_quotient(s: RecurrenceScheme, N: int, x: ArrayLike) -> EvalSequence:
    """``q_n`` by the defining quotient; ``nan`` where ``|1 - x^2| <= QUOTIENT_BAND``."""
    s.require_normalized()
    p = eval_p(s, N + 2, x).values
    x = np.asarray(x, dtype=float)
    den = (x - 1.0) * (x + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (p[2:] - p[:-2]) / den
    q[..., np.abs(den) <= QUOTIENT_BAND] = np.nan
    return EvalSequence("q", x, q, route="quotient-identity")


def eval_qtilde(s: RecurrenceScheme, N: int, x: ArrayLike) -> EvalSequence:
    """``q~_n`` from ``x q~_n = alpha_{n+1} q~_{n+1} + gamma_{n+1} q~_{n-1}``, ``q~_0 = 1``."""
    s.require_normalized()
    if N < 0:
        raise ValueError("N must be non-negative")
    alpha, gamma = s.coefficients(N + 1)
    return EvalSequence("qtilde", x, _three_term(x, N, 1.0, alpha[1:], gamma[1:]))


def qtilde_scale(s: RecurrenceScheme, N: int) -> np.ndarray:
    """``(gamma_1 .. gamma_{n+1}) / (alpha_1 .. alpha_n)`` for ``n = 0..N``, so ``q~_n = scale_n q_n``."""
    alpha, gamma = s.coefficients(N + 1)
    ratio = np.concatenate(([gamma[1]], gamma[2:] / alpha[1:-1]))
    return np.cumprod(ratio)


def orthonormal_scale(s: RecurrenceScheme, N: int) -> np.ndarray:
    """``delta_n = sqrt(gamma_0 .. gamma_{n-1} / (alpha_1 .. alpha_n))``, ``delta_0 = 1``, so ``P_n = delta_n p_n``."""
    alpha, gamma = s.coefficients(N)
    d2 = np.concatenate(([1.0], np.cumprod(gamma[:-1] / alpha[1:])))
    return np.sqrt(d2)


def q_at_one(s: RecurrenceScheme, N: int) -> np.ndarray:
    """``q_0(1)..q_N(1)``; positive since ``q_n`` are orthogonal on ``[-1, 1]``."""
    q1 = eval_q(s, N, 1.0).values
    if np.any(q1 <= 0):
        n = int(np.flatnonzero(q1 <= 0)[0])
        raise ArithmeticError(f"q_{n}(1) = {q1[n]!r} is not positive")
    return q1


def eval_Q(s: RecurrenceScheme, N: int, x: ArrayLike) -> EvalSequence:
    """``Q_n(x) = q_n(x) / q_n(1)``."""
    q = eval_q(s, N, x).values
    q1 = q_at_one(s, N)
    return EvalSequence("Q", x, q / q1.reshape((-1,) + (1,) * (q.ndim - 1)))


def p_at_zero(s: RecurrenceScheme, n: int) -> float:
    """``p_n(0)``: zero for odd ``n`` and
    ``(-1)^m (alpha_1 alpha_3 .. alpha_{2m-1}) / (gamma_1 gamma_3 .. gamma_{2m-1})`` for ``n = 2m``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n % 2:
        return 0.0
    m = n // 2
    if m == 0:
        return 1.0
    alpha, gamma = s.coefficients(n)
    odd = slice(1, n, 2)
    value = float(np.prod(alpha[odd] / gamma[odd]))
    return -value if m % 2 else value
