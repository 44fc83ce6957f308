"""Recurrence-coefficient families for symmetric orthogonal polynomials.

Two representations are supported:

* :class:`RecurrenceScheme` holds the normalized coefficients of
  ``x p_n = gamma_n p_{n+1} + alpha_n p_{n-1}`` with ``alpha_n + gamma_n = 1``
  for ``n >= 1``, ``alpha_0 = 0`` and ``0 < gamma_0 <= 1``.
* :class:`OrthonormalScheme` holds the off-diagonal Jacobi-matrix entries
  ``lambda_n`` of ``x P_n = lambda_n P_{n+1} + lambda_{n-1} P_{n-1}``.

Coefficient tables are generated lazily and cached; the cache grows on
demand under a lock so schemes can be shared read-only between workers.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "SchemeError",
    "RecurrenceScheme",
    "OrthonormalScheme",
    "SequenceVerdict",
    "jacobi_scheme",
    "staircase_scheme",
    "custom_table_scheme",
    "custom_rule_scheme",
    "q_ultra_orthonormal",
    "q_ultra_scheme",
    "constant_orthonormal",
    "perturbed_chebyshev_orthonormal",
    "orthonormal_table",
    "scheme_from_orthonormal",
    "orthonormal_from_scheme",
    "check_sequence_property",
    "SEQUENCE_PROPERTIES",
    "parse_family",
    "build_scheme",
    "build_orthonormal",
    "BUILTIN_FAMILIES",
]

DEFAULT_MAX_N = 1000
SUM_TOL = 1e-14


class SchemeError(ValueError):
    """Invalid family parameters or a coefficient table that breaks the recurrence rules."""


class _Table:
    """Growable cache of coefficient arrays produced by ``generator(N)``."""

    def __init__(self, generator, size, limit=None):
        self._generator = generator
        self._limit = limit
        self._lock = threading.Lock()
        self._arrays = None
        self._size = -1
        self._grow(size if limit is None else min(size, limit))

    def _grow(self, size):
        arrays = self._generator(size)
        for a in arrays:
            a.setflags(write=False)
        self._arrays = arrays
        self._size = size

    def get(self, n_max):
        if n_max > self._size:
            if self._limit is not None and n_max > self._limit:
                raise SchemeError(
                    f"coefficient index {n_max} exceeds table length {self._limit}"
                )
            with self._lock:
                if n_max > self._size:
                    target = max(n_max, 2 * self._size)
                    if self._limit is not None:
                        target = min(target, self._limit)
                    self._grow(target)
        return self._arrays, self._size


class RecurrenceScheme:
    """Normalized three-term recurrence ``x p_n = gamma_n p_{n+1} + alpha_n p_{n-1}``.

    Parameters
    ----------
    family : str
        Family tag (``jacobi``, ``q_ultra``, ``remark28``, ``custom_table``,
        ``custom_rule``, ``from_orthonormal``).
    params : dict
        Family parameters; together with ``family`` they form the JSON descriptor.
    generator : callable
        ``generator(N) -> (alpha, gamma)`` with arrays of length ``N + 1``.
    max_n : int
        Initial cache size.
    table_limit : int, optional
        Largest admissible index; set for tabulated families.
    """

    def __init__(self, family, params, generator, max_n=DEFAULT_MAX_N, table_limit=None,
                 validate=True):
        if max_n < 1:
            raise SchemeError("max_n must be a positive integer")
        self.family = family
        self.params = dict(params)
        self.max_n = int(max_n)
        self._table = _Table(lambda N: tuple(np.asarray(a, dtype=float) for a in generator(N)),
                             self.max_n, table_limit)
        if validate:
            self.validate()

    @property
    def descriptor(self) -> dict:
        return {"family": self.family, **self.params}

    @property
    def table_limit(self) -> Optional[int]:
        return self._table._limit

    def __repr__(self):
        return f"RecurrenceScheme({json.dumps(self.descriptor, sort_keys=True)})"

    def coefficients(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """Return read-only views ``(alpha[0..N], gamma[0..N])``."""
        if N < 0:
            raise SchemeError("N must be non-negative")
        (alpha, gamma), _ = self._table.get(N)
        return alpha[: N + 1], gamma[: N + 1]

    def alphas(self, N: int) -> np.ndarray:
        return self.coefficients(N)[0]

    def gammas(self, N: int) -> np.ndarray:
        return self.coefficients(N)[1]

    def alpha(self, n: int) -> float:
        return float(self.coefficients(n)[0][n])

    def gamma(self, n: int) -> float:
        return float(self.coefficients(n)[1][n])

    @property
    def gamma0(self) -> float:
        return self.gamma(0)

    @property
    def normalized(self) -> bool:
        """True when ``gamma_0 = 1``, i.e. ``p_n(1) = 1`` for every ``n``."""
        return self.gamma0 == 1.0

    def validate(self, N: Optional[int] = None) -> None:
        """Check the recurrence rules for ``n <= N`` (default ``max_n``)."""
        if N is None:
            N = self.max_n if self.table_limit is None else min(self.max_n, self.table_limit)
        alpha, gamma = self.coefficients(N)
        if alpha[0] != 0.0:
            raise SchemeError(f"alpha_0 must be 0, got {alpha[0]!r}")
        if not 0.0 < gamma[0] <= 1.0:
            raise SchemeError(f"gamma_0 must lie in (0, 1], got {gamma[0]!r}")
        a, g = alpha[1:], gamma[1:]
        bad = np.flatnonzero(~((a > 0) & (g > 0) & np.isfinite(a) & np.isfinite(g)))
        if bad.size:
            n = int(bad[0]) + 1
            raise SchemeError(f"alpha_n, gamma_n must be positive; fails at n={n} "
                              f"(alpha={alpha[n]!r}, gamma={gamma[n]!r})")
        resid = np.abs(a + g - 1.0)
        bad = np.flatnonzero(resid >= SUM_TOL)
        if bad.size:
            n = int(bad[0]) + 1
            raise SchemeError(f"alpha_n + gamma_n != 1 at n={n} (residual {resid[n - 1]:.3e})")

    def require_normalized(self) -> None:
        if not self.normalized:
            raise SchemeError(f"operation needs gamma_0 = 1, scheme has gamma_0 = {self.gamma0!r}")


class OrthonormalScheme:
    """Off-diagonal Jacobi-matrix entries ``lambda_n > 0``.

    ``limit_L`` is the (known) limit or supremum of the sequence, when available.
    """

    def __init__(self, family, params, generator, limit_L=None, max_n=DEFAULT_MAX_N,
                 table_limit=None, validate=True):
        self.family = family
        self.params = dict(params)
        self.limit_L = None if limit_L is None else float(limit_L)
        self.max_n = int(max_n)
        self._table = _Table(lambda N: (np.asarray(generator(N), dtype=float),),
                             self.max_n, table_limit)
        if validate:
            N = self.max_n if table_limit is None else min(self.max_n, table_limit)
            lam = self.lams(N)
            bad = np.flatnonzero(~((lam > 0) & np.isfinite(lam)))
            if bad.size:
                n = int(bad[0])
                raise SchemeError(f"lambda_n must be positive; fails at n={n} ({lam[n]!r})")

    @property
    def descriptor(self) -> dict:
        return {"family": self.family, **self.params}

    @property
    def table_limit(self) -> Optional[int]:
        return self._table._limit

    def __repr__(self):
        return f"OrthonormalScheme({json.dumps(self.descriptor, sort_keys=True)})"

    def lams(self, N: int) -> np.ndarray:
        """Return ``lambda[0..N]`` as a read-only view."""
        if N < 0:
            return np.empty(0)
        (lam,), _ = self._table.get(N)
        return lam[: N + 1]

    def lam(self, n: int) -> float:
        return float(self.lams(n)[n])


# --------------------------------------------------------------------------
# Built-in recurrence families


def jacobi_scheme(a: float, max_n: int = DEFAULT_MAX_N) -> RecurrenceScheme:
    """Symmetric Jacobi (ultraspherical) polynomials normalized by ``p_n(1) = 1``.

    ``gamma_n = (n + 2a + 1) / (2n + 2a + 1)`` and ``alpha_n = n / (2n + 2a + 1)``.
    Numerators and denominators are formed exactly before the final division,
    and ``a = -1/2`` uses ``gamma_0 = 1``.
    """
    if not a > -1:
        raise SchemeError(f"Jacobi parameter must satisfy a > -1, got {a!r}")
    fa = Fraction(a)

    def generator(N):
        alpha = np.empty(N + 1)
        gamma = np.empty(N + 1)
        alpha[0], gamma[0] = 0.0, 1.0
        for n in range(1, N + 1):
            den = 2 * n + 2 * fa + 1
            alpha[n] = float(n / den)
            gamma[n] = float((n + 2 * fa + 1) / den)
        return alpha, gamma

    return RecurrenceScheme("jacobi", {"alpha": float(a)}, generator, max_n=max_n)


def staircase_scheme(epsilon: float, max_n: int = DEFAULT_MAX_N) -> RecurrenceScheme:
    """Increasing concave family ``(0, 1/2-3e, 1/2-2e, 1/2-e, 1/2, 1/2, ...)``.

    Its normalized Turán determinant of order 3 is not monotone on ``(0, 1)``
    for small ``epsilon``.
    """
    if not 0 < epsilon < 0.125:
        raise SchemeError(f"epsilon must lie in (0, 1/8), got {epsilon!r}")
    head = [0.0, 0.5 - 3 * epsilon, 0.5 - 2 * epsilon, 0.5 - epsilon]

    def generator(N):
        alpha = np.full(N + 1, 0.5)
        k = min(N + 1, 4)
        alpha[:k] = head[:k]
        gamma = 1.0 - alpha
        gamma[0] = 1.0
        return alpha, gamma

    return RecurrenceScheme("remark28", {"epsilon": float(epsilon)}, generator, max_n=max_n)


def custom_table_scheme(alphas: Sequence[float], gamma0: float = 1.0) -> RecurrenceScheme:
    """Scheme from an explicit table ``alpha_0..alpha_N``; no extrapolation beyond it."""
    table = np.asarray(alphas, dtype=float)
    if table.ndim != 1 or table.size < 2:
        raise SchemeError("custom table needs at least alpha_0 and alpha_1")
    limit = table.size - 1

    def generator(N):
        alpha = table[: N + 1].copy()
        gamma = 1.0 - alpha
        gamma[0] = gamma0
        return alpha, gamma

    params = {"alphas": table.tolist()}
    if gamma0 != 1.0:
        params["gamma0"] = float(gamma0)
    return RecurrenceScheme("custom_table", params, generator, max_n=limit, table_limit=limit)


def custom_rule_scheme(rule: Callable[[int], float], gamma0: float = 1.0,
                       max_n: int = DEFAULT_MAX_N, name: str = "custom_rule") -> RecurrenceScheme:
    """Scheme from a callable ``rule(n) -> alpha_n`` (``n >= 1``)."""

    def generator(N):
        alpha = np.array([0.0] + [float(rule(n)) for n in range(1, N + 1)])
        gamma = 1.0 - alpha
        gamma[0] = gamma0
        return alpha, gamma

    return RecurrenceScheme("custom_rule", {"rule": name}, generator, max_n=max_n)


# --------------------------------------------------------------------------
# Orthonormal families


def q_ultra_orthonormal(q: float, b: float, max_n: int = DEFAULT_MAX_N) -> OrthonormalScheme:
    """Orthonormal continuous q-ultraspherical polynomials ``C_n(x; b | q)``.

    ``lambda_n = 1/2 sqrt((1-q^{n+1})(1-b^2 q^n) / ((1-b q^n)(1-b q^{n+1})))``.
    """
    for name, v in (("q", q), ("beta", b)):
        if not 0.0 <= v < 1.0:
            raise SchemeError(f"{name} must lie in [0, 1), got {v!r}")

    def generator(N):
        qn = q ** np.arange(N + 1, dtype=float)
        qn1 = qn * q
        bqn = b * qn
        # grouped so that b == q cancels exactly: b*bqn == b*qn1 and bqn == qn1
        return 0.5 * np.sqrt((1 - qn1) * (1 - b * bqn) / ((1 - bqn) * (1 - b * qn1)))

    return OrthonormalScheme("q_ultra", {"q": float(q), "beta": float(b)}, generator,
                             limit_L=0.5, max_n=max_n)


def constant_orthonormal(value: float = 0.5, max_n: int = DEFAULT_MAX_N) -> OrthonormalScheme:
    """``lambda_n = value`` for all ``n``; ``value = 1/2`` gives Chebyshev ``U_n``."""
    if not value > 0:
        raise SchemeError("lambda must be positive")
    return OrthonormalScheme("constant", {"lambda": float(value)},
                             lambda N: np.full(N + 1, float(value)), limit_L=value, max_n=max_n)


def perturbed_chebyshev_orthonormal(lambda0: float, max_n: int = DEFAULT_MAX_N) -> OrthonormalScheme:
    """``lambda_0`` free, ``lambda_n = 1/2`` for ``n >= 1``."""
    if not lambda0 > 0:
        raise SchemeError("lambda0 must be positive")

    def generator(N):
        lam = np.full(N + 1, 0.5)
        lam[0] = lambda0
        return lam

    return OrthonormalScheme("perturbed_chebyshev", {"lambda0": float(lambda0)}, generator,
                             limit_L=0.5, max_n=max_n)


def orthonormal_table(lams: Sequence[float], limit_L: Optional[float] = None) -> OrthonormalScheme:
    table = np.asarray(lams, dtype=float)
    limit = table.size - 1
    if limit < 0:
        raise SchemeError("empty lambda table")
    return OrthonormalScheme("lambda_table", {"lambdas": table.tolist()},
                             lambda N: table[: N + 1].copy(), limit_L=limit_L,
                             max_n=limit, table_limit=limit)


def scheme_from_orthonormal(lam: OrthonormalScheme, max_n: Optional[int] = None,
                            family: str = "from_orthonormal",
                            params: Optional[dict] = None) -> RecurrenceScheme:
    """Normalized scheme with ``alpha_{n+1} = lambda_n^2 / (1 - alpha_n)``, ``gamma_0 = 1``.

    Raises :class:`SchemeError` at the first ``n`` where ``alpha_n`` leaves ``(0, 1)``.
    """
    limit = lam.table_limit
    if max_n is None:
        max_n = lam.max_n + 1 if limit is None else limit + 1
    max_n = max(int(max_n), 1)
    table_limit = None if limit is None else limit + 1

    def generator(N):
        l2 = lam.lams(N - 1) ** 2
        alpha = np.zeros(N + 1)
        for n in range(N):
            a = l2[n] / (1.0 - alpha[n])
            if not 0.0 < a < 1.0:
                raise SchemeError(
                    f"alpha_{n + 1} = {a!r} leaves (0, 1); lambda outside the admissible range"
                )
            alpha[n + 1] = a
        gamma = 1.0 - alpha
        return alpha, gamma

    if params is None:
        params = {"source": lam.descriptor}
    return RecurrenceScheme(family, params, generator, max_n=max_n, table_limit=table_limit)


def q_ultra_scheme(q: float, b: float, max_n: int = DEFAULT_MAX_N) -> RecurrenceScheme:
    """``p_n = C_n(x; b|q) / C_n(1; b|q)`` via the orthonormal coefficients."""
    lam = q_ultra_orthonormal(q, b, max_n=max_n)
    return scheme_from_orthonormal(lam, max_n=max_n, family="q_ultra", params=lam.params)


def orthonormal_from_scheme(s: RecurrenceScheme, max_n: Optional[int] = None) -> OrthonormalScheme:
    """``lambda_n = sqrt(alpha_{n+1} gamma_n)``."""
    limit = s.table_limit
    if max_n is None:
        max_n = s.max_n - 1 if limit is None else limit - 1
    table_limit = None if limit is None else limit - 1
    limit_L = 0.5 if s.family in ("jacobi", "q_ultra") else None

    def generator(N):
        alpha, gamma = s.coefficients(N + 1)
        return np.sqrt(alpha[1:] * gamma[:-1])

    return OrthonormalScheme(s.family, s.params, generator, limit_L=limit_L,
                             max_n=max(max_n, 0), table_limit=table_limit)


# --------------------------------------------------------------------------
# Sequence properties


@dataclass(frozen=True)
class SequenceVerdict:
    """Outcome of a finite check of a sequence property, valid up to ``checked_up_to``."""

    property: str
    checked_up_to: int
    holds: bool
    first_violation: Optional[tuple[int, float]] = None
    min_margin: float = math.inf

    def __post_init__(self):
        if self.holds != (self.first_violation is None):
            raise ValueError("holds must be True exactly when there is no violation")

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "checked_up_to": self.checked_up_to,
            "holds": self.holds,
            "first_violation": None if self.first_violation is None
            else {"n": self.first_violation[0], "margin": self.first_violation[1]},
            "min_margin": self.min_margin,
        }


def _margins(s: np.ndarray, prop: str, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(indices, margins)``; the property holds where margin >= 0."""
    N = s.size - 1
    if prop == "increasing":
        n = np.arange(max(start, 1), N + 1)
        return n, s[n] - s[n - 1]
    if prop == "decreasing":
        n = np.arange(max(start, 1), N + 1)
        return n, s[n - 1] - s[n]
    if prop == "concave":
        n = np.arange(max(start, 1), N)
        return n, (s[n] - s[n - 1]) - (s[n + 1] - s[n])
    if prop in ("qconcave", "qconcave2"):
        # alpha_n - alpha_{n-1} >= alpha_n/(1-alpha_n) (alpha_{n+1} - alpha_n)
        # is equivalent to alpha_n gamma_{n+1} >= alpha_{n-1} gamma_n
        lo = max(start, 1) if prop == "qconcave" else max(start, 2)
        n = np.arange(lo, N)
        prod = s[n] * (1.0 - s[n + 1]) - s[n - 1] * (1.0 - s[n])
        return n, prod if prop == "qconcave" else -prod
    if prop == "bounded_by_half":
        n = np.arange(max(start, 0), N + 1)
        return n, 0.5 - s[n]
    if prop == "at_least_half":
        n = np.arange(max(start, 0), N + 1)
        return n, s[n] - 0.5
    raise ValueError(f"unknown sequence property {prop!r}")


SEQUENCE_PROPERTIES = ("increasing", "decreasing", "concave", "qconcave", "qconcave2",
                       "bounded_by_half", "at_least_half")


def check_sequence_property(seq: Union[RecurrenceScheme, OrthonormalScheme, Sequence[float],
                                       Callable[[int], float]],
                            prop: str, N: int, start: int = 1,
                            tol: float = 1e-15) -> SequenceVerdict:
    """Check ``prop`` on ``seq[start..N]`` with absolute slack ``tol``.

    ``seq`` may be a recurrence scheme (its ``alpha_n`` are checked), an
    orthonormal scheme (its ``lambda_n``), an array or a callable ``n -> value``.
    ``qconcave`` is checked as ``alpha_n gamma_{n+1}`` increasing; ``qconcave2``
    as the same product decreasing from ``n = 2``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if prop not in SEQUENCE_PROPERTIES:
        raise ValueError(f"unknown sequence property {prop!r}")
    if isinstance(seq, RecurrenceScheme):
        values = np.asarray(seq.alphas(N), dtype=float)
    elif isinstance(seq, OrthonormalScheme):
        values = np.asarray(seq.lams(N), dtype=float)
    elif callable(seq):
        values = np.array([float(seq(n)) for n in range(N + 1)])
    else:
        values = np.asarray(seq, dtype=float)[: N + 1]
        if values.size < N + 1:
            raise ValueError(f"sequence has {values.size} terms, need {N + 1}")
    idx, margin = _margins(values, prop, start)
    if margin.size == 0:
        return SequenceVerdict(prop, N, True, None, math.inf)
    bad = np.flatnonzero(margin < -tol)
    violation = None if bad.size == 0 else (int(idx[bad[0]]), float(margin[bad[0]]))
    return SequenceVerdict(prop, N, violation is None, violation, float(margin.min()))


# --------------------------------------------------------------------------
# Family descriptors

BUILTIN_FAMILIES = {
    "jacobi": "symmetric Jacobi / ultraspherical, parameter alpha > -1 (jacobi:A)",
    "q_ultra": "continuous q-ultraspherical, parameters q, beta in [0,1) (qultra:Q,BETA)",
    "remark28": "non-monotone counterexample, epsilon in (0,1/8) (remark28:EPS)",
    "perturbed_chebyshev": "lambda_0 free, lambda_n = 1/2 for n >= 1 (perturbed:LAMBDA0)",
    "constant": "constant lambda_n (constant:LAMBDA); 1/2 gives Chebyshev U",
    "custom_table": "explicit alpha_0..alpha_N table (JSON only)",
}

_SHORTHAND = {
    "jacobi": ("jacobi", ("alpha",)),
    "qultra": ("q_ultra", ("q", "beta")),
    "q_ultra": ("q_ultra", ("q", "beta")),
    "remark28": ("remark28", ("epsilon",)),
    "perturbed": ("perturbed_chebyshev", ("lambda0",)),
    "constant": ("constant", ("lambda",)),
}


def parse_family(text: Union[str, dict]) -> dict:
    """Parse a JSON descriptor or ``name:v1,v2`` shorthand into a descriptor dict."""
    if isinstance(text, dict):
        desc = dict(text)
    else:
        text = text.strip()
        if text.startswith("{"):
            try:
                desc = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SchemeError(f"invalid family JSON: {exc}") from None
        else:
            name, _, rest = text.partition(":")
            if name not in _SHORTHAND:
                raise SchemeError(f"unknown family {name!r}; known: {', '.join(sorted(_SHORTHAND))}")
            family, keys = _SHORTHAND[name]
            values = [v for v in rest.split(",") if v.strip()] if rest else []
            if len(values) != len(keys):
                raise SchemeError(f"family {name!r} takes {len(keys)} parameter(s): {','.join(keys)}")
            try:
                desc = {"family": family, **{k: float(v) for k, v in zip(keys, values)}}
            except ValueError:
                raise SchemeError(f"non-numeric parameter in {text!r}") from None
    if not isinstance(desc, dict) or "family" not in desc:
        raise SchemeError("family descriptor must be an object with a 'family' key")
    if desc["family"] == "qultra":
        desc["family"] = "q_ultra"
    return desc


def _param(desc, key, *aliases):
    for k in (key, *aliases):
        if k in desc:
            try:
                return float(desc[k])
            except (TypeError, ValueError):
                raise SchemeError(f"parameter {k!r} must be numeric") from None
    raise SchemeError(f"family {desc['family']!r} needs parameter {key!r}")


def build_orthonormal(desc: Union[str, dict], max_n: int = DEFAULT_MAX_N) -> OrthonormalScheme:
    """Orthonormal coefficients for a family descriptor."""
    desc = parse_family(desc)
    fam = desc["family"]
    if fam == "q_ultra":
        return q_ultra_orthonormal(_param(desc, "q"), _param(desc, "beta", "b"), max_n=max_n)
    if fam == "perturbed_chebyshev":
        return perturbed_chebyshev_orthonormal(_param(desc, "lambda0"), max_n=max_n)
    if fam == "constant":
        return constant_orthonormal(_param(desc, "lambda") if "lambda" in desc else 0.5, max_n=max_n)
    if fam == "lambda_table":
        return orthonormal_table(desc["lambdas"], desc.get("limit_L"))
    return orthonormal_from_scheme(build_scheme(desc, max_n=max_n + 1))


def build_scheme(desc: Union[str, dict], max_n: int = DEFAULT_MAX_N) -> RecurrenceScheme:
    """Normalized recurrence scheme for a family descriptor."""
    desc = parse_family(desc)
    fam = desc["family"]
    if fam == "jacobi":
        return jacobi_scheme(_param(desc, "alpha", "a"), max_n=max_n)
    if fam == "remark28":
        return staircase_scheme(_param(desc, "epsilon"), max_n=max_n)
    if fam == "q_ultra":
        return q_ultra_scheme(_param(desc, "q"), _param(desc, "beta", "b"), max_n=max_n)
    if fam == "custom_table":
        if "alphas" not in desc:
            raise SchemeError("custom_table needs an 'alphas' list")
        return custom_table_scheme(desc["alphas"], desc.get("gamma0", 1.0))
    if fam in ("perturbed_chebyshev", "constant", "lambda_table"):
        return scheme_from_orthonormal(build_orthonormal(desc, max_n=max_n), max_n=max_n)
    raise SchemeError(f"unknown family {fam!r}")
