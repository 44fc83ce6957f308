from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from turankit.grid import interior_grid
from turankit.polyeval import eval_p
from turankit.schemes import (
    custom_table_scheme,
    jacobi_scheme,
    orthonormal_table,
    q_ultra_scheme,
    staircase_scheme,
)
from turankit.turan import (
    D_n,
    check_D_step,
    check_fundamental,
    check_prop21,
    check_script_D_step,
    check_turanturan,
    delta_raw_table,
    delta_table,
    delta_zero,
    delta_zero_scaled,
    fund_table,
    normalized_table,
    normalized_turan,
    relative_residual,
    script_D_n,
    turan_delta,
    turan_polynomial,
    turan_scan,
)

GRID = interior_grid(101)


@pytest.mark.parametrize("n", [1, 2, 7, 50])
def test_chebyshev_delta_is_one_minus_x2(n):
    assert turan_delta(jacobi_scheme(-0.5), n, 0.4) == pytest.approx(0.84, rel=1e-13)


def test_legendre_delta2_at_zero():
    assert turan_delta(jacobi_scheme(0), 2, 0.0) == pytest.approx(0.25, abs=1e-16)


@pytest.mark.parametrize("s", [jacobi_scheme(0), q_ultra_scheme(0.3, 0.6), staircase_scheme(0.05)],
                         ids=["legendre", "qultra", "staircase"])
def test_delta_vanishes_at_ends(s):
    d = delta_table(s, 40, np.array([-1.0, 1.0]))[1:]
    assert np.max(np.abs(d)) < 1e-12


def test_stabilized_equals_raw():
    s = jacobi_scheme(1.25)
    x = interior_grid(51)
    raw = delta_raw_table(s, 40, x)[1:]
    stab = delta_table(s, 40, x)[1:]
    assert np.max(relative_residual(stab, raw)) < 1e-10


def test_chebyshev_normalized_near_endpoint():
    assert normalized_turan(jacobi_scheme(-0.5), 17, 0.999999) == pytest.approx(1.0, abs=1e-9)
    assert normalized_turan(jacobi_scheme(-0.5), 17, 1.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 5, 40])
def test_legendre_normalized_tends_to_half(n):
    assert normalized_turan(jacobi_scheme(0), n, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert normalized_turan(jacobi_scheme(0), n, 1 - 1e-12) == pytest.approx(0.5, abs=1e-8)


def test_legendre_f3_at_zero():
    assert normalized_turan(jacobi_scheme(0), 3, 0.0) == pytest.approx(3 / 16, abs=1e-16)


def test_normalized_times_factor_is_delta():
    s = jacobi_scheme(0.7)
    f = normalized_table(s, 60, GRID)[1:]
    d = delta_table(s, 60, GRID)[1:]
    assert np.max(relative_residual(f * (1 - GRID ** 2), d)) < 1e-10


@pytest.mark.parametrize("n, expected", [(1, 0.5), (2, 0.25), (3, 3 / 16)])
def test_delta_zero_legendre(n, expected):
    assert delta_zero(jacobi_scheme(0), n) == pytest.approx(expected, abs=1e-16)


@pytest.mark.parametrize("s", [jacobi_scheme(0.3), q_ultra_scheme(0.5, 0.25), staircase_scheme(0.05)],
                         ids=["jacobi", "qultra", "staircase"])
def test_delta_zero_routes_agree(s):
    d0 = np.array([delta_zero(s, n) for n in range(1, 61)])
    direct = delta_table(s, 60, np.array([0.0]))[1:, 0]
    assert d0 == pytest.approx(direct, rel=1e-12)
    alpha, gamma = s.coefficients(60)
    h = np.cumprod(gamma[1:] / alpha[1:])
    assert delta_zero_scaled(s, 60)[1:] == pytest.approx(d0 * h, rel=1e-12)


def test_delta1_at_zero_is_alpha1_over_gamma1():
    s = jacobi_scheme(2.0)
    assert delta_zero(s, 1) == pytest.approx(s.alpha(1) / s.gamma(1), rel=1e-15)


RESIDUAL_FAMILIES = [jacobi_scheme(0), jacobi_scheme(2), jacobi_scheme(-0.75),
                     q_ultra_scheme(0.25, 0.5), staircase_scheme(0.05)]


@pytest.mark.parametrize("s", RESIDUAL_FAMILIES, ids=lambda s: str(s.descriptor))
def test_turan_recursion(s):
    rep = check_prop21(s, (2, 50), GRID)
    assert rep.passed and rep.max_residual < 1e-10


def test_turan_recursion_all_skipped_is_vacuous_pass():
    s = custom_table_scheme([0.0] + [0.5] * 20)
    rep = check_prop21(s, (2, 20), GRID)
    assert rep.passed and rep.skipped == list(range(2, 21))


@pytest.mark.parametrize("s", RESIDUAL_FAMILIES, ids=lambda s: str(s.descriptor))
def test_fundamental_and_turanturan(s):
    assert check_fundamental(s, (1, 60), GRID).passed
    assert check_turanturan(s, (1, 60), GRID).passed


def test_turanturan_n1_reduces_to_alpha1_over_gamma1():
    s = jacobi_scheme(0.4)
    rep = check_turanturan(s, (1, 1), GRID)
    assert rep.passed
    assert normalized_turan(s, 1, 0.3) == pytest.approx(s.alpha(1) / s.gamma(1), rel=1e-13)


def test_identity_check_flags_a_broken_identity():
    s = jacobi_scheme(0)
    rep = check_fundamental(s, (1, 10), GRID, base_tol=1e-300)
    assert not rep.passed and rep.worst_n is not None


@pytest.mark.parametrize("s", RESIDUAL_FAMILIES, ids=lambda s: str(s.descriptor))
def test_D_step(s):
    assert check_D_step(s, (3, 40), GRID).passed


def test_D2_constant():
    s = jacobi_scheme(1.5)
    assert D_n(s, 2, GRID) == pytest.approx(np.full(GRID.size, s.alpha(1) / s.gamma(1) ** 2), rel=1e-13)


@pytest.mark.parametrize("l0", [0.55, 0.6, 0.65])
def test_script_D_closed_form(l0):
    lam = orthonormal_table([l0] + [0.5] * 40)
    closed = 2 / l0 ** 2 * (l0 ** 4 - (l0 ** 2 - 0.25) * GRID ** 2)
    for n in (2, 3, 20):
        assert script_D_n(lam, n, GRID) == pytest.approx(closed, rel=1e-12)
    assert script_D_n(lam, 1, GRID) == pytest.approx(np.full(GRID.size, l0), rel=1e-15)
    assert check_script_D_step(lam, (2, 40), GRID).passed


def test_turan_polynomial_chebyshev():
    coef = turan_polynomial(jacobi_scheme(-0.5), 4, kind="p")
    assert coef == [Fraction(1), Fraction(0), Fraction(-1)]


def test_staircase_quartic_against_sympy():
    eps = 0.05
    s = staircase_scheme(eps)
    coef = turan_polynomial(s, 2, "qtilde")
    assert len(coef) == 5 and coef[1] == coef[3] == 0
    A = coef[2] / coef[4]
    B = coef[0] / coef[4]
    # independent symbolic expansion
    e, x = sp.symbols("epsilon x", positive=True)
    al = [0, sp.Rational(1, 2) - 3 * e, sp.Rational(1, 2) - 2 * e, sp.Rational(1, 2) - e, sp.Rational(1, 2)]
    ga = [1] + [1 - a for a in al[1:]]
    qt = [sp.Integer(1)]
    prev = sp.Integer(0)
    for k in range(3):
        nxt = sp.expand((x * qt[k] - ga[k + 1] * prev) / al[k + 1])
        prev = qt[k]
        qt.append(nxt)
    det = sp.Poly(sp.expand(qt[2] ** 2 - qt[1] * qt[3]), x)
    lead = det.coeff_monomial(x ** 4)
    A_sym = sp.simplify(det.coeff_monomial(x ** 2) / lead)
    B_sym = sp.simplify(det.coeff_monomial(1) / lead)
    assert sp.simplify(A_sym - (4 * e ** 2 + 3 * e - sp.Rational(1, 2))) == 0
    assert sp.simplify(B_sym - (sp.Rational(1, 2) - 3 * e) ** 2 * (sp.Rational(1, 2) - e)
                       * (sp.Rational(1, 2) + 2 * e) ** 2 / e) == 0
    assert float(A) == pytest.approx(float(A_sym.subs(e, eps)), abs=1e-14)
    assert float(B) == pytest.approx(float(B_sym.subs(e, eps)), rel=1e-13)
    assert float(coef[4]) == pytest.approx(float(lead.subs(e, eps)), rel=1e-13)


def test_turan_polynomial_matches_float_evaluation():
    s = jacobi_scheme(0.25)
    coef = [float(c) for c in turan_polynomial(s, 6, "p")]
    x = np.linspace(-0.9, 0.9, 7)
    p = eval_p(s, 7, x).values
    assert np.polyval(coef[::-1], x) == pytest.approx(p[6] ** 2 - p[5] * p[7], rel=1e-12)


def test_scan_shape_and_threads_determinism():
    s = jacobi_scheme(0)
    grid = interior_grid(301)
    one = turan_scan(s, 12, grid, threads=1)
    many = turan_scan(s, 12, grid, threads=4)
    assert one.delta.shape == (12, 301)
    assert np.array_equal(one.normalized, many.normalized)
    assert one.to_json() == many.to_json()
    assert len(list(one.rows())) == 12 * 301


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-0.95, 8.0), x=st.floats(-0.99, 0.99))
def test_normalized_matches_q_form(a, x):
    s = jacobi_scheme(a)
    f = normalized_table(s, 12, np.array([x]))[1:, 0]
    g = fund_table(s, 12, np.array([x]))[1:, 0]
    assert f == pytest.approx(g, rel=1e-9)
