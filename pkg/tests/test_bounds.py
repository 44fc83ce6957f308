import json
import math

import numpy as np
import pytest

from turankit.bounds import (
    density_estimate,
    detect_nonmonotonicity,
    lb_infimum,
    lb_infimum_scan,
    perturbed_chebyshev_closed_form,
    lower_bound_constant,
    upper_bound_constant,
    upper_bound_derived_constant,
    qultra_lower_constant,
    verify_origin_sandwich,
    verify_positivity,
    verify_prop29_turan_q,
    verify_perturbed_chebyshev,
    verify_thm2_lower,
    verify_thm2a_upper,
    verify_thm41,
)
from turankit.grid import interior_grid
from turankit.schemes import (
    constant_orthonormal,
    jacobi_scheme,
    orthonormal_from_scheme,
    perturbed_chebyshev_orthonormal,
    q_ultra_orthonormal,
    q_ultra_scheme,
    staircase_scheme,
)
from turankit.turan import normalized_table


def test_legendre_lower_constant():
    assert lower_bound_constant(jacobi_scheme(0)) == pytest.approx(0.6, abs=1e-15)


@pytest.mark.parametrize("s", [jacobi_scheme(0), jacobi_scheme(0.5), jacobi_scheme(2),
                               q_ultra_scheme(0.25, 0.5)], ids=["a0", "a0.5", "a2", "qultra"])
def test_lower_bound_lower_passes(s):
    cert = verify_thm2_lower(s, 100)
    assert cert.status == "pass" and cert.min_margin >= -1e-10


def test_lower_bound_inapplicable_for_decreasing_alpha():
    cert = verify_thm2_lower(jacobi_scheme(-0.75), 50)
    assert cert.status == "inapplicable" and not cert.hypotheses["increasing"].holds


def test_lower_bound_fails_with_an_oversized_constant():
    # the sharp constant for a >= -1/2 is 1; anything larger must be caught
    cert = verify_thm2_lower(jacobi_scheme(0), 30, constant=1.05)
    assert cert.status == "fail" and cert.worst is not None


def test_staircase_needs_constant_below_one():
    s = staircase_scheme(0.05)
    assert verify_thm2_lower(s, 20).passed
    assert verify_thm2_lower(s, 20, constant=1.0).status == "fail"


def test_upper_bound_constants_by_hand():
    s = jacobi_scheme(-0.75)
    assert upper_bound_constant(s) == pytest.approx(6 / 7, rel=1e-15)
    assert upper_bound_derived_constant(s) == pytest.approx(12 / 7, rel=1e-15)


def test_upper_bound_inapplicable_for_legendre():
    assert verify_thm2a_upper(jacobi_scheme(0), 50).status == "inapplicable"


@pytest.mark.parametrize("a", [-0.6, -0.75, -0.9])
def test_upper_bound_derived_constant_holds(a):
    cert = verify_thm2a_upper(jacobi_scheme(a), 100, constant="derived")
    assert cert.status == "pass"


@pytest.mark.parametrize("a", [-0.6, -0.75])
def test_upper_bound_stated_constant_is_violated_at_origin(a):
    # f_n(0) = Delta_n(0) while 2 gamma_2 < 1 for a < -1/2
    s = jacobi_scheme(a)
    assert upper_bound_constant(s) < 1
    cert = verify_thm2a_upper(s, 20)
    assert cert.status == "fail"
    assert cert.min_margin == pytest.approx(1 - 1 / upper_bound_constant(s), rel=1e-9)


def test_upper_bound_chebyshev_equality():
    s = jacobi_scheme(-0.5)
    cert = verify_thm2a_upper(s, 100)
    assert cert.status == "pass" and abs(cert.min_margin) < 1e-11
    f = normalized_table(s, 100, interior_grid(201))[1:]
    assert np.max(np.abs(f - 1)) < 1e-11


def test_upper_bound_rejects_unknown_constant():
    with pytest.raises(ValueError):
        verify_thm2a_upper(jacobi_scheme(-0.75), 5, constant="sharp")


@pytest.mark.parametrize("s", [jacobi_scheme(0), jacobi_scheme(0.5), jacobi_scheme(2),
                               q_ultra_scheme(0.25, 0.5)], ids=["a0", "a0.5", "a2", "qultra"])
def test_origin_sandwich(s):
    cert = verify_origin_sandwich(s, 500)
    assert cert.status == "pass" and cert.min_margin >= 0
    assert cert.details["max_cross_check_residual"] < 1e-10


@pytest.mark.parametrize("s, case", [(jacobi_scheme(1), "i"), (jacobi_scheme(-0.75), "ii")])
def test_positivity(s, case):
    cert = verify_positivity(s, 100)
    assert cert.status == "pass" and cert.details["case"] == case and cert.min_margin > 0


@pytest.mark.parametrize("s", [jacobi_scheme(0), jacobi_scheme(1), q_ultra_scheme(0.3, 0.6)],
                         ids=["a0", "a1", "qultra"])
def test_q_turan_nonnegative(s):
    cert = verify_prop29_turan_q(s, 100)
    assert cert.status == "pass"
    assert cert.details["c0"] == 1.0
    assert cert.details["c_min"] >= 0.5 - 1e-12


def test_lb_bound_chebyshev_u():
    lam = orthonormal_from_scheme(jacobi_scheme(0.5))
    cert = lb_infimum_scan(lam, 200)
    assert cert.constant == pytest.approx(0.5, rel=1e-14)
    assert cert.status == "pass"


@pytest.mark.parametrize("a", [0.5, 1, 2, 5])
def test_lb_jacobi(a):
    cert = lb_infimum_scan(orthonormal_from_scheme(jacobi_scheme(a)), 200)
    assert cert.constant == pytest.approx(2 / (2 * a + 3), rel=1e-13)
    assert cert.status == "pass"


def test_lb_decays_for_small_a():
    lam = orthonormal_from_scheme(jacobi_scheme(0))
    assert lb_infimum(lam, 400)[0] < 0.5 * lb_infimum(lam, 50)[0]


def test_perturbed_chebyshev():
    lam = perturbed_chebyshev_orthonormal(0.6)
    cert = verify_perturbed_chebyshev(lam, 50)
    assert cert.status == "pass"
    assert cert.details["closed_form_max_rel_error"] < 1e-12
    assert cert.details["n_spread_max_rel"] < 1e-12
    assert perturbed_chebyshev_closed_form(0.6, 0.0) == pytest.approx(2 * 0.36, rel=1e-15)


def test_perturbed_chebyshev_out_of_range():
    assert verify_perturbed_chebyshev(perturbed_chebyshev_orthonormal(0.45), 20).status == "inapplicable"


def test_density_chebyshev_u():
    x = interior_grid(201)
    est = density_estimate(constant_orthonormal(0.5), 50, x)
    assert np.max(np.abs(est.g - 2 / np.pi * np.sqrt(1 - x * x))) < 1e-12
    assert not est.flagged.any()


def test_density_legendre_at_zero():
    est = density_estimate(orthonormal_from_scheme(jacobi_scheme(0)), 200, np.array([0.0]))
    assert est.g[0] == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("a", [0.5, 1, 3])
def test_density_bound_curve(a):
    est = density_estimate(orthonormal_from_scheme(jacobi_scheme(a)), 200)
    assert est.bound_curve is not None
    assert est.bound_ratio() <= 1.01


def test_density_positive_on_interior():
    est = density_estimate(q_ultra_orthonormal(0.5, 0.25), 100)
    assert np.all(est.g[np.isfinite(est.g)] > 0)


@pytest.mark.parametrize("q, b", [(0.5, 0.25), (0.25, 0.5), (0.4, 0.4)])
def test_qultra_cases(q, b):
    cert = verify_thm41(q, b, 100)
    assert cert.status == "pass"
    if q == b:
        assert set(cert.details["cases"]) == {"i", "ii"} and cert.details["lambda_constant"]


def test_qultra_lower_constant():
    s = q_ultra_scheme(0.25, 0.5)
    a1, a2 = s.alpha(1), s.alpha(2)
    assert qultra_lower_constant(s) == pytest.approx(2 * a1 * (1 - a2) / (1 - a1), rel=1e-15)


def test_staircase_nonmonotone():
    scan = detect_nonmonotonicity(staircase_scheme(0.05), 3)
    assert not scan.is_monotone
    (xmin, kind), = [w for w in scan.witnesses if w[1] == "min"]
    A = 4 * 0.05 ** 2 + 3 * 0.05 - 0.5
    assert xmin ** 2 == pytest.approx(-A / 2, abs=0.02)


@pytest.mark.parametrize("a, direction", [(0, "increasing"), (0.5, "increasing"), (1, "increasing"),
                                          (-0.75, "decreasing"), (-0.5, "constant")])
def test_jacobi_monotone(a, direction):
    scan = detect_nonmonotonicity(jacobi_scheme(a), 5)
    assert scan.is_monotone and scan.direction == direction


def test_certificate_json_round_trip():
    cert = verify_thm2_lower(jacobi_scheme(0), 10)
    d = json.loads(cert.to_json())
    assert d["status"] == "pass" and d["constant"]["value"] == pytest.approx(0.6)
    assert len(cert.margin_rows()) == 10
    assert math.isfinite(d["min_margin"])
