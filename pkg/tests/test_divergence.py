import math

import numpy as np
import pytest
from conftest import example34_spec
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import as_lambda_1d, example34, gaussian_mass

from lcgeom import (LinearImage, PowerSum, Quadratic, QuadratureSpec, affine_surface_area, check_affine_chain,
                    check_divergence_bound, check_dragomir, check_kl_bounds, check_log_sobolev_chain,
                    check_pinsker, check_santalo_family, f_divergence, gaussian, kl_divergence, legendre,
                    normalized_f_divergence, total_variation_term)
from lcgeom.divergence import LAMBDA_GRID, barycenter, check_duality
from lcgeom.errors import ConditionError
from lcgeom.generators import DivergenceGenerator as G
from lcgeom.inequality import EQUALITY, FAIL, PASS, SKIPPED

CONVEX_ZERO = [G.log(), G.tlogt(), G.power(2.0, -1.0), G.power(-1.0, -1.0), G.absdev()]
GENS = [G.log(), G.tlogt(), G.power(2.0), G.power(0.5)]


def _verdicts(report):
    return [r.verdict for r in report.walk()]


def test_power_generator_matches_affine_surface_area(battery):
    for spec in battery.values():
        for lam in (-0.5, 0.5, 2.0):
            a = affine_surface_area(spec, lam)
            b = f_divergence(spec, G.power(lam))
            assert a.value == b.value and a.error == b.error


@pytest.mark.parametrize("lam", [-1.0, 0.25, 0.5, 2.0, 3.0])
def test_as_lambda_against_adaptive_oracle(lam):
    A, _ = example34()
    spec = example34_spec()
    got = affine_surface_area(spec, lam)
    if lam <= -1.0:
        # integrand ~ |x|^(lam) near the origin
        assert math.isinf(got.value)
        return
    ref = as_lambda_1d(3.0, 1 / 3, math.log(A), lam)
    assert abs(got.value / ref - 1) <= 1e-6


def test_divergent_integrals_report_infinity():
    spec = example34_spec()
    for lam in (-2.0, -1.0):
        r = affine_surface_area(spec, lam)
        assert r.value == math.inf and r.meta["divergent"]


@pytest.mark.parametrize("spec", [gaussian(), Quadratic(np.array([[2.0, 0.5], [0.5, 0.625]]))], ids=["n1", "n2"])
def test_centered_gaussians_attain_every_bound(spec):
    m = gaussian_mass(spec.A)
    for lam in LAMBDA_GRID:
        assert math.isclose(affine_surface_area(spec, lam).value, m, rel_tol=1e-6)
    for gen in CONVEX_ZERO:
        assert abs(normalized_f_divergence(spec, gen).value) <= 1e-8


def test_off_centre_quadratic_is_not_an_equality_case(battery):
    r = check_divergence_bound(battery["gauss2_corr"], G.tlogt())
    assert r.verdict == PASS and r.slack > 0


def test_transformation_of_lambda_under_a_constant():
    # psi + c scales the integrand by exp((2 lam - 1) c)
    base = gaussian()
    shifted = Quadratic(np.array([[1.0]]), None, 0.7)
    for lam in (-1.0, 0.5, 2.0):
        ratio = affine_surface_area(shifted, lam).value / affine_surface_area(base, lam).value
        assert math.isclose(ratio, math.exp((2 * lam - 1) * 0.7), rel_tol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0.6, 1.6))
def test_sl2_invariance_property(shear, stretch):
    # symmetric unimodular T = R diag(s, 1/s) R^T
    th = math.atan(shear)
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    T = R @ np.diag([stretch, 1 / stretch]) @ R.T
    base = PowerSum(4.0, 0.5, 0.0, 2)
    moved = LinearImage(base, T)
    for gen in (G.tlogt(), G.power(2.0)):
        a = f_divergence(base, gen).value
        b = f_divergence(moved, gen).value
        assert abs(b / a - 1) <= 1e-4


@pytest.mark.parametrize("name", ["ex34_p3", "powersum_p4_2d", "ellipse_gauge", "pball4_gauge", "sheared_p4"])
def test_jensen_floor(battery, name):
    spec = battery[name]
    for gen in CONVEX_ZERO:
        r = normalized_f_divergence(spec, gen)
        assert r.value >= -3 * r.error


@pytest.mark.parametrize("name", ["gauss2_corr", "ex34_p3", "powersum_p4_2d", "ellipse_gauge"])
def test_verdicts_stable_under_refinement(battery, name):
    spec = battery[name]
    coarse = QuadratureSpec()
    fine = coarse.refined(spec.dim)
    checks = [
        lambda q: check_divergence_bound(spec, G.tlogt(), q),
        lambda q: check_dragomir(spec, G.power(2.0), q),
        lambda q: check_affine_chain(spec, 0.5, q),
        lambda q: check_kl_bounds(spec, q),
    ]
    for c in checks:
        assert _verdicts(c(coarse)) == _verdicts(c(fine))


def test_dragomir_linear_generator_collapses():
    spec = example34_spec()
    gen = G.linear(2.0, -1.0)
    r = check_dragomir(spec, gen)
    D = f_divergence(spec, gen).value
    expect = 2.0 * example34()[1] - 1.0
    assert abs(D / expect - 1) <= 1e-8
    for c in r.children:
        assert abs(c.lhs - c.rhs) <= 1e-8 * abs(D)


@pytest.mark.parametrize("gen", GENS, ids=lambda g: g.name)
def test_dragomir_concave_reversal(gen):
    r = check_dragomir(example34_spec(), gen)
    assert r.verdict == PASS
    assert all(c.verdict in (PASS, EQUALITY) for c in r.children)


def test_pinsker_conditions():
    spec = example34_spec()
    with pytest.raises(ConditionError):
        check_pinsker(spec, G.power(0.5))
    with pytest.raises(ConditionError):
        check_pinsker(spec, G.power(3.0, -1.0))
    r = check_pinsker(spec, G.tlogt())
    assert r.verdict == PASS and r.slack > 0


def test_total_variation_positive_off_equality():
    tv = total_variation_term(example34_spec())
    assert tv.value > 10 * tv.error
    assert abs(total_variation_term(gaussian()).value) <= 1e-10


def test_kl_of_gaussian_vanishes():
    assert abs(kl_divergence(gaussian(dim=2)).value) <= 1e-10


def test_log_sobolev_chain_order():
    r = check_log_sobolev_chain(example34_spec())
    assert r.verdict == PASS
    s = {c.name.split("/")[-1]: c for c in r.children}
    assert s["strongest"].rhs <= s["middle"].rhs <= s["weakest"].rhs + 1e-12


@pytest.mark.parametrize("lam", LAMBDA_GRID)
def test_affine_chain_sign_regimes(lam):
    r = check_affine_chain(example34_spec(), lam)
    assert r.verdict != FAIL


def test_duality_identity():
    spec = example34_spec()
    for lam in (0.25, 0.5, 2.0):
        r = check_duality(spec, lam)
        assert abs(r.lhs / r.rhs - 1) <= 1e-4


def test_santalo_centered_gaussian_equality():
    spec = Quadratic(np.array([[2.0, 0.5], [0.5, 0.625]]))
    m = affine_surface_area(spec, 0.0).value
    md = affine_surface_area(legendre(spec), 0.0).value
    assert abs(m * md / (2 * math.pi) ** 2 - 1) <= 1e-5
    r = check_santalo_family(spec, 0.5)
    assert r.verdict == EQUALITY


def test_santalo_translates_to_barycenter():
    spec = Quadratic(np.array([[1.5]]), np.array([0.8]), 0.0)
    assert not np.allclose(barycenter(spec), 0.0)
    r = check_santalo_family(spec, 0.5)
    assert r.verdict == EQUALITY


def test_santalo_large_lambda_skips_isoperimetric():
    r = check_santalo_family(example34_spec(), 2.0)
    kinds = {c.name.split("/")[-1]: c.verdict for c in r.children}
    assert kinds["affine_isoperimetric"] == SKIPPED
    assert r.verdict == PASS


def test_kl_probability_remark_only_for_probability_measures():
    r = check_kl_bounds(gaussian())
    names = [c.name.split("/")[-1] for c in r.children]
    assert "probability" in names
    r = check_kl_bounds(example34_spec())
    names = [c.name.split("/")[-1] for c in r.children]
    assert "probability_lower" in names and "probability_upper" in names


def test_sheared_log_singularity_stays_inside_error_bar():
    # -ln r blows up along the sheared axes; tensor quadrature converges slowly but says so
    base = PowerSum(4.0, 0.5, 0.0, 2)
    T = np.array([[0.93425383, 0.28300051], [0.28300051, 1.15609833]])
    a = f_divergence(base, G.log())
    b = f_divergence(LinearImage(base, T / math.sqrt(np.linalg.det(T))), G.log())
    assert abs(b.value - a.value) <= b.error + a.error
