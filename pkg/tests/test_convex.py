import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcgeom import (Ellipsoid, GaugeSquare, GridFunction, LinearImage, PBall, PowerSum, Quadratic, Tabulated,
                    differentials, discrete_legendre_1d, evaluate, gaussian, grid_legendre, legendre,
                    spec_from_json, translate)
from lcgeom.convex import derivs, envelope_check
from lcgeom.errors import ConfigError, ConstructionError, DomainError, GridError, ParameterError

ANALYTIC = [
    "gauss1", "gauss2_corr", "ex34_p3", "powersum_p1.5", "powersum_p4_2d",
    "ellipse_gauge", "pball4_gauge", "sheared_p4",
]


def _interior_points(spec, m=100, seed=1, radius=2.0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-radius, radius, size=(m, spec.dim))
    # keep clear of the coordinate axes where power families are not C^2
    return np.where(np.abs(x) < 0.05, 0.05 + np.abs(x), x)


def _central_fd(spec, x, h=1e-5):
    n = spec.dim
    g = np.empty((len(x), n))
    H = np.empty((len(x), n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[:, i] = (spec.value(x + e) - spec.value(x - e)) / (2 * h)
        gp = spec.derivatives(x + e)[1]
        gm = spec.derivatives(x - e)[1]
        H[:, :, i] = (gp - gm) / (2 * h)
    return g, H


@pytest.mark.parametrize("name", ANALYTIC)
def test_biconjugation_analytic(battery, name):
    spec = battery[name]
    back = legendre(legendre(spec))
    x = _interior_points(spec)
    assert np.max(np.abs(back.value(x) - spec.value(x))) <= 1e-8


def test_biconjugation_tabulated_is_grid_order():
    spec = PowerSum(3.0, 1 / 3)
    grid = GridFunction.sample(spec, [-4.0], [4.0], [801])
    dual = Tabulated(grid_legendre(grid))
    back = Tabulated(grid_legendre(dual.grid))
    x = np.linspace(-2.0, 2.0, 41)[:, None]
    h = grid.spacing[0]
    assert np.max(np.abs(back.value(x) - spec.value(x))) <= 50 * h * h


@pytest.mark.parametrize("name", ANALYTIC)
def test_derivatives_match_central_differences(battery, name):
    spec = battery[name]
    x = _interior_points(spec, seed=7)
    _, grad, hess = spec.derivatives(x)
    g_fd, h_fd = _central_fd(spec, x)
    assert np.max(np.abs(grad - g_fd) / np.maximum(1.0, np.abs(grad))) <= 1e-6
    assert np.max(np.abs(hess - h_fd) / np.maximum(1.0, np.abs(hess))) <= 1e-6


@pytest.mark.parametrize("name", ANALYTIC)
def test_envelope_identity(battery, name):
    spec = battery[name]
    dual = legendre(spec)
    for x in _interior_points(spec, m=20, seed=3):
        scale = 1.0 + abs(evaluate(spec, x))
        assert envelope_check(spec, x, dual) <= 1e-9 * scale


@pytest.mark.parametrize("name", ["gauss1", "gauss2_corr", "ex34_p3", "powersum_p4_2d", "ellipse_gauge",
                                  "pball4_gauge", "sheared_p4"])
def test_dual_hessian_is_inverse(battery, name):
    spec = battery[name]
    dual = legendre(spec)
    x = _interior_points(spec, m=50, seed=11, radius=1.5)
    d = derivs(spec, x)
    dd = derivs(dual, d.grad)
    prod = np.einsum("nij,njk->nik", dd.hess, d.hess)
    err = np.linalg.norm(prod - np.eye(spec.dim), axis=(1, 2))
    assert np.max(err) <= 1e-6


def test_perturbed_gauge_dual_is_tabulated(battery):
    dual = legendre(battery["perturbed_gauge"])
    assert isinstance(dual, Tabulated) and not dual.analytic


def test_discrete_legendre_is_convex_and_exact_on_quadratics():
    x = np.linspace(-5.0, 5.0, 201)
    y, v, _ = discrete_legendre_1d(x, 0.5 * x * x)
    assert np.max(np.abs(v - 0.5 * y * y)) <= 1e-12
    _, w, _ = discrete_legendre_1d(x, np.abs(x) ** 3 / 3)
    assert np.all(np.diff(w, 2) >= -1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.floats(0.3, 4.0))
def test_discrete_legendre_dual_convex_property(coef, p):
    x = np.linspace(-3.0, 3.0, 121)
    f = np.abs(x) ** (1.0 + p) + coef[0] * x + coef[1]
    _, v, _ = discrete_legendre_1d(x, f)
    assert np.all(np.diff(v, 2) >= -1e-9 * max(1.0, np.max(np.abs(v))))


def test_discrete_legendre_range_error():
    x = np.linspace(-1.0, 1.0, 51)
    with pytest.raises(GridError):
        discrete_legendre_1d(x, x * x, np.array([5.0]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(-0.9, 0.9), st.floats(-2, 2), st.floats(-2, 2))
def test_quadratic_biconjugation_property(a, d, rho, b1, b2):
    off = rho * math.sqrt(a * d)
    spec = Quadratic(np.array([[a, off], [off, d]]), np.array([b1, b2]), 0.3)
    x = np.random.default_rng(0).normal(size=(10, 2))
    assert np.allclose(legendre(legendre(spec)).value(x), spec.value(x), rtol=1e-10, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.2, 6.0), st.floats(0.1, 3.0))
def test_powersum_conjugate_exponent_property(p, s):
    spec = PowerSum(p, s)
    dual = legendre(spec)
    assert math.isclose(1 / p + 1 / dual.p, 1.0, rel_tol=1e-12)
    x = np.linspace(0.1, 2.0, 7)[:, None]
    g = spec.derivatives(x)[1]
    lhs = dual.value(g)
    rhs = (x * g)[:, 0] - spec.value(x)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_tabulated_roundtrip_json():
    g = GridFunction.sample(gaussian(), [-3.0], [3.0], [64])
    spec = spec_from_json(Tabulated(g).to_json())
    assert np.allclose(spec.grid.values, g.values)
    assert evaluate(spec, [4.0]) == math.inf


def test_differentials_outside_domain():
    spec = Tabulated(GridFunction.sample(gaussian(), [-3.0], [3.0], [64]))
    with pytest.raises(DomainError):
        differentials(spec, [5.0])


def test_regularity_flags():
    assert not differentials(PowerSum(1.5), [0.0]).regular
    assert not differentials(PowerSum(3.0), [0.0]).regular
    assert differentials(PowerSum(3.0), [0.5]).regular
    assert differentials(gaussian(), [0.0]).regular


@pytest.mark.parametrize("bad", [
    lambda: Quadratic(np.array([[1.0, 0.0], [0.0, -1.0]])),
    lambda: Quadratic(np.array([[1.0, 0.3], [0.0, 1.0]])),
    lambda: PowerSum(1.0),
    lambda: LinearImage(gaussian(dim=2), np.zeros((2, 2))),
    lambda: PBall(1.0, (1.0, 1.0)),
])
def test_constructor_invariants(bad):
    with pytest.raises(ConstructionError):
        bad()


def test_json_errors():
    with pytest.raises(ConfigError):
        spec_from_json({"family": "nope"})
    with pytest.raises(ConfigError):
        spec_from_json({"family": "quadratic", "dim": 2, "params": {"A": [[1.0]]}})


def test_json_roundtrip_all_families(battery):
    for name in ["gauss2_corr", "ex34_p3", "ellipse_gauge", "pball4_gauge", "perturbed_gauge", "sheared_p4"]:
        spec = battery[name]
        back = spec_from_json(spec.to_json())
        x = _interior_points(spec, m=5)
        assert np.allclose(back.value(x), spec.value(x), rtol=1e-14)


def test_translate():
    spec = Quadratic(np.array([[2.0]]), np.array([1.0]), 0.0)
    moved = translate(spec, [0.5])
    x = np.array([[0.1], [1.3]])
    assert np.allclose(moved.value(x), spec.value(x + 0.5))
    with pytest.raises(ParameterError):
        translate(PowerSum(3.0), [1.0])


def test_ellipse_gauge_closed_form():
    spec = GaugeSquare(Ellipsoid.from_axes([2.0, 1.0]))
    x = np.array([[2.0, 0.0], [0.0, 1.0], [1.0, 0.5]])
    assert np.allclose(spec.value(x), 0.5 * ((x[:, 0] / 2) ** 2 + x[:, 1] ** 2))
