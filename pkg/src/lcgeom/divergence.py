"""Affine surface areas, f-divergences and the inequalities linking them.

Every integral here has the form ``int exp(-psi) G(r)`` over the regular
set, where ``r = exp(2 psi - <x, grad psi>) det D^2 psi`` is the density
ratio ``p_phi / q_phi``.  It is handled in log form throughout.

Divergence is decided analytically for the power-type families: if the
integrand grows like ``r^a`` where ``r`` degenerates, it is integrable iff
``1 + a (p - 2) > 0``.  Divergent integrals are returned as signed infinities
instead of being fed to the quadrature.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .convex import ConvexFunctionSpec, GaugeSquare, LinearImage, PowerSum, Quadratic, legendre, translate
from .errors import ConditionError, ParameterError
from .generators import DivergenceGenerator, check_gilardoni_condition
from .inequality import InequalityReport, build_report, chain_report, skipped_report
from .measures import IntegralResult, QuadratureSpec, default_quadrature, ent_gaussian, integrate

__all__ = [
    "affine_surface_area", "f_divergence", "normalized_f_divergence", "kl_divergence",
    "total_variation_term", "dragomir_upper_kernel", "integrability",
    "check_divergence_bound", "check_pinsker", "check_log_sobolev_chain", "check_dragomir",
    "check_kl_bounds", "check_affine_chain", "check_santalo_family", "check_duality", "barycenter",
    "LAMBDA_GRID", "DEFAULT_U_GRID",
]

LAMBDA_GRID = (-2.0, -1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 3.0)
DEFAULT_U_GRID = np.geomspace(1e-2, 1e2, 401)


def _q(quad):
    return quad or default_quadrature()


def _base(spec):
    while isinstance(spec, LinearImage):
        spec = spec.base
    return spec


def integrability(spec: ConvexFunctionSpec, alpha0: float | None, alpha_inf: float | None):
    """``(finite, small_end, decay)`` for an integrand ``exp(-psi) F(r)``.

    ``F(r) ~ r^alpha0`` as ``r -> 0`` and ``~ r^alpha_inf`` as ``r -> inf``.
    ``small_end`` tells which end of the ratio range is reached (True: r -> 0).
    ``decay`` is the rate ``c`` with integrand ~ ``exp(-c psi)`` at infinity.
    """
    p = spec.singular_p
    if p is None:
        return True, True, 1.0
    small = p > 2.0
    alpha = alpha0 if small else alpha_inf
    if alpha is None:
        return True, small, 1.0
    c = 1.0 + alpha * (p - 2.0)
    decay = min(1.0, c) if isinstance(_base(spec), PowerSum) else 1.0
    return c > 1e-12, small, decay


def _divergent(sign: float, note: str) -> IntegralResult:
    return IntegralResult(sign * math.inf, 0.0, 1.0, {"divergent": True, "note": note})


def _power_log(lam: float, shift: float = 0.0):
    def fn(ns):
        lr = ns.log_ratio + shift
        with np.errstate(invalid="ignore"):
            out = np.where(ns.regular, lam * lr - ns.value, -np.inf)
        return out, 1.0
    return fn


def _generic_log(g, shift: float = 0.0):
    def fn(ns):
        lr = ns.log_ratio + shift
        with np.errstate(all="ignore"):
            v = np.where(ns.regular, g(np.where(ns.regular, lr, 0.0)), 0.0)
            return np.log(np.abs(v)) - ns.value, np.sign(v)
    return fn


def affine_surface_area(spec: ConvexFunctionSpec, lam: float, quad: QuadratureSpec | None = None) -> IntegralResult:
    """``as_lambda = int exp((2 lam - 1) psi - lam <x, grad psi>) det(D^2 psi)^lam``."""
    return f_divergence(spec, DivergenceGenerator.power(lam), quad)


def f_divergence(spec: ConvexFunctionSpec, gen: DivergenceGenerator, quad: QuadratureSpec | None = None,
                 _shift: float = 0.0) -> IntegralResult:
    """``D_f(phi) = int exp(-psi) f(r)``."""
    quad = _q(quad)
    a0, ainf = gen.growth()
    finite, small, decay = integrability(spec, a0, ainf)
    if not finite:
        return _divergent(gen.divergent_sign(False, small), f"{gen.name} diverges on {spec.family}")
    if gen.tag == "power" and gen.offset == 0.0:
        fn = _power_log(gen.lam, _shift)
    else:
        fn = _generic_log(gen.value_log, _shift)
    return integrate(spec, quad, fn, decay)


def dragomir_upper_kernel(spec: ConvexFunctionSpec, gen: DivergenceGenerator,
                          quad: QuadratureSpec | None = None) -> IntegralResult:
    """``D_f'(P^2/Q, P) - D_f'(P, Q) = int f'(r) (r - 1) exp(-psi)``."""
    if not gen.differentiable:
        raise ConditionError(f"{gen.name} is not differentiable")
    a0, ainf = gen.growth(kernel=True)
    finite, small, decay = integrability(spec, a0, ainf)
    if not finite:
        return _divergent(gen.divergent_sign(True, small), f"f'(r)(r-1) for {gen.name} diverges")
    return integrate(spec, _q(quad), _generic_log(gen.kernel_log), decay)


@lru_cache(maxsize=128)
def _masses(spec, quad) -> tuple[IntegralResult, IntegralResult]:
    """``(as_0, as_1)`` over the regular set; as_1 is the dual mass."""
    return affine_surface_area(spec, 0.0, quad), affine_surface_area(spec, 1.0, quad)


def normalized_f_divergence(spec: ConvexFunctionSpec, gen: DivergenceGenerator,
                            quad: QuadratureSpec | None = None) -> IntegralResult:
    """Divergence of the probability densities ``p_phi / int phi°`` and ``q_phi / int phi``."""
    quad = _q(quad)
    m0, m1 = _masses(spec, quad)
    shift = math.log(m0.value / m1.value)
    raw = f_divergence(spec, gen, quad, shift)
    if not math.isfinite(raw.value):
        return raw
    delta = m0.error / m0.value + m1.error / m1.value
    bumped = f_divergence(spec, gen, quad, shift + delta) if delta > 0 else raw
    value = raw.value / m0.value
    err = (raw.error + abs(bumped.value - raw.value)) / m0.value + abs(value) * m0.error / m0.value
    return IntegralResult(value, err, raw.regular_fraction, dict(raw.meta, normalized=True))


def kl_divergence(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> IntegralResult:
    """``D_KL(Q_phi || P_phi) = int exp(-psi) (-ln r)``."""
    return f_divergence(spec, DivergenceGenerator.log(), quad)


def total_variation_term(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> IntegralResult:
    """``int |p_phi / int phi° - q_phi / int phi|``."""
    quad = _q(quad)
    m0, m1 = _masses(spec, quad)

    def make(shift):
        def fn(ns):
            t = ns.log_ratio + shift
            with np.errstate(all="ignore"):
                v = np.where(ns.regular, np.log(np.abs(np.expm1(np.where(ns.regular, t, 0.0)))), -np.inf)
            return v - ns.value - math.log(m0.value), 1.0
        return fn

    shift = math.log(m0.value / m1.value)
    res = integrate(spec, quad, make(shift))
    delta = m0.error / m0.value + m1.error / m1.value
    bumped = integrate(spec, quad, make(shift + delta)) if delta > 0 else res
    err = res.error + abs(bumped.value - res.value) + res.value * m0.error / m0.value
    return IntegralResult(res.value, err, res.regular_fraction, res.meta)


def _t(res: IntegralResult):
    return (res.value, res.error)


def _lmul(a: float, b: float) -> float:
    """``a * b`` with ``0 * inf = 0``."""
    return 0.0 if a == 0 else a * b


# ---------------------------------------------------------------- checks
def check_divergence_bound(spec: ConvexFunctionSpec, gen: DivergenceGenerator,
                           quad: QuadratureSpec | None = None) -> InequalityReport:
    """``f(int phi° / int phi) int phi <= D_f(phi)``; reversed for concave ``f``."""
    quad = _q(quad)
    m0, m1 = _masses(spec, quad)
    D = f_divergence(spec, gen, quad)
    terms = {"as_0": _t(m0), "as_1": _t(m1), "D_f": _t(D)}
    jensen = lambda v: float(gen.f(v["as_1"] / v["as_0"])) * v["as_0"]
    div = lambda v: v["D_f"]
    name = f"divergence_bound[{gen.name}]"
    if gen.shape == "concave":
        return build_report(name, terms, div, jensen, ["concave: reversed"])
    return build_report(name, terms, jensen, div)


def check_pinsker(spec: ConvexFunctionSpec, gen: DivergenceGenerator, quad: QuadratureSpec | None = None,
                  u_grid=None) -> InequalityReport:
    """``(f''(1)/2) TV^2 <= normalized D_f`` under Gilardoni's condition."""
    quad = _q(quad)
    f1, _, f2, _ = gen.derivatives_at_one()
    if gen.shape != "convex" or abs(f1) > 1e-14 or not f2 > 0:
        raise ConditionError(f"{gen.name} must be convex with f(1) = 0 and f''(1) > 0")
    if not check_gilardoni_condition(gen, DEFAULT_U_GRID if u_grid is None else u_grid):
        raise ConditionError(f"{gen.name} violates the Gilardoni condition on the sampled range")
    tv = total_variation_term(spec, quad)
    D = normalized_f_divergence(spec, gen, quad)
    terms = {"TV": _t(tv), "normalized_D_f": _t(D)}
    return build_report(f"pinsker[{gen.name}]", terms,
                        lambda v: 0.5 * f2 * v["TV"] ** 2, lambda v: v["normalized_D_f"])


def check_log_sobolev_chain(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> InequalityReport:
    """Three nested upper bounds for ``int ln det(D^2 psi) dphi`` of the normalised ``phi``.

    Everything is evaluated on ``phi / int phi``: the log-determinant average
    and ``Ent`` are taken against the normalised weight, the dual mass of the
    normalised function is ``int phi * int phi°`` and the TV term is
    normalisation invariant.
    """
    quad = _q(quad)
    n = spec.dim
    m0, m1 = _masses(spec, quad)
    logdet = integrate(spec, quad, _generic_log_node(lambda ns: ns.d.logdet))
    negpsi = integrate(spec, quad, _generic_log_node(lambda ns: -ns.value))
    tv = total_variation_term(spec, quad)
    terms = {"as_0": _t(m0), "as_1": _t(m1), "int_logdet": _t(logdet), "int_neg_psi": _t(negpsi),
             "TV": _t(tv)}
    eg = ent_gaussian(n)

    L = lambda v: v["int_logdet"] / v["as_0"]
    ent = lambda v: v["int_neg_psi"] / v["as_0"] - math.log(v["as_0"])
    santalo = lambda v: math.log(v["as_0"] * v["as_1"] / (2 * math.pi) ** n)
    weak = lambda v: 2.0 * (ent(v) - eg)
    middle = lambda v: weak(v) + santalo(v)
    strong = lambda v: middle(v) - 0.5 * v["TV"] ** 2
    notes = [f"normalised by 1/{m0.value:.17g}"]
    children = [
        build_report("strongest", terms, L, strong),
        build_report("middle", terms, L, middle),
        build_report("weakest", terms, L, weak),
        build_report("order_tv", terms, strong, middle),
        build_report("order_santalo", terms, middle, weak),
    ]
    return chain_report("log_sobolev_chain", children, notes=notes)


def _generic_log_node(g):
    def fn(ns):
        with np.errstate(all="ignore"):
            v = np.where(ns.regular, g(ns), 0.0)
            return np.log(np.abs(v)) - ns.value, np.sign(v)
    return fn


def check_dragomir(spec: ConvexFunctionSpec, gen: DivergenceGenerator,
                   quad: QuadratureSpec | None = None) -> InequalityReport:
    """``f(as_1/as_0) as_0 <= D_f <= f(1) as_0 + int f'(r)(r-1) exp(-psi)``; reversed if concave."""
    quad = _q(quad)
    m0, m1 = _masses(spec, quad)
    D = f_divergence(spec, gen, quad)
    K = dragomir_upper_kernel(spec, gen, quad)
    f1 = gen.derivatives_at_one()[0]
    terms = {"as_0": _t(m0), "as_1": _t(m1), "D_f": _t(D), "upper_kernel": _t(K)}
    low = lambda v: float(gen.f(v["as_1"] / v["as_0"])) * v["as_0"]
    up = lambda v: f1 * v["as_0"] + v["upper_kernel"]
    mid = lambda v: v["D_f"]
    if gen.shape == "concave":
        kids = [build_report("lower", terms, mid, low), build_report("upper", terms, up, mid)]
        notes = ["concave: reversed"]
    else:
        kids = [build_report("lower", terms, low, mid), build_report("upper", terms, mid, up)]
        notes = []
    return chain_report(f"dragomir[{gen.name}]", kids, notes=notes)


def check_kl_bounds(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> InequalityReport:
    """``as_0 - as_1 <= ln(as_0/as_1) as_0 <= D_KL <= as_{-1} - as_0``.

    For probability densities the refinement ``1 - ln as_1 <= 1 + D_KL <= as_{-1}``
    is added; otherwise that link is skipped.
    """
    quad = _q(quad)
    m0, m1 = _masses(spec, quad)
    D = kl_divergence(spec, quad)
    am1 = affine_surface_area(spec, -1.0, quad)
    terms = {"as_0": _t(m0), "as_1": _t(m1), "as_-1": _t(am1), "D_KL": _t(D)}
    jensen = lambda v: math.log(v["as_0"] / v["as_1"]) * v["as_0"]
    kids = [
        build_report("lower", terms, jensen, lambda v: v["D_KL"]),
        build_report("upper", terms, lambda v: v["D_KL"] + v["as_0"], lambda v: v["as_-1"]),
        build_report("weak_lower", terms, lambda v: v["as_0"] - v["as_1"], jensen),
    ]
    if abs(m0.value - 1.0) <= max(1e-6, 10 * m0.error):
        kids.append(build_report("probability_lower", terms,
                                 lambda v: 1.0 - math.log(v["as_1"]), lambda v: 1.0 + v["D_KL"]))
        kids.append(build_report("probability_upper", terms,
                                 lambda v: 1.0 + v["D_KL"], lambda v: v["as_-1"]))
    else:
        kids.append(skipped_report("probability", note="not a probability density"))
    return chain_report("kl_bounds", kids)


def check_affine_chain(spec: ConvexFunctionSpec, lam: float, quad: QuadratureSpec | None = None) -> InequalityReport:
    """Hoelder-type and difference bounds for ``as_lambda``.

    For ``lam >= 1`` or ``lam <= 0``::

        as_1^lam as_0^(1-lam) <= as_lam <= as_0 + lam (as_lam - as_(lam-1))
        lam (as_1 - as_0) <= as_lam - as_0

    all reversed for ``0 < lam < 1``.  The upper and difference links are
    rearranged so that both sides are nonnegative combinations; this keeps
    them meaningful when an affine surface area is infinite.
    """
    quad = _q(quad)
    lam = float(lam)
    m0, m1 = _masses(spec, quad)
    al = affine_surface_area(spec, lam, quad)
    alm = affine_surface_area(spec, lam - 1.0, quad)
    terms = {"as_0": _t(m0), "as_1": _t(m1), f"as_{lam:g}": _t(al), f"as_{lam - 1:g}": _t(alm)}
    L, Lm = f"as_{lam:g}", f"as_{lam - 1:g}"
    holder = lambda v: v["as_1"] ** lam * v["as_0"] ** (1.0 - lam)
    a = lambda v: v[L]
    if lam <= 0:
        kids = [build_report("holder", terms, holder, a),
                build_report("upper", terms, lambda v: (1 - lam) * v[L], lambda v: v["as_0"] - _lmul(lam, v[Lm])),
                build_report("difference_lower", terms, lambda v: (1 - lam) * v["as_0"],
                             lambda v: v[L] - _lmul(lam, v["as_1"]))]
    elif lam >= 1:
        kids = [build_report("holder", terms, holder, a),
                build_report("upper", terms, lambda v: lam * v[Lm], lambda v: v["as_0"] + _lmul(lam - 1, v[L])),
                build_report("difference_lower", terms, lambda v: lam * v["as_1"],
                             lambda v: v[L] + (lam - 1) * v["as_0"])]
    else:
        kids = [build_report("holder", terms, a, holder),
                build_report("upper", terms, lambda v: v["as_0"], lambda v: (1 - lam) * v[L] + lam * v[Lm]),
                build_report("difference_lower", terms, a,
                             lambda v: lam * v["as_1"] + (1 - lam) * v["as_0"])]
    return chain_report(f"affine_chain[{lam:g}]", kids)


def barycenter(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> np.ndarray:
    quad = _q(quad)
    m0 = integrate(spec, quad, lambda ns: (-ns.value, 1.0), need_regular=False)
    out = []
    for i in range(spec.dim):
        r = integrate(spec, quad, lambda ns, i=i: (np.log(np.abs(ns.x[:, i])) - ns.value, np.sign(ns.x[:, i])),
                      need_regular=False)
        out.append(r.value / m0.value)
    return np.array(out)


def check_santalo_family(spec: ConvexFunctionSpec, lam: float, quad: QuadratureSpec | None = None,
                         dual: ConvexFunctionSpec | None = None) -> InequalityReport:
    """Affine isoperimetric bound and the Blaschke-Santalo type product bounds at ``lam``.

    The function is centred first (translation, recorded in the notes).  For
    ``lam > 1`` the affine isoperimetric link has an unspecified constant and is
    reported as SKIPPED with the ratio ``as_lam / (int phi)^(1 - 2 lam)``.
    """
    quad = _q(quad)
    lam = float(lam)
    n = spec.dim
    notes = []
    bary = barycenter(spec, quad)
    if np.linalg.norm(bary) > 1e-6:
        spec = translate(spec, bary)
        notes.append(f"centred by shifting {bary.tolist()}")
        dual = None
    dual = legendre(spec) if dual is None else dual
    m0, m1 = _masses(spec, quad)
    al = affine_surface_area(spec, lam, quad)
    ald = affine_surface_area(dual, lam, quad)
    terms = {"as_0": _t(m0), "as_1": _t(m1), "as_lam": _t(al), "as_lam_dual": _t(ald)}
    bound = lambda v: (2 * math.pi) ** (n * lam) * v["as_0"] ** (1 - 2 * lam)
    a = lambda v: v["as_lam"]
    prod = lambda v: v["as_lam"] * v["as_lam_dual"]
    kids = []
    if 0 <= lam <= 1:
        kids.append(build_report("affine_isoperimetric", terms, a, bound))
        kids.append(build_report("product_upper", terms, prod, lambda v: (2 * math.pi) ** n))
        kids.append(build_report("product_mass", terms, prod, lambda v: v["as_0"] * v["as_1"]))
    else:
        if lam < 0:
            kids.append(build_report("affine_isoperimetric", terms, bound, a))
        else:
            ratio = al.value / m0.value ** (1 - 2 * lam)
            kids.append(skipped_report("affine_isoperimetric",
                                       {"ratio": (ratio, 0.0)}, "constant unspecified; ratio reported"))
        kids.append(build_report("product_lower", terms, lambda v: v["as_0"] * v["as_1"], prod))
    return chain_report(f"santalo[{lam:g}]", kids, notes=notes)


def check_duality(spec: ConvexFunctionSpec, lam: float, quad: QuadratureSpec | None = None,
                  dual: ConvexFunctionSpec | None = None) -> InequalityReport:
    """``as_lambda(phi) = as_(1-lambda)(phi°)``, reported as a two-sided comparison."""
    quad = _q(quad)
    dual = legendre(spec) if dual is None else dual
    terms = {"as_lam": _t(affine_surface_area(spec, lam, quad)),
             "as_dual": _t(affine_surface_area(dual, 1.0 - lam, quad))}
    notes = [] if dual.analytic else ["dual tabulated by the discrete Legendre transform"]
    return build_report(f"duality[{lam:g}]", terms, lambda v: v["as_lam"], lambda v: v["as_dual"], notes)
