"""Convex bodies given by gauge functions, and their boundary integrals.

A body ``K`` with the origin in its interior is described through its gauge
``||x||_K = min{t >= 0 : x in tK}``.  Every family provides the gauge together
with its gradient and Hessian, which is all that is needed both for boundary
geometry (normals, Gauss curvature, surface measure) and for the log-concave
function ``exp(-||x||_K^2 / 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy as sp
from scipy.special import gammaln

from .errors import ConfigError, ConstructionError, ParameterError

__all__ = [
    "body_affine_surface_area", "body_f_divergence", "body_f_divergence_upper_term",
    "check_body_dragomir", "check_body_corollaries", "check_body_pinsker", "bridge_check",
    "volume_result", "polar_volume_result", "cone_variation",
    "BodySpec",
    "Ellipsoid",
    "PBall",
    "PerturbedSphere",
    "BoundarySample",
    "ball_volume",
    "boundary_sample",
    "volume",
    "polar_volume",
    "body_from_json",
]


def ball_volume(n: int) -> float:
    """Volume of the Euclidean unit ball in dimension ``n``."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


class BodySpec:
    """Common interface of the body families."""

    dim: int

    def gauge(self, x: np.ndarray) -> np.ndarray:
        return self.gauge_derivatives(x)[0]

    def gauge_derivatives(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def exact_volume(self) -> float | None:
        return None

    def polar(self) -> "BodySpec | None":
        """Polar body as a family member, or None when not closed-form."""
        return None

    @property
    def curvature_exponent(self) -> float:
        """Order of vanishing (>0) or blow-up (<0) of the curvature, 0 if C^2_+."""
        return 0.0

    def to_json(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {x.shape[-1]}")
    return x, single


@dataclass(frozen=True, eq=False)
class Ellipsoid(BodySpec):
    """``K = {x : <Ax, x> <= 1}`` for a symmetric positive-definite ``A``."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (2, 3):
            raise ConstructionError("ellipsoid matrix must be 2x2 or 3x3")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14):
            raise ConstructionError("ellipsoid matrix must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise ConstructionError("ellipsoid matrix must be positive definite")
        object.__setattr__(self, "A", A)

    @classmethod
    def from_axes(cls, axes) -> "Ellipsoid":
        axes = np.asarray(axes, dtype=float)
        return cls(np.diag(axes ** -2.0))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def gauge_derivatives(self, x):
        x, _ = _as_points(x, self.dim)
        Ax = x @ self.A
        g = np.sqrt(np.einsum("ij,ij->i", x, Ax))
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = Ax / g[:, None]
            hess = (self.A[None] - grad[:, :, None] * grad[:, None, :]) / g[:, None, None]
        return g, grad, hess

    def exact_volume(self) -> float:
        return ball_volume(self.dim) / math.sqrt(np.linalg.det(self.A))

    def polar(self) -> "Ellipsoid":
        return Ellipsoid(np.linalg.inv(self.A))

    def to_json(self) -> dict:
        return {"family": "ellipsoid", "dim": self.dim, "params": {"A": self.A.tolist()}}


@dataclass(frozen=True, eq=False)
class PBall(BodySpec):
    """``K = {x : sum |x_i / r_i|^p <= 1}`` with ``p > 1``."""

    p: float
    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if self.p <= 1:
            raise ConstructionError("p-ball exponent must exceed 1")
        if len(radii) not in (2, 3) or min(radii) <= 0:
            raise ConstructionError("p-ball needs 2 or 3 positive radii")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "p", float(self.p))

    @property
    def dim(self) -> int:
        return len(self.radii)

    @property
    def curvature_exponent(self) -> float:
        return self.p - 2.0

    def gauge_derivatives(self, x):
        x, _ = _as_points(x, self.dim)
        p = self.p
        r = np.asarray(self.radii)
        y = x / r
        ay = np.abs(y)
        g = np.sum(ay ** p, axis=1) ** (1.0 / p)
        with np.errstate(divide="ignore", invalid="ignore"):
            gp1 = g ** (p - 1.0)
            grad = np.sign(y) * ay ** (p - 1.0) / r / gp1[:, None]
            diag = (p - 1.0) * ay ** (p - 2.0) / r ** 2 / gp1[:, None]
            hess = -(p - 1.0) * grad[:, :, None] * grad[:, None, :] / g[:, None, None]
            idx = np.arange(self.dim)
            hess[:, idx, idx] += diag
        return g, grad, hess

    def exact_volume(self) -> float:
        n, p = self.dim, self.p
        logv = n * (math.log(2.0) + gammaln(1.0 + 1.0 / p)) - gammaln(1.0 + n / p)
        return math.exp(logv) * float(np.prod(self.radii))

    def polar(self) -> "PBall":
        q = self.p / (self.p - 1.0)
        return PBall(q, tuple(1.0 / r for r in self.radii))

    def to_json(self) -> dict:
        return {"family": "pball", "dim": self.dim,
                "params": {"p": self.p, "radii": list(self.radii)}}


def _perturbation_expr(u, terms):
    expr = sp.Integer(0)
    z = u[0] + sp.I * u[1]
    for amp, k, phase in terms:
        zk = sp.expand(z ** int(k) * sp.exp(-sp.I * phase))
        expr += amp * sp.re(sp.expand_complex(zk))
    return expr


@dataclass(frozen=True, eq=False)
class PerturbedSphere(BodySpec):
    """Star body with radial function ``1 + eps * P(u)``.

    ``terms`` is a list of ``(amplitude, k, phase)``; each contributes
    ``amplitude * Re(exp(-i phase) (u_1 + i u_2)^k)``, i.e. ``cos(k theta - phase)``
    in the plane and ``sin(theta)^k cos(k phi - phase)`` on the 2-sphere.
    Convexity is verified at construction.
    """

    dim: int
    eps: float
    terms: tuple = ((0.5, 3, 0.0),)
    _funcs: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConstructionError("perturbed sphere supports n = 2, 3")
        if not 0 <= self.eps <= 0.2:
            raise ConstructionError("perturbation size must lie in [0, 0.2]")
        terms = tuple((float(a), int(k), float(ph)) for a, k, ph in self.terms)
        object.__setattr__(self, "terms", terms)
        self._build()
        pts = boundary_sample(self, 512 if self.dim == 2 else 48)
        if np.any(pts.curvature <= 0) or not np.all(np.isfinite(pts.curvature)):
            raise ConstructionError(
                f"perturbation eps={self.eps} terms={terms} is not convex")

    def _build(self):
        xs = sp.symbols(f"x0:{self.dim}", real=True)
        r = sp.sqrt(sum(xi ** 2 for xi in xs))
        u = [xi / r for xi in xs]
        rho = 1 + self.eps * _perturbation_expr(u, self.terms)
        g = r / rho
        grad = [sp.diff(g, xi) for xi in xs]
        hess = [[sp.diff(gi, xj) for xj in xs] for gi in grad]
        mods = ["numpy"]
        self._funcs["g"] = sp.lambdify(xs, g, mods)
        self._funcs["grad"] = [sp.lambdify(xs, e, mods) for e in grad]
        self._funcs["hess"] = [[sp.lambdify(xs, e, mods) for e in row] for row in hess]

    def gauge_derivatives(self, x):
        x, _ = _as_points(x, self.dim)
        cols = [x[:, i] for i in range(self.dim)]
        shape = x.shape[:1]
        bc = lambda v: np.broadcast_to(np.asarray(v, dtype=float), shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = bc(self._funcs["g"](*cols))
            grad = np.stack([bc(f(*cols)) for f in self._funcs["grad"]], axis=-1)
            hess = np.stack([np.stack([bc(f(*cols)) for f in row], axis=-1)
                             for row in self._funcs["hess"]], axis=-2)
        g = np.where(np.all(x == 0, axis=1), 0.0, g)
        return g, grad, hess

    def to_json(self) -> dict:
        return {"family": "perturbed_sphere", "dim": self.dim,
                "params": {"eps": self.eps, "terms": [list(t) for t in self.terms]}}


def body_from_json(obj: dict) -> BodySpec:
    fam = obj.get("family")
    params = obj.get("params", {})
    dim = obj.get("dim")
    if fam == "ellipsoid":
        if "A" in params:
            body = Ellipsoid(np.asarray(params["A"], dtype=float))
        else:
            body = Ellipsoid.from_axes(params["axes"])
    elif fam == "pball":
        body = PBall(params["p"], tuple(params.get("radii", [1.0] * (dim or 2))))
    elif fam == "perturbed_sphere":
        terms = params.get("terms", [[0.5, 3, 0.0]])
        body = PerturbedSphere(dim or 2, params["eps"], tuple(tuple(t) for t in terms))
    else:
        raise ConfigError(f"unknown body family {fam!r}")
    if dim is not None and body.dim != dim:
        raise ConfigError(f"declared dim {dim} does not match parameters ({body.dim})")
    return body


@dataclass(frozen=True)
class BoundarySample:
    """Vectorised boundary points of a body with quadrature weights.

    ``weight`` is the surface measure carried by each point, so that
    ``sum(weight * F(x))`` approximates ``int_{dK} F dmu_K``.
    """

    points: np.ndarray
    normal: np.ndarray
    support: np.ndarray
    curvature: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, i):
        return dict(x=self.points[i], normal=self.normal[i], support=self.support[i],
                    curvature=self.curvature[i], weight=self.weight[i])

    @property
    def cone_density(self) -> np.ndarray:
        """``q_K = <x, N>``."""
        return self.support

    @property
    def polar_cone_density(self) -> np.ndarray:
        """``p_K = kappa / <x, N>^n``."""
        n = self.points.shape[1]
        return self.curvature / self.support ** n


def _sphere_directions(n: int, resolution: int):
    if n == 2:
        theta = 2.0 * math.pi * np.arange(resolution) / resolution
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        # exact zeros on the axes, where p-ball curvature may be singular
        u[np.abs(u) < 1e-15] = 0.0
        return u, np.full(resolution, 2.0 * math.pi / resolution)
    # Gauss-Legendre in cos(theta): area weighted, nodes never hit the poles.
    z, wz = np.polynomial.legendre.leggauss(resolution)
    nphi = 2 * resolution
    phi = 2.0 * math.pi * (np.arange(nphi) + 0.5) / nphi
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1.0 - zz ** 2)
    u = np.stack([s * np.cos(pp), s * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    w = (wz[:, None] * np.full(nphi, 2.0 * math.pi / nphi)[None, :]).reshape(-1)
    return u, w


def boundary_sample(body: BodySpec, resolution: int | None = None) -> BoundarySample:
    """Deterministic boundary discretisation of ``body``.

    In the plane the boundary is parametrised by an equispaced angle grid
    (``resolution`` points); on the 2-sphere by Gauss nodes in ``cos(theta)``
    (``resolution`` of them) times ``2 * resolution`` longitudes.
    """
    n = body.dim
    if resolution is None:
        resolution = 2048 if n == 2 else 64
    u, dsigma = _sphere_directions(n, resolution)
    g_u, _, _ = body.gauge_derivatives(u)
    x = u / g_u[:, None]
    g, G, H = body.gauge_derivatives(x)
    gnorm = np.linalg.norm(G, axis=1)
    normal = G / gnorm[:, None]
    support = 1.0 / gnorm  # Euler: <x, grad g> = g = 1 on the boundary
    border = np.zeros((x.shape[0], n + 1, n + 1))
    border[:, :n, :n] = H
    border[:, :n, n] = G
    border[:, n, :n] = G
    with np.errstate(invalid="ignore"):
        kappa = -np.linalg.det(border) / gnorm ** (n + 1)
    finite = np.isfinite(kappa)
    top = np.abs(kappa[finite]).max() if np.any(finite) else 0.0
    kappa = np.where(finite & (np.abs(kappa) < 1e-14 * top), 0.0, kappa)
    radius = 1.0 / g_u
    weight = dsigma * radius ** n / support
    return BoundarySample(x, normal, support, kappa, weight)


def volume(body: BodySpec, resolution: int | None = None) -> float:
    """``|K|`` as ``(1/n) int <x, N> dmu``."""
    s = boundary_sample(body, resolution)
    return float(np.sum(s.support * s.weight)) / body.dim


def polar_volume(body: BodySpec, resolution: int | None = None) -> float:
    """``|K°|`` as ``(1/n) int kappa / <x, N>^n dmu``."""
    s = boundary_sample(body, resolution)
    return float(np.sum(s.polar_cone_density * s.weight)) / body.dim


# ---------------------------------------------------------------- boundary integrals
_SAMPLES: dict = {}
KAPPA_FLOOR = 1e-12


def _cached_sample(body: BodySpec, resolution: int) -> BoundarySample:
    key = (id(body), resolution)
    hit = _SAMPLES.get(key)
    if hit is None or hit[0] is not body:
        if len(_SAMPLES) > 64:
            _SAMPLES.clear()
        hit = (body, boundary_sample(body, resolution))
        _SAMPLES[key] = hit
    return hit[1]


def _resolutions(body: BodySpec, resolution: int | None):
    fine = resolution or (2048 if body.dim == 2 else 64)
    return fine, max(fine // 2, 8)


def _boundary_integral(body: BodySpec, fn, resolution: int | None = None):
    """``int fn(sample) dmu_K`` with a resolution-halving error estimate.

    ``fn`` returns pointwise values; non-finite values at points with
    ``kappa < 1e-12`` (or infinite ``kappa``) are dropped and their surface measure is reported.
    """
    from .measures import IntegralResult
    out = []
    levels = list(_resolutions(body, resolution))
    if body.curvature_exponent != 0:
        levels.append(max(levels[-1] // 2, 8))
    for res in levels:
        s = _cached_sample(body, res)
        with np.errstate(all="ignore"):
            v = np.asarray(fn(s), dtype=float)
        flat = ~(s.curvature >= KAPPA_FLOOR) | ~np.isfinite(s.curvature)
        drop = flat & ~np.isfinite(v)
        if np.any(~np.isfinite(v) & ~drop):
            from .errors import NumericalError
            raise NumericalError("boundary integrand is not finite on curved points")
        w = np.where(drop, 0.0, s.weight)
        total = float(np.sum(w * np.where(drop, 0.0, v)))
        out.append((total, float(np.sum(s.weight[drop])), float(np.sum(np.abs(w * np.where(drop, 0.0, v))))))
    (v, dropped, absval), (vc, _, _) = out[:2]
    diff = abs(v - vc)
    if len(out) == 3 and diff > 0:
        # algebraic convergence near singular curvature: observed order from three levels
        ratio = abs(vc - out[2][0]) / diff
        order = max(math.log2(ratio), 0.25) if ratio > 1 else 0.25
        diff = diff / (2.0 ** order - 1.0)
    err = diff + 64 * np.finfo(float).eps * absval
    meta = {"resolution": _resolutions(body, resolution)[0]}
    if dropped:
        meta["dropped_measure"] = dropped
    return IntegralResult(v, err, 1.0, meta)


def _log_ratio(s: BoundarySample):
    n = s.points.shape[1]
    with np.errstate(divide="ignore"):
        return np.log(s.curvature) - (n + 1) * np.log(s.support)


def _integrability(body: BodySpec, alpha0, alpha_inf):
    """``(finite, small)`` for ``int F(rho) dQ_K`` with ``F ~ rho^alpha`` at the degenerate end.

    On a p-ball the curvature behaves like ``t^(p-2)`` near the axis points,
    so the integral is finite iff ``1 + alpha (p - 2) > 0``.
    """
    e = body.curvature_exponent
    if e == 0:
        return True, True
    small = e > 0
    alpha = alpha0 if small else alpha_inf
    if alpha is None:
        return True, small
    return 1.0 + alpha * e > 1e-12, small


def _divergent(sign: float, note: str):
    from .measures import IntegralResult
    return IntegralResult(sign * math.inf, 0.0, 1.0, {"divergent": True, "note": note})


def body_affine_surface_area(body: BodySpec, p: float, resolution: int | None = None):
    """``as_p(K) = int kappa^(p/(n+p)) <x,N>^(-n(p-1)/(n+p)) dmu``; ``p = inf`` gives ``n |K°|``."""
    from .generators import DivergenceGenerator
    n = body.dim
    p = float(p)
    if p == -n:
        raise ParameterError(f"as_p is undefined for p = -n = {-n}")
    lam = 1.0 if math.isinf(p) else p / (n + p)
    return body_f_divergence(body, DivergenceGenerator.power(lam), resolution)


def body_f_divergence(body: BodySpec, gen, resolution: int | None = None, normalized: bool = False):
    """``D_f(P_K, Q_K) = int f(kappa / <x,N>^(n+1)) <x,N> dmu``.

    With ``normalized`` the cone measures are scaled to probability measures.
    """
    finite, small = _integrability(body, *gen.growth())
    if not finite:
        return _divergent(gen.divergent_sign(False, small), f"{gen.name} diverges on {type(body).__name__}")
    if gen.tag == "power" and gen.lam == 0.0 and not gen.offset:
        value = lambda s, shift: s.support
    else:
        value = lambda s, shift: gen.value_log(_log_ratio(s) + shift) * s.support
    if not normalized:
        return _boundary_integral(body, lambda s: value(s, 0.0), resolution)
    n = body.dim
    vol = volume_result(body, resolution)
    pvol = polar_volume_result(body, resolution)
    shift = math.log(vol.value / pvol.value)
    scale = n * vol.value
    res = _boundary_integral(body, lambda s: value(s, shift) / scale, resolution)
    delta = vol.error / vol.value + pvol.error / pvol.value
    bumped = _boundary_integral(body, lambda s: value(s, shift + delta) / scale, resolution)
    from .measures import IntegralResult
    return IntegralResult(res.value, res.error + abs(bumped.value - res.value), 1.0, res.meta)


def body_f_divergence_upper_term(body: BodySpec, gen, resolution: int | None = None):
    """``D_f'(P^2/Q, P) - D_f'(P, Q) = int f'(rho) (p_K - q_K) dmu``."""
    finite, small = _integrability(body, *gen.growth(kernel=True))
    if not finite:
        return _divergent(gen.divergent_sign(True, small), f"f'(rho)(rho-1) for {gen.name} diverges")
    return _boundary_integral(body, lambda s: gen.kernel_log(_log_ratio(s)) * s.support, resolution)


def volume_result(body: BodySpec, resolution: int | None = None):
    r = body_affine_surface_area(body, 0.0, resolution)
    return type(r)(r.value / body.dim, r.error / body.dim, 1.0, r.meta)


def polar_volume_result(body: BodySpec, resolution: int | None = None):
    r = body_affine_surface_area(body, math.inf, resolution)
    return type(r)(r.value / body.dim, r.error / body.dim, 1.0, r.meta)


def cone_variation(body: BodySpec, resolution: int | None = None):
    """``V(P_K, Q_K)`` between the normalised cone measures."""
    n = body.dim
    vol = volume_result(body, resolution).value
    pvol = polar_volume_result(body, resolution).value
    return _boundary_integral(
        body, lambda s: np.abs(s.polar_cone_density / (n * pvol) - s.support / (n * vol)), resolution)


def _t(r):
    return (r.value, r.error)


def check_body_dragomir(body: BodySpec, gen, resolution: int | None = None):
    """``n|K| f(|K°|/|K|) <= D_f(P_K,Q_K) <= n f(1)|K| + upper term``; reversed for concave ``f``."""
    from .inequality import build_report, chain_report
    n = body.dim
    terms = {"as_0": _t(body_affine_surface_area(body, 0.0, resolution)),
             "as_inf": _t(body_affine_surface_area(body, math.inf, resolution)),
             "D_f": _t(body_f_divergence(body, gen, resolution)),
             "upper_term": _t(body_f_divergence_upper_term(body, gen, resolution))}
    f1 = gen.derivatives_at_one()[0]
    low = lambda v: v["as_0"] * float(gen.f(v["as_inf"] / v["as_0"]))
    up = lambda v: f1 * v["as_0"] + v["upper_term"]
    mid = lambda v: v["D_f"]
    if gen.shape == "concave":
        kids = [build_report("lower", terms, mid, low), build_report("upper", terms, up, mid)]
    else:
        kids = [build_report("lower", terms, low, mid), build_report("upper", terms, mid, up)]
    return chain_report(f"body_dragomir[{gen.name}]", kids)


def _linear_report(name, terms, left: dict, right: dict):
    """``sum left[k] * X_k <= sum right[k] * X_k``, negative weights moved across.

    Keeps both sides nonnegative combinations, so infinite terms only make
    the comparison vacuous instead of undefined.
    """
    from .inequality import build_report
    lhs, rhs = {}, {}
    for side, other, coeffs in ((lhs, rhs, left), (rhs, lhs, right)):
        for k, c in coeffs.items():
            if c > 0:
                side[k] = side.get(k, 0.0) + c
            elif c < 0:
                other[k] = other.get(k, 0.0) - c
    comb = lambda cs: (lambda v: sum(c * v[k] for k, c in cs.items() if c))
    return build_report(name, terms, comb(lhs), comb(rhs))


def check_body_corollaries(body: BodySpec, p: float, gen=None, resolution: int | None = None):
    """Logarithmic, L_p and Santalo-type bounds for ``K`` at exponent ``p``, plus the Pinsker bounds.

    ``gen`` is the generator for the Pinsker check (``t ln t`` by default).
    Links whose conjugate exponent ``-n^2/(2n+p)`` is undefined are skipped.
    """
    from .generators import DivergenceGenerator
    from .inequality import build_report, chain_report, skipped_report
    n = body.dim
    p = float(p)
    if p == -n:
        raise ParameterError(f"as_p is undefined for p = -n = {-n}")
    gen = gen or DivergenceGenerator.tlogt()
    lam = p / (n + p)
    asp = lambda q: _t(body_affine_surface_area(body, q, resolution))

    base = {"as_0": asp(0.0), "as_inf": asp(math.inf)}
    reports = []

    t = dict(base, D_KL=_t(body_f_divergence(body, DivergenceGenerator.log(), resolution)),
             **{"as_-n/2": asp(-n / 2)})
    reports.append(chain_report("body_kl", [
        build_report("lower", t, lambda v: v["as_0"] * math.log(v["as_0"] / v["as_inf"]), lambda v: v["D_KL"]),
        _linear_report("upper", t, {"D_KL": 1.0, "as_0": 1.0}, {"as_-n/2": 1.0}),
    ]))

    # as_p against the volumes and against the conjugate exponent
    t = dict(base, as_p=asp(p), as_p_polar=asp(math.inf if p == 0 else n * n / p))
    conj = None if 2 * n + p == 0 else -n * n / (2 * n + p)
    if conj is not None:
        t["as_conj"] = asp(conj)
    holder = lambda v: n * (v["as_inf"] / n) ** lam * (v["as_0"] / n) ** (1 - lam)
    ap = lambda v: v["as_p"]
    kids = [build_report("lower", t, *((holder, ap) if p <= 0 else (ap, holder)))]
    if conj is not None:
        # as_p <= as_0 + lam (as_p - as_conj), reversed for p > 0
        le, ri = {"as_p": 1.0 - lam}, {"as_0": 1.0, "as_conj": -lam}
        kids.append(_linear_report("upper", t, *((le, ri) if p <= 0 else (ri, le))))
    else:
        kids.append(skipped_report("upper", note="conjugate exponent undefined"))
    reports.append(chain_report(f"body_lp[{p:g}]", kids))

    # as_p(K°) = as_{n^2/p}(K)
    prod = lambda v: v["as_p"] * v["as_p_polar"]
    vols = lambda v: v["as_0"] * v["as_inf"]
    reports.append(build_report(f"body_santalo[{p:g}]", t, *((prod, vols) if p >= 0 else (vols, prod))))

    if p != 0:
        primal = ({"as_p": 1.0}, {"as_inf": lam, "as_0": 1.0 - lam})
        polar = ({"as_p_polar": 1.0}, {"as_0": lam, "as_inf": 1.0 - lam})
        if p < 0:
            primal, polar = primal[::-1], polar[::-1]
        reports.append(chain_report(f"body_combination[{p:g}]", [
            _linear_report("primal", t, *primal), _linear_report("polar", t, *polar)]))

    if conj is not None:
        # as_inf - as_0 <= as_p - as_conj for p < -n, reversed above -n
        le, ri = {"as_inf": 1.0, "as_conj": 1.0}, {"as_p": 1.0, "as_0": 1.0}
        reports.append(_linear_report(f"body_difference[{p:g}]", t, *((le, ri) if p < -n else (ri, le))))

    t = dict(base, as_n=asp(float(n)))
    reports.append(build_report("body_as_n", t, lambda v: v["as_n"] ** 2, lambda v: v["as_0"] * v["as_inf"]))

    reports.append(check_body_pinsker(body, gen, resolution))
    reports.append(check_body_pinsker(body, DivergenceGenerator.log(), resolution))
    return reports


def check_body_pinsker(body: BodySpec, gen, resolution: int | None = None):
    """``D_f(P_K, Q_K) >= (f''(1)/2) V(P_K, Q_K)^2`` for the normalised cone measures."""
    from .generators import check_gilardoni_condition
    from .errors import ConditionError
    from .inequality import build_report
    f1, _, f2, _ = gen.derivatives_at_one()
    if gen.shape != "convex" or abs(f1) > 1e-14 or not f2 > 0:
        raise ConditionError(f"{gen.name} must be convex with f(1) = 0 and f''(1) > 0")
    if not check_gilardoni_condition(gen, np.geomspace(1e-2, 1e2, 401)):
        raise ConditionError(f"{gen.name} violates the Gilardoni condition on the sampled range")
    t = {"V": _t(cone_variation(body, resolution)),
         "D_f": _t(body_f_divergence(body, gen, resolution, normalized=True))}
    return build_report(f"body_pinsker[{gen.name}]", t, lambda v: 0.5 * f2 * v["V"] ** 2, lambda v: v["D_f"])


def bridge_check(body: BodySpec, exponents=(-1.0, 0.0, 1.0, 2.0, 10.0), quad=None, rays: int = 16,
                 resolution: int | None = None):
    """Compare ``as_lambda(phi_K)`` with the rescaled ``as_p(K)`` for ``phi_K = exp(-||x||_K^2 / 2)``.

    Also checks the mass of ``phi_K`` against ``|K|`` and that ``det D^2 psi``
    is constant along rays.
    """
    from .convex import GaugeSquare, derivs
    from .divergence import affine_surface_area
    from .inequality import build_report, chain_report
    from .measures import mass
    n = body.dim
    spec = GaugeSquare(body)
    c = (2 * math.pi) ** (n / 2) / (n * ball_volume(n))
    kids = []
    for p in exponents:
        lam = p / (n + p)
        t = {"as_lambda": _t(affine_surface_area(spec, lam, quad)),
             "as_p": _t(body_affine_surface_area(body, p, resolution))}
        kids.append(build_report(f"as[{p:g}]", t, lambda v: v["as_lambda"], lambda v: c * v["as_p"]))
    vol = volume_result(body, resolution)
    t = {"mass": _t(mass(spec, quad)), "volume": _t(vol)}
    kids.append(build_report("mass", t, lambda v: v["mass"],
                             lambda v: (2 * math.pi) ** (n / 2) * v["volume"] / ball_volume(n)))
    u, _ = _sphere_directions(n, rays if n == 2 else max(rays // 4, 2))
    dets = np.stack([derivs(spec, s * u).det for s in (0.5, 1.0, 2.0, 4.0)])
    spread = float(np.max(np.abs(dets - dets[1]) / np.abs(dets[1])))
    t = {"ray_spread": (spread, 0.0)}
    kids.append(build_report("homogeneity", t, lambda v: 1.0 + v["ray_spread"], lambda v: 1.0))
    return chain_report("bridge", kids, notes=[f"max relative det spread along rays {spread:.3g}"])
