"""Integration of log-concave-weighted integrands over R^n.

Tensor Gauss rules are split at the origin and graded towards it
(``x = R u^m`` per half-axis), which keeps the coordinate-hyperplane
singularities of power-type families tractable.  The error estimate of a
tensor rule is the difference to the rule with half the nodes.  The box
half-width ``R`` is enlarged until a convexity tail bound certifies that
the neglected mass is negligible.
"""
from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .convex import ConvexFunctionSpec, Derivs, derivs
from .errors import ConfigError, IntegrabilityError, NumericalError

__all__ = [
    "QuadratureSpec", "IntegralResult", "NodeSet", "PRESETS", "default_quadrature",
    "truncation_radius", "tail_bound", "node_sets", "integrate", "weighted_integral",
    "mass", "entropy", "ent_gaussian",
]

DEFAULT_NODES = {1: 256, 2: 160, 3: 48}
MAX_NODES = {1: 4096, 2: 640, 3: 96}
TAIL_TOL = 1e-13
REGULAR_MIN = 0.99


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate.

    ``nodes`` counts Gauss nodes per axis (both half-axes together); ``None``
    picks a dimension-dependent default.  ``half_width`` fixes the box
    instead of deriving it from the tail bound.
    """

    method: str = "gauss"
    nodes: int | None = None
    half_width: float | None = None
    grading: float = 3.0
    samples: int = 100_000
    seed: int = 0
    rtol: float = 1e-10

    def __post_init__(self):
        if self.method not in ("gauss", "mc", "adaptive"):
            raise ConfigError(f"unknown quadrature method {self.method!r}")
        if self.nodes is not None and (self.nodes < 32 or self.nodes % 2):
            raise ConfigError("tensor rules need an even node count >= 32 per axis")
        if self.method == "mc" and self.samples < 10_000:
            raise ConfigError("Monte Carlo needs at least 1e4 samples")
        if self.grading < 1:
            raise ConfigError("grading exponent must be >= 1")

    def nodes_for(self, dim: int) -> int:
        return self.nodes or DEFAULT_NODES[dim]

    def refined(self, dim: int) -> "QuadratureSpec":
        """Same rule with twice the nodes (or samples)."""
        if self.method == "mc":
            return replace(self, samples=2 * self.samples)
        return replace(self, nodes=2 * self.nodes_for(dim))

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_json(cls, obj) -> "QuadratureSpec":
        if isinstance(obj, str):
            if obj not in PRESETS:
                raise ConfigError(f"unknown quadrature preset {obj!r}")
            return PRESETS[obj]
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown quadrature fields {sorted(extra)}")
        try:
            return cls(**obj)
        except TypeError as exc:  # pragma: no cover - defensive
            raise ConfigError(str(exc)) from None


PRESETS = {
    "fast": QuadratureSpec(nodes=96),
    "default": QuadratureSpec(),
    "fine": QuadratureSpec(method="adaptive", rtol=1e-12),
    "mc": QuadratureSpec(method="mc", samples=200_000),
}


def default_quadrature() -> QuadratureSpec:
    """The preset named by ``LCGEOM_DEFAULT_QUAD``, else ``default``."""
    return QuadratureSpec.from_json(os.environ.get("LCGEOM_DEFAULT_QUAD", "default"))


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error: float
    regular_fraction: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        yield self.value
        yield self.error

    def to_json(self) -> dict:
        from .inequality import _num
        return {"value": _num(self.value), "error": _num(self.error),
                "regular_fraction": self.regular_fraction, **self.meta}


class NodeSet:
    """Quadrature nodes with lazily computed derivative data."""

    def __init__(self, spec: ConvexFunctionSpec, x: np.ndarray, w: np.ndarray):
        self.spec = spec
        self.x = x
        self.w = w
        self.value = spec.value(x)
        self._d: Derivs | None = None

    @property
    def d(self) -> Derivs:
        if self._d is None:
            self._d = derivs(self.spec, self.x)
        return self._d

    @property
    def regular(self) -> np.ndarray:
        return self.d.regular

    @property
    def xgrad(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.x, self.d.grad)

    @property
    def log_ratio(self) -> np.ndarray:
        """``log r = 2 psi - <x, grad psi> + log det``; -inf off the regular set."""
        lr = 2.0 * self.value - self.xgrad + self.d.logdet
        return np.where(self.regular, lr, -np.inf)


# ---------------------------------------------------------------- nodes
@lru_cache(maxsize=64)
def _half_axis(n_half: int, grading: float):
    u, wu = np.polynomial.legendre.leggauss(n_half)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    return u ** grading, grading * u ** (grading - 1.0) * wu


def _tensor(axes_x, axes_w):
    grids = np.meshgrid(*axes_x, indexing="ij")
    wgrid = np.meshgrid(*axes_w, indexing="ij")
    x = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod([g.ravel() for g in wgrid], axis=0)
    return x, w


def _graded_rule(dim: int, nodes: int, R: float, grading: float):
    t, wt = _half_axis(nodes // 2, grading)
    ax = np.concatenate([-R * t[::-1], R * t])
    aw = np.concatenate([R * wt[::-1], R * wt])
    return _tensor([ax] * dim, [aw] * dim)


def _box_rule(lower, upper, nodes: int):
    g, wg = np.polynomial.legendre.leggauss(nodes)
    axes = [0.5 * (h + l) + 0.5 * (h - l) * g for l, h in zip(lower, upper)]
    weights = [0.5 * (h - l) * wg for l, h in zip(lower, upper)]
    return _tensor(axes, weights)


@lru_cache(maxsize=96)
def _gauss_set(spec, nodes: int, R: float, grading: float) -> NodeSet:
    box = spec.box()
    if box is not None:
        x, w = _box_rule(box[0], box[1], nodes)
    else:
        x, w = _graded_rule(spec.dim, nodes, R, grading)
    return NodeSet(spec, x, w)


@lru_cache(maxsize=32)
def _mc_set(spec, samples: int, seed: int, R: float) -> NodeSet:
    rng = np.random.default_rng(seed)
    box = spec.box()
    lo, hi = (box if box is not None else (np.full(spec.dim, -R), np.full(spec.dim, R)))
    x = rng.uniform(lo, hi, size=(samples, spec.dim))
    vol = float(np.prod(np.asarray(hi) - np.asarray(lo)))
    return NodeSet(spec, x, np.full(samples, vol / samples))


def _directions(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        t = 2 * math.pi * (np.arange(512) + 0.5) / 512
        return np.stack([np.cos(t), np.sin(t)], -1), np.full(512, 2 * math.pi / 512)
    z, wz = np.polynomial.legendre.leggauss(24)
    ph = 2 * math.pi * (np.arange(48) + 0.5) / 48
    zz, pp = np.meshgrid(z, ph, indexing="ij")
    s = np.sqrt(1 - zz ** 2)
    u = np.stack([s * np.cos(pp), s * np.sin(pp), zz], -1).reshape(-1, 3)
    return u, (wz[:, None] * np.full(48, 2 * math.pi / 48)).ravel()


def _exp_gamma_upper(n: int, a: np.ndarray) -> np.ndarray:
    """``e^a Gamma(n, a)`` for integer ``n`` (a finite sum, no overflow)."""
    out = np.zeros_like(a)
    term = np.ones_like(a)
    for k in range(n):
        if k:
            term = term * a / k
        out = out + term
    return math.factorial(n - 1) * out


def tail_bound(spec: ConvexFunctionSpec, R: float, decay: float = 1.0) -> float:
    """Upper bound on ``int_{|x|>R} exp(-decay psi)``, from convexity along rays.

    With ``a(u) = decay <grad psi(Ru), Ru>`` convexity gives
    ``decay psi(tRu) >= decay psi(Ru) + (t-1) a(u)`` for ``t >= 1``, so the
    radial integral is ``(R/a)^n e^a Gamma(n, a) exp(-decay psi(Ru))``.
    """
    n = spec.dim
    u, wu = _directions(n)
    val, grad, _ = spec.derivatives(R * u)
    a = decay * R * np.einsum("ij,ij->i", grad, u)
    if np.any(~np.isfinite(a)) or np.any(a <= 0):
        return math.inf
    with np.errstate(over="ignore"):
        terms = (R / a) ** n * _exp_gamma_upper(n, a) * np.exp(-decay * val)
    return float(np.sum(wu * terms))


@lru_cache(maxsize=256)
def truncation_radius(spec: ConvexFunctionSpec, decay: float = 1.0, start: float = 8.0) -> float:
    """Smallest ``R = start * 1.25^k`` whose tail bound is below ``TAIL_TOL`` relative to the peak.

    The peak is estimated by ``exp(-decay psi(0))``.  Raises
    IntegrabilityError if no radius up to 256 works.
    """
    spec.check_integrable()
    if decay <= 0:
        raise IntegrabilityError("integrand does not decay")
    ref = math.exp(-decay * spec.origin_value())
    R = start
    while R <= 256.0:
        if tail_bound(spec, R, decay) <= TAIL_TOL * ref:
            return R
        R *= 1.25
    raise IntegrabilityError(f"no truncation radius certifies the tail of {spec.family}")


def node_sets(spec: ConvexFunctionSpec, quad: QuadratureSpec, decay: float = 1.0):
    """``(sets, kind)``: fine/coarse Gauss rules or a single Monte Carlo set."""
    R = quad.half_width or (truncation_radius(spec, decay) if spec.box() is None else 0.0)
    if quad.method == "mc":
        return [_mc_set(spec, quad.samples, quad.seed, R)], R
    N = quad.nodes_for(spec.dim)
    return [_gauss_set(spec, N, R, quad.grading), _gauss_set(spec, N // 2, R, quad.grading)], R


# ---------------------------------------------------------------- integration
def _log_sum(w, logf, sign):
    """``sum w sign exp(logf)`` with a common shift, plus ``sum |w exp(logf)|``."""
    finite = np.isfinite(logf)
    if not np.any(finite):
        return 0.0, 0.0
    M = float(np.max(logf[finite]))
    t = np.where(finite, w * np.exp(np.where(finite, logf, 0.0) - M), 0.0)
    return float(np.sum(sign * t)) * math.exp(M), float(np.sum(t)) * math.exp(M)


def _one(ns: NodeSet, fn, need_regular: bool):
    logf, sign = fn(ns)
    logf = np.asarray(logf, dtype=float)
    sign = np.broadcast_to(np.asarray(sign, dtype=float), logf.shape)
    if need_regular:
        reg = ns.regular
        frac = float(np.sum(ns.w[reg]) / np.sum(ns.w))
        logf = np.where(reg, logf, -np.inf)
    else:
        reg = np.ones(len(ns.w), dtype=bool)
        frac = 1.0
    bad = np.isnan(logf) | (logf == np.inf)
    if np.any(bad & reg):
        raise NumericalError("integrand is not finite at regular nodes")
    value, absval = _log_sum(ns.w, logf, sign)
    return value, absval, frac, logf, sign


def integrate(spec: ConvexFunctionSpec, quad: QuadratureSpec, fn: Callable,
              decay: float = 1.0, need_regular: bool = True) -> IntegralResult:
    """Integrate ``sign * exp(logf)`` where ``fn(nodes) -> (logf, sign)``.

    ``logf`` must already include the weight ``-psi``.
    """
    if quad.method == "adaptive":
        return _adaptive(spec, quad, fn, decay, need_regular)
    sets, R = node_sets(spec, quad, decay)
    meta = {"method": quad.method, "truncation_radius": R}
    if quad.method == "mc":
        ns = sets[0]
        value, absval, frac, logf, sign = _one(ns, fn, need_regular)
        vals = np.where(np.isfinite(logf), sign * np.exp(np.where(np.isfinite(logf), logf, 0.0)), 0.0)
        vol = ns.w[0] * len(ns.w)
        err = vol * float(np.std(vals)) / math.sqrt(len(vals))
        meta["samples"] = quad.samples
    else:
        value, absval, frac, *_ = _one(sets[0], fn, need_regular)
        coarse, _, _, *_ = _one(sets[1], fn, need_regular)
        err = abs(value - coarse) + 64 * np.finfo(float).eps * absval
        meta["nodes"] = quad.nodes_for(spec.dim)
    if need_regular and frac < REGULAR_MIN:
        raise NumericalError(f"only {frac:.3%} of the quadrature weight sits on regular points")
    if not math.isfinite(value):
        raise NumericalError("quadrature produced a non-finite value")
    return IntegralResult(value, float(err), frac, meta)


def _adaptive(spec, quad, fn, decay, need_regular):
    n = spec.dim
    N = quad.nodes or DEFAULT_NODES[n] // 2
    N += N % 2
    while True:
        q = QuadratureSpec("gauss", nodes=N, half_width=quad.half_width, grading=quad.grading)
        res = integrate(spec, q, fn, decay, need_regular)
        if res.error <= quad.rtol * abs(res.value) or 2 * N > MAX_NODES[n]:
            meta = dict(res.meta, method="adaptive", converged=res.error <= quad.rtol * abs(res.value))
            return IntegralResult(res.value, res.error, res.regular_fraction, meta)
        N *= 2


def weighted_integral(spec: ConvexFunctionSpec, integrand: Callable, quad: QuadratureSpec | None = None,
                      log_space: bool = False, decay: float = 1.0) -> IntegralResult:
    """``int integrand exp(-psi)`` over the regular points.

    ``integrand(nodes)`` receives a :class:`NodeSet` (attributes ``x``,
    ``value``, ``d``, ``xgrad``, ``log_ratio``) and returns values, or with
    ``log_space`` a pair ``(log|G|, sign)``.  Raises NumericalError when more
    than 1% of the quadrature weight is on non-regular points.
    """
    quad = quad or default_quadrature()

    def fn(ns):
        if log_space:
            lg, sign = integrand(ns)
            return np.asarray(lg) - ns.value, sign
        g = np.asarray(integrand(ns), dtype=float)
        g = np.broadcast_to(g, ns.value.shape)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(g)) - ns.value, np.sign(g)

    return integrate(spec, quad, fn, decay)


def mass(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> IntegralResult:
    """``int exp(-psi)``."""
    quad = quad or default_quadrature()
    spec.check_integrable()
    res = integrate(spec, quad, lambda ns: (-ns.value, 1.0), need_regular=False)
    if res.value <= 0:
        raise IntegrabilityError("mass is not positive")
    return res


def entropy(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None,
            normalized: bool = False) -> IntegralResult:
    """``Ent(phi) = int phi ln phi - int phi ln(int phi)``.

    ``Ent(k phi) = k Ent(phi)``; ``normalized=True`` returns the entropy of
    ``phi / int phi``.
    """
    quad = quad or default_quadrature()
    m = mass(spec, quad)
    with np.errstate(invalid="ignore"):
        s = integrate(spec, quad, lambda ns: (np.log(np.abs(ns.value)) - ns.value, -np.sign(ns.value)),
                      need_regular=False)
    lnm = math.log(m.value)
    value = s.value - m.value * lnm
    err = s.error + m.error * abs(lnm + 1.0)
    if normalized:
        value, err = value / m.value, err / m.value + abs(value) * m.error / m.value ** 2
    return IntegralResult(value, err, 1.0, dict(s.meta))


def ent_gaussian(n: int) -> float:
    """Entropy of the standard Gaussian density in R^n."""
    return -0.5 * n * math.log(2 * math.pi * math.e)
