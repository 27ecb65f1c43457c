"""Convex functions ``psi`` and their log-concave counterparts ``exp(-psi)``.

Families are immutable descriptors.  All numerical work is vectorised over
point arrays of shape ``(N, n)``; the single-point API (``evaluate``,
``differentials``) is a thin wrapper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator
from scipy.special import gammaln

from .bodies import BodySpec, Ellipsoid, PBall, ball_volume, body_from_json
from .errors import ConfigError, ConstructionError, DomainError, GridError, ParameterError

__all__ = [
    "ConvexFunctionSpec", "Quadratic", "PowerSum", "GaugeSquare", "Tabulated", "LinearImage",
    "GridFunction", "DiffBundle", "Derivs",
    "evaluate", "differentials", "derivs", "legendre", "polar_log_concave", "envelope_check",
    "discrete_legendre_1d", "grid_legendre", "spec_from_json", "gaussian", "translate",
]

EPS = np.finfo(float).eps
FD_GRAD_STEP = EPS ** (1.0 / 3.0)
FD_HESS_STEP = EPS ** (1.0 / 4.0)
DEFAULT_EXTENT = 8.0
DEFAULT_POINTS = 257


class Derivs(NamedTuple):
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    det: np.ndarray
    logdet: np.ndarray
    regular: np.ndarray


@dataclass(frozen=True)
class DiffBundle:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    hessian_det: float
    regular: bool


def _points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(-1, dim) if dim == 1 and x.shape[0] != 1 else x.reshape(1, -1)
    if x.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x


class ConvexFunctionSpec:
    """Base class.  Subclasses implement ``_value`` and ``_derivatives``."""

    dim: int
    family: str = ""
    #: exponent p of the PowerSum / p-ball singular structure, None if the
    #: density ratio is bounded away from 0 and infinity
    singular_p: float | None = None
    #: closed-form derivatives (no finite differences)
    analytic: bool = True

    def value(self, x) -> np.ndarray:
        return self._value(_points(x, self.dim))

    def derivatives(self, x):
        """``(value, grad, hess)`` arrays at the rows of ``x``."""
        return self._derivatives(_points(x, self.dim))

    def _logdet(self, x, hess, det):
        with np.errstate(divide="ignore", invalid="ignore"):
            sign, ld = np.linalg.slogdet(hess)
        return np.where(sign > 0, ld, -np.inf)

    def interior(self, x) -> np.ndarray:
        return np.all(np.isfinite(x), axis=1)

    def _irregular(self, x) -> np.ndarray:
        """Family-specific non-regular points (beyond the determinant test)."""
        return np.zeros(x.shape[0], dtype=bool)

    def legendre(self) -> "ConvexFunctionSpec":  # pragma: no cover - abstract
        raise NotImplementedError

    def to_json(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def origin_value(self) -> float:
        return float(self.value(np.zeros((1, self.dim)))[0])

    def box(self):
        """Bounded effective domain ``(lower, upper)``, or None for all of R^n."""
        return None

    def check_integrable(self):
        """Raise IntegrabilityError if ``exp(-psi)`` is not integrable."""


# ---------------------------------------------------------------- quadratic
@dataclass(frozen=True, eq=False)
class Quadratic(ConvexFunctionSpec):
    """``psi(x) = <Ax, x>/2 + <b, x> + c``."""

    A: np.ndarray
    b: np.ndarray | None = None
    c: float = 0.0
    family = "quadratic"

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or not 1 <= n <= 3:
            raise ConstructionError("A must be a square matrix of size 1..3")
        if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14):
            raise ConstructionError("A must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise ConstructionError("A must be positive definite")
        b = np.zeros(n) if self.b is None else np.array(self.b, dtype=float).reshape(n)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def _value(self, x):
        return 0.5 * np.einsum("ij,jk,ik->i", x, self.A, x) + x @ self.b + self.c

    def _derivatives(self, x):
        m = x.shape[0]
        grad = x @ self.A + self.b
        hess = np.broadcast_to(self.A, (m, self.dim, self.dim)).copy()
        return self._value(x), grad, hess

    def _logdet(self, x, hess, det):
        return np.full(x.shape[0], np.linalg.slogdet(self.A)[1])

    def legendre(self) -> "Quadratic":
        Ai = np.linalg.inv(self.A)
        Ai = 0.5 * (Ai + Ai.T)
        return Quadratic(Ai, -Ai @ self.b, 0.5 * self.b @ Ai @ self.b - self.c)

    def to_json(self):
        return {"family": "quadratic", "dim": self.dim,
                "params": {"A": self.A.tolist(), "b": self.b.tolist(), "c": self.c}}


def gaussian(A=None, c: float = 1.0, dim: int = 1) -> Quadratic:
    """``phi = c exp(-<Ax, x>/2)``."""
    A = np.eye(dim) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    if c <= 0:
        raise ConstructionError("Gaussian amplitude must be positive")
    return Quadratic(A, None, -math.log(c))


# ---------------------------------------------------------------- power sum
@dataclass(frozen=True, eq=False)
class PowerSum(ConvexFunctionSpec):
    """``psi(x) = scale * sum_i |x_i|^p + offset``."""

    p: float
    scale: float = 1.0
    offset: float = 0.0
    dim: int = 1
    family = "powersum"

    def __post_init__(self):
        if not self.p > 1:
            raise ConstructionError("PowerSum needs p > 1")
        if not 1 <= self.dim <= 3:
            raise ConstructionError("dimension must be 1..3")
        for name in ("p", "scale", "offset"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def singular_p(self):
        return None if self.p == 2.0 else self.p

    def check_integrable(self):
        from .errors import IntegrabilityError
        if self.scale <= 0:
            raise IntegrabilityError("PowerSum with scale <= 0 is not integrable")

    def _value(self, x):
        return self.scale * np.sum(np.abs(x) ** self.p, axis=1) + self.offset

    def _derivatives(self, x):
        p, s = self.p, self.scale
        ax = np.abs(x)
        grad = s * p * np.sign(x) * ax ** (p - 1.0)
        with np.errstate(divide="ignore"):
            d2 = s * p * (p - 1.0) * ax ** (p - 2.0)
        hess = np.zeros(x.shape + (self.dim,))
        idx = np.arange(self.dim)
        hess[:, idx, idx] = d2
        return self._value(x), grad, hess

    def _logdet(self, x, hess, det):
        p, s = self.p, self.scale
        with np.errstate(divide="ignore"):
            return np.sum(math.log(s * p * (p - 1.0)) + (p - 2.0) * np.log(np.abs(x)), axis=1)

    def _irregular(self, x):
        if self.p < 2.0:
            return np.any(x == 0.0, axis=1)
        return np.zeros(x.shape[0], dtype=bool)

    def legendre(self) -> "PowerSum":
        p, s = self.p, self.scale
        q = p / (p - 1.0)
        return PowerSum(q, (s * p) ** (1.0 - q) / q, 0.0 - self.offset, self.dim)

    def exact_mass(self) -> float:
        """Closed form of ``int exp(-psi)``."""
        p, s = self.p, self.scale
        one = math.log(2.0) + gammaln(1.0 / p) - math.log(p) - math.log(s) / p
        return math.exp(self.dim * one - self.offset)

    def to_json(self):
        return {"family": "powersum", "dim": self.dim,
                "params": {"p": self.p, "scale": self.scale, "offset": self.offset}}


# ---------------------------------------------------------------- gauge square
@dataclass(frozen=True, eq=False)
class GaugeSquare(ConvexFunctionSpec):
    """``psi = ||x||_K^2 / 2`` for a convex body ``K``."""

    body: BodySpec
    family = "gauge_square"

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def singular_p(self):
        if isinstance(self.body, PBall) and self.body.p != 2.0:
            return self.body.p
        return None

    def _value(self, x):
        return 0.5 * self.body.gauge(x) ** 2

    def _derivatives(self, x):
        g, G, H = self.body.gauge_derivatives(x)
        grad = g[:, None] * G
        hess = G[:, :, None] * G[:, None, :] + g[:, None, None] * H
        at0 = g == 0
        if np.any(at0):
            grad[at0] = 0.0
            hess[at0] = np.nan
        return 0.5 * g ** 2, grad, hess

    def legendre(self) -> ConvexFunctionSpec:
        polar = self.body.polar()
        if polar is not None:
            return GaugeSquare(polar)
        return _tabulated_legendre(self)

    def exact_mass(self) -> float | None:
        vol = self.body.exact_volume()
        if vol is None:
            return None
        n = self.dim
        return (2 * math.pi) ** (n / 2) * vol / ball_volume(n)

    def to_json(self):
        return {"family": "gauge_square", "dim": self.dim, "params": {"body": self.body.to_json()}}


# ---------------------------------------------------------------- linear image
@dataclass(frozen=True, eq=False)
class LinearImage(ConvexFunctionSpec):
    """``psi(x) = base(T x)`` for an invertible ``T``."""

    base: ConvexFunctionSpec
    T: np.ndarray
    family = "linear_image"

    def __post_init__(self):
        T = np.atleast_2d(np.array(self.T, dtype=float))
        if T.shape != (self.base.dim, self.base.dim) or abs(np.linalg.det(T)) < 1e-12:
            raise ConstructionError("T must be an invertible square matrix")
        object.__setattr__(self, "T", T)

    @property
    def dim(self):
        return self.base.dim

    @property
    def singular_p(self):
        return self.base.singular_p

    @property
    def analytic(self):
        return self.base.analytic

    def _value(self, x):
        return self.base._value(x @ self.T.T)

    def _derivatives(self, x):
        v, g, h = self.base._derivatives(x @ self.T.T)
        T = self.T
        return v, g @ T, np.einsum("ki,nkl,lj->nij", T, h, T)

    def _logdet(self, x, hess, det):
        y = x @ self.T.T
        _, g, h = self.base._derivatives(y)
        return self.base._logdet(y, h, None) + 2.0 * np.linalg.slogdet(self.T)[1]

    def _irregular(self, x):
        return self.base._irregular(x @ self.T.T)

    def legendre(self):
        return LinearImage(self.base.legendre(), np.linalg.inv(self.T).T)

    def check_integrable(self):
        self.base.check_integrable()

    def to_json(self):
        return {"family": "linear_image", "dim": self.dim,
                "params": {"base": self.base.to_json(), "T": self.T.tolist()}}


# ---------------------------------------------------------------- grids
@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of ``psi`` on a uniform rectangular grid (row-major ``values``)."""

    lower: tuple
    upper: tuple
    points: tuple
    values: np.ndarray
    outside_value: float = math.inf

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        pts = tuple(int(v) for v in np.atleast_1d(self.points))
        if not (len(lo) == len(hi) == len(pts)) or not 1 <= len(pts) <= 3:
            raise GridError("grid corners and point counts must agree in dimension 1..3")
        if min(pts) < 16:
            raise GridError("grids need at least 16 points per axis")
        if any(h <= l for l, h in zip(lo, hi)):
            raise GridError("upper corner must exceed lower corner")
        vals = np.array(self.values, dtype=float).reshape(pts)
        if not np.all(np.isfinite(vals)):
            raise GridError("grid values must be finite")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        self._check_convex()

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def axes(self) -> list[np.ndarray]:
        return [np.linspace(l, h, m) for l, h, m in zip(self.lower, self.upper, self.points)]

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(h - l) / (m - 1) for l, h, m in zip(self.lower, self.upper, self.points)])

    def _check_convex(self):
        v = self.values
        scale = max(1.0, float(np.abs(v).max()))
        for ax in range(v.ndim):
            d2 = np.diff(v, 2, axis=ax)
            if d2.size and d2.min() < -1e-10 * scale:
                raise GridError(f"grid values are not convex along axis {ax}")

    @classmethod
    def sample(cls, spec: ConvexFunctionSpec, lower=None, upper=None, points=None) -> "GridFunction":
        n = spec.dim
        lower = np.full(n, -DEFAULT_EXTENT) if lower is None else np.broadcast_to(lower, (n,))
        upper = np.full(n, DEFAULT_EXTENT) if upper is None else np.broadcast_to(upper, (n,))
        points = np.full(n, DEFAULT_POINTS) if points is None else np.broadcast_to(points, (n,))
        axes = [np.linspace(l, h, int(m)) for l, h, m in zip(lower, upper, points)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        return cls(tuple(lower), tuple(upper), tuple(points), spec.value(mesh))

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "points": list(self.points),
                "values": self.values.ravel().tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        return cls(tuple(obj["lower"]), tuple(obj["upper"]), tuple(obj["points"]),
                   np.asarray(obj["values"], dtype=float))


@dataclass(frozen=True, eq=False)
class Tabulated(ConvexFunctionSpec):
    """Interpolated grid function: cubic spline in 1D, tensor cubic otherwise.

    The effective domain is the grid box; ``psi = +inf`` outside it.
    """

    grid: GridFunction
    _interp: dict = field(default_factory=dict, repr=False)
    family = "tabulated"
    analytic = False

    def __post_init__(self):
        g = self.grid
        if g.dim == 1:
            self._interp["spline"] = CubicSpline(g.axes[0], g.values)
        else:
            self._interp["rgi"] = RegularGridInterpolator(
                g.axes, g.values, method="cubic", bounds_error=False, fill_value=None)

    @property
    def dim(self):
        return self.grid.dim

    def box(self):
        return np.array(self.grid.lower), np.array(self.grid.upper)

    def _inside(self, x, closed=True):
        lo, hi = self.box()
        tol = 1e-12 * np.maximum(1.0, np.abs(hi - lo))
        if closed:
            return np.all((x >= lo - tol) & (x <= hi + tol), axis=1)
        return np.all((x > lo) & (x < hi), axis=1)

    def interior(self, x):
        return self._inside(x, closed=False)

    def _raw(self, x):
        if self.dim == 1:
            return self._interp["spline"](x[:, 0])
        return self._interp["rgi"](x)

    def _value(self, x):
        inside = self._inside(x)
        out = np.full(x.shape[0], self.grid.outside_value)
        if np.any(inside):
            lo, hi = self.box()
            out[inside] = self._raw(np.clip(x[inside], lo, hi))
        return out

    def _derivatives(self, x):
        if self.dim == 1:
            s = self._interp["spline"]
            t = x[:, 0]
            return s(t), s(t, 1)[:, None], s(t, 2)[:, None, None]
        return _fd_derivatives(self._raw, x)

    def legendre(self) -> "Tabulated":
        return Tabulated(grid_legendre(self.grid))

    def to_json(self):
        return {"family": "tabulated", "dim": self.dim, "params": self.grid.to_json()}


def _fd_derivatives(fn, x):
    """Central differences: step eps^(1/3) for gradients, eps^(1/4) for Hessians."""
    m, n = x.shape
    scale = np.maximum(1.0, np.linalg.norm(x, axis=1))[:, None]
    h1 = FD_GRAD_STEP * scale
    h2 = FD_HESS_STEP * scale
    f0 = fn(x)
    grad = np.empty((m, n))
    hess = np.empty((m, n, n))
    eye = np.eye(n)
    for i in range(n):
        e = eye[i] * h1
        grad[:, i] = (fn(x + e) - fn(x - e)) / (2 * h1[:, 0])
        ei = eye[i] * h2
        hess[:, i, i] = (fn(x + ei) - 2 * f0 + fn(x - ei)) / h2[:, 0] ** 2
        for j in range(i):
            ej = eye[j] * h2
            v = (fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej))
            hess[:, i, j] = hess[:, j, i] = v / (4 * h2[:, 0] ** 2)
    return f0, grad, hess


# ---------------------------------------------------------------- discrete Legendre
def _lower_hull(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of the points ``(x_i, f_i)``, x increasing."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above the chord a-i (collinear points removed)
            if (f[b] - f[a]) * (x[i] - x[a]) >= (f[i] - f[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull)


def discrete_legendre_1d(x, f, y=None, refine: bool = True):
    """Conjugate ``sup_i (x_i y - f_i)`` of uniformly sampled ``f``, in linear time.

    The maximiser is located on the lower convex hull by slope search; ties go
    to the smaller abscissa.  With ``refine`` the local three-point parabola
    around the discrete maximiser is conjugated exactly, which removes the
    O(h^2) grid bias (and is exact for quadratics).

    Returns ``(y, values, argmax_x)``.  ``y`` defaults to the range of hull
    slopes with as many points as ``x``.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    hull = _lower_hull(x, f)
    if len(hull) < 2:
        raise GridError("need at least two hull points")
    xh, fh = x[hull], f[hull]
    slopes = np.diff(fh) / np.diff(xh)
    if y is None:
        y = np.linspace(slopes[0], slopes[-1], len(x))
    y = np.asarray(y, dtype=float)
    span = 1e-12 * max(1.0, abs(slopes[0]), abs(slopes[-1]))
    if y.min() < slopes[0] - span or y.max() > slopes[-1] + span:
        raise GridError(
            f"dual range [{y.min():.6g}, {y.max():.6g}] exceeds the gradient range "
            f"[{slopes[0]:.6g}, {slopes[-1]:.6g}] captured by the grid")
    k = np.searchsorted(slopes, y, side="left")
    i = hull[k]
    xs = x[i]
    val = xs * y - f[i]
    if refine and len(x) >= 3:
        h = x[1] - x[0]
        c = np.clip(i, 1, len(x) - 2)
        a = (f[c + 1] - 2 * f[c] + f[c - 1]) / (2 * h * h)
        b = (f[c + 1] - f[c - 1]) / (2 * h)
        lo = np.maximum(xs - h, x[0]) - x[c]
        hi = np.minimum(xs + h, x[-1]) - x[c]
        ok = a > 0
        d = np.where(ok, (y - b) / np.where(ok, 2 * a, 1.0), 0.0)
        d = np.clip(d, lo, hi)
        refined = (x[c] + d) * y - (f[c] + b * d + a * d * d)
        better = ok & (refined > val)
        val = np.where(better, refined, val)
        xs = np.where(better, x[c] + d, xs)
        # switching between local parabolas can leave O(h^2.5) dents where f is
        # not C^3; the convex minorant still dominates the unrefined values
        if len(y) >= 3 and np.all(np.diff(y) > 0):
            keep = _lower_hull(y, val)
            val = np.interp(y, y[keep], val[keep])
    return y, val, xs


def grid_legendre(grid: GridFunction, lower=None, upper=None, refine: bool = True) -> GridFunction:
    """Discrete Legendre transform of a grid function, one axis at a time.

    ``psi*(y) = sup_{x_1} [x_1 y_1 + sup_{x_2} (x_2 y_2 - psi)]`` etc.; each pass
    is a family of independent 1D transforms.  The dual box defaults, per axis,
    to the slope range shared by all lines.  Raises GridError when a requested
    dual range is not covered by the gradients present on the grid.
    """
    n = grid.dim
    h = grid.values.copy()
    axes = grid.axes
    new_axes = []
    for ax in range(n - 1, -1, -1):
        moved = np.moveaxis(h, ax, -1)
        lines = moved.reshape(-1, moved.shape[-1])
        x = axes[ax]
        if lower is not None:
            y = np.linspace(np.broadcast_to(lower, (n,))[ax],
                            np.broadcast_to(upper, (n,))[ax], grid.points[ax])
        else:
            lo, hi = -np.inf, np.inf
            for line in lines:
                hull = _lower_hull(x, line)
                s = np.diff(line[hull]) / np.diff(x[hull])
                lo, hi = max(lo, s[0]), min(hi, s[-1])
            if not lo < hi:
                raise GridError("grid lines share no common gradient range")
            y = np.linspace(lo, hi, grid.points[ax])
        out = np.empty_like(lines)
        for j, line in enumerate(lines):
            out[j] = discrete_legendre_1d(x, line, y, refine)[1]
        g = np.moveaxis(out.reshape(moved.shape), -1, ax)
        new_axes.insert(0, y)
        h = -g
    vals = -h
    return GridFunction(tuple(a[0] for a in new_axes), tuple(a[-1] for a in new_axes),
                        grid.points, vals)


def _tabulated_legendre(spec: ConvexFunctionSpec) -> Tabulated:
    if spec.dim > 2:
        raise GridError("grid-based Legendre transforms are limited to n <= 2 for sampled families")
    g = GridFunction.sample(spec)
    return Tabulated(grid_legendre(g))


# ---------------------------------------------------------------- operations
def derivs(spec: ConvexFunctionSpec, x) -> Derivs:
    """Vectorised value, derivatives, determinant and regularity flags."""
    x = _points(x, spec.dim)
    n = spec.dim
    val, grad, hess = spec.derivatives(x)
    hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))
    finite = np.all(np.isfinite(hess.reshape(len(x), -1)), axis=1) & np.all(np.isfinite(grad), axis=1)
    det = np.full(len(x), np.nan)
    logdet = np.full(len(x), -np.inf)
    if np.any(finite):
        det[finite] = np.linalg.det(hess[finite])
        logdet[finite] = spec._logdet(x[finite], hess[finite], det[finite])
    tr = np.trace(np.where(finite[:, None, None], hess, 0.0), axis1=1, axis2=2)
    with np.errstate(invalid="ignore"):
        regular = finite & (det > 0) & (np.abs(det) >= 1e-12 * np.abs(tr / n) ** n)
    regular &= ~spec._irregular(x) & np.isfinite(logdet)
    return Derivs(val, grad, hess, det, logdet, regular)


def evaluate(spec: ConvexFunctionSpec, x) -> float:
    """``psi(x)``; ``+inf`` outside the closure of the effective domain."""
    x = np.asarray(x, dtype=float).reshape(1, spec.dim)
    return float(spec.value(x)[0])


def differentials(spec: ConvexFunctionSpec, x) -> DiffBundle:
    pt = np.asarray(x, dtype=float).reshape(1, spec.dim)
    if not spec.interior(pt)[0]:
        raise DomainError(f"{pt[0]} is not interior to the effective domain")
    d = derivs(spec, pt)
    return DiffBundle(float(d.value[0]), d.grad[0], d.hess[0],
                      float(max(d.det[0], 0.0)) if np.isfinite(d.det[0]) else float("nan"),
                      bool(d.regular[0]))


def legendre(spec: ConvexFunctionSpec) -> ConvexFunctionSpec:
    return spec.legendre()


def polar_log_concave(spec: ConvexFunctionSpec) -> ConvexFunctionSpec:
    """Descriptor of ``phi° = exp(-psi*)``; identical to the Legendre dual of ``psi``."""
    return legendre(spec)


def envelope_check(spec: ConvexFunctionSpec, x, dual: ConvexFunctionSpec | None = None) -> float:
    """``|psi*(grad psi(x)) - (<x, grad psi(x)> - psi(x))|``."""
    b = differentials(spec, x)
    if not b.regular:
        raise DomainError(f"{x} is not a regular point")
    dual = legendre(spec) if dual is None else dual
    y = b.gradient.reshape(1, -1)
    xv = np.asarray(x, dtype=float).reshape(-1)
    return abs(float(dual.value(y)[0]) - (float(xv @ b.gradient) - b.value))


def translate(spec: ConvexFunctionSpec, shift) -> ConvexFunctionSpec:
    """``x -> psi(x + shift)`` for families closed under translation."""
    shift = np.asarray(shift, dtype=float).reshape(spec.dim)
    if isinstance(spec, Quadratic):
        A, b = spec.A, spec.b
        return Quadratic(A, b + A @ shift, spec.c + 0.5 * shift @ A @ shift + b @ shift)
    if not np.any(shift):
        return spec
    raise ParameterError(f"family {spec.family!r} cannot be translated")


def spec_from_json(obj: dict) -> ConvexFunctionSpec:
    fam = obj.get("family")
    params = obj.get("params", {})
    dim = obj.get("dim")
    if fam == "quadratic":
        spec = Quadratic(np.asarray(params["A"], dtype=float), params.get("b"), params.get("c", 0.0))
    elif fam == "powersum":
        spec = PowerSum(params["p"], params.get("scale", 1.0), params.get("offset", 0.0), dim or 1)
    elif fam == "gauge_square":
        spec = GaugeSquare(body_from_json(params["body"]))
    elif fam == "tabulated":
        spec = Tabulated(GridFunction.from_json(params))
    elif fam == "linear_image":
        spec = LinearImage(spec_from_json(params["base"]), np.asarray(params["T"], dtype=float))
    else:
        raise ConfigError(f"unknown function family {fam!r}")
    if dim is not None and spec.dim != dim:
        raise ConfigError(f"declared dim {dim} does not match parameters ({spec.dim})")
    return spec
