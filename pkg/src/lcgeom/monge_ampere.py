"""The Monge-Ampere equation ``det D^2 psi = C exp(-2 psi + <x, grad psi>)``.

Its solutions with ``C = int exp(-psi*) / int exp(-psi)`` are exactly the
quadratics plus constants.  This module measures how far a given ``psi`` is
from solving it, tests whether ``grad psi`` transports ``exp(-psi)`` onto
``exp(-psi*)``, and solves the 1D (and radial 2D) equation by damped Newton
iteration from arbitrary convex starting points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .convex import ConvexFunctionSpec, GridFunction, Tabulated, derivs, discrete_legendre_1d, legendre
from .errors import ConfigError, DivergenceError, SamplingError
from .measures import QuadratureSpec, default_quadrature, integrate, node_sets

__all__ = [
    "MAResidualField", "ma_residual", "TransportCheck", "pushforward_check",
    "SolveResult", "solve_ma_1d", "UniquenessReport", "uniqueness_probe", "compare_runs",
]

EQUALITY_L1 = 1e-5
KS_COEFF = 1.63
# eight correlated slices share the 1% level (Bonferroni)
SLICED_KS_COEFF = math.sqrt(-0.5 * math.log(0.01 / 16))


@dataclass
class MAResidualField:
    points: np.ndarray
    residual: np.ndarray
    C: float
    sup: float
    l1: float
    mass: float

    @property
    def equality(self) -> bool:
        return self.l1 <= EQUALITY_L1

    def to_json(self) -> dict:
        return {"C": self.C, "sup": self.sup, "l1": self.l1, "mass": self.mass,
                "equality": self.equality, "points": len(self.residual)}


def ma_residual(spec: ConvexFunctionSpec, quad: QuadratureSpec | None = None) -> MAResidualField:
    """Residual ``det D^2 psi - C exp(-2 psi + <x, grad psi>)`` on the quadrature nodes.

    ``l1`` is the relative residual ``|det D^2 psi / (C exp(...)) - 1|``
    averaged against the probability measure ``exp(-psi) / int exp(-psi)``;
    the absolute residual is not integrable against ``exp(-psi)`` in
    general.  ``sup`` is taken over nodes carrying non-negligible mass.
    """
    from .divergence import _masses
    quad = quad or default_quadrature()
    m0, m1 = _masses(spec, quad)
    logC = math.log(m1.value) - math.log(m0.value)

    def rel(ns):
        with np.errstate(all="ignore"):
            t = ns.log_ratio - logC
            v = np.where(ns.regular, np.log(np.abs(np.expm1(np.where(ns.regular, t, 0.0)))), -np.inf)
        return v - ns.value - math.log(m0.value), 1.0

    l1 = integrate(spec, quad, rel).value
    sets, _ = node_sets(spec, quad)
    ns = sets[0]
    reg = ns.regular
    x = ns.x[reg]
    d = ns.d
    logrhs = logC - 2.0 * ns.value[reg] + ns.xgrad[reg]
    with np.errstate(over="ignore"):  # far tail only; masked out of sup below
        res = d.det[reg] - np.exp(logrhs)
    live = ns.value[reg] <= ns.value[reg].min() + 36.0
    sup = float(np.max(np.abs(res[live]))) if np.any(live) else 0.0
    return MAResidualField(x, res, math.exp(logC), sup, float(l1), m0.value)


# ---------------------------------------------------------------- transport
@dataclass
class TransportCheck:
    samples: int
    pushed: np.ndarray = field(repr=False)
    metrics: dict
    threshold: float
    passed: bool

    def to_json(self) -> dict:
        return {"samples": self.samples, "metrics": self.metrics, "threshold": self.threshold,
                "verdict": "PASS" if self.passed else "FAIL"}


def _tabulated_cdf(spec: ConvexFunctionSpec, lo: float, hi: float, points: int = 20001):
    t = np.linspace(lo, hi, points)
    v = spec.value(t[:, None])
    dens = np.exp(-(v - np.min(v)))
    dens = np.where(np.isfinite(dens), dens, 0.0)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
    return t, cdf / cdf[-1]


def _support_1d(spec: ConvexFunctionSpec) -> tuple[float, float]:
    box = spec.box()
    if box is not None:
        return float(box[0][0]), float(box[1][0])
    from .measures import truncation_radius
    R = truncation_radius(spec)
    return -R, R


def _sample_1d(spec, n, rng):
    lo, hi = _support_1d(spec)
    t, cdf = _tabulated_cdf(spec, lo, hi)
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return np.interp(rng.random(n), cdf[keep], t[keep])


def _rejection_sample(spec, n, rng, quad):
    """Gaussian-envelope rejection sampling of ``exp(-psi)`` in 2D."""
    from .divergence import barycenter
    mean = barycenter(spec, quad)
    m0 = integrate(spec, quad, lambda ns: (-ns.value, 1.0), need_regular=False).value
    cov = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            r = integrate(spec, quad, lambda ns, i=i, j=j: (
                np.log(np.abs((ns.x[:, i] - mean[i]) * (ns.x[:, j] - mean[j])) + 1e-300) - ns.value,
                np.sign((ns.x[:, i] - mean[i]) * (ns.x[:, j] - mean[j]))), need_regular=False)
            cov[i, j] = r.value / m0
    sigma2 = 1.5625 * float(np.linalg.eigvalsh(cov).max())
    sd = math.sqrt(sigma2)
    # envelope constant from a dense probe
    probe = mean + sd * rng.standard_normal((200000, 2)) * 1.5
    lw = -spec.value(probe) + np.sum((probe - mean) ** 2, axis=1) / (2 * sigma2)
    logM = float(np.max(lw[np.isfinite(lw)])) + 0.05
    out, drawn, accepted = [], 0, 0
    while accepted < n:
        m = max(2 * (n - accepted), 10000)
        z = mean + sd * rng.standard_normal((m, 2))
        la = -spec.value(z) + np.sum((z - mean) ** 2, axis=1) / (2 * sigma2) - logM
        if np.any(la > 1e-9):
            raise SamplingError("Gaussian envelope does not dominate the density")
        acc = np.log(rng.random(m)) < la
        drawn += m
        accepted += int(acc.sum())
        out.append(z[acc])
        if drawn >= 100000 and accepted / drawn < 0.01:
            raise SamplingError(f"rejection acceptance {accepted / drawn:.3%} is below 1%")
    return np.concatenate(out)[:n], accepted / drawn


def pushforward_check(spec: ConvexFunctionSpec, sample_count: int = 100_000, seed: int = 0,
                      quad: QuadratureSpec | None = None) -> TransportCheck:
    """Does ``grad psi`` push ``exp(-psi) dx`` forward to ``exp(-psi*) dy``?

    1D: Kolmogorov-Smirnov distance between the pushed samples and the
    tabulated target CDF, threshold ``1.63 / sqrt(N)``.  2D: mean and
    covariance mismatches plus the largest two-sample KS distance over eight
    projection directions against independent target samples.
    """
    quad = quad or default_quadrature()
    rng = np.random.default_rng(seed)
    dual = legendre(spec)
    n = spec.dim
    N = int(sample_count)
    if n == 1:
        x = _sample_1d(spec, N, rng)
        y = derivs(spec, x[:, None]).grad[:, 0]
        lo, hi = _support_1d(dual)
        t, cdf = _tabulated_cdf(dual, lo, hi)
        ks = stats.ks_1samp(y, lambda s: np.interp(s, t, cdf)).statistic
        thr = KS_COEFF / math.sqrt(N)
        return TransportCheck(N, y, {"ks": float(ks)}, thr, bool(ks <= thr))
    if n != 2:
        raise ConfigError("pushforward checks support n = 1, 2")
    x, acc = _rejection_sample(spec, N, rng, quad)
    y = derivs(spec, x).grad
    target, acc_t = _rejection_sample(dual, N, rng, quad)
    ang = np.pi * np.arange(8) / 8
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ks = [float(stats.ks_2samp(y @ d, target @ d).statistic) for d in dirs]
    mean_gap = float(np.max(np.abs(y.mean(0) - target.mean(0))))
    cov_gap = float(np.max(np.abs(np.cov(y.T) - np.cov(target.T))))
    thr = SLICED_KS_COEFF * math.sqrt(2.0 / N)
    metrics = {"sliced_ks": max(ks), "sliced_ks_all": ks, "mean_gap": mean_gap, "cov_gap": cov_gap,
               "acceptance": acc, "target_acceptance": acc_t}
    return TransportCheck(N, y, metrics, thr, bool(max(ks) <= thr))


# ---------------------------------------------------------------- solver
@dataclass
class SolveResult:
    grid: GridFunction
    trace: list
    converged: bool
    dim: int
    C: float

    def fitted_quadratic(self) -> dict:
        """Least-squares ``a x^2 / 2 + c`` fit over the bulk of the mass."""
        x = self.grid.axes[0]
        v = self.grid.values
        w = np.exp(-(v - v.min()))
        A = np.stack([0.5 * x * x, np.ones_like(x)], axis=1) * np.sqrt(w)[:, None]
        (a, c), *_ = np.linalg.lstsq(A, v * np.sqrt(w), rcond=None)
        fit = 0.5 * a * x * x + c
        bulk = w > 1e-8
        return {"a": float(a), "c": float(c), "fit_residual": float(np.max(np.abs(v - fit)[bulk]))}

    def to_json(self) -> dict:
        return {"dim": self.dim, "converged": self.converged, "C": self.C, "trace": self.trace,
                "fit": self.fitted_quadratic(), "grid": self.grid.to_json()}


def _diff_matrices(x):
    N = len(x)
    h = x[1] - x[0]
    D1 = np.zeros((N, N))
    D2 = np.zeros((N, N))
    i = np.arange(1, N - 1)
    D1[i, i - 1], D1[i, i + 1] = -0.5 / h, 0.5 / h
    D2[i, i - 1], D2[i, i], D2[i, i + 1] = 1 / h ** 2, -2 / h ** 2, 1 / h ** 2
    # one-sided second order stencils at the ends
    D1[0, :3] = np.array([-1.5, 2.0, -0.5]) / h
    D1[-1, -3:] = np.array([0.5, -2.0, 1.5]) / h
    D2[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / h ** 2
    D2[-1, -4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / h ** 2
    return D1, D2


class _Problem:
    """Discrete equation on an even grid; ``dim = 2`` is the radial reduction."""

    def __init__(self, x, dim):
        self.x = x
        self.dim = dim
        self.D1, self.D2 = _diff_matrices(x)
        h = x[1] - x[0]
        w = np.full(len(x), h)
        w[0] = w[-1] = 0.5 * h
        self.w = w
        self.rw = w * (np.abs(x) ** (dim - 1))
        self.zero = np.abs(x) < 0.5 * h

    def _radial_mass(self, t, weights, g):
        """``int |t|^(n-1) g`` over the line; in 2D the kink of ``|t|`` at 0 gets
        Euler-Maclaurin corrections (``g`` even and smooth)."""
        total = float(np.sum(weights * g))
        if self.dim == 2:
            h = t[1] - t[0]
            k = len(t) // 2
            g2 = (g[k + 1] - 2 * g[k] + g[k - 1]) / h ** 2
            total += 2 * (h * h / 12 * g[k] - h ** 4 / 240 * g2)
        return total

    def log_C(self, psi):
        m0 = self._radial_mass(self.x, self.rw, np.exp(-psi))
        h = self.x[1] - self.x[0]
        ymax = min(abs(psi[1] - psi[0]), abs(psi[-1] - psi[-2])) / h
        y = np.linspace(-ymax, ymax, 2 * len(self.x) + 1)
        _, dual, _ = discrete_legendre_1d(self.x, psi, y)
        hy = y[1] - y[0]
        wy = np.full(len(y), hy)
        wy[0] = wy[-1] = 0.5 * hy
        m1 = self._radial_mass(y, wy * np.abs(y) ** (self.dim - 1), np.exp(-dual))
        return math.log(m1) - math.log(m0)

    def parts(self, psi):
        d1 = self.D1 @ psi
        d2 = self.D2 @ psi
        if self.dim == 1:
            g = np.ones_like(psi)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.where(self.zero, d2, d1 / np.where(self.zero, 1.0, self.x))
        return d1, d2, g

    def log_residual(self, psi, logC):
        d1, d2, g = self.parts(psi)
        if np.any(d2 <= 0) or np.any(g <= 0):
            return None
        return np.log(d2) + (self.dim - 1) * np.log(g) + 2 * psi - self.x * d1 - logC

    def residual(self, psi, logC):
        d1, d2, g = self.parts(psi)
        with np.errstate(over="ignore"):
            return d2 * g ** (self.dim - 1) - np.exp(logC - 2 * psi + self.x * d1)

    def jacobian(self, psi):
        d1, d2, g = self.parts(psi)
        N = len(psi)
        X = np.diag(self.x)
        J = np.diag(1 / d2) @ self.D2 + 2 * np.eye(N) - X @ self.D1
        if self.dim == 2:
            gi = np.where(self.zero, 0.0, 1 / np.where(self.zero, 1.0, d1))
            Jg = np.diag(gi) @ self.D1
            Jg[self.zero] = (np.diag(1 / d2) @ self.D2)[self.zero]
            J = J + Jg
        return J

    def variance(self, psi):
        g = np.exp(-(psi - psi.min()))
        e = g * self.rw
        mass = self._radial_mass(self.x, self.rw, g)
        second = float(np.sum(e * self.x ** 2))
        if self.dim == 2:
            h = self.x[1] - self.x[0]
            second -= 2 * h ** 4 / 120 * g[len(g) // 2]
        return second / mass, e / mass

    def l1(self, psi, logC):
        lg = self.log_residual(psi, logC)
        _, p = self.variance(psi)
        return float(np.sum(p * np.abs(np.expm1(lg)))) if lg is not None else math.inf

    def gauge(self, psi):
        psi = 0.5 * (psi + psi[::-1])
        _, p = self.variance(psi)
        return psi - np.sum(p * psi) / np.sum(p)


def solve_ma_1d(initial: GridFunction, max_iter: int = 200, damping: float = 0.5, tol: float = 1e-8,
                radial_dim: int = 1, patience: int = 20) -> SolveResult:
    """Damped Newton iteration for ``psi'' (psi'/x)^(n-1) = C[psi] exp(-2 psi + x psi')``.

    ``radial_dim = 2`` solves the radially symmetric planar equation on the
    even extension of the profile.  ``C`` is recomputed every sweep from the
    current iterate (dual mass by the discrete Legendre transform).  The
    scale freedom ``a x^2/2`` is fixed with ``E_mu |x|^2 = n``; the iterate is
    symmetrised and its mean (against ``mu``) removed after every step.
    Newton steps use the logarithm of the equation; steps that break
    convexity or increase the residual are retried with halved damping.
    """
    if initial.dim != 1:
        raise ConfigError("solve_ma_1d takes a 1D grid (the radial profile for n = 2)")
    if radial_dim not in (1, 2):
        raise ConfigError("radial_dim must be 1 or 2")
    x = initial.axes[0]
    if not np.allclose(x, -x[::-1]):
        raise ConfigError("the grid must be symmetric about 0")
    if x[-1] < 6.0:
        # the gauge E|x|^2 = n needs room for the Gaussian tails
        raise ConfigError(f"grid half-width {x[-1]:g} is below 6")
    prob = _Problem(x, radial_dim)
    psi = prob.gauge(np.array(initial.values, dtype=float))
    n = radial_dim
    trace = []
    increases = 0
    best = math.inf
    converged = False
    logC = prob.log_C(psi)
    for it in range(max_iter + 1):
        logC = prob.log_C(psi)
        F = prob.residual(psi, logC)
        sup = float(np.max(np.abs(F)))
        trace.append({"iter": it, "residual_sup": sup, "residual_l1": prob.l1(psi, logC),
                      "C": math.exp(logC)})
        if sup <= tol:
            converged = True
            break
        if it == max_iter:
            break
        G = prob.log_residual(psi, logC)
        J = prob.jacobian(psi)
        var, p = prob.variance(psi)
        grow = -(p * (x ** 2 - var))  # d var / d psi
        A = np.vstack([J, grow[None, :] * len(x)])
        b = -np.concatenate([G, [(var - n) * len(x)]])
        step, *_ = np.linalg.lstsq(A, b, rcond=None)
        t = damping
        cur = float(np.max(np.abs(G)))
        while True:
            trial = prob.gauge(psi + t * step)
            lg = prob.log_residual(trial, prob.log_C(trial)) if np.all(np.isfinite(trial)) else None
            if lg is not None and float(np.max(np.abs(lg))) < cur:
                psi = trial
                break
            t *= 0.5
            if t < 1e-6:
                if lg is not None:
                    psi = trial
                break
        if sup >= best:
            increases += 1
            if increases >= patience:
                raise DivergenceError(f"residual grew for {patience} consecutive sweeps (sup {sup:.3g})")
        else:
            increases = 0
            best = sup
    out = GridFunction(initial.lower, initial.upper, initial.points, psi)
    return SolveResult(out, trace, converged, radial_dim, math.exp(logC))


@dataclass
class UniquenessReport:
    runs: list
    pairwise_max: float
    odd_norm: float
    agree: bool
    threshold: float = 1e-4

    def to_json(self) -> dict:
        return {"agree": self.agree, "pairwise_max": self.pairwise_max, "odd_norm": self.odd_norm,
                "threshold": self.threshold,
                "runs": [{"dim": r.dim, "converged": r.converged, "iterations": len(r.trace) - 1,
                          "fit": r.fitted_quadratic()} for r in self.runs]}


def uniqueness_probe(initials, radial_dim: int = 1, threshold: float = 1e-4, **solver) -> UniquenessReport:
    """Solve from every initial grid and compare the mean-centred outputs."""
    runs = [solve_ma_1d(g, radial_dim=radial_dim, **solver) for g in initials]
    return compare_runs(runs, threshold)


def compare_runs(runs, threshold: float = 1e-4) -> UniquenessReport:
    """Sup distance between mean-centred solutions over their common bulk."""
    if len(runs) < 2:
        raise ConfigError("the probe needs at least two initials")
    vals = []
    for r in runs:
        v = r.grid.values
        w = np.exp(-(v - v.min()))
        vals.append((v - np.sum(w * v) / np.sum(w), w > 1e-8))
    worst = 0.0
    for i in range(len(vals)):
        for j in range(i):
            bulk = vals[i][1] & vals[j][1]
            worst = max(worst, float(np.max(np.abs(vals[i][0] - vals[j][0])[bulk])))
    odd = max(float(np.max(np.abs(r.grid.values - r.grid.values[::-1]))) for r in runs) / 2
    agree = all(r.converged for r in runs) and worst <= threshold and odd <= 1e-6
    return UniquenessReport(runs, worst, odd, agree, threshold)
