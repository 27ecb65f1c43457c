"""Generators ``f`` of f-divergences.

Divergence integrands are evaluated from ``log r`` (``r`` the density ratio),
so every generator exposes ``value_log``/``kernel_log`` alongside plain
``f``/``df`` and the derivative values at 1 used by Pinsker-type bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError

__all__ = ["DivergenceGenerator", "check_gilardoni_condition"]

TAGS = ("log", "power", "tlogt", "absdev", "linear", "custom")


@dataclass(frozen=True)
class DivergenceGenerator:
    """A convex, concave or linear ``f: (0, inf) -> R`` plus a constant offset.

    ``derivs_at_one`` is only consulted for ``custom`` generators.
    """

    tag: str
    lam: float = 0.0
    a: float = 1.0
    b: float = 0.0
    offset: float = 0.0
    custom_f: Callable | None = field(default=None, compare=False, repr=False)
    custom_df: Callable | None = field(default=None, compare=False, repr=False)
    derivs_at_one: tuple | None = None
    custom_shape: str | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ParameterError(f"unknown generator tag {self.tag!r}")
        if self.tag == "custom" and (self.custom_f is None or self.derivs_at_one is None):
            raise ParameterError("custom generators need f and its derivatives at 1")

    # constructors ---------------------------------------------------------
    @classmethod
    def log(cls, offset: float = 0.0):
        """``f(t) = -ln t``."""
        return cls("log", offset=offset)

    @classmethod
    def power(cls, lam: float, offset: float = 0.0):
        return cls("power", lam=float(lam), offset=offset)

    @classmethod
    def tlogt(cls):
        return cls("tlogt")

    @classmethod
    def absdev(cls):
        return cls("absdev")

    @classmethod
    def linear(cls, a: float, b: float):
        return cls("linear", a=float(a), b=float(b))

    @classmethod
    def custom(cls, f, df, derivs_at_one, shape, name="custom"):
        return cls("custom", custom_f=f, custom_df=df,
                   derivs_at_one=tuple(float(v) for v in derivs_at_one), custom_shape=shape)

    # description ----------------------------------------------------------
    @property
    def name(self) -> str:
        base = {"power": f"power({self.lam:g})", "linear": f"linear({self.a:g},{self.b:g})"}
        s = base.get(self.tag, self.tag)
        return s if self.offset == 0 else f"{s}{self.offset:+g}"

    @property
    def shape(self) -> str:
        t = self.tag
        if t == "custom":
            return self.custom_shape
        if t == "linear":
            return "linear"
        if t == "power":
            if self.lam in (0.0, 1.0):
                return "linear"
            return "concave" if 0.0 < self.lam < 1.0 else "convex"
        return "convex"

    @property
    def sign(self) -> int:
        """+1 for convex/linear generators, -1 for concave ones."""
        return -1 if self.shape == "concave" else 1

    @property
    def differentiable(self) -> bool:
        return self.tag != "absdev"

    def to_json(self) -> dict:
        if self.tag == "custom":
            raise ParameterError("custom generators are not serialisable")
        out = {"tag": self.tag}
        if self.tag == "power":
            out["lam"] = self.lam
        if self.tag == "linear":
            out.update(a=self.a, b=self.b)
        if self.offset:
            out["offset"] = self.offset
        return out

    @classmethod
    def from_json(cls, obj) -> "DivergenceGenerator":
        if isinstance(obj, str):
            obj = {"tag": obj}
        tag = obj["tag"]
        if tag == "custom":
            raise ParameterError("custom generators cannot be read from JSON")
        return cls(tag, lam=float(obj.get("lam", 0.0)), a=float(obj.get("a", 1.0)),
                   b=float(obj.get("b", 0.0)), offset=float(obj.get("offset", 0.0)))

    # evaluation -----------------------------------------------------------
    def f(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.value_log(np.log(t))

    def value_log(self, logr):
        """``f(exp(logr))`` without forming ``r`` where avoidable."""
        logr = np.asarray(logr, dtype=float)
        tag = self.tag
        if tag == "log":
            out = -logr
        elif tag == "power":
            out = np.exp(self.lam * logr)
        elif tag == "tlogt":
            out = np.exp(logr) * logr
        elif tag == "absdev":
            out = np.abs(np.expm1(logr))
        elif tag == "linear":
            out = self.a * np.exp(logr) + self.b
        else:
            out = np.asarray(self.custom_f(np.exp(logr)), dtype=float)
        return out + self.offset

    def df(self, t):
        t = np.asarray(t, dtype=float)
        tag = self.tag
        if tag == "log":
            return -1.0 / t
        if tag == "power":
            return self.lam * t ** (self.lam - 1.0)
        if tag == "tlogt":
            return np.log(t) + 1.0
        if tag == "absdev":
            return np.sign(t - 1.0)
        if tag == "linear":
            return np.full_like(t, self.a)
        return np.asarray(self.custom_df(t), dtype=float)

    def kernel_log(self, logr):
        """``f'(r) (r - 1)``: the pointwise upper-bound correction term."""
        logr = np.asarray(logr, dtype=float)
        tag = self.tag
        em1 = np.expm1(logr)
        if tag == "log":
            return np.expm1(-logr)
        if tag == "power":
            lam = self.lam
            if lam == 0.0:
                return np.zeros_like(logr)
            return lam * np.exp((lam - 1.0) * logr) * em1
        if tag == "tlogt":
            return (logr + 1.0) * em1
        if tag == "absdev":
            return np.abs(em1)
        if tag == "linear":
            return self.a * em1
        r = np.exp(logr)
        return self.df(r) * (r - 1.0)

    def derivatives_at_one(self) -> tuple[float, float, float, float]:
        """``(f(1), f'(1), f''(1), f'''(1))``."""
        tag, lam, o = self.tag, self.lam, self.offset
        if tag == "log":
            return (o, -1.0, 1.0, -2.0)
        if tag == "power":
            return (1.0 + o, lam, lam * (lam - 1.0), lam * (lam - 1.0) * (lam - 2.0))
        if tag == "tlogt":
            return (0.0 + o, 1.0, 1.0, -1.0)
        if tag == "linear":
            return (self.a + self.b + o, self.a, 0.0, 0.0)
        if tag == "absdev":
            return (o, float("nan"), float("nan"), float("nan"))
        d = self.derivs_at_one
        return (d[0] + o, d[1], d[2], d[3])

    def growth(self, kernel: bool = False) -> tuple[float, float]:
        """Power-law exponents of ``f`` (or of the kernel) as ``r -> 0`` and ``r -> inf``.

        Logarithmic factors are ignored.  ``None`` means unknown (custom).
        """
        tag, lam = self.tag, self.lam
        if tag == "custom":
            return (None, None)
        if kernel:
            table = {"log": (-1.0, 0.0), "tlogt": (0.0, 1.0), "absdev": (0.0, 1.0),
                     "linear": (0.0, 1.0)}
            if tag == "power":
                return (min(lam - 1.0, 0.0), max(lam, 0.0)) if lam != 0 else (0.0, 0.0)
            return table[tag]
        table = {"log": (0.0, 0.0), "tlogt": (0.0, 1.0), "absdev": (0.0, 1.0),
                 "linear": (0.0, 1.0)}
        if tag == "power":
            return (min(lam, 0.0), max(lam, 0.0))
        return table[tag]

    def divergent_sign(self, kernel: bool, small: bool) -> float:
        """Sign of ``f`` (or the kernel) in the limit where it diverges."""
        logr = np.array(-40.0 if small else 40.0)
        v = self.kernel_log(logr) if kernel else self.value_log(logr) - self.offset
        return float(np.sign(v)) or 1.0

    def centered(self) -> "DivergenceGenerator":
        """Same generator shifted so that ``f(1) = 0``."""
        f1 = self.derivatives_at_one()[0]
        return DivergenceGenerator(self.tag, self.lam, self.a, self.b, self.offset - f1,
                                   self.custom_f, self.custom_df, self.derivs_at_one,
                                   self.custom_shape)


def check_gilardoni_condition(gen: DivergenceGenerator, u_grid) -> bool:
    """Sampled check of the sufficient condition for a Pinsker bound with constant f''(1)/2.

    Concave generators are checked through ``-f``.
    """
    u = np.asarray(u_grid, dtype=float)
    if np.any(u <= 0):
        raise ParameterError("u_grid must be positive")
    raw = gen.derivatives_at_one()
    _, d1, d2, d3 = (gen.sign * v for v in raw)
    if not np.isfinite(d2) or d2 <= 0:
        return False
    fu = gen.sign * (gen.f(u) - raw[0])
    lhs = (fu - d1 * (u - 1.0)) * (1.0 - d3 / (3.0 * d2) * (u - 1.0))
    rhs = 0.5 * d2 * (u - 1.0) ** 2
    return bool(np.all(lhs >= rhs - 1e-12 * np.maximum(1.0, np.abs(rhs))))
