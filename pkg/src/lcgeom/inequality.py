"""Inequality reports: evaluated sides, slack, tolerances and a verdict.

Every check is normalised to the form ``lhs <= rhs``; checkers for reversed
inequalities simply swap the sides.  Tolerances are derived from the error
estimates of the contributing terms by finite perturbation, so a report is
self-describing: ``terms`` holds each sub-integral with its error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

PASS, FAIL, EQUALITY, SKIPPED = "PASS", "FAIL", "EQUALITY", "SKIPPED"

PASS_SIGMAS = 3.0
EQ_SIGMAS = 10.0
EQ_REL = 1e-6

__all__ = ["InequalityReport", "build_report", "chain_report", "skipped_report",
           "PASS", "FAIL", "EQUALITY", "SKIPPED"]


def _num(x):
    """JSON-safe float."""
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    eq_tolerance: float
    verdict: str
    terms: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        if math.isinf(self.lhs) and math.isinf(self.rhs) and self.lhs == self.rhs:
            return 0.0
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.verdict in (PASS, EQUALITY, SKIPPED)

    def child(self, name: str) -> "InequalityReport":
        for c in self.children:
            if c.name == name or c.name.endswith("/" + name):
                return c
        raise KeyError(name)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "slack": _num(self.slack),
            "tolerance": _num(self.tolerance),
            "eq_tolerance": _num(self.eq_tolerance),
            "verdict": self.verdict,
            "terms": {k: {"value": _num(v), "error": _num(e)} for k, (v, e) in self.terms.items()},
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out

    def rows(self) -> list[dict]:
        """Flat rows for CSV output, children included."""
        rows = [{"check": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                 "tolerance": self.tolerance, "eq_tolerance": self.eq_tolerance,
                 "verdict": self.verdict}]
        for c in self.children:
            rows.extend(c.rows())
        return rows


def _propagate(fn, values: dict, errors: dict) -> tuple[float, float]:
    base = float(fn(values))
    if not math.isfinite(base):
        return base, 0.0
    var = 0.0
    for k, e in errors.items():
        if not e or not math.isfinite(values[k]):
            continue
        bumped = dict(values)
        bumped[k] = values[k] + e
        d = float(fn(bumped)) - base
        if math.isfinite(d):
            var += d * d
    return base, math.sqrt(var)


def decide(lhs: float, rhs: float, sigma: float, notes: list | None = None):
    """Verdict for ``lhs <= rhs`` given a combined one-sigma error."""
    notes = notes if notes is not None else []
    tol = PASS_SIGMAS * sigma
    scale = max(1.0, abs(lhs) if math.isfinite(lhs) else 0.0,
                abs(rhs) if math.isfinite(rhs) else 0.0)
    eq_tol = max(EQ_REL * scale, EQ_SIGMAS * sigma)
    if math.isnan(lhs) or math.isnan(rhs):
        notes.append("undefined side")
        return FAIL, tol, eq_tol
    if math.isinf(lhs) or math.isinf(rhs):
        if lhs == -math.inf or rhs == math.inf:
            notes.append("vacuous: a side is infinite")
            return PASS, tol, eq_tol
        return FAIL, tol, eq_tol
    slack = rhs - lhs
    if abs(slack) <= eq_tol:
        return EQUALITY, tol, eq_tol
    if slack >= -tol:
        return PASS, tol, eq_tol
    return FAIL, tol, eq_tol


def build_report(name: str, terms: Mapping[str, tuple], lhs: Callable, rhs: Callable,
                 notes: list | None = None) -> InequalityReport:
    """Evaluate ``lhs(values) <= rhs(values)`` over named ``(value, error)`` terms."""
    values = {k: float(v[0]) for k, v in terms.items()}
    errors = {k: float(v[1]) for k, v in terms.items()}
    lv, le = _propagate(lhs, values, errors)
    rv, re_ = _propagate(rhs, values, errors)
    # both sides share terms; the quadrature errors are not independent, so add
    sigma = le + re_
    notes = list(notes or [])
    verdict, tol, eq_tol = decide(lv, rv, sigma, notes)
    return InequalityReport(name, lv, rv, tol, eq_tol, verdict,
                            {k: (values[k], errors[k]) for k in terms}, [], notes)


def skipped_report(name: str, terms: Mapping[str, tuple] | None = None, note: str = "") -> InequalityReport:
    terms = {k: (float(v[0]), float(v[1])) for k, v in (terms or {}).items()}
    return InequalityReport(name, math.nan, math.nan, 0.0, 0.0, SKIPPED, terms, [],
                            [note] if note else [])


def chain_report(name: str, children: list[InequalityReport], main: int = 0,
                 notes: list | None = None) -> InequalityReport:
    """Aggregate: FAIL if any link fails, EQUALITY if all (non-skipped) links are equalities."""
    live = [c for c in children if c.verdict != SKIPPED]
    if any(c.verdict == FAIL for c in live):
        verdict = FAIL
    elif live and all(c.verdict == EQUALITY for c in live):
        verdict = EQUALITY
    elif live:
        verdict = PASS
    else:
        verdict = SKIPPED
    head = children[main]
    terms = {}
    for c in children:
        terms.update(c.terms)
    for c in children:
        if not c.name.startswith(name + "/"):
            c.name = f"{name}/{c.name}"
    return InequalityReport(name, head.lhs, head.rhs, head.tolerance, head.eq_tolerance,
                            verdict, terms, list(children), list(notes or []))
