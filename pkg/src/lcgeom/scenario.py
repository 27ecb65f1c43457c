"""Scenario files: which objects to build, what to compute and which bounds to check.

A scenario is a JSON document validated against ``data/scenario.schema.json``.
Work items are expanded into independent tasks that carry only JSON, so
they can run in a process pool; results are merged in task order, which
keeps every output byte-identical for a fixed seed.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import bodies as B
from . import divergence as D
from .convex import GridFunction, spec_from_json
from .errors import ConfigError, LcGeomError
from .generators import DivergenceGenerator
from .inequality import EQUALITY, PASS, build_report
from .measures import QuadratureSpec, default_quadrature, entropy, mass
from .monge_ampere import compare_runs, ma_residual, pushforward_check, solve_ma_1d


def _gen(params):
    return DivergenceGenerator.from_json(params.get("gen", "log"))


def _pushforward(spec, params, quad, seed):
    t = pushforward_check(spec, int(params.get("sample_count", 100_000)), seed, quad)
    key = "ks" if "ks" in t.metrics else "sliced_ks"
    r = build_report("pushforward", {key: (t.metrics[key], 0.0), "threshold": (t.threshold, 0.0)},
                     lambda v: v[key], lambda v: v["threshold"])
    if r.verdict == EQUALITY:
        r.verdict = PASS
    return [r]


# name -> (kind, parameter names, runner(obj, params, quad, seed) -> [InequalityReport])
CHECKS = {
    "divergence_bound": ("spec", ("gen",), lambda s, p, q, _: [D.check_divergence_bound(s, _gen(p), q)]),
    "pinsker": ("spec", ("gen",), lambda s, p, q, _: [D.check_pinsker(s, _gen(p), q)]),
    "log_sobolev_chain": ("spec", (), lambda s, p, q, _: [D.check_log_sobolev_chain(s, q)]),
    "dragomir": ("spec", ("gen",), lambda s, p, q, _: [D.check_dragomir(s, _gen(p), q)]),
    "kl_bounds": ("spec", (), lambda s, p, q, _: [D.check_kl_bounds(s, q)]),
    "affine_chain": ("spec", ("lam",), lambda s, p, q, _: [D.check_affine_chain(s, p["lam"], q)]),
    "santalo": ("spec", ("lam",), lambda s, p, q, _: [D.check_santalo_family(s, p["lam"], q)]),
    "duality": ("spec", ("lam",), lambda s, p, q, _: [D.check_duality(s, p["lam"], q)]),
    "pushforward": ("spec", ("sample_count",), _pushforward),
    "body_dragomir": ("body", ("gen",), lambda b, p, q, _: [B.check_body_dragomir(b, _gen(p))]),
    "body_corollaries": ("body", ("p",), lambda b, p, q, _: B.check_body_corollaries(b, p["p"])),
    "body_pinsker": ("body", ("gen",), lambda b, p, q, _: [B.check_body_pinsker(b, _gen(p))]),
    "bridge": ("body", (), lambda b, p, q, _: [B.bridge_check(b, quad=q)]),
}


def _ma_quantity(spec, quad):
    r = ma_residual(spec, quad)
    return r.l1, 0.0


QUANTITIES = {
    "mass": ("spec", (), lambda s, p, q: tuple(mass(s, q))),
    "entropy": ("spec", (), lambda s, p, q: tuple(entropy(s, q))),
    "dual_mass": ("spec", (), lambda s, p, q: tuple(D.affine_surface_area(s, 1.0, q))),
    "as_lambda": ("spec", ("lam",), lambda s, p, q: tuple(D.affine_surface_area(s, p["lam"], q))),
    "f_divergence": ("spec", ("gen",), lambda s, p, q: tuple(D.f_divergence(s, _gen(p), q))),
    "normalized_f_divergence": ("spec", ("gen",),
                                lambda s, p, q: tuple(D.normalized_f_divergence(s, _gen(p), q))),
    "kl_divergence": ("spec", (), lambda s, p, q: tuple(D.kl_divergence(s, q))),
    "total_variation": ("spec", (), lambda s, p, q: tuple(D.total_variation_term(s, q))),
    "ma_residual_l1": ("spec", (), lambda s, p, q: _ma_quantity(s, q)),
    "volume": ("body", (), lambda b, p, q: tuple(B.volume_result(b))),
    "polar_volume": ("body", (), lambda b, p, q: tuple(B.polar_volume_result(b))),
    "as_p": ("body", ("p",), lambda b, p, q: tuple(B.body_affine_surface_area(b, p["p"]))),
    "body_f_divergence": ("body", ("gen",), lambda b, p, q: tuple(B.body_f_divergence(b, _gen(p)))),
}


def load_schema() -> dict:
    return json.loads(resources.files("lcgeom").joinpath("data/scenario.schema.json").read_text())


def bundled_scenario(name: str) -> Path:
    p = resources.files("lcgeom").joinpath(f"data/scenarios/{name}")
    return Path(str(p))


def _grid(obj) -> list[float]:
    if isinstance(obj, list):
        return [float(v) for v in obj]
    return [float(v) for v in np.linspace(obj["start"], obj["stop"], int(obj["num"]))]


def _expand(params: dict) -> list[dict]:
    """Cartesian product over list-valued parameters (generator lists included)."""
    keys = sorted(params)
    axes = [params[k] if isinstance(params[k], list) else [params[k]] for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*axes)]


@dataclass
class Scenario:
    name: str
    seed: int
    quad: QuadratureSpec
    items: dict
    checks: list = field(default_factory=list)
    quantities: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    solve_ma: list = field(default_factory=list)
    uniqueness: list = field(default_factory=list)

    @classmethod
    def load(cls, path, seed: int | None = None, quad: str | None = None) -> "Scenario":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
        return cls.from_json(obj, seed, quad)

    @classmethod
    def from_json(cls, obj: dict, seed: int | None = None, quad: str | None = None) -> "Scenario":
        try:
            jsonschema.validate(obj, load_schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"scenario violates the schema at {where}: {exc.message}") from exc
        items = {}
        for it in obj["items"]:
            if it["id"] in items:
                raise ConfigError(f"duplicate item id {it['id']!r}")
            kind = "spec" if "spec" in it else "body"
            items[it["id"]] = (kind, it[kind])
        if quad is not None:
            q = QuadratureSpec.from_json(_maybe_json(quad))
        elif "quadrature" in obj:
            q = QuadratureSpec.from_json(obj["quadrature"])
        else:
            q = default_quadrature()
        seed = int(obj.get("seed", 0) if seed is None else seed)
        if q.method == "mc":
            q = QuadratureSpec.from_json(dict(q.to_json(), seed=seed))
        sc = cls(obj.get("name", "scenario"), seed, q, items, obj.get("checks", []),
                 obj.get("quantities", []), obj.get("sweeps", []), obj.get("solve_ma", []),
                 obj.get("uniqueness", []))
        sc._validate()
        return sc

    def _validate(self):
        for item_id in self.items:
            try:
                self._build(item_id)
            except LcGeomError as exc:
                raise ConfigError(f"item {item_id!r}: {exc}") from exc
        for c in self.checks:
            self._entry(CHECKS, c["check"], "check", c)
        for c in self.quantities:
            self._entry(QUANTITIES, c["quantity"], "quantity", c)
        for s in self.sweeps:
            if s["item"] not in self.items:
                raise ConfigError(f"sweep {s['id']!r} references unknown item {s['item']!r}")
            if s["quantity"] == "slack":
                if "check" not in s or "param" not in s:
                    raise ConfigError(f"slack sweep {s['id']!r} needs 'check' and 'param'")
                probe = dict(s.get("params", {}))
                probe["gen" if s["param"] == "power_lam" else s["param"]] = 0.0
                self._entry(CHECKS, s["check"], "check", {"items": [s["item"]], "params": probe})
            elif s["quantity"] not in ("as_lambda", "as_p"):
                raise ConfigError(f"unknown sweep quantity {s['quantity']!r}")
            if s["quantity"] == "as_p" or (s["quantity"] == "slack" and s.get("param") == "p"):
                n = self._build(s["item"]).dim
                if any(v == -n for v in _grid(s["grid"])):
                    raise ConfigError(f"sweep {s['id']!r} grid contains p = -n = {-n}")
        ids = {r["id"] for r in self.solve_ma}
        for u in self.uniqueness:
            missing = [r for r in u["runs"] if r not in ids]
            if missing:
                raise ConfigError(f"uniqueness probe references unknown runs {missing}")

    def _entry(self, table, name, what, entry):
        if name not in table:
            raise ConfigError(f"unknown {what} {name!r}; known: {', '.join(sorted(table))}")
        kind, allowed, _ = table[name]
        for i in entry.get("items", []):
            if i not in self.items:
                raise ConfigError(f"{what} {name!r} references unknown item {i!r}")
            if self.items[i][0] != kind:
                raise ConfigError(f"{what} {name!r} needs a {kind}, item {i!r} is a {self.items[i][0]}")
        extra = set(entry.get("params", {})) - set(allowed)
        if extra:
            raise ConfigError(f"{what} {name!r} does not take parameters {sorted(extra)}")

    def _build(self, item_id):
        return _build_obj(*self.items[item_id])

    def _targets(self, table, name, entry):
        kind = table[name][0]
        ids = entry.get("items") or [i for i, (k, _) in self.items.items() if k == kind]
        return ids

    # tasks --------------------------------------------------------------
    def check_tasks(self):
        tasks = []
        for c in self.checks:
            for item in self._targets(CHECKS, c["check"], c):
                for params in _expand(c.get("params", {})):
                    tasks.append(("check", item, self.items[item], c["check"], params))
        return tasks

    def quantity_tasks(self):
        tasks = []
        for c in self.quantities:
            for item in self._targets(QUANTITIES, c["quantity"], c):
                for params in _expand(c.get("params", {})):
                    tasks.append(("quantity", item, self.items[item], c["quantity"], params))
        return tasks

    def sweep_tasks(self):
        tasks = []
        for s in self.sweeps:
            key = {"as_lambda": "lam", "as_p": "p"}.get(s["quantity"], s.get("param"))
            for v in _grid(s["grid"]):
                params = dict(s.get("params", {}), **{key: v})
                if key == "power_lam":
                    params["gen"] = {"tag": "power", "lam": params.pop(key), "offset": -1.0}
                tasks.append(("sweep", s["item"], self.items[s["item"]], s["id"], params))
        return tasks


def _maybe_json(text: str):
    text = text.strip()
    return json.loads(text) if text.startswith("{") else text


def _build_obj(kind, obj):
    try:
        return spec_from_json(obj) if kind == "spec" else B.body_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed {kind} {obj.get('family')!r}: {exc!r}") from exc


def _run_task(task, quad_json, seed, sweep_defs):
    """Worker entry point; everything crossing the process boundary is JSON."""
    what, item, (kind, obj), name, params = task
    quad = QuadratureSpec.from_json(quad_json)
    try:
        target = _build_obj(kind, obj)
        if what == "check":
            reports = CHECKS[name][2](target, params, quad, seed)
            return {"item": item, "check": name, "params": params,
                    "reports": [r.to_json() for r in reports]}
        if what == "quantity":
            value, err = QUANTITIES[name][2](target, params, quad)
            return {"item": item, "quantity": name, "params": params, "value": float(value), "error": float(err)}
        sweep = sweep_defs[name]
        q = sweep["quantity"]
        if q == "as_lambda":
            value, err = D.affine_surface_area(target, params["lam"], quad)
        elif q == "as_p":
            value, err = B.body_affine_surface_area(target, params["p"])
        else:
            rep = CHECKS[sweep["check"]][2](target, params, quad, seed)[0]
            value, err = rep.slack, rep.tolerance / 3.0
        key = {"as_lambda": "lam", "as_p": "p"}.get(q, sweep.get("param"))
        param = params["gen"]["lam"] if key == "power_lam" else params[key]
        return {"sweep": name, "parameter": float(param), "value": float(value), "error": float(err)}
    except LcGeomError as exc:
        label = f"{what} {name!r} on item {item!r} with {params}"
        raise type(exc)(f"{label}: {exc}") from exc


def run_tasks(scenario: Scenario, tasks, jobs: int = 1):
    sweep_defs = {s["id"]: s for s in scenario.sweeps}
    args = (scenario.quad.to_json(), scenario.seed, sweep_defs)
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_task(t, *args) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_task, t, *args) for t in tasks]
        return [f.result() for f in futures]


def _initial_grid(run: dict) -> GridFunction:
    extent = float(run.get("extent", 8.0))
    points = int(run.get("points", 257))
    init = run["initial"]
    if "values" in init:
        return GridFunction((-extent,), (extent,), (points,), np.asarray(init["values"], dtype=float))
    x = np.linspace(-extent, extent, points)
    v = np.zeros_like(x)
    # sum of terms: coeff * |x|^power, plus optional bump amp * cos(freq x) exp(-x^2 / width)
    for term in init.get("terms", []):
        v += float(term["coeff"]) * np.abs(x) ** float(term["power"])
    for bump in init.get("bumps", []):
        v += float(bump["amp"]) * np.cos(float(bump.get("freq", 1.0)) * x) * np.exp(-x * x / float(bump.get("width", 8.0)))
    return GridFunction((-extent,), (extent,), (points,), v)


def run_solver(scenario: Scenario):
    out = []
    for run in scenario.solve_ma:
        res = solve_ma_1d(_initial_grid(run), max_iter=int(run.get("max_iter", 200)),
                          damping=float(run.get("damping", 0.5)), radial_dim=int(run.get("radial_dim", 1)),
                          patience=int(run.get("patience", 20)))
        out.append((run["id"], res))
    results = dict(out)
    probes = []
    for u in scenario.uniqueness:
        rep = compare_runs([results[r] for r in u["runs"]], float(u.get("threshold", 1e-4)))
        probes.append((u["id"], u["runs"], rep))
    return out, probes


__all__ = ["Scenario", "CHECKS", "QUANTITIES", "run_tasks", "run_solver", "load_schema", "bundled_scenario"]
