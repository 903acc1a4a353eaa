"""Scenario files: YAML documents describing one problem and the studies to run on it."""

from __future__ import annotations

import copy
import inspect
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import rng
from .noise import DomainError, validate_hurst
from .paths import GridError, TimeGrid
from .sde import SDEProblem, coefficient_registry, make_coefficients

TOP_KEYS = {"name", "description", "problem", "grid", "alpha", "seeds", "mc_budget", "study", "audit",
            "hoelder", "outputs"}
PROBLEM_KEYS = {"family", "params", "x0", "x0_random", "T", "H"}
GRID_KEYS = {"n", "kind", "nodes", "method"}
AUDIT_KINDS = {"estimates", "pair", "gfa1", "moment", "delta_lemma"}


class ConfigError(ValueError):
    def __init__(self, diagnostics: list):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Scenario:
    name: str
    raw: dict
    problem: SDEProblem
    grid: TimeGrid
    seeds: dict
    alpha: float | None
    mc_budget: int

    @property
    def study(self) -> dict:
        return self.raw.get("study", {})

    @property
    def audit(self) -> dict:
        return self.raw.get("audit", {})

    @property
    def hoelder(self) -> dict:
        return self.raw.get("hoelder", {})


def load_yaml(path) -> dict:
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    return data


def apply_overrides(raw: dict, n=None, seed=None, alpha=None, mc_budget=None) -> dict:
    raw = copy.deepcopy(raw)
    if n is not None:
        raw.setdefault("grid", {})["n"] = int(n)
    if seed is not None:
        raw.setdefault("seeds", {})["noise"] = int(seed)
    if alpha is not None:
        raw["alpha"] = float(alpha)
    if mc_budget is not None:
        raw["mc_budget"] = int(mc_budget)
    return raw


def _num(d, key, diags, where, kind=float, default=None):
    v = d.get(key, default)
    if v is None:
        return None
    try:
        return kind(v)
    except (TypeError, ValueError):
        diags.append(f"{where}.{key}: expected {kind.__name__}, got {v!r}")
        return None


def validate_raw(raw: dict) -> list:
    """Every schema and cross-reference problem in ``raw``; empty when valid."""
    diags = []
    for k in sorted(set(raw) - TOP_KEYS):
        diags.append(f"unknown top-level key {k!r}")
    if not isinstance(raw.get("name", ""), str):
        diags.append("name: must be a string")

    prob = raw.get("problem")
    H = d = None
    constants = {}
    if not isinstance(prob, dict):
        diags.append("problem: missing or not a mapping")
        prob = {}
    for k in sorted(set(prob) - PROBLEM_KEYS):
        diags.append(f"problem: unknown key {k!r}")
    fam = prob.get("family")
    reg = coefficient_registry()
    if fam is None:
        diags.append("problem.family: missing")
    elif fam not in reg:
        diags.append(f"problem.family: unknown coefficient family {fam!r} (known: {', '.join(sorted(reg))})")
    else:
        params = prob.get("params", {}) or {}
        allowed = set(inspect.signature(reg[fam].factory).parameters)
        bad = set(params) - allowed
        if bad:
            diags.append(f"problem.params: {fam} has no parameters {sorted(bad)} (allowed: {sorted(allowed)})")
        else:
            try:
                cs = make_coefficients(fam, **params)
                d, constants = cs.d, cs.constants
            except (TypeError, ValueError) as exc:
                diags.append(f"problem.params: {exc}")
    H = _num(prob, "H", diags, "problem")
    if H is None:
        diags.append("problem.H: missing")
    else:
        try:
            validate_hurst(H)
        except DomainError:
            diags.append(f"problem.H: H must lie in (1/2,1), got {H}")
            H = None
    T = _num(prob, "T", diags, "problem", default=1.0)
    if T is not None and not T > 0:
        diags.append(f"problem.T: horizon must be positive, got {T}")
    if "x0" in prob and "x0_random" in prob:
        diags.append("problem: give x0 or x0_random, not both")
    if "x0_random" in prob:
        xr = prob["x0_random"] or {}
        mean = np.atleast_1d(np.asarray(xr.get("mean", 0.0), dtype=float))
        std = np.atleast_1d(np.asarray(xr.get("std", 1.0), dtype=float))
        if d is not None and (mean.size not in (1, d) or std.size not in (1, d)):
            diags.append(f"problem.x0_random: mean/std must have length 1 or {d}")
        if np.any(std < 0):
            diags.append("problem.x0_random.std: must be non-negative")
    else:
        x0 = np.atleast_1d(np.asarray(prob.get("x0", 0.0), dtype=float))
        if d is not None and x0.size not in (1, d):
            diags.append(f"problem.x0: length {x0.size} does not match dimension d={d}")

    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        diags.append("grid: must be a mapping")
        grid = {}
    for k in sorted(set(grid) - GRID_KEYS):
        diags.append(f"grid: unknown key {k!r}")
    if "nodes" in grid:
        try:
            g = TimeGrid(grid["nodes"])
            if T is not None and abs(g.T - T) > 1e-12 * T:
                diags.append(f"grid.nodes: last node {g.T} differs from T={T}")
        except (GridError, TypeError, ValueError) as exc:
            diags.append(f"grid.nodes: {exc}")
    else:
        n = _num(grid, "n", diags, "grid", int, 256)
        if n is not None and n < 1:
            diags.append(f"grid.n: need at least one cell, got {n}")
        if grid.get("kind", "uniform") not in ("uniform", "geometric"):
            diags.append(f"grid.kind: expected uniform or geometric, got {grid.get('kind')!r}")
    if grid.get("method", "auto") not in ("auto", "cholesky", "circulant"):
        diags.append(f"grid.method: unknown fBm method {grid.get('method')!r}")

    alpha = _num(raw, "alpha", diags, "config")
    if alpha is not None:
        if not 0.0 < alpha < 0.5:
            diags.append(f"alpha: must lie in (0, 1/2), got {alpha}")
        if H is not None and not alpha > 1.0 - H:
            diags.append(f"alpha: alpha must exceed 1-H={1.0 - H:.6g}, got {alpha}")
        if constants:
            lim = min(constants.get("beta", 1.0), constants.get("delta", 1.0) / 2)
            if not alpha < lim:
                diags.append(f"alpha: must stay below min(beta, delta/2)={lim:.6g} for this family, got {alpha}")

    seeds = raw.get("seeds", {})
    if not isinstance(seeds, dict):
        diags.append("seeds: must be a mapping")
        seeds = {}
    for k, v in seeds.items():
        vals = v if isinstance(v, list) else [v]
        for s in vals:
            if not isinstance(s, int) or isinstance(s, bool) or s < 0:
                diags.append(f"seeds.{k}: seeds must be non-negative integers, got {s!r}")

    mc = _num(raw, "mc_budget", diags, "config", int)
    if mc is not None and mc < 1:
        diags.append(f"mc_budget: must be positive, got {mc}")

    study = raw.get("study", {}) or {}
    if "ns" in study:
        ns = study["ns"]
        if not isinstance(ns, list) or not all(isinstance(v, int) and v > 0 for v in ns):
            diags.append("study.ns: must be a list of positive integers")
        elif len(set(ns)) < 5:
            diags.append("study.ns: a convergence fit needs at least 5 distinct grid sizes")
        elif any(max(ns) % v for v in ns):
            diags.append("study.ns: every grid size must divide the largest")
    audit = raw.get("audit", {}) or {}
    if audit and audit.get("kind") not in AUDIT_KINDS:
        diags.append(f"audit.kind: expected one of {sorted(AUDIT_KINDS)}, got {audit.get('kind')!r}")
    if audit.get("kind") == "estimates" and mc is not None and mc < 1000:
        diags.append(f"mc_budget: estimate audits need at least 1000 replicas, got {mc}")
    if audit.get("kind") in ("estimates", "pair") and alpha is None:
        diags.append("alpha: required for this audit")
    return diags


def validate_config(path) -> list:
    """Diagnostics for the scenario file at ``path`` (raises ``FileNotFoundError`` if absent)."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such config file: {path}")
    try:
        raw = load_yaml(p)
    except yaml.YAMLError as exc:
        return [f"YAML parse error: {exc}"]
    except ConfigError as exc:
        return exc.diagnostics
    return validate_raw(raw)


def _x0(prob: dict, d: int, seed: int) -> np.ndarray:
    if "x0_random" in prob:
        xr = prob["x0_random"] or {}
        mean = np.broadcast_to(np.asarray(xr.get("mean", 0.0), dtype=float), (d,))
        std = np.broadcast_to(np.asarray(xr.get("std", 1.0), dtype=float), (d,))
        return mean + std * rng.normals(seed, "x0", 0, 0, d)
    return np.broadcast_to(np.asarray(prob.get("x0", 0.0), dtype=float), (d,)).copy()


def build_scenario(raw: dict, name: str = "scenario") -> Scenario:
    diags = validate_raw(raw)
    if diags:
        raise ConfigError(diags)
    prob = raw["problem"]
    cs = make_coefficients(prob["family"], **(prob.get("params") or {}))
    seeds = {"noise": 0, "mc": 1}
    seeds.update(raw.get("seeds", {}))
    T = float(prob.get("T", 1.0))
    problem = SDEProblem(cs, _x0(prob, cs.d, seeds["noise"]), T, float(prob["H"]))
    g = raw.get("grid", {})
    if "nodes" in g:
        grid = TimeGrid(g["nodes"])
    elif g.get("kind", "uniform") == "geometric":
        grid = TimeGrid.geometric_grid(T, int(g.get("n", 256)))
    else:
        grid = TimeGrid.uniform_grid(T, int(g.get("n", 256)))
    alpha = raw.get("alpha")
    return Scenario(raw.get("name", name), raw, problem, grid, seeds,
                    None if alpha is None else float(alpha), int(raw.get("mc_budget", 2000)))


def load_scenario(path, **overrides) -> Scenario:
    raw = apply_overrides(load_yaml(path), **overrides)
    return build_scenario(raw, Path(path).stem)
