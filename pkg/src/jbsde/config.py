"""JSON scenario configuration: schema validation and object construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .generators import build_named_generator
from .measures import (MarkMeasure, TimeGrid, ZetaDensity, build_mark_measure,
                       truncate_measure)
from .solvers import SolveConfig


class ConfigError(ValueError):
    pass


_MODEL_KEYS = {"T", "steps", "d", "marks", "weights", "zeta", "seed", "terminal"}
_GENERATOR_KEYS = {"kind", "params"}
_SOLVER_KEYS = {"backend", "n_paths", "basis_degree", "picard_tol",
                "picard_max", "state_cap", "scheme"}
_MARKET_KEYS = {"d", "k", "sigma", "phi", "beta", "psi", "S0", "K", "alpha",
                "gamma", "constraint", "x0"}
_OUTPUT_KEYS = {"dir", "formats", "prefix"}
_TOP_KEYS = {"model", "generator", "solver", "market", "output"}
_TERMINAL_KINDS = {"constant", "jump_count", "weighted_jump_count",
                   "tanh_brownian"}
_GENERATOR_KINDS = {"entropic", "exp_utility", "exp_utility_purejump",
                    "power_transformed", "linear", "gooddeal"}


def _check_keys(block: dict, allowed: set, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


@dataclass
class ScenarioConfig:
    model: dict
    generator: dict
    solver: dict
    output: dict
    market: dict | None = None

    def grid(self) -> TimeGrid:
        return TimeGrid(float(self.model["T"]), int(self.model["steps"]))

    def mark_measure(self) -> MarkMeasure:
        marks = self.model.get("marks", [])
        if not len(marks):
            # no-jump model: empty support
            return truncate_measure(build_mark_measure([1.0], [1.0]),
                                    lambda e: False)
        return build_mark_measure(marks, self.model.get("weights", []))

    def zeta(self) -> ZetaDensity:
        spec = self.model.get("zeta", {"kind": "constant", "value": 1.0})
        if spec.get("kind") != "constant":
            raise ConfigError("only constant zeta densities are configurable")
        return ZetaDensity.constant(float(spec.get("value", 1.0)))

    def solve_config(self) -> SolveConfig:
        s = self.solver
        kw = {}
        for key in ("picard_tol", "picard_max", "basis_degree", "n_paths",
                    "state_cap", "scheme"):
            if key in s:
                kw[key] = s[key]
        return SolveConfig(**kw)

    def generator_spec(self):
        return build_named_generator(self.generator["kind"],
                                     self.generator.get("params", {}))

    def terminal(self, backend: str):
        """Build the terminal-condition callable for the requested backend."""
        spec = self.model.get("terminal", {"kind": "constant", "value": 0.0})
        kind = spec.get("kind", "constant")
        if kind == "constant":
            v = float(spec.get("value", 0.0))
            if backend == "lattice":
                return lambda states: np.full(len(states), v)
            return lambda pb: np.full(pb.n_paths, v)
        if kind == "jump_count":
            scale = float(spec.get("scale", 1.0))
            if backend == "lattice":
                return lambda states: scale * states.sum(axis=1).astype(float)
            return lambda pb: scale * pb.jump_counts()[:, -1, :].sum(axis=1).astype(float)
        if kind == "weighted_jump_count":
            coeffs = np.asarray(spec["coeffs"], dtype=float)
            if backend == "lattice":
                return lambda states: states.astype(float) @ coeffs
            return lambda pb: pb.jump_counts()[:, -1, :].astype(float) @ coeffs
        if kind == "tanh_brownian":
            scale = float(spec.get("scale", 1.0))
            if backend == "lattice":
                raise ConfigError("tanh_brownian terminal needs the lsmc backend")
            return lambda pb: scale * np.tanh(pb.brownian_levels()[:, -1, 0])
        raise ConfigError(f"unknown terminal kind {kind!r}")

    def canonical(self) -> dict:
        out = {"model": self.model, "generator": self.generator,
               "solver": self.solver, "output": self.output}
        if self.market is not None:
            out["market"] = self.market
        return out


def parse_config(text: str) -> ScenarioConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _check_keys(raw, _TOP_KEYS, "top level")
    for block in ("model", "generator", "solver", "output"):
        if block not in raw:
            raise ConfigError(f"missing required block {block!r}")
    model = raw["model"]
    _check_keys(model, _MODEL_KEYS, "model")
    for req in ("T", "steps"):
        if req not in model:
            raise ConfigError(f"model.{req} is required")
    if float(model["T"]) <= 0 or int(model["steps"]) < 1:
        raise ConfigError("model.T must be > 0 and model.steps >= 1")
    if "terminal" in model:
        _check_keys(model["terminal"],
                    {"kind", "value", "scale", "coeffs", "params"},
                    "model.terminal")
        if model["terminal"].get("kind", "constant") not in _TERMINAL_KINDS:
            raise ConfigError(
                f"unknown terminal kind {model['terminal'].get('kind')!r}")
    if "zeta" in model:
        _check_keys(model["zeta"], {"kind", "value"}, "model.zeta")
    marks = model.get("marks", [])
    weights = model.get("weights", [])
    if len(marks) != len(weights):
        raise ConfigError("model.marks and model.weights must have equal length")
    gen = raw["generator"]
    _check_keys(gen, _GENERATOR_KEYS, "generator")
    if gen.get("kind") not in _GENERATOR_KINDS:
        raise ConfigError(f"unknown generator kind {gen.get('kind')!r}")
    solver = raw["solver"]
    _check_keys(solver, _SOLVER_KEYS, "solver")
    if solver.get("backend", "lattice") not in ("lattice", "lsmc"):
        raise ConfigError(f"unknown solver backend {solver.get('backend')!r}")
    output = raw["output"]
    _check_keys(output, _OUTPUT_KEYS, "output")
    market = raw.get("market")
    if market is not None:
        _check_keys(market, _MARKET_KEYS, "market")
    cfg = ScenarioConfig(model=model, generator=gen, solver=solver,
                         output=output, market=market)
    # cross-field feasibility checks that need several blocks at once
    if gen["kind"] == "gooddeal":
        mkt = market or {}
        K = float(mkt.get("K", gen.get("params", {}).get("K", 0.0)))
        phi = np.atleast_1d(np.asarray(mkt.get("phi", 0.0), dtype=float))
        if K <= float(np.linalg.norm(phi)):
            raise ConfigError("good-deal config infeasible: need K > |phi|")
    if solver.get("backend", "lattice") == "lattice" and not marks:
        term = model.get("terminal", {}).get("kind", "constant")
        if term == "tanh_brownian":
            raise ConfigError("lattice backend cannot price Brownian claims")
    return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.canonical(), indent=2, sort_keys=True) + "\n"
