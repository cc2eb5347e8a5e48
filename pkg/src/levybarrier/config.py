"""Model configuration: a small key-tree text format.

One file drives every command.  Sections are bracketed dotted paths and each
line is `key = value` with Python-literal values, e.g.

    [levy.calm]
    drift_mu = -0.5
    sigma = 1.0
    jump_rate = 1.0
    jump_mix = [[1.0, 2.0]]

    [chain]
    states = ["calm", "stress"]
    switch_rates = [[0.0, 1.0], [0.5, 0.0]]
    discounts = [0.1, 0.15]

    [jumps.calm.stress]
    kind = "hyperexp"
    weights = [1.0]
    rates = [3.0]

    [problem]
    phi = 1.5
    lambda = 0.0
    delta = 1.0
    payoff_knots = [[0.0, 0.0], [1.0, 1.0]]
    payoff_tail_slope = 1.0

Parse errors carry the offending line number.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ModelError
from .levy import LevySpec
from .payoff import ConcavePayoff, make_payoff
from .regime import RegimeModel, SwitchJump
from .simulate import SimConfig


class ConfigError(ModelError):
    """Config file rejected; message is line-anchored where possible."""


def parse_config(text: str) -> dict:
    """Parse the key-tree text into a nested dict of sections."""
    tree: dict = {}
    section: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: unterminated section header")
            path = line[1:-1].strip()
            if not path:
                raise ConfigError(f"line {lineno}: empty section name")
            section = tree
            for part in path.split("."):
                section = section.setdefault(part, {})
                if not isinstance(section, dict):
                    raise ConfigError(f"line {lineno}: section clashes with key")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, _, val = line.partition("=")
        key = key.strip()
        try:
            section[key] = ast.literal_eval(val.strip())
        except (ValueError, SyntaxError):
            raise ConfigError(f"line {lineno}: bad value for {key!r}") from None
    return tree


def serialize_config(tree: dict) -> str:
    """Inverse of parse_config (parse(serialize(parse(t))) == parse(t))."""
    lines: list[str] = []

    def emit(prefix: str, node: dict) -> None:
        scalars = {k: v for k, v in node.items() if not isinstance(v, dict)}
        subs = {k: v for k, v in node.items() if isinstance(v, dict)}
        if scalars or not subs:
            lines.append(f"[{prefix}]")
            for k, v in scalars.items():
                lines.append(f"{k} = {v!r}")
            lines.append("")
        for k, v in subs.items():
            emit(f"{prefix}.{k}" if prefix else k, v)

    for k, v in tree.items():
        if isinstance(v, dict):
            emit(k, v)
        else:
            raise ConfigError("top-level keys must live in a section")
    return "\n".join(lines)


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}.{key}: required")
    return section[key]


def levy_spec_from(section: dict, where: str) -> LevySpec:
    mix = section.get("jump_mix", [])
    try:
        mix = tuple((float(w), float(r)) for w, r in mix)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.jump_mix: expected [[weight, rate], ...]") \
            from None
    return LevySpec(drift_mu=float(_require(section, "drift_mu", where)),
                    sigma=float(section.get("sigma", 0.0)),
                    jump_rate=float(section.get("jump_rate", 0.0)),
                    jump_mix=mix)


def payoff_from(problem: dict) -> ConcavePayoff:
    knots = problem.get("payoff_knots", [[0.0, 0.0], [1.0, 1.0]])
    tail = problem.get("payoff_tail_slope", 1.0)
    return make_payoff(knots, float(tail))


def phi_from(problem: dict) -> float:
    phi = float(_require(problem, "phi", "problem"))
    if phi <= 1.0:
        raise ConfigError("problem.phi: phi must exceed 1")
    return phi


def aux_inputs_from(tree: dict, state: str | None = None):
    """(LevySpec, lam, delta, phi, payoff) for the single-regime commands."""
    levy_sections = tree.get("levy")
    if not levy_sections:
        raise ConfigError("levy: required")
    if state is None:
        state = next(iter(levy_sections))
    if state not in levy_sections:
        raise ConfigError(f"levy.{state}: unknown state")
    spec = levy_spec_from(levy_sections[state], f"levy.{state}")
    problem = tree.get("problem")
    if problem is None:
        raise ConfigError("problem: required")
    phi = phi_from(problem)
    lam = float(problem.get("lambda", 0.0))
    delta = float(_require(problem, "delta", "problem"))
    return spec, lam, delta, phi, payoff_from(problem)


def regime_model_from(tree: dict) -> RegimeModel:
    chain = tree.get("chain")
    if chain is None:
        raise ConfigError("chain: required")
    states = tuple(str(s) for s in _require(chain, "states", "chain"))
    rates = np.asarray(_require(chain, "switch_rates", "chain"), dtype=float)
    discounts = np.asarray(_require(chain, "discounts", "chain"), dtype=float)
    levy_sections = tree.get("levy", {})
    specs = []
    for s in states:
        if s not in levy_sections:
            raise ConfigError(f"levy.{s}: required")
        specs.append(levy_spec_from(levy_sections[s], f"levy.{s}"))
    problem = tree.get("problem")
    if problem is None:
        raise ConfigError("problem: required")
    phi = phi_from(problem)
    jumps: dict = {}
    idx = {s: i for i, s in enumerate(states)}
    for si, node in tree.get("jumps", {}).items():
        if si not in idx:
            raise ConfigError(f"jumps.{si}: unknown state")
        for sj, spec_node in node.items():
            if sj not in idx:
                raise ConfigError(f"jumps.{si}.{sj}: unknown state")
            kind = spec_node.get("kind", "none")
            if kind == "none":
                jump = SwitchJump("none")
            elif kind == "hyperexp":
                ws = _require(spec_node, "weights", f"jumps.{si}.{sj}")
                rs = _require(spec_node, "rates", f"jumps.{si}.{sj}")
                jump = SwitchJump("hyperexp",
                                  tuple(zip(map(float, ws), map(float, rs))))
            else:
                raise ConfigError(f"jumps.{si}.{sj}.kind: unknown kind {kind!r}")
            jumps[(idx[si], idx[sj])] = jump
    return RegimeModel(states=states, switch_rates=rates, discounts=discounts,
                       levy=tuple(specs), switch_jumps=jumps, phi=phi)


def solver_options_from(tree: dict) -> dict:
    solver = tree.get("solver", {})
    return {"tol": float(solver.get("tol", 1e-8)),
            "max_iter": int(solver.get("max_iter", 500)),
            "grid_points": int(solver.get("grid_points", 2000))}


def sim_config_from(tree: dict, **overrides) -> SimConfig:
    sim = dict(tree.get("sim", {}))
    sim.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig(n_paths=int(sim.get("paths", 100_000)),
                         dt=float(sim.get("dt", 1e-3)),
                         t_max=float(sim.get("tmax", 20.0)),
                         rng_seed=int(sim.get("seed", 0)),
                         antithetic=bool(sim.get("antithetic", False)))
    except (TypeError, ValueError):
        raise ConfigError("sim: bad field") from None
