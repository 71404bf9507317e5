"""Experiment configuration: TOML in, validated and fully materialized JSON out."""
from __future__ import annotations

import copy
import hashlib
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .force import SpectralMeasure
from .lattice import InteractionKernel
from .propagator import ChainState
from .simulator import SimConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_NUM = {"type": "number"}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_SITE_VALUES = {"type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer"}, _NUM], "minItems": 2, "maxItems": 2}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["kernel", "measure"],
    "properties": {
        "scenario": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "kernel": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a"],
            "properties": {"a": {"type": "array", "items": _NUM, "minItems": 1}},
        },
        "measure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "atoms": {"type": "array", "items": _PAIR},
                "panels": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["interval", "poly"],
                        "properties": {"interval": _PAIR, "poly": {"type": "array", "items": _NUM, "minItems": 1}},
                    },
                },
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 1},
                "T": {"type": "number", "minimum": 0},
                "site": {"type": "integer", "minimum": 0},
                "boundary": {"enum": ["periodic", "free"]},
                "integrator": {"enum": ["mode_exact", "verlet"]},
                "dt": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "replicas": {"type": "integer", "minimum": 1},
                "sample_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "synthesis": {"enum": ["gaussian_amplitudes", "random_phases"]},
                "n_density_terms": {"type": "integer", "minimum": 1},
                "initial": {
                    "oneOf": [
                        {"const": "zero"},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["type", "seed", "scale"],
                            "properties": {"type": {"const": "random"}, "seed": {"type": "integer", "minimum": 0}, "scale": _NUM},
                        },
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["type"],
                            "properties": {"type": {"const": "explicit"}, "q": _SITE_VALUES, "p": _SITE_VALUES},
                        },
                    ]
                },
                "epsilon_times": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "window": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "n_lambda": {"type": "integer", "minimum": 16},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

DEFAULTS = {
    "scenario": "custom",
    "seed": 0,
    "measure": {"atoms": [], "panels": []},
    "simulation": {
        "N": 64,
        "T": 200.0,
        "site": 0,
        "boundary": "periodic",
        "integrator": "mode_exact",
        "dt": None,
        "replicas": 2000,
        "sample_times": [],
        "synthesis": "gaussian_amplitudes",
        "n_density_terms": 16,
        "initial": "zero",
        # epsilon study on its own long ring: [t_min, t_max, N]
        "epsilon_times": [10.0, 500.0, 2048],
    },
    "analysis": {"window": [-12, 12], "n_lambda": 4096},
    "output": {"dir": "out"},
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(raw: dict) -> dict:
    """Schema-check ``raw`` and return it with every default filled in."""
    errors = sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}")
    cfg = _merge(DEFAULTS, raw)
    _VALIDATOR.validate(cfg)
    return cfg


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return validate(raw)


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    """sha256 prefix of the canonical config, output location excluded."""
    body = {k: v for k, v in cfg.items() if k != "output"}
    return hashlib.sha256(canonical_json(body).encode()).hexdigest()[:16]


def kernel_of(cfg) -> InteractionKernel:
    return InteractionKernel.from_config(cfg["kernel"])


def measure_of(cfg) -> SpectralMeasure:
    return SpectralMeasure.from_config(cfg["measure"])


def initial_of(sim: dict):
    init = sim["initial"]
    if init == "zero":
        return "zero"
    if init["type"] == "random":
        return {"random": {"seed": init["seed"], "scale": init["scale"]}}
    N = sim["N"]
    q = np.zeros(N)
    p = np.zeros(N)
    for arr, key in ((q, "q"), (p, "p")):
        for k, v in init.get(key, []):
            if not 0 <= k < N:
                raise ConfigError(f"initial {key} site {k} outside 0..{N - 1}")
            arr[k] = v
    return ChainState(q, p)


def sim_config_of(cfg) -> SimConfig:
    s = cfg["simulation"]
    return SimConfig(
        N=s["N"],
        T=float(s["T"]),
        site=s["site"],
        boundary=s["boundary"],
        sample_times=tuple(s["sample_times"]),
        integrator=s["integrator"],
        dt=s["dt"],
        initial=initial_of(s),
    )
