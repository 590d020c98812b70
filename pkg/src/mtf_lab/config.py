"""JSON run configuration: schema, validation and builders."""

from __future__ import annotations

import copy
import json
import re
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from .fields import Grid3, InteractionKernel, Potential
from .landau import KineticRegime
from .minimizer import MinimizerConfig

COMMANDS = ("pressure", "tau", "minimize", "sweep", "vlasov-check", "weyl")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str = ""):
        super().__init__(message)
        self.key = key


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

# explicit list, or {"start", "stop", "num", "spacing"}
_values = {
    "oneOf": [
        {"type": "array", "items": _num, "minItems": 1},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["start", "stop", "num"],
            "properties": {
                "start": _num, "stop": _num,
                "num": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["linear", "log"]},
            },
        },
    ]
}


def _values_of(item_schema) -> dict:
    out = copy.deepcopy(_values)
    out["oneOf"][0]["items"] = item_schema
    out["oneOf"][1]["properties"]["start"] = item_schema
    out["oneOf"][1]["properties"]["stop"] = item_schema
    return out


_triple_pos = {"oneOf": [_pos, {"type": "array", "items": _pos, "minItems": 3, "maxItems": 3}]}
_triple_even = {"oneOf": [
    {"type": "integer", "minimum": 2, "multipleOf": 2},
    {"type": "array", "items": {"type": "integer", "minimum": 2, "multipleOf": 2}, "minItems": 3, "maxItems": 3},
]}

GRID = {
    "type": "object", "additionalProperties": False, "required": ["extent", "points"],
    "properties": {"extent": _triple_pos, "points": _triple_even},
}

REGIME = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["kind", "beta"],
         "properties": {"kind": {"const": "MTF"}, "beta": _pos}},
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"enum": ["TF", "STF"]}}},
    ]
}

POTENTIAL = {
    "type": "object", "additionalProperties": False, "required": ["kind"],
    "properties": {
        "kind": {"enum": ["harmonic", "quartic", "radial", "tabulated"]},
        "stiffness": _pos, "coefficient": _pos,
        "radii": {"type": "array", "items": _nonneg, "minItems": 2},
        "values": {"type": "array", "items": _num, "minItems": 2},
        "file": {"type": "string"},
        "offset": _num,
    },
}

KERNEL = {
    "type": "object", "additionalProperties": False, "required": ["kind"],
    "properties": {
        "kind": {"enum": ["none", "gaussian", "yukawa", "coulomb"]},
        "amplitude": _num, "width": _pos, "screening": _pos,
    },
}

SOLVER = {
    "type": "object", "additionalProperties": False,
    "properties": {
        "mixing": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "max_iter": {"type": "integer", "minimum": 1},
        "tol_density": _pos, "tol_mass": _pos,
        "mu_bracket": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
    },
}

PROFILE = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"const": "harmonic"}, "curvature": _pos, "depth": _num}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "value"],
         "properties": {"kind": {"const": "constant"}, "value": _num}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "depth", "half_width"],
         "properties": {"kind": {"const": "square_well"}, "depth": _num, "half_width": _pos}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "z", "v"],
         "properties": {"kind": {"const": "table"},
                        "z": {"type": "array", "items": _num, "minItems": 2},
                        "v": {"type": "array", "items": _num, "minItems": 2}}},
    ]
}

_problem = {"grid": GRID, "potential": POTENTIAL, "kernel": KERNEL, "solver": SOLVER}

PARAMETERS = {
    "pressure": {
        "type": "object", "additionalProperties": False, "required": ["B", "nu"],
        "properties": {"B": _values_of(_pos), "nu": _values_of(_nonneg), "spin": {"type": "boolean"}},
    },
    "tau": {
        "type": "object", "additionalProperties": False, "required": ["regimes", "t"],
        "properties": {"regimes": {"type": "array", "items": REGIME, "minItems": 1}, "t": _values_of(_nonneg)},
    },
    "minimize": {
        "type": "object", "additionalProperties": False, "required": ["grid", "regime", "potential"],
        "properties": dict(_problem, regime=REGIME),
    },
    "sweep": {
        "type": "object", "additionalProperties": False, "required": ["grid", "potential", "betas"],
        "properties": dict(_problem, betas=_values_of(_pos), endpoints={"type": "boolean"}),
    },
    "vlasov-check": {
        "type": "object", "additionalProperties": False, "required": ["grid", "potential", "betas"],
        "properties": dict(_problem, betas=_values_of(_pos),
                           spot_checks={"type": "integer", "minimum": 0},
                           quadrature_intervals={"type": "integer", "minimum": 2, "multipleOf": 2}),
    },
    "weyl": {
        "type": "object", "additionalProperties": False,
        "required": ["profile", "half_length", "hbars", "b_rule", "value"],
        "properties": {
            "profile": PROFILE, "half_length": _pos, "area": _pos,
            "hbars": _values_of(_pos), "b_rule": {"enum": ["fixed_b", "fixed_hbar_b"]}, "value": _nonneg,
            "z_points": {"type": "integer", "minimum": 64}, "per_band": {"type": "boolean"},
        },
    },
}


def schema(command: str) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"mtf-lab {command} configuration",
        "type": "object",
        "additionalProperties": False,
        "required": ["parameters"],
        "properties": {
            "command": {"const": command},
            "parameters": PARAMETERS[command],
            "output_dir": {"type": "string"},
            "seed": {"type": "integer", "minimum": 0},
        },
    }


def _error_key(err) -> str:
    path = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties":
        extra = re.findall(r"'([^']+)' was unexpected", err.message)
        path += extra[:1]
    elif err.validator == "required":
        missing = re.findall(r"'([^']+)' is a required property", err.message)
        path += missing[:1]
    return ".".join(path)


def _deepest(err):
    # oneOf failures: descend into the branch that got furthest
    while err.context:
        err = max(err.context, key=lambda e: (len(e.absolute_path), -len(e.context or [])))
    return err


def validate(config: dict, command: str) -> dict:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", "command")
    if not isinstance(config, dict):
        raise ConfigError("configuration must be a JSON object")
    errors = sorted(Draft202012Validator(schema(command)).iter_errors(config),
                    key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = _deepest(errors[0])
        raise ConfigError(err.message, _error_key(err))
    return config


def load(path, command: str) -> dict:
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} not found", "config")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", "config")
    return validate(config, command)


# ---------------------------------------------------------------------------
# builders


def values(spec, key: str = "") -> list:
    if isinstance(spec, list):
        return [float(x) for x in spec]
    start, stop, num = spec["start"], spec["stop"], spec["num"]
    if spec.get("spacing", "linear") == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log spacing needs positive start and stop", key)
        return [float(x) for x in np.logspace(np.log10(start), np.log10(stop), num)]
    return [float(x) for x in np.linspace(start, stop, num)]


def grid(spec) -> Grid3:
    return Grid3(spec["extent"], spec["points"])


def regime(spec) -> KineticRegime:
    if spec["kind"] == "MTF":
        return KineticRegime.mtf(spec["beta"])
    return KineticRegime.tf() if spec["kind"] == "TF" else KineticRegime.stf()


def potential(spec, g: Grid3, base: Path = Path(".")) -> Potential:
    kind = spec["kind"]
    offset = spec.get("offset", 0.0)
    try:
        if kind == "harmonic":
            return Potential.harmonic(spec.get("stiffness", 1.0), offset)
        if kind == "quartic":
            return Potential.quartic(spec.get("coefficient", 1.0), offset)
        if kind == "radial":
            if "radii" not in spec or "values" not in spec:
                raise ConfigError("radial potential needs radii and values", "parameters.potential.radii")
            return Potential.radial(spec["radii"], spec["values"], offset)
        if "file" not in spec:
            raise ConfigError("tabulated potential needs a file", "parameters.potential.file")
        from .io import read_grid_field
        fg, vals, _ = read_grid_field(base / spec["file"])
        if fg.shape != g.shape or not np.allclose(fg.extent, g.extent):
            raise ConfigError("tabulated potential grid differs from the run grid", "parameters.potential.file")
        return Potential.tabulated(vals, offset)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc), "parameters.potential")


def kernel(spec) -> InteractionKernel:
    if spec is None or spec["kind"] == "none":
        return InteractionKernel.none()
    kind = spec["kind"]
    try:
        if kind == "gaussian":
            return InteractionKernel.gaussian(spec.get("amplitude", 1.0), spec.get("width", 1.0))
        if kind == "yukawa":
            return InteractionKernel.yukawa(spec.get("amplitude", 1.0), spec.get("screening", 1.0))
        return InteractionKernel.coulomb(spec.get("amplitude", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc), "parameters.kernel")


def solver(spec) -> MinimizerConfig:
    spec = dict(spec or {})
    if "mu_bracket" in spec:
        spec["mu_bracket"] = tuple(spec["mu_bracket"])
    try:
        return MinimizerConfig(**spec)
    except ValueError as exc:
        raise ConfigError(str(exc), "parameters.solver")
