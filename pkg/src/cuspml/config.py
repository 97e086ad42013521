"""Experiment configs: JSON presets shipped with the package, user overrides, schema validation."""
from __future__ import annotations

import copy
import json
from importlib import resources

import jsonschema

from .experiments import EXPERIMENTS


class ConfigError(ValueError):
    pass


_pos = {"type": "number", "exclusiveMinimum": 0}
_num = {"type": "number"}
_int = {"type": "integer", "minimum": 0}
_hlist = {"type": "array", "items": _pos, "minItems": 1}
_recipe = {"type": "object", "required": ["name"], "additionalProperties": False,
           "properties": {"name": {"type": "string"}, "params": {"type": "object"}}}
_grid = {"type": "object", "additionalProperties": False, "properties": {"fac": _pos, "pad": _pos}}


def _obj(required, optional=None):
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "additionalProperties": False, "required": sorted(required), "properties": props}


PARAM_SCHEMAS = {
    1: _obj({"symbols": {"type": "array", "items": _recipe, "minItems": 1}, "h_list": _hlist, "grid": _grid,
             "tol": _pos}),
    2: _obj({"symbols": {"type": "array", "items": _recipe, "minItems": 2, "maxItems": 2}, "h_list": _hlist,
             "grid": _grid, "thresholds": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}}),
    3: _obj({"symbols": {"type": "array", "items": _recipe, "minItems": 2, "maxItems": 2}, "h_list": _hlist,
             "grid": _grid, "threshold": _num}),
    4: _obj({"symbol": _recipe, "h_list": _hlist, "grid": _grid, "h_check": _pos, "slack": _num}),
    5: _obj({"symbol": _recipe, "h": _pos, "grid": _grid, "tol": _pos}),
    6: _obj({"symbol": _recipe, "cutoff_s": _num, "h_list": _hlist, "grid": _grid, "threshold": _num}),
    7: _obj({"symbol": _recipe, "h_list": _hlist, "grid": _grid, "delta": _pos, "threshold": _num}),
    8: _obj({"cutoff": _recipe, "p0": _pos, "w": _pos, "order": {"enum": [2, 4, 6, 8, "sinc"]}, "h_list": _hlist,
             "grid": _grid, "threshold": _num}),
    9: _obj({"symbol": _recipe, "h_list": _hlist, "t": _num, "s": _num, "tol": _pos}),
    10: _obj({"symbol": _recipe, "invariant_symbol": _recipe,
              "window": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2}, "h_list": _hlist,
              "t": _num, "bounded_slope": _num, "invariant_threshold": _num}),
    11: _obj({"symbol": _recipe, "h_list": _hlist, "rho": {"type": "number", "minimum": 0}, "shell": _pos},
             {"lam": {"type": ["number", "null"]}, "rho_compare": {"type": ["number", "null"]}}),
    12: _obj({"energy": _pos, "T": _pos, "tol_lambda": _pos, "t": _num, "kappa": _pos, "tol_homogeneity": _pos}),
    13: _obj({"n_points": {"type": "integer", "minimum": 1}, "tol_zeta": _pos, "tol_xi": _pos, "tol_phi": _pos,
              "tol_k": _pos}),
    14: _obj({"s_re": _num, "s_im": _num, "n_points": {"type": "integer", "minimum": 1},
              "zeroth_y": {"type": "array", "items": _pos, "minItems": 1},
              "deltas": {"type": "array", "items": _pos, "minItems": 2}, "tol_automorphy": _pos,
              "tol_zeroth": _pos, "min_ratio": _num}),
    15: _obj({"symbol": _recipe, "nu": _pos, "h_list": _hlist, "n_theta": {"type": "integer", "minimum": 16},
              "tol": _pos}),
    16: _obj({"symbol": _recipe, "nu_list": _hlist, "n_theta": {"type": "integer", "minimum": 16},
              "t_budget": _pos, "tol": _pos}),
    17: _obj({"symbol": _recipe, "h_list": _hlist, "C0": _pos, "tol": _pos}),
}

# top-level keys that override the same-named parameter of every selected criterion
OVERRIDES = {"h_list": _hlist, "nu_list": _hlist, "rho": {"type": "number", "minimum": 0},
             "lam": {"type": ["number", "null"]}, "C0": _pos, "t_budget": _pos,
             "symbols": {"type": "array", "items": _recipe, "minItems": 1}, "symbol": _recipe, "grid": _grid}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment", "seed", "criteria"],
    "properties": {
        "experiment": {"enum": sorted(EXPERIMENTS)},
        "seed": _int,
        "out": {"type": "string"},
        "select": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "criteria": {"type": "object", "additionalProperties": False,
                     "properties": {str(k): v for k, v in PARAM_SCHEMAS.items()}},
        **OVERRIDES,
    },
}


def load_preset(name):
    try:
        text = resources.files("cuspml.presets").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown preset {name!r}") from None
    return json.loads(text)


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k == "criteria" and isinstance(v, dict):
            crit = out.setdefault("criteria", {})
            for n, p in v.items():
                crit[n] = {**crit.get(n, {}), **p} if isinstance(p, dict) else p
        else:
            out[k] = copy.deepcopy(v)
    return out


def build_config(experiment, preset="desk", user=None, seed=None, out=None, select=None):
    """Preset section for the experiment, then the user's JSON on top, then CLI flags; validated."""
    base = load_preset(preset).get(experiment)
    if base is None:
        raise ConfigError(f"preset {preset!r} has no section for {experiment!r}")
    cfg = _merge(base, user or {})
    if cfg.get("experiment") != experiment:
        raise ConfigError(f"config is for {cfg.get('experiment')!r}, not {experiment!r}")
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out"] = out
    if select is not None:
        cfg["select"] = list(select)
    validate(cfg)
    return cfg


def validate(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path)
        raise ConfigError(f"{path or '<root>'}: {e.message}") from None
    wanted = selected(cfg)
    missing = [n for n in wanted if str(n) not in cfg["criteria"]]
    if missing:
        raise ConfigError(f"no parameters for criteria {missing}")
    extra = [n for n in wanted if n not in EXPERIMENTS[cfg["experiment"]]]
    if extra:
        raise ConfigError(f"criteria {extra} do not belong to experiment {cfg['experiment']!r}")
    for n in wanted:
        try:
            jsonschema.validate(criterion_params(cfg, n), PARAM_SCHEMAS[n])
        except jsonschema.ValidationError as e:
            raise ConfigError(f"criterion {n} after overrides: {e.message}") from None


def selected(cfg):
    return list(cfg.get("select") or EXPERIMENTS[cfg["experiment"]])


def criterion_params(cfg, n):
    p = copy.deepcopy(cfg["criteria"][str(n)])
    for k in OVERRIDES:
        if k in cfg and k in p:
            p[k] = copy.deepcopy(cfg[k])
    return p
