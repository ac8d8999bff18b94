"""
Run configuration: YAML schema, validation and canonical emission.

A config file holds exactly one top-level mode block (``simulate``,
``homogenize`` or ``verify``).  The schema below is normative; every key has
a type and a default, unknown keys are errors, and error messages carry the
key path and the line in the file.
"""

from __future__ import annotations

import copy
import difflib
import hashlib
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml

MODES = ("simulate", "homogenize", "verify")
SUITES = ("euler-lagrange", "invariance", "conservation", "homogenizer", "limits")

NUMBER = (int, float)
EXPR = (int, float, str)


class Required:
    """Marker for keys without a default."""

    def __repr__(self):
        return "<required>"


REQUIRED = Required()


@dataclass(frozen=True)
class Key:
    types: tuple
    default: Any = None
    choices: Optional[tuple] = None
    doc: str = ""
    nullable: bool = False


# A schema node is either a Key (leaf), a dict (nested block) or a ListOf.
@dataclass(frozen=True)
class ListOf:
    item: Any
    default: Any = None
    min_len: int = 0


GRID = {
    "dim": Key((int,), 1, (1, 2), "spatial dimension"),
    "n": Key((int, list), 256, doc="points per axis (int or one per axis)"),
    "length": Key((int, float, list), 1.0, doc="box length per axis"),
    "bc": Key((str,), "periodic", ("periodic", "fixed-displacement", "traction-free")),
    "n_steps": Key((int,), 1000),
    "dt": Key((int, float), None, doc="time step; null derives it from cfl", nullable=True),
}

MATERIAL = {
    "C": Key(EXPR, 1.0, doc="1D modulus (number or expression in x)"),
    "lambda": Key(EXPR, None, doc="2D Lame lambda", nullable=True),
    "mu": Key(EXPR, None, doc="2D shear modulus", nullable=True),
    "rho": Key(EXPR, 1.0, doc="mass density"),
    "file": Key((str,), None, doc=".npz file with per-node arrays C (d,d,d,d,*n) and rho "
                "(d,d,*n)", nullable=True),
}

PRESTATE = {
    "u0": Key((list,), None, doc="u0 components as expressions in x, y, t", nullable=True),
    "sigma0": Key((list,), None, doc="direct pre-stress (nested list of expressions)",
                  nullable=True),
    "v0": Key((list,), None, doc="direct background velocity (with sigma0)", nullable=True),
    "t0": Key(NUMBER, 0.0, doc="time at which u0 is sampled"),
}

SOLVER = {
    "cfl": Key(NUMBER, 0.5),
    "record_every": Key((int,), 100),
    "monitors": ListOf(Key((str,), None, ("energy", "conservation_temporal",
                                          "conservation_spatial")), ["energy"]),
}

SOURCE = {
    "type": Key((str,), "none", ("none", "ricker")),
    "node": Key((list,), None, doc="grid index of the point force", nullable=True),
    "component": Key((int,), 0),
    "amplitude": Key(NUMBER, 1.0),
    "f_peak": Key(NUMBER, 5.0),
    "t0": Key(NUMBER, None, nullable=True),
}

INITIAL = {
    "u": Key((list,), None, doc="initial displacement expressions", nullable=True),
    "v": Key((list,), None, doc="initial velocity expressions", nullable=True),
    "noise": Key(NUMBER, 0.0, doc="amplitude of seeded random initial displacement"),
}

OUTPUT = {
    "dir": Key((str,), "out"),
    "snapshots": Key((bool,), True),
}

PHASE = {
    "C": Key(NUMBER, REQUIRED),
    "rho": Key(NUMBER, REQUIRED),
    "fraction": Key(NUMBER, REQUIRED),
}

LAMINATE = {
    "cell_length": Key(NUMBER, 1.0),
    "phases": ListOf(PHASE, REQUIRED, min_len=1),
    "comparison": Key((list,), None, doc="[C, rho]; null uses arithmetic averages",
                      nullable=True),
    "offset": Key(NUMBER, 0.0),
}

SWEEP = {
    "omega_start": Key(NUMBER, 0.01),
    "omega_stop": Key(NUMBER, 1.0),
    "n_omega": Key((int,), 50),
    "q": Key(NUMBER, 0.0, doc="Bloch wavenumber for the operator table"),
    "n_harmonics": Key((int,), 32),
    "dispersion": Key((bool,), True, doc="also solve the homogenized dispersion relation"),
}

SCHEMA = {
    "simulate": {
        "seed": Key((int,), 0),
        "variant": Key((str,), "classical",
                       ("classical", "willis_temporal", "willis_temporal_raw", "wfe")),
        "grid": GRID,
        "material": MATERIAL,
        "prestate": PRESTATE,
        "solver": SOLVER,
        "source": SOURCE,
        "initial": INITIAL,
        "output": OUTPUT,
    },
    "homogenize": {
        "laminate": LAMINATE,
        "sweep": SWEEP,
        "output": {"dir": Key((str,), "out")},
    },
    "verify": {
        "suites": ListOf(Key((str,), None, SUITES), ["limits"], min_len=1),
        "output": {"dir": Key((str,), "out")},
    },
}


class ConfigError(ValueError):
    """Validation failure; ``errors`` lists ``(key path, line, message)``."""

    def __init__(self, errors):
        self.errors = errors
        lines = [f"{path or '<root>'}{f' (line {line})' if line else ''}: {msg}"
                 for path, line, msg in errors]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


@dataclass
class RunConfig:
    mode: str
    data: Dict[str, Any]
    source_path: Optional[str] = None
    base_dir: str = "."

    def __getitem__(self, key):
        return self.data[key]

    def canonical(self) -> str:
        return emit_canonical(self)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


# ---------------------------------------------------------------------------


def _line_map(node, path="", out=None):
    """Key path -> 1-based line from a composed YAML node tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = f"{path}.{k.value}" if path else str(k.value)
            out[p] = k.start_mark.line + 1
            _line_map(v, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            p = f"{path}[{i}]"
            out[p] = v.start_mark.line + 1
            _line_map(v, p, out)
    return out


def _type_ok(value, key: Key):
    if value is None:
        return key.nullable or key.default is None
    if isinstance(value, bool) and bool not in key.types:
        return False
    if float in key.types and isinstance(value, int) and not isinstance(value, bool):
        return True
    return isinstance(value, key.types)


def _validate(raw, schema, path, lines, errors):
    if isinstance(schema, Key):
        if raw is REQUIRED:
            errors.append((path, lines.get(path), "missing required key"))
            return None
        if not _type_ok(raw, schema):
            names = "/".join(t.__name__ for t in schema.types)
            errors.append((path, lines.get(path),
                           f"expected {names}, got {type(raw).__name__} ({raw!r})"))
            return None
        if schema.choices is not None and raw is not None and raw not in schema.choices:
            errors.append((path, lines.get(path),
                           f"{raw!r} is not one of {list(schema.choices)}"))
            return None
        if isinstance(raw, int) and float in schema.types and int not in schema.types:
            return float(raw)
        return raw
    if isinstance(schema, ListOf):
        if raw is REQUIRED:
            errors.append((path, lines.get(path), "missing required key"))
            return None
        if not isinstance(raw, list):
            errors.append((path, lines.get(path), f"expected a list, got {type(raw).__name__}"))
            return None
        if len(raw) < schema.min_len:
            errors.append((path, lines.get(path), f"needs at least {schema.min_len} entries"))
        return [_validate(item, schema.item, f"{path}[{i}]", lines, errors)
                for i, item in enumerate(raw)]
    # nested block
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        errors.append((path, lines.get(path), f"expected a mapping, got {type(raw).__name__}"))
        return None
    out = {}
    for k in raw:
        if k not in schema:
            p = f"{path}.{k}" if path else str(k)
            close = difflib.get_close_matches(str(k), list(schema), n=1, cutoff=0.5)
            hint = f"; did you mean {close[0]!r}?" if close else ""
            errors.append((p, lines.get(p), f"unknown key {k!r}{hint}"))
    for k, sub in schema.items():
        p = f"{path}.{k}" if path else k
        if k in raw:
            out[k] = _validate(raw[k], sub, p, lines, errors)
        elif isinstance(sub, dict):
            out[k] = _validate({}, sub, p, lines, errors)
        else:
            default = sub.default if sub.default is REQUIRED else copy.deepcopy(sub.default)
            out[k] = _validate(default, sub, p, lines, errors)
    return out


def _semantic_checks(cfg: RunConfig, errors):
    d = cfg.data
    if cfg.mode == "simulate":
        ps = d["prestate"]
        if ps["u0"] is not None and (ps["sigma0"] is not None or ps["v0"] is not None):
            errors.append(("simulate.prestate", None, "give either u0 or sigma0/v0, not both"))
        if (ps["sigma0"] is None) != (ps["v0"] is None):
            errors.append(("simulate.prestate", None, "sigma0 and v0 must be given together"))
        if d["variant"] == "wfe" and ps["u0"] is None:
            errors.append(("simulate.prestate.u0", None, "the wfe variant needs u0"))
        if not 0 < d["solver"]["cfl"] < 1:
            errors.append(("simulate.solver.cfl", None, "cfl must lie in (0, 1)"))
        if d["source"]["type"] == "ricker" and d["source"]["node"] is None:
            errors.append(("simulate.source.node", None, "a ricker source needs a node"))
        f = d["material"]["file"]
        if f is not None and not os.path.exists(cfg.resolve(f)):
            errors.append(("simulate.material.file", None, f"file not found: {f}"))
        if d["grid"]["dim"] == 2 and f is None and (d["material"]["lambda"] is None
                                                   or d["material"]["mu"] is None):
            errors.append(("simulate.material", None, "2D needs lambda and mu (or a file)"))
    elif cfg.mode == "homogenize":
        lam = d["laminate"]
        fr = [p["fraction"] for p in lam["phases"] or [] if p]
        if fr and abs(sum(fr) - 1.0) > 1e-12:
            errors.append(("homogenize.laminate.phases", None,
                           f"fractions sum to {sum(fr)}, not 1"))
        sw = d["sweep"]
        if sw["n_omega"] < 1 or sw["omega_stop"] < sw["omega_start"]:
            errors.append(("homogenize.sweep", None, "empty omega range"))
        if sw["n_harmonics"] < 8:
            errors.append(("homogenize.sweep.n_harmonics", None, "need at least 8 harmonics"))


def parse_config_text(text: str, source_path=None, expect_mode=None) -> RunConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError([("", mark.line + 1 if mark else None, f"YAML syntax: {exc}")]) from None
    lines = _line_map(node) if node is not None else {}
    if not isinstance(raw, dict) or not raw:
        raise ConfigError([("", None, f"expected one top-level mode block out of {list(MODES)}")])
    modes = [k for k in raw if k in MODES]
    unknown = [k for k in raw if k not in MODES]
    errors = []
    for k in unknown:
        close = difflib.get_close_matches(str(k), MODES, n=1, cutoff=0.5)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        errors.append((str(k), lines.get(str(k)), f"unknown top-level key {k!r}{hint}"))
    if len(modes) != 1:
        errors.append(("", None, f"exactly one mode block is required, found {modes}"))
        raise ConfigError(errors)
    mode = modes[0]
    if expect_mode is not None and mode != expect_mode:
        errors.append((mode, lines.get(mode),
                       f"config holds a {mode!r} block but the {expect_mode!r} command was run"))
    data = _validate(raw[mode], SCHEMA[mode], mode, lines, errors)
    if errors:
        raise ConfigError(errors)
    base = os.path.dirname(os.path.abspath(source_path)) if source_path else "."
    cfg = RunConfig(mode, data, source_path, base)
    _semantic_checks(cfg, errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(path, expect_mode=None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([("", None, f"cannot read {path}: {exc}")]) from None
    return parse_config_text(text, path, expect_mode)


def emit_canonical(cfg: RunConfig) -> str:
    """Fully defaulted config as YAML with sorted keys (stable across runs)."""
    return yaml.safe_dump({cfg.mode: cfg.data}, sort_keys=True, default_flow_style=False)


def default_config(mode) -> RunConfig:
    if mode == "homogenize":
        text = ("homogenize:\n  laminate:\n    phases:\n"
                "      - {C: 1.0, rho: 1.0, fraction: 0.3}\n"
                "      - {C: 4.0, rho: 2.0, fraction: 0.45}\n"
                "      - {C: 2.0, rho: 0.5, fraction: 0.25}\n")
        return parse_config_text(text)
    return parse_config_text(f"{mode}: {{}}\n")


def schema_reference() -> List[str]:
    """Flat listing of every key with its default (used by the README)."""
    rows = []

    def walk(node, path):
        if isinstance(node, dict):
            for k, v in node.items():
                walk(v, f"{path}.{k}" if path else k)
        elif isinstance(node, ListOf):
            rows.append(f"{path}: list, default {node.default!r}")
        else:
            rows.append(f"{path}: {'/'.join(t.__name__ for t in node.types)}, "
                        f"default {node.default!r}" + (f" ({node.doc})" if node.doc else ""))

    walk(SCHEMA, "")
    return rows
