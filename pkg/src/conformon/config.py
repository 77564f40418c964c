"""Run configuration documents.

A configuration is a JSON object with four sections::

    {
      "material": {"a": 1.0, "sigma": 0.25, "k3_0": -0.75},
      "solution": {"case": "I", "j": 0},
      "profile":  {"kind": "lattice", "kappa": 0.75, "C2": 1.25, "v": 0.0, "tau0": null},
      "run": {
        "s_range": [-10.0, 10.0], "step": 0.001, "N_grid": 1024,
        "snapshot_time": 0.0, "output_dir": "out", "formats": ["csv", "ply"],
        "tube_radius": 0.05, "ring_resolution": 16, "n_states": 1,
        "residual_samples": 2001,
        "tolerances": {"curvature_ode": 1e-9, "kirchhoff": 1e-8, "schrodinger": 1e-9}
      }
    }

Required keys are ``material.a``, ``material.sigma``, ``profile.C2`` and, for
``kind == "lattice"``, ``profile.kappa``.  Everything else has the defaults
shown.  ``profile.kind`` is one of ``lattice``, ``solitary`` or ``ring``.
``profile.tau0 = null`` means the torsion follows from the torsion law of the
material; a number overrides it.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from conformon.exceptions import DomainError
from conformon.rod import (
    CaseId,
    CircularRing,
    ConformonLattice,
    RodMaterial,
    SolutionCase,
    Solitary,
    torsion_from_twist,
)

DEFAULTS: dict[str, dict[str, Any]] = {
    "material": {"k3_0": 0.0},
    "solution": {"case": "I", "j": 0},
    "profile": {"kind": "lattice", "kappa": None, "v": 0.0, "tau0": None},
    "run": {
        "s_range": [-10.0, 10.0],
        "step": 1e-3,
        "N_grid": 1024,
        "snapshot_time": 0.0,
        "output_dir": "out",
        "formats": ["csv", "ply"],
        "tube_radius": 0.05,
        "ring_resolution": 16,
        "n_states": 1,
        "residual_samples": 2001,
        "tolerances": {"curvature_ode": 1e-9, "kirchhoff": 1e-8, "schrodinger": 1e-9},
    },
}
REQUIRED = {"material": ("a", "sigma"), "profile": ("C2",)}
BUILTIN_CONFIGS = ("fig1", "fig2", "fig3", "fig4", "fig5")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted location of the bad field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _number(doc: dict, section: str, key: str, *, integer: bool = False, allow_none: bool = False):
    path = f"{section}.{key}"
    val = doc[section].get(key)
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, f"expected a number, got {val!r}")
    if integer:
        if int(val) != val:
            raise ConfigError(path, f"expected an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(path, "must be finite")
    return float(val)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with the resolved torsion and profile."""

    material: RodMaterial
    case: SolutionCase
    kind: str
    kappa: float | None
    C2: float
    v: float
    tau0_override: float | None
    tau0: float
    s_range: tuple[float, float]
    step: float
    N_grid: int
    snapshot_time: float
    output_dir: str
    formats: tuple[str, ...]
    tube_radius: float
    ring_resolution: int
    n_states: int
    residual_samples: int
    tolerances: dict[str, float]
    document: dict

    def profile(self):
        if self.kind == "lattice":
            return ConformonLattice(self.kappa, self.C2, self.tau0, self.v)
        if self.kind == "solitary":
            return Solitary(self.C2, self.tau0, self.v)
        return CircularRing(self.C2, self.tau0, self.v)

    def with_overrides(self, **overrides) -> RunConfig:
        """Re-validate with dotted-path overrides, e.g. ``{"profile.kappa": 0.5}``."""
        return load_config(self.document, overrides)

    def to_document(self, include_output_dir: bool = True) -> dict:
        doc = copy.deepcopy(self.document)
        if not include_output_dir:
            doc["run"].pop("output_dir", None)
        return doc


def load_config(doc: dict, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Validate a configuration document; ``overrides`` map dotted paths to values."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    for section in doc:
        if section not in DEFAULTS:
            raise ConfigError(section, "unknown section")
    for section, val in doc.items():
        if not isinstance(val, dict):
            raise ConfigError(section, "expected an object")
    full = _merge(DEFAULTS, doc)
    for dotted, val in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in DEFAULTS or not key:
            raise ConfigError(dotted, "unknown override path")
        full[section][key] = val

    for section, keys in REQUIRED.items():
        for key in keys:
            if full[section].get(key) is None:
                raise ConfigError(f"{section}.{key}", "missing required key")
    for section, body in full.items():
        known = set(DEFAULTS[section]) | set(REQUIRED.get(section, ()))
        for key in body:
            if key not in known:
                raise ConfigError(f"{section}.{key}", "unknown key")

    try:
        material = RodMaterial(
            _number(full, "material", "a"),
            _number(full, "material", "sigma"),
            _number(full, "material", "k3_0"),
        )
    except DomainError as exc:
        raise ConfigError("material", str(exc)) from None

    case_val = full["solution"]["case"]
    if case_val not in ("I", "II"):
        raise ConfigError("solution.case", f"expected 'I' or 'II', got {case_val!r}")
    j = _number(full, "solution", "j", integer=True)
    if j not in (0, 1):
        raise ConfigError("solution.j", f"expected 0 or 1, got {j}")
    case = SolutionCase(CaseId(case_val), j)

    kind = full["profile"]["kind"]
    if kind not in ("lattice", "solitary", "ring"):
        raise ConfigError("profile.kind", f"expected lattice, solitary or ring, got {kind!r}")
    kappa = None
    if kind == "lattice":
        if full["profile"].get("kappa") is None:
            raise ConfigError("profile.kappa", "missing required key")
        kappa = _number(full, "profile", "kappa")
    C2 = _number(full, "profile", "C2")
    v = _number(full, "profile", "v")
    tau0_override = _number(full, "profile", "tau0", allow_none=True)
    if tau0_override is None:
        try:
            tau0 = torsion_from_twist(material, case)
        except DomainError as exc:
            raise ConfigError("material", f"{exc}; give profile.tau0 explicitly") from None
    else:
        tau0 = tau0_override

    run = full["run"]
    s_range = run["s_range"]
    if not (isinstance(s_range, (list, tuple)) and len(s_range) == 2):
        raise ConfigError("run.s_range", "expected [start, end]")
    try:
        s0, s1 = (float(x) for x in s_range)
    except (TypeError, ValueError):
        raise ConfigError("run.s_range", "expected two numbers") from None
    if not s1 > s0:
        raise ConfigError("run.s_range", "end must exceed start")
    step = _number(full, "run", "step")
    if not step > 0.0:
        raise ConfigError("run.step", "must be positive")
    N_grid = _number(full, "run", "N_grid", integer=True)
    if N_grid < 64:
        raise ConfigError("run.N_grid", "must be at least 64")
    formats = run["formats"]
    if isinstance(formats, str):
        formats = ["csv", "ply"] if formats == "both" else [formats]
    if not formats or any(f not in ("csv", "ply") for f in formats):
        raise ConfigError("run.formats", f"expected a subset of ['csv', 'ply'], got {formats!r}")
    tube_radius = _number(full, "run", "tube_radius")
    if tube_radius < 0.0:
        raise ConfigError("run.tube_radius", "must be non-negative")
    ring_resolution = _number(full, "run", "ring_resolution", integer=True)
    if ring_resolution < 3:
        raise ConfigError("run.ring_resolution", "must be at least 3")
    n_states = _number(full, "run", "n_states", integer=True)
    if n_states < 1:
        raise ConfigError("run.n_states", "must be at least 1")
    residual_samples = _number(full, "run", "residual_samples", integer=True)
    if residual_samples < 2:
        raise ConfigError("run.residual_samples", "must be at least 2")
    tolerances = dict(run["tolerances"])
    for name in DEFAULTS["run"]["tolerances"]:
        val = tolerances.get(name)
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0:
            raise ConfigError(f"run.tolerances.{name}", "expected a positive number")
    if not isinstance(run["output_dir"], str):
        raise ConfigError("run.output_dir", "expected a path string")

    cfg = RunConfig(
        material=material,
        case=case,
        kind=kind,
        kappa=kappa,
        C2=C2,
        v=v,
        tau0_override=tau0_override,
        tau0=tau0,
        s_range=(s0, s1),
        step=step,
        N_grid=N_grid,
        snapshot_time=_number(full, "run", "snapshot_time"),
        output_dir=run["output_dir"],
        formats=tuple(formats),
        tube_radius=tube_radius,
        ring_resolution=ring_resolution,
        n_states=n_states,
        residual_samples=residual_samples,
        tolerances={k: float(tolerances[k]) for k in DEFAULTS["run"]["tolerances"]},
        document=full,
    )
    try:
        cfg.profile()
    except DomainError as exc:
        raise ConfigError("profile", str(exc)) from None
    return cfg


def read_config_document(name_or_path: str) -> dict:
    """Load a JSON document from a path, or a built-in figure config by name."""
    if name_or_path in BUILTIN_CONFIGS:
        text = resources.files("conformon.configs").joinpath(f"{name_or_path}.json").read_text()
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise ConfigError("--config", f"no such file: {name_or_path}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
