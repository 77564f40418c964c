"""Command-line front end.

Subcommands::

    conformon conformation --config fig3 --out out/fig3
    conformon spectrum     --config fig3 --grid 2048
    conformon residuals    --config fig3 --kappa 0 0.25 0.75 0.995 1
    conformon quantize     --length 10 --m 1 --C2 1.25 --tau0 0.5
    conformon sweep        --config fig3 --kappa 0 0.5 0.9 --task spectrum --workers 4

``--config`` takes a JSON file (schema in :mod:`conformon.config`) or one of
the built-in names ``fig1`` .. ``fig5``.  Flags override the document.

Files written, per output directory:

* conformation: ``conformation.csv`` (``s,x,y,z,k,tau``), ``conformation.ply``
* spectrum: ``potential.csv`` (``s1,V``), ``eigenvalues.csv`` (``index,eigenvalue``),
  ``state_000.csv`` ... (``s1,psi``, one per requested state), ``report.json``
* residuals: ``residuals.csv``, one row per modulus
* sweep: one ``kappa_<value>/`` subdirectory per modulus plus ``summary.csv``

Every directory also gets ``metadata.json``, holding the resolved
configuration (which can be passed back through ``--config``) and the derived
quantities.  Exit status is 0 on success, 1 when a check fails and 2 on
invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from conformon import __version__
from conformon.config import ConfigError, RunConfig, load_config, read_config_document
from conformon.exceptions import DomainError, NoSolutionError
from conformon.geometry import (
    closed_tube_kappa,
    export_geometry,
    integrate_frame,
    minimum_closed_length,
    quantization_residual,
)
from conformon.quantum import (
    delocalization_ratio,
    exact_energy,
    ground_state_l2_error,
    potential_minimum,
    schrodinger_residual,
    solve_band_ground_state,
    solve_conformon_bound_state,
)
from conformon.rod import ConformonLattice, Solitary, curvature_ode_residual, static_residuals

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


class Outcome:
    """Files produced by one task, written only once the task has finished."""

    def __init__(self, code: int = EXIT_OK):
        self.code = code
        self.files: dict[str, bytes] = {}
        self.summary: dict = {}

    def add_text(self, name: str, text: str) -> None:
        self.files[name] = text.encode("utf-8")

    def add_json(self, name: str, obj) -> None:
        self.add_text(name, _dump_json(obj))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _metadata(command: str, cfg: RunConfig, **extra) -> dict:
    profile = cfg.profile()
    resolved = {
        "tau0": cfg.tau0,
        "tau0_source": "override" if cfg.tau0_override is not None else "torsion law",
        "C2_minus_tau0_sq": profile.excess,
        "tension_C": cfg.material.a * cfg.C2 if cfg.case.case_id.value == "I" else cfg.C2,
        "twisting_rigidity_b": cfg.material.b if cfg.material.sigma != -1.0 else None,
        "period": profile.period,
    }
    if isinstance(profile, ConformonLattice):
        resolved["alpha"] = profile.alpha
    return {
        "command": command,
        "version": __version__,
        "config": cfg.to_document(include_output_dir=False),
        "resolved": resolved,
        **extra,
    }


# --- tasks -------------------------------------------------------------------


def _residual_row(cfg: RunConfig) -> dict:
    profile = cfg.profile()
    s = np.linspace(cfg.s_range[0], cfg.s_range[1], cfg.residual_samples)
    ode = np.abs(curvature_ode_residual(profile, s))
    kirch = np.abs(static_residuals(cfg.material, cfg.case, profile, s))
    schr = np.abs(schrodinger_residual(profile, s))
    row = {
        "kappa": cfg.kappa if cfg.kind == "lattice" else float("nan"),
        "tau0": cfg.tau0,
        "curvature_ode_max": float(ode.max()),
        "curvature_ode_mean": float(ode.mean()),
        "kirchhoff_max": float(kirch.max()),
        "kirchhoff_mean": float(kirch.mean()),
        "schrodinger_max": float(schr.max()),
        "schrodinger_mean": float(schr.mean()),
    }
    tol = cfg.tolerances
    row["pass"] = bool(
        row["curvature_ode_max"] < tol["curvature_ode"]
        and row["kirchhoff_max"] < tol["kirchhoff"]
        and row["schrodinger_max"] < tol["schrodinger"]
    )
    return row


def cmd_conformation(cfg: RunConfig) -> Outcome:
    profile = cfg.profile()
    conf = integrate_frame(profile, cfg.s_range[0], cfg.s_range[1], cfg.step, cfg.snapshot_time)
    out = Outcome()
    if "csv" in cfg.formats:
        out.files["conformation.csv"] = export_geometry(conf, "csv")
    if "ply" in cfg.formats:
        out.files["conformation.ply"] = export_geometry(conf, "ply", cfg.tube_radius, cfg.ring_resolution)

    frames = np.stack([conf.t, conf.n, conf.b], axis=1)
    gram = np.einsum("nij,nkj->nik", frames, frames) - np.eye(3)
    check = cfg.with_overrides(**{"run.residual_samples": min(cfg.residual_samples, len(conf))})
    row = _residual_row(check)
    out.summary = {
        "n_samples": len(conf),
        "step": conf.step,
        "end_position": conf.R[-1].tolist(),
        "residual_max": {
            "curvature_ode": row["curvature_ode_max"],
            "kirchhoff": row["kirchhoff_max"],
            "frame_orthonormality": float(np.abs(gram).max()),
        },
    }
    out.add_json("metadata.json", _metadata("conformation", cfg, **out.summary))
    return out


def _csv_columns(header: str, *cols) -> str:
    lines = [header]
    for row in zip(*cols):
        lines.append(",".join(f"{x:.17g}" if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def cmd_spectrum(cfg: RunConfig, warn=None) -> Outcome:
    profile = cfg.profile()
    if isinstance(profile, ConformonLattice) and profile.kappa < 1.0:
        result = solve_band_ground_state(profile, cfg.N_grid)
        mode = "periodic"
    elif isinstance(profile, (ConformonLattice, Solitary)):
        if warn is not None:
            warn("warning: kappa = 1 has no finite period; solving the single sech^2 well on a truncated box")
        result = solve_conformon_bound_state(profile, cfg.N_grid)
        mode = "bound-state"
    else:
        raise DomainError("spectrum needs a lattice or solitary profile")

    E = -profile.excess
    lam0 = result.ground_energy
    report = {
        "mode": mode,
        "N": len(result.grid),
        "spacing": result.spacing,
        "ground_eigenvalue": lam0,
        "exact_energy": E,
        "abs_error": abs(lam0 - E),
        "ground_state_l2_error": ground_state_l2_error(result, profile),
    }
    if isinstance(profile, ConformonLattice):
        report["potential_minimum"] = potential_minimum(profile)
        report["delocalization_ratio"] = delocalization_ratio(profile)
        report["exact_energy"] = exact_energy(profile)

    out = Outcome()
    grid = [float(x) for x in result.grid]
    out.add_text("potential.csv", _csv_columns("s1,V", grid, [float(x) for x in result.potential]))
    out.add_text(
        "eigenvalues.csv",
        _csv_columns("index,eigenvalue", range(len(result.eigenvalues)), [float(x) for x in result.eigenvalues]),
    )
    for i in range(min(cfg.n_states, len(result.eigenvalues))):
        vec = result.ground_state if i == 0 else result.eigenvectors[:, i]
        out.add_text(f"state_{i:03d}.csv", _csv_columns("s1,psi", grid, [float(x) for x in vec]))
    out.add_json("report.json", report)
    out.summary = report
    out.add_json("metadata.json", _metadata("spectrum", cfg, report=report))
    return out


_RESIDUAL_COLUMNS = (
    "kappa",
    "tau0",
    "curvature_ode_max",
    "curvature_ode_mean",
    "kirchhoff_max",
    "kirchhoff_mean",
    "schrodinger_max",
    "schrodinger_mean",
    "pass",
)


def cmd_residuals(cfg: RunConfig, kappas=None) -> Outcome:
    configs = [cfg] if not kappas else [
        cfg.with_overrides(**{"profile.kind": "lattice", "profile.kappa": k}) for k in kappas
    ]
    rows = [_residual_row(c) for c in configs]
    lines = [",".join(_RESIDUAL_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                str(row[c]).lower() if c == "pass" else f"{row[c]:.6e}" for c in _RESIDUAL_COLUMNS
            )
        )
    out = Outcome(EXIT_OK if all(r["pass"] for r in rows) else EXIT_CHECK)
    out.add_text("residuals.csv", "\n".join(lines) + "\n")
    out.summary = {"rows": rows, "tolerances": cfg.tolerances}
    out.add_json(
        "metadata.json",
        _metadata("residuals", cfg, kappas=list(kappas) if kappas else None, **out.summary),
    )
    return out


TASKS = {"conformation": cmd_conformation, "spectrum": cmd_spectrum, "residuals": cmd_residuals}


def cmd_sweep(cfg: RunConfig, kappas, task: str, workers: int = 1, warn=None) -> Outcome:
    """Run ``task`` once per modulus; each run owns the ``kappa_<value>`` subdirectory."""

    def run_one(kappa):
        sub = cfg.with_overrides(**{"profile.kind": "lattice", "profile.kappa": kappa})
        if task == "spectrum":
            return kappa, cmd_spectrum(sub, warn=warn)
        return kappa, TASKS[task](sub)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run_one, kappas))

    out = Outcome(max(o.code for _, o in results))
    summary_lines = ["kappa,exit_code,directory"]
    for kappa, sub_out in results:
        name = f"kappa_{kappa:g}"
        for fname, data in sub_out.files.items():
            out.files[f"{name}/{fname}"] = data
        summary_lines.append(f"{kappa:.17g},{sub_out.code},{name}")
    out.add_text("summary.csv", "\n".join(summary_lines) + "\n")
    out.add_json("metadata.json", _metadata("sweep", cfg, task=task, kappas=list(kappas)))
    return out


def _commit_nested(out: Outcome, root: Path) -> None:
    root.mkdir(parents=True, exist_ok=True)
    for name in sorted(out.files):
        path = root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(out.files[name])


# --- argument handling -------------------------------------------------------


def _parse_set(items) -> dict:
    overrides = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected --set section.key=value")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _resolve_config(args) -> RunConfig:
    doc = read_config_document(args.config) if args.config else {}
    overrides = _parse_set(getattr(args, "set", None))
    if args.out is not None:
        overrides["run.output_dir"] = args.out
    if args.format is not None:
        overrides["run.formats"] = ["csv", "ply"] if args.format == "both" else [args.format]
    if args.step is not None:
        overrides["run.step"] = args.step
    if args.grid is not None:
        overrides["run.N_grid"] = args.grid
    if args.C2 is not None:
        overrides["profile.C2"] = args.C2
    if args.tau0 is not None:
        overrides["profile.tau0"] = args.tau0
    kappa = getattr(args, "kappa", None)
    if isinstance(kappa, float):
        overrides["profile.kappa"] = kappa
    return load_config(doc, overrides)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file or built-in name fig1..fig5")
    common.add_argument("--out", help="output directory (overrides run.output_dir)")
    common.add_argument("--format", choices=("csv", "ply", "both"))
    common.add_argument("--step", type=float, help="arclength step for frame integration")
    common.add_argument("--grid", type=int, help="grid size N for the eigensolver")
    common.add_argument("--C2", type=float, help="tension constant C2")
    common.add_argument("--tau0", type=float, help="explicit torsion, bypassing the torsion law")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override any config key")

    parser = argparse.ArgumentParser(prog="conformon", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("conformation", parents=[common], help="integrate and export the centerline")
    p.add_argument("--kappa", type=float)
    p = sub.add_parser("spectrum", parents=[common], help="periodic eigenproblem of the induced potential")
    p.add_argument("--kappa", type=float)
    p = sub.add_parser("residuals", parents=[common], help="check the exact solutions; exit 1 on breach")
    p.add_argument("--kappa", type=float, nargs="+")
    p = sub.add_parser("quantize", parents=[common], help="modulus of a closed tube of given length")
    p.add_argument("--length", "-L", type=float, required=True)
    p.add_argument("--m", type=int, default=1)
    p = sub.add_parser("sweep", parents=[common], help="run a task over several moduli")
    p.add_argument("--kappa", type=float, nargs="+", required=True)
    p.add_argument("--task", choices=sorted(TASKS), default="conformation")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _quantize(args) -> int:
    if args.config:
        cfg = _resolve_config(args)
        C2, tau0 = cfg.C2, cfg.tau0
    else:
        if args.C2 is None:
            raise ConfigError("profile.C2", "missing required key (give --C2 or --config)")
        C2, tau0 = args.C2, args.tau0 or 0.0
    try:
        kappa = closed_tube_kappa(args.length, args.m, C2, tau0)
    except NoSolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        l_min = exc.threshold if exc.threshold is not None else minimum_closed_length(args.m, C2, tau0)
        print(f"minimum length for m={args.m}: {l_min!r}", file=sys.stderr)
        return EXIT_CHECK
    res = quantization_residual(args.length, args.m, C2, tau0, kappa)
    print(f"kappa = {kappa!r}")
    print(f"residual = {res!r}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def warn(msg):
        print(msg, file=sys.stderr)

    try:
        if args.command == "quantize":
            return _quantize(args)
        cfg = _resolve_config(args)
        if args.command == "conformation":
            out = cmd_conformation(cfg)
        elif args.command == "spectrum":
            out = cmd_spectrum(cfg, warn=warn)
        elif args.command == "residuals":
            out = cmd_residuals(cfg, args.kappa)
            print(out.files["residuals.csv"].decode(), end="")
        else:
            kappas = args.kappa
            if args.config is None:
                raise ConfigError("--config", "sweep needs a base configuration")
            out = cmd_sweep(cfg, kappas, args.task, args.workers, warn=warn)
    except (ConfigError, DomainError, NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    _commit_nested(out, Path(cfg.output_dir))
    return out.code


if __name__ == "__main__":
    sys.exit(main())
