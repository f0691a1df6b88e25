"""Command-line entry point.

Exit codes: 0 success, 2 usage error (unknown subcommand, missing config),
3 config schema violation, 4 numerical failure.  Artifacts are written to a
temporary directory and renamed into place on success, so a failed run never
leaves a partial output directory.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import scenarios
from .bipartite import (
    entanglement_entropy,
    entropy_from_reduced,
    position_density,
    schmidt,
    schmidt_record,
)
from .dynamics import (
    PropagatorConfig,
    bipartite_norm,
    propagate_schrodinger,
    propagate_vnl,
)
from .errors import ConfigError, SimulationError
from .spectra import eigensystem

SUBCOMMANDS = (
    "run",
    "spectrum",
    "gaps",
    "evolve",
    "schmidt",
    "entropy",
    "collapse",
    "validate-config",
)

FORMATS = ("csv", "json", "gnuplot")

# Allowed keys per config group; unknown keys are rejected to fail fast on
# typos in physics parameters.
_SCHEMA = {
    "schema_version": None,
    "grid": {"x_min", "x_max", "n_points", "box"},
    "potential": {"kind", "omega", "mass", "a", "b", "height", "width", "center", "values"},
    "dynamics": {"dt", "steps", "method", "stride"},
    "spectra": {"k", "dedup_tol"},
    "scenario": {
        "name", "seed", "coefficients", "separation", "sigma", "evolve_time",
        "window", "sweep_points", "center", "momentum",
    },
    "state": {"type", "center", "sigma", "momentum", "coefficients", "separation", "seed", "tol"},
    "constants": {"hbar", "mass"},
}


@dataclass
class CliInvocation:
    subcommand: str
    config_path: str
    output_dir: str
    overrides: list = field(default_factory=list)
    seed: int | None = None
    format: str = "csv"
    no_timestamp: bool = False


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vnlw",
        description="Bipartite wave dynamics: spectra, entropy, duality, collapse.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--output", default=None, help="output root (default $VNLW_OUTPUT_DIR or .)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key, e.g. spectra.k=6")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--no-timestamp", action="store_true",
                       help="suppress the timestamp suffix on the output directory")
    return parser


def parse_invocation(argv) -> CliInvocation:
    args = _build_parser().parse_args(argv)
    output = args.output or os.environ.get("VNLW_OUTPUT_DIR", ".")
    return CliInvocation(
        subcommand=args.subcommand,
        config_path=args.config,
        output_dir=output,
        overrides=args.overrides,
        seed=args.seed,
        format=args.format,
        no_timestamp=args.no_timestamp,
    )


def validate_config(config: dict) -> None:
    """Reject unknown groups/keys and out-of-range basic parameters."""
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    if config.get("schema_version") != 1:
        raise ConfigError("schema_version: missing or unsupported (expected 1)")
    for group, content in config.items():
        if group not in _SCHEMA:
            raise ConfigError(f"unknown config group: {group}")
        if group == "schema_version":
            continue
        if not isinstance(content, dict):
            raise ConfigError(f"{group}: must be an object")
        for key in content:
            if key not in _SCHEMA[group]:
                raise ConfigError(f"unknown key: {group}.{key}")
    g = config.get("grid", {})
    if "n_points" in g and (not isinstance(g["n_points"], int) or g["n_points"] < 8):
        raise ConfigError("grid.n_points: must be an integer >= 8")
    if "x_min" in g and "x_max" in g and g["x_max"] <= g["x_min"]:
        raise ConfigError("grid.x_max: must exceed grid.x_min")
    d = config.get("dynamics", {})
    if "dt" in d and not (isinstance(d["dt"], (int, float)) and d["dt"] > 0):
        raise ConfigError("dynamics.dt: must be a positive number")
    if "steps" in d and (not isinstance(d["steps"], int) or d["steps"] < 0):
        raise ConfigError("dynamics.steps: must be a nonnegative integer")
    if "method" in d and d["method"] not in ("crank-nicolson", "eigenbasis"):
        raise ConfigError("dynamics.method: must be crank-nicolson or eigenbasis")
    s = config.get("spectra", {})
    if "k" in s and (not isinstance(s["k"], int) or s["k"] < 1):
        raise ConfigError("spectra.k: must be a positive integer")
    c = config.get("constants", {})
    for key in ("hbar", "mass"):
        if key in c and not (isinstance(c[key], (int, float)) and c[key] > 0):
            raise ConfigError(f"constants.{key}: must be a positive number")


def apply_overrides(config: dict, overrides) -> dict:
    config = json.loads(json.dumps(config))  # deep copy
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be KEY=VALUE, got {item!r}")
        path, raw = item.split("=", 1)
        parts = path.split(".")
        if len(parts) != 2 or parts[0] not in _SCHEMA or parts[0] == "schema_version":
            raise ConfigError(f"unknown key: {path}")
        group, key = parts
        if key not in _SCHEMA[group]:
            raise ConfigError(f"unknown key: {path}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        config.setdefault(group, {})[key] = value
    return config


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config does not parse as JSON: {exc}") from exc


def _publish(tmpdir: Path, final: Path) -> None:
    """Atomically move the staged output directory into place."""
    final.parent.mkdir(parents=True, exist_ok=True)
    if final.exists():
        shutil.rmtree(final)
    os.replace(tmpdir, final)


def _outdir_name(base: str, no_timestamp: bool) -> str:
    if no_timestamp:
        return base
    stamp = datetime.datetime.now().strftime("%Y%m%dT%H%M%S")
    return f"{base}-{stamp}"


def execute(inv: CliInvocation) -> int:
    if not os.path.exists(inv.config_path):
        print(f"vnlw: config not found: {inv.config_path}", file=sys.stderr)
        return 2
    try:
        config = load_config(inv.config_path)
        config = apply_overrides(config, inv.overrides)
        validate_config(config)
    except ConfigError as exc:
        print(f"vnlw: invalid config: {exc}", file=sys.stderr)
        return 3
    if inv.seed is not None:
        config.setdefault("scenario", {})["seed"] = inv.seed
        config.setdefault("state", {}).setdefault("seed", inv.seed)
        try:
            validate_config(config)
        except ConfigError as exc:
            print(f"vnlw: invalid config: {exc}", file=sys.stderr)
            return 3

    if inv.subcommand == "validate-config":
        return 0

    handlers = {
        "run": _cmd_run,
        "gaps": _cmd_gaps,
        "collapse": _cmd_collapse,
        "spectrum": _cmd_spectrum,
        "evolve": _cmd_evolve,
        "schmidt": _cmd_schmidt,
        "entropy": _cmd_entropy,
    }
    root = Path(inv.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    tmpdir = Path(tempfile.mkdtemp(prefix=".vnlw-", dir=root))
    try:
        summary_line, base = handlers[inv.subcommand](config, tmpdir, inv)
    except ConfigError as exc:
        shutil.rmtree(tmpdir, ignore_errors=True)
        print(f"vnlw: invalid config: {exc}", file=sys.stderr)
        return 3
    except SimulationError as exc:
        shutil.rmtree(tmpdir, ignore_errors=True)
        print(f"vnlw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    final = root / _outdir_name(base, inv.no_timestamp)
    _publish(tmpdir, final)
    print(summary_line)
    return 0


def _cmd_run(config, tmpdir, inv):
    report = scenarios.run_scenario(config)
    scenarios.write_report(report, tmpdir, inv.format)
    metric_key = {
        "two-slit": "visibility",
        "collapse": "total_probability",
        "gap-spectroscopy": "distinct_gap_count",
        "product-equivalence": "frobenius_gap",
    }[report.scenario]
    line = (
        f"{report.scenario} {metric_key}={report.summary[metric_key]} "
        f"elapsed={report.elapsed_seconds:.3f}s"
    )
    return line, report.scenario


def _cmd_gaps(config, tmpdir, inv):
    config = dict(config)
    config["scenario"] = {**config.get("scenario", {}), "name": "gap-spectroscopy"}
    report = scenarios.run_scenario(config)
    scenarios.write_report(report, tmpdir, inv.format)
    line = (
        f"gap-spectroscopy distinct_gap_count={report.summary['distinct_gap_count']} "
        f"elapsed={report.elapsed_seconds:.3f}s"
    )
    return line, "gaps"


def _cmd_collapse(config, tmpdir, inv):
    config = dict(config)
    config["scenario"] = {**config.get("scenario", {}), "name": "collapse"}
    report = scenarios.run_scenario(config)
    scenarios.write_report(report, tmpdir, inv.format)
    line = (
        f"collapse total_probability={report.summary['total_probability']} "
        f"elapsed={report.elapsed_seconds:.3f}s"
    )
    return line, "collapse"


def _cmd_spectrum(config, tmpdir, inv):
    import time

    start = time.perf_counter()
    grid = scenarios.grid_from_config(config)
    H = scenarios.hamiltonian_from_config(config, grid)
    k = config.get("spectra", {}).get("k", 4)
    eigs = eigensystem(H, k)
    with open(tmpdir / "energies.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "energy"])
        for n, e in enumerate(eigs.energies):
            writer.writerow([n, format(float(e), ".17g")])
    with open(tmpdir / "states.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"] + [f"psi_{n}" for n in range(k)])
        for i, x in enumerate(grid.points):
            writer.writerow(
                [format(float(x), ".17g")]
                + [format(float(eigs.states[i, n]), ".17g") for n in range(k)]
            )
    _write_summary(tmpdir, "spectrum", config, {"k": k, "energies": [float(e) for e in eigs.energies]})
    elapsed = time.perf_counter() - start
    return f"spectrum k={k} E0={eigs.energies[0]} elapsed={elapsed:.3f}s", "spectrum"


def _cmd_evolve(config, tmpdir, inv):
    import time

    start = time.perf_counter()
    grid = scenarios.grid_from_config(config)
    H = scenarios.hamiltonian_from_config(config, grid)
    cfg = scenarios.propagator_from_config(config)
    stride = config.get("dynamics", {}).get("stride", max(1, cfg.steps // 100))
    kind = config.get("state", {}).get("type", "gaussian")
    rows = []
    def _chunks():
        done = 0
        yield 0
        while done < cfg.steps:
            n = min(stride, cfg.steps - done)
            done += n
            yield n

    if kind in ("gaussian", "eigen"):
        state = scenarios.build_wavefunction(config, grid, H)
        for n in _chunks():
            if n:
                state = propagate_schrodinger(state, H, PropagatorConfig(cfg.dt, n, cfg.method))
            dens = np.abs(state.amplitudes) ** 2 * grid.dx
            rows.append([state.time, state.norm(), float(np.sum(grid.points * dens))])
        final_norm = state.norm()
    else:
        state = scenarios.build_state(config, grid, H)
        for n in _chunks():
            if n:
                state = propagate_vnl(state, H, PropagatorConfig(cfg.dt, n, cfg.method))
            dens = position_density(state)
            rows.append(
                [state.time, bipartite_norm(state), float(np.sum(grid.points * dens) * grid.dx)]
            )
        final_norm = bipartite_norm(state)
    with open(tmpdir / "trajectory.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "norm", "x_mean"])
        for row in rows:
            writer.writerow([format(float(v), ".17g") for v in row])
    _write_summary(tmpdir, "evolve", config, {"steps": cfg.steps, "dt": cfg.dt, "final_norm": float(final_norm)})
    elapsed = time.perf_counter() - start
    return f"evolve steps={cfg.steps} final_norm={final_norm} elapsed={elapsed:.3f}s", "evolve"


def _cmd_schmidt(config, tmpdir, inv):
    import time

    start = time.perf_counter()
    grid = scenarios.grid_from_config(config)
    H = scenarios.hamiltonian_from_config(config, grid)
    Psi = scenarios.build_state(config, grid, H)
    dec = schmidt(Psi, config.get("state", {}).get("tol", 1e-12))
    record = schmidt_record(dec)
    with open(tmpdir / "schmidt.json", "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_summary(tmpdir, "schmidt", config, {"rank": dec.rank, "residual": dec.residual})
    elapsed = time.perf_counter() - start
    return f"schmidt rank={dec.rank} elapsed={elapsed:.3f}s", "schmidt"


def _cmd_entropy(config, tmpdir, inv):
    import time

    start = time.perf_counter()
    grid = scenarios.grid_from_config(config)
    H = scenarios.hamiltonian_from_config(config, grid)
    Psi = scenarios.build_state(config, grid, H)
    s_schmidt = entanglement_entropy(Psi)
    s_reduced = entropy_from_reduced(Psi)
    _write_summary(
        tmpdir, "entropy", config,
        {"entropy": float(s_schmidt), "entropy_reduced_route": float(s_reduced)},
    )
    elapsed = time.perf_counter() - start
    return f"entropy S={s_schmidt} elapsed={elapsed:.3f}s", "entropy"


def _write_summary(tmpdir: Path, name: str, config: dict, summary: dict) -> None:
    with open(tmpdir / "summary.json", "w") as fh:
        json.dump({"scenario": name, "config": config, "summary": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    inv = parse_invocation(argv if argv is not None else sys.argv[1:])
    return execute(inv)


if __name__ == "__main__":
    sys.exit(main())
