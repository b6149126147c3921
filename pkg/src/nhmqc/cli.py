"""Command-line interface: run sweeps, ensembles and the validation suite,
write CSV tables plus a JSON run manifest.

Subcommands
-----------
two-level     F and I_m of the gain/loss qubit over a Gamma grid
ising-sweep   F(rho, S_z) of the Ising chain over an h_z grid + peak summary
ising-scaling critical h_z per chain length
hn-phase      F(rho, H2) over a (delta_L/J_L, delta_R/J_R) grid
hn-obc        open-chain F(rho, H2) over a J_L/J_R grid
hn-disorder   disorder-averaged mid-spectrum F(rho, H2) per strength W
protocol      phase-encoded fidelity signal and the DFT-retrieved MQI
validate      oracle/identity suite; nonzero exit on any failure

Configuration may come from flags and/or a YAML/JSON file (``--config``);
explicit flags override file values. Grids use ``start:stop:step``
(inclusive of stop within half a step). CSV numbers are shortest
round-trip decimals, UTF-8, LF line endings, so identical runs produce
byte-identical tables. Every run writes ``manifest.json`` first (status
"running") and finalizes it afterwards; the manifest records the resolved
configuration, seeds, wall clock, per-point flag counts and the SHA-256 of
every emitted file.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation-suite failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, experiments, models, oracles, protocol
from .coherence import make_reference_basis, mqi
from .errors import ConfigError, EnsembleFailureError, NHMQCError, NoPeakError
from .experiments import StateSelector, SweepSpec
from .linalg import eig_general

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

WORKERS_ENV = "NHMQC_WORKERS"


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` inclusive of both ends (stop within step/2)."""
    try:
        start_s, stop_s, step_s = text.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid {text!r}; need step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 0.5)) + 1
    values = tuple(start + k * step for k in range(n))
    return values


def _fmt(x) -> str:
    """CSV cell: shortest round-trip decimal for floats, empty for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


@dataclass
class Manifest:
    """Reproducibility record for one run; written before, finalized after."""

    subcommand: str
    config: dict
    outdir: Path
    started_at: float = field(default_factory=time.time)
    outputs: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def path(self) -> Path:
        return self.outdir / "manifest.json"

    def _payload(self, status: str) -> dict:
        return {
            "tool": "nhmqc",
            "version": __version__,
            "subcommand": self.subcommand,
            "config": self.config,
            "status": status,
            "started_at": self.started_at,
            "outputs": self.outputs,
            "summary": self.summary,
        }

    def write_running(self) -> None:
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.path().write_text(
            json.dumps(self._payload("running"), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def add_output(self, path: Path, rows: int | None = None) -> None:
        entry = {"path": path.name, "sha256": _sha256(path)}
        if rows is not None:
            entry["rows"] = rows
        self.outputs.append(entry)

    def finalize(self, status: str = "done") -> None:
        payload = self._payload(status)
        payload["finished_at"] = time.time()
        payload["wall_seconds"] = payload["finished_at"] - self.started_at
        self.path().write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {path!r} not found")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path!r} is not valid YAML/JSON: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping of option names to values")
    return data


def _resolve(args: argparse.Namespace, file_cfg: dict, defaults: dict) -> dict:
    """Precedence: explicit flag > config file > default."""
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_cfg:
            out[key] = file_cfg[key]
        else:
            out[key] = default
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return out


def _default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return 1


def _grid_value(v) -> tuple[float, ...]:
    if isinstance(v, str):
        return parse_grid(v)
    return tuple(float(x) for x in v)


def _sweep_summary(rows) -> dict:
    return {
        "points": len(rows),
        "ep_flagged": sum(1 for r in rows if r.ep_flag),
        "errors": [r.error for r in rows if r.error],
    }


def _intensity_columns(labels) -> list[str]:
    cols = []
    for m in labels:
        mi = int(round(m))
        cols.append(f"I_{mi}" if mi >= 0 else f"I_-{abs(mi)}")
    return cols


def _spin_sweep_rows(rows, energy: bool):
    """CSV rows for a spin-model sweep: per-mode intensities, optionally the
    selected state's complex energy."""
    labels = next((r.labels for r in rows if r.labels is not None), None)
    if labels is None:
        raise EnsembleFailureError("every sweep point failed; nothing to tabulate")
    header = ["value", "F"] + _intensity_columns(labels)
    if energy:
        header += ["re_energy", "im_energy"]
    header += ["ep_flag"]
    out = []
    for r in rows:
        cells = [r.value, r.second_moment]
        if r.intensities is None:
            cells += [None] * len(labels)
        else:
            cells += list(r.intensities)
        if energy:
            cells += [
                None if r.energy is None else r.energy.real,
                None if r.energy is None else r.energy.imag,
            ]
        cells += [r.ep_flag]
        out.append(cells)
    return header, out


def cmd_two_level(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "j": 1.0, "gamma_grid": "0.1:2.0:0.1", "reference": "sy",
        "outdir": "runs/two_level", "workers": _default_workers(),
    })
    grid = _grid_value(cfg["gamma_grid"])
    outdir = Path(cfg["outdir"])
    manifest = Manifest("two-level", cfg, outdir)
    manifest.write_running()
    spec = SweepSpec(
        model="two_level", fixed={"j": float(cfg["j"])}, sweep_param="gamma",
        grid=grid, reference=cfg["reference"], workers=int(cfg["workers"]),
    )
    rows = experiments.sweep_1d(spec)
    header, data = _spin_sweep_rows(rows, energy=False)
    header[0] = "gamma"
    path = outdir / "two_level.csv"
    write_csv(path, header, data)
    manifest.add_output(path, rows=len(data))
    manifest.summary = _sweep_summary(rows)
    manifest.finalize()
    return EXIT_OK


def cmd_ising_sweep(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "l": 7, "j": 0.4, "j2": 0.0, "gamma": 1.0, "hy": 0.0,
        "hz_grid": "0:0.4:0.005", "outdir": "runs/ising_sweep",
        "workers": _default_workers(),
    })
    grid = _grid_value(cfg["hz_grid"])
    outdir = Path(cfg["outdir"])
    manifest = Manifest("ising-sweep", cfg, outdir)
    manifest.write_running()
    spec = SweepSpec(
        model="ising",
        fixed={"L": int(cfg["l"]), "J": float(cfg["j"]), "J2": float(cfg["j2"]),
               "Gamma": float(cfg["gamma"]), "h_y": float(cfg["hy"])},
        sweep_param="h_z", grid=grid, reference="sz", workers=int(cfg["workers"]),
    )
    rows = experiments.sweep_1d(spec)
    header, data = _spin_sweep_rows(rows, energy=True)
    header[0] = "hz"
    path = outdir / "ising_sweep.csv"
    write_csv(path, header, data)
    manifest.add_output(path, rows=len(data))
    manifest.summary = _sweep_summary(rows)
    try:
        cp = experiments.extract_critical_point(rows)
        cp_path = outdir / "critical_point.csv"
        write_csv(cp_path, ["hz_c", "peak_F", "method", "grid_step"],
                  [[cp.location, cp.peak_value, cp.method, cp.grid_step]])
        manifest.add_output(cp_path, rows=1)
        manifest.summary["critical_point"] = cp.location
    except NoPeakError as exc:
        manifest.summary["critical_point"] = None
        manifest.summary["no_peak"] = str(exc)
    manifest.finalize()
    return EXIT_OK


def cmd_ising_scaling(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "l_values": "6,7,8", "j": 0.4, "j2": 0.1, "gamma": 1.0, "hy": 0.0,
        "hz_grid": "0.05:0.3:0.005", "outdir": "runs/ising_scaling",
        "workers": _default_workers(),
    })
    if isinstance(cfg["l_values"], str):
        l_values = [int(x) for x in cfg["l_values"].split(",") if x.strip()]
    else:
        l_values = [int(x) for x in cfg["l_values"]]
    grid = _grid_value(cfg["hz_grid"])
    outdir = Path(cfg["outdir"])
    manifest = Manifest("ising-scaling", cfg, outdir)
    manifest.write_running()
    scan = experiments.finite_size_scan(
        l_values,
        fixed={"J": float(cfg["j"]), "J2": float(cfg["j2"]),
               "Gamma": float(cfg["gamma"]), "h_y": float(cfg["hy"])},
        hz_grid=grid, workers=int(cfg["workers"]),
    )
    path = outdir / "scaling.csv"
    write_csv(path, ["L", "inverse_L", "hz_c", "peak_F", "method"],
              [[r.L, r.inverse_size, r.critical_point, r.peak_value, r.method]
               for r in scan])
    manifest.add_output(path, rows=len(scan))
    manifest.summary = {"sizes": l_values}
    manifest.finalize()
    return EXIT_OK


def cmd_hn_phase(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "n": 100, "jl": 1.0, "jr": 1.0,
        "dl_grid": "0.05:2.0:0.05", "dr_grid": "0.05:2.0:0.05",
        "outdir": "runs/hn_phase", "workers": _default_workers(),
    })
    outdir = Path(cfg["outdir"])
    manifest = Manifest("hn-phase", cfg, outdir)
    manifest.write_running()
    diagram = experiments.phase_diagram_2d(
        int(cfg["n"]), float(cfg["jl"]), float(cfg["jr"]),
        _grid_value(cfg["dl_grid"]), _grid_value(cfg["dr_grid"]),
        workers=int(cfg["workers"]),
    )
    rows = []
    for i, a in enumerate(diagram.ratios_left):
        for j, b in enumerate(diagram.ratios_right):
            f = diagram.second_moment[i, j]
            rows.append([a, b, None if np.isnan(f) else f, bool(diagram.ep_flags[i, j])])
    path = outdir / "hn_phase.csv"
    write_csv(path, ["delta_l_ratio", "delta_r_ratio", "F", "ep_flag"], rows)
    manifest.add_output(path, rows=len(rows))
    manifest.summary = {
        "cells": len(rows),
        "ep_flagged": int(diagram.ep_flags.sum()),
    }
    manifest.finalize()
    return EXIT_OK


def cmd_hn_obc(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "n": 10, "jr": 1.0, "ratio_grid": "0.2:3.0:0.05",
        "outdir": "runs/hn_obc", "workers": _default_workers(),
    })
    grid = _grid_value(cfg["ratio_grid"])
    outdir = Path(cfg["outdir"])
    manifest = Manifest("hn-obc", cfg, outdir)
    manifest.write_running()
    spec = SweepSpec(
        model="hn_free",
        fixed={"n": int(cfg["n"]), "j_r": float(cfg["jr"]),
               "delta_l": 0.0, "delta_r": 0.0},
        sweep_param="ratio", grid=grid, reference="h2",
        workers=int(cfg["workers"]),
    )
    rows = experiments.sweep_1d(spec)
    path = outdir / "hn_obc.csv"
    write_csv(
        path, ["ratio", "F", "re_energy", "im_energy", "ep_flag"],
        [[r.value, r.second_moment,
          None if r.energy is None else r.energy.real,
          None if r.energy is None else r.energy.imag, r.ep_flag] for r in rows],
    )
    manifest.add_output(path, rows=len(rows))
    manifest.summary = _sweep_summary(rows)
    manifest.finalize()
    return EXIT_OK


def cmd_hn_disorder(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "n": 100, "jl": 1.0, "jr": 2.0, "w_grid": "0:10:0.5",
        "realizations": 200, "seed": 7, "outdir": "runs/hn_disorder",
        "workers": _default_workers(),
    })
    outdir = Path(cfg["outdir"])
    manifest = Manifest("hn-disorder", cfg, outdir)
    manifest.write_running()
    stats = experiments.disorder_ensemble(
        int(cfg["n"]), float(cfg["jl"]), float(cfg["jr"]),
        _grid_value(cfg["w_grid"]), int(cfg["realizations"]), int(cfg["seed"]),
        workers=int(cfg["workers"]),
    )
    path = outdir / "hn_disorder.csv"
    write_csv(
        path, ["W", "mean_F", "std_F", "realizations", "excluded", "master_seed"],
        [[s.w, s.mean_f, s.std_f, s.realizations, s.excluded, s.master_seed]
         for s in stats],
    )
    manifest.add_output(path, rows=len(stats))
    manifest.summary = {"excluded_total": sum(s.excluded for s in stats)}
    manifest.finalize()
    return EXIT_OK


def cmd_protocol(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "l": 6, "j": 1.0, "j2": 0.0, "gamma": 1.0, "hy": 0.0, "hz": 0.1,
        "m_samples": None, "shots": None, "seed": 7,
        "outdir": "runs/protocol",
    })
    outdir = Path(cfg["outdir"])
    manifest = Manifest("protocol", cfg, outdir)
    manifest.write_running()
    L = int(cfg["l"])
    p = models.IsingParams(L=L, J=float(cfg["j"]), J2=float(cfg["j2"]),
                           Gamma=float(cfg["gamma"]), h_y=float(cfg["hy"]),
                           h_z=float(cfg["hz"]))
    h = models.build_ising(p)
    es = eig_general(h)
    state = experiments.select_state(es, StateSelector.GROUND)
    a = models.build_collective_sz(L)
    basis = make_reference_basis(a)
    m_samples = int(cfg["m_samples"]) if cfg["m_samples"] else 2 * L + 1
    shots = int(cfg["shots"]) if cfg["shots"] else None
    signal = protocol.fidelity_signal(state, basis, m_samples,
                                      shots=shots, seed=int(cfg["seed"]))
    retrieved = protocol.retrieve_mqi(signal)
    direct = mqi(state, basis)

    sig_path = outdir / "protocol_signal.csv"
    write_csv(sig_path, ["phase", "re_f", "im_f"],
              [[ph, v.real, v.imag] for ph, v in zip(signal.phases, signal.values)])
    manifest.add_output(sig_path, rows=m_samples)

    mqi_path = outdir / "protocol_mqi.csv"
    rows = []
    for k, m in enumerate(retrieved.spectrum.labels):
        rows.append([int(m), retrieved.spectrum.intensities[k],
                     direct.intensity(m), abs(retrieved.spectrum.intensities[k]
                                              - direct.intensity(m))])
    write_csv(mqi_path, ["m", "I_retrieved", "I_direct", "abs_err"], rows)
    manifest.add_output(mqi_path, rows=len(rows))
    manifest.summary = {
        "imag_residual": retrieved.imag_residual,
        "parseval_residual": protocol.parseval_residual(signal, retrieved.spectrum),
        "shots": shots,
    }
    manifest.finalize()
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config), {
        "seed": 20240817, "draws": 50, "outdir": "runs/validate",
    })
    outdir = Path(cfg["outdir"])
    manifest = Manifest("validate", cfg, outdir)
    manifest.write_running()
    report = oracles.run_validation_suite(seed=int(cfg["seed"]), draws=int(cfg["draws"]))
    text = report.render()
    print(text)
    path = outdir / "validation_report.txt"
    path.write_text(text + "\n", encoding="utf-8")
    manifest.add_output(path)
    manifest.summary = {
        "checks": len(report.checks),
        "failed": [c.name for c in report.checks if not c.passed],
    }
    manifest.finalize("done" if report.passed else "failed")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhmqc",
        description="Multiple-quantum-coherence spectra for non-Hermitian Hamiltonians",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, workers=True):
        p.add_argument("--config", help="YAML/JSON config file; flags override it")
        p.add_argument("--outdir", help="output directory (CSV + manifest.json)")
        if workers:
            p.add_argument("--workers", type=int,
                           help=f"parallel workers (default 1 or ${WORKERS_ENV})")

    p = sub.add_parser("two-level", help="gain/loss qubit sweep over Gamma",
                       epilog="columns: gamma, F, I_-1, I_0, I_1, ep_flag")
    add_common(p)
    p.add_argument("--j", type=float, help="coupling J (default 1)")
    p.add_argument("--gamma-grid", dest="gamma_grid", help="start:stop:step")
    p.add_argument("--reference", choices=["sx", "sy", "sz"],
                   help="reference spin axis (default sy)")
    p.set_defaults(fn=cmd_two_level)

    p = sub.add_parser(
        "ising-sweep", help="Ising chain sweep over h_z",
        epilog="columns: hz, F, I_-L..I_L, re_energy, im_energy, ep_flag; "
               "critical_point.csv: hz_c, peak_F, method, grid_step")
    add_common(p)
    p.add_argument("--l", type=int, help="chain length (default 7)")
    p.add_argument("--j", type=float, help="NN coupling (default 0.4)")
    p.add_argument("--j2", type=float, help="NNN coupling (default 0)")
    p.add_argument("--gamma", type=float, help="transverse field (default 1)")
    p.add_argument("--hy", type=float, help="imaginary y field (default 0)")
    p.add_argument("--hz-grid", dest="hz_grid", help="start:stop:step")
    p.set_defaults(fn=cmd_ising_sweep)

    p = sub.add_parser("ising-scaling", help="critical h_z per chain length",
                       epilog="columns: L, inverse_L, hz_c, peak_F, method")
    add_common(p)
    p.add_argument("--l-values", dest="l_values", help="comma list, e.g. 6,7,8")
    p.add_argument("--j", type=float)
    p.add_argument("--j2", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--hy", type=float)
    p.add_argument("--hz-grid", dest="hz_grid", help="start:stop:step")
    p.set_defaults(fn=cmd_ising_scaling)

    p = sub.add_parser("hn-phase", help="boundary-hopping phase diagram",
                       epilog="columns: delta_l_ratio, delta_r_ratio, F, ep_flag")
    add_common(p)
    p.add_argument("--n", type=int, help="sites (default 100)")
    p.add_argument("--jl", type=float, help="left hopping (default 1)")
    p.add_argument("--jr", type=float, help="right hopping (default 1)")
    p.add_argument("--dl-grid", dest="dl_grid", help="delta_L/J_L grid")
    p.add_argument("--dr-grid", dest="dr_grid", help="delta_R/J_R grid")
    p.set_defaults(fn=cmd_hn_phase)

    p = sub.add_parser("hn-obc", help="open-chain sweep over J_L/J_R",
                       epilog="columns: ratio, F, re_energy, im_energy, ep_flag")
    add_common(p)
    p.add_argument("--n", type=int, help="sites (default 10)")
    p.add_argument("--jr", type=float, help="right hopping (default 1)")
    p.add_argument("--ratio-grid", dest="ratio_grid", help="J_L/J_R grid")
    p.set_defaults(fn=cmd_hn_obc)

    p = sub.add_parser(
        "hn-disorder", help="disorder-averaged mid-spectrum F",
        epilog="columns: W, mean_F, std_F, realizations, excluded, master_seed")
    add_common(p)
    p.add_argument("--n", type=int, help="sites (default 100)")
    p.add_argument("--jl", type=float, help="left hopping (default 1)")
    p.add_argument("--jr", type=float, help="right hopping (default 2)")
    p.add_argument("--w-grid", dest="w_grid", help="disorder strength grid")
    p.add_argument("--realizations", type=int, help="draws per W (default 200)")
    p.add_argument("--seed", type=int, help="master seed (default 7)")
    p.set_defaults(fn=cmd_hn_disorder)

    p = sub.add_parser(
        "protocol", help="fidelity signal + MQI retrieval (Ising)",
        epilog="protocol_signal.csv: phase, re_f, im_f; "
               "protocol_mqi.csv: m, I_retrieved, I_direct, abs_err")
    add_common(p, workers=False)
    p.add_argument("--l", type=int, help="chain length (default 6)")
    p.add_argument("--j", type=float)
    p.add_argument("--j2", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--hy", type=float)
    p.add_argument("--hz", type=float, help="imaginary z field (default 0.1)")
    p.add_argument("--m-samples", dest="m_samples", type=int,
                   help="phase samples M (default 2L+1)")
    p.add_argument("--shots", type=int, help="shot-noise sample count (optional)")
    p.add_argument("--seed", type=int, help="noise seed (default 7)")
    p.set_defaults(fn=cmd_protocol)

    p = sub.add_parser("validate", help="run the oracle/identity suite")
    add_common(p, workers=False)
    p.add_argument("--seed", type=int, help="draw seed (default 20240817)")
    p.add_argument("--draws", type=int, help="random draws (default 50)")
    p.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnsembleFailureError,) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NHMQCError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
