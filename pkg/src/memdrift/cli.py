"""Command line front end.

Verbs: run (single sweep), study (geometry grid over electrode ratio and
flake thickness for the side/mixed/top configurations), compare (two run
directories), validate (configuration check). Every run directory receives
the sweep table, any requested snapshots, the fully resolved config echo,
and a JSON manifest; re-running the echoed config with the same backend and
thread settings reproduces the CSV files bitwise.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import os
import sys
import time

from . import __version__
from . import config as cf
from . import observables as ob
from . import solver as sv
from ._kernels import BACKEND
from .assembly import AssemblyContext

SWEEP_FILE = "sweep.csv"
DIAG_FILE = "sweep_diagnostics.csv"
MANIFEST_FILE = "run_manifest.json"
ECHO_FILE = "config_echo.cfg"
STUDY_FILE = "study_matrix.csv"

_FULL_MESH_FACTOR = 2
_FULL_STEP_FACTOR = 10


def _presets_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "presets")


def preset_names() -> list:
    d = _presets_dir()
    if not os.path.isdir(d):
        return []
    return sorted(os.path.splitext(f)[0] for f in os.listdir(d) if f.endswith(".cfg"))


def _resolve_config(arg: str) -> str:
    if os.path.exists(arg):
        return arg
    cand = os.path.join(_presets_dir(), arg + ".cfg")
    if os.path.exists(cand):
        return cand
    raise cf.ConfigError(
        [f"config: no such file or preset {arg!r}; presets: {', '.join(preset_names())}"]
    )


def _cli_overrides(args) -> dict:
    ov = {}
    if getattr(args, "out", None):
        ov.setdefault("outputs", {})["dir"] = args.out
    if getattr(args, "snapshot_times", None) is not None:
        ov.setdefault("outputs", {})["snapshot_times"] = args.snapshot_times
    return ov


def _apply_full(cfg: cf.ExperimentConfig) -> cf.ExperimentConfig:
    """Raise mesh and time resolution beyond the desk-scale defaults."""
    geo = cfg.values["geometry"]
    tgrid = cfg.values["time"]
    geo["nx"] = str(int(geo["nx"]) * _FULL_MESH_FACTOR)
    if int(geo["dimension"]) == 2:
        geo["nz"] = str(int(geo["nz"]) * _FULL_MESH_FACTOR)
    if tgrid["steps"].strip():
        tgrid["steps"] = str(int(tgrid["steps"]) * _FULL_STEP_FACTOR)
    else:
        tgrid["steps_per_cycle"] = str(int(tgrid["steps_per_cycle"]) * _FULL_STEP_FACTOR)
    return cfg


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _snapshot_name(t_s: float) -> str:
    return f"snapshot_t{t_s:.10g}s.csv"


def execute_run(cfg: cf.ExperimentConfig, out_dir: str) -> dict:
    """Run one configured sweep and write all artifacts into out_dir.

    Returns the manifest dict (also written to run_manifest.json). A solver
    failure is recorded in the manifest (completed = false) together with
    the partial sweep table; the caller decides the exit status.
    """
    mesh, dev, grid, settings, t_final, outputs = cf.build_simulation(cfg)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, ECHO_FILE), "w", encoding="utf-8") as f:
        f.write(cf.config_echo_text(cfg))

    t0 = time.time()
    failure = ""
    try:
        traj, result = sv.run_sweep(mesh, dev, grid, settings, t_final_s=t_final)
    except sv.SweepFailure as exc:
        traj = exc.trajectory
        failure = str(exc)
        result = sv.SweepResult(
            len(traj.records) - 1, 0, 0, time.time() - t0, False, failure
        )

    ctx = AssemblyContext(mesh, dev)
    contact = ob.measured_contact(dev)
    # observables come from the full record list so every backward
    # difference spans its true predecessor; the files keep only the
    # requested grid times, dropping accepted step-halving substeps
    series = ob.trajectory_series(ctx, traj, contact)
    keep = [k for k, rec in enumerate(traj.records) if rec.is_target]
    out_series = _select_rows(series, keep)
    files = [ECHO_FILE, SWEEP_FILE, DIAG_FILE]
    ob.write_sweep_csv(os.path.join(out_dir, SWEEP_FILE), out_series)
    with open(os.path.join(out_dir, DIAG_FILE), "w", encoding="utf-8") as f:
        ids = sorted(series["i_by_contact"])
        f.write("t_s," + ",".join(f"i_contact{c}_A" for c in ids))
        f.write(",newton_iterations,residual_norm\n")
        for k in keep:
            rec = traj.records[k]
            row = [f"{series['t_s'][k]:.17g}"]
            row += [f"{series['i_by_contact'][c][k]:.17g}" for c in ids]
            row += [str(rec.iterations), f"{rec.residual_norm:.17g}"]
            f.write(",".join(row) + "\n")

    snapshots = []
    times = series["t_s"]
    for t_req in outputs["snapshot_times"]:
        k = int(min(range(len(times)), key=lambda i: abs(times[i] - t_req)))
        name = _snapshot_name(t_req)
        ob.write_snapshot_csv(os.path.join(out_dir, name), ctx, traj.records[k].state)
        snapshots.append({"requested_s": t_req, "actual_s": float(times[k]), "file": name})
        files.append(name)

    manifest = {
        "package": "memdrift",
        "version": __version__,
        "backend": BACKEND,
        "created_utc": _utc_now(),
        "config_source": cfg.path or "(defaults)",
        "config_echo": ECHO_FILE,
        "completed": result.completed,
        "message": result.message,
        "n_steps": result.n_steps,
        "n_rejected": result.n_rejected,
        "n_continuations": result.n_continuations,
        "wall_s": result.wall_s,
        "measured_contact": contact,
        "mesh_cells": mesh.n_cells,
        "files": files,
        "snapshots": snapshots,
    }
    with open(os.path.join(out_dir, MANIFEST_FILE), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def _select_rows(series: dict, keep: list) -> dict:
    out = {}
    for key, val in series.items():
        if isinstance(val, dict):
            out[key] = {c: v[keep] for c, v in val.items()}
        else:
            out[key] = val[keep]
    return out


def _cmd_run(args) -> int:
    path = _resolve_config(args.config)
    cfg = cf.load_config(path, overrides=_cli_overrides(args))
    if args.full:
        cfg = _apply_full(cfg)
    out_dir = cfg.get("outputs", "dir")
    manifest = execute_run(cfg, out_dir)
    print(f"run: {out_dir}  steps={manifest['n_steps']}  wall={manifest['wall_s']:.1f}s")
    if not manifest["completed"]:
        print(f"run failed: {manifest['message']}", file=sys.stderr)
        return 1
    return 0


def _study_job(values: dict, out_dir: str) -> dict:
    """Worker-pool entry: values is a resolved config table."""
    cfg = cf.ExperimentConfig(values=values, path="")
    return execute_run(cfg, out_dir)


def _job_dir_name(tag: str, h_t: float, h_e: float) -> str:
    return f"{tag}_hT{h_t:.6g}_hE{h_e:.6g}"


def run_study(cfg: cf.ExperimentConfig, out_root: str, threads: int = 1) -> dict:
    """Geometry study: SC/MC/TC runs per grid cell plus the error matrix.

    Identical geometries are solved once (the side configuration does not
    depend on the electrode ratio). Failures are recorded per matrix cell
    and the study continues. Returns the study summary dict.
    """
    plan = cf.build_study(cfg)
    os.makedirs(out_root, exist_ok=True)

    jobs = {}
    cells = []
    for h_t in plan.thicknesses:
        for ratio in plan.ratios:
            row = {"h_T": h_t, "ratio": ratio, "dirs": {}}
            for tag in plan.configurations:
                job_cfg = cf.study_job_config(plan, h_t, ratio, tag)
                h_e = float(job_cfg.get("geometry", "h_e"))
                name = _job_dir_name(tag, h_t, h_e)
                row["dirs"][tag] = name
                if name not in jobs:
                    jobs[name] = job_cfg
            cells.append(row)

    results = {}
    items = sorted(jobs.items())
    if threads <= 1:
        for name, job_cfg in items:
            try:
                results[name] = _study_job(job_cfg.values, os.path.join(out_root, name))
            except Exception as exc:  # noqa: BLE001 - study must continue
                results[name] = {"completed": False, "message": str(exc)}
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            futs = {
                pool.submit(_study_job, job_cfg.values, os.path.join(out_root, name)): name
                for name, job_cfg in items
            }
            for fut in concurrent.futures.as_completed(futs):
                name = futs[fut]
                try:
                    results[name] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    results[name] = {"completed": False, "message": str(exc)}

    def _current(name):
        man = results.get(name, {})
        if not man.get("completed"):
            return None
        series = ob.read_sweep_csv(os.path.join(out_root, name, SWEEP_FILE))
        return series["i_A"]

    rows = []
    for row in cells:
        entry = {
            "h_T_m": row["h_T"],
            "h_E_over_h_C": row["ratio"],
            "e_MC_SC": float("nan"),
            "e_MC_TC": float("nan"),
            "status": "ok",
        }
        bad = [t for t in row["dirs"] if not results.get(row["dirs"][t], {}).get("completed")]
        if bad:
            msgs = "; ".join(
                f"{t}: {results.get(row['dirs'][t], {}).get('message', 'missing')}" for t in bad
            )
            entry["status"] = f"failed({msgs})"
        else:
            i_mc = _current(row["dirs"]["MC"]) if "MC" in row["dirs"] else None
            if i_mc is not None and "SC" in row["dirs"]:
                entry["e_MC_SC"] = ob.l2_current_error(i_mc, _current(row["dirs"]["SC"]))
            if i_mc is not None and "TC" in row["dirs"]:
                entry["e_MC_TC"] = ob.l2_current_error(i_mc, _current(row["dirs"]["TC"]))
        rows.append(entry)

    matrix_path = os.path.join(out_root, STUDY_FILE)
    with open(matrix_path, "w", encoding="utf-8") as f:
        f.write("h_T_m,h_E_over_h_C,e_MC_SC,e_MC_TC,status\n")
        for e in rows:
            f.write(
                f"{e['h_T_m']:.17g},{e['h_E_over_h_C']:.17g},"
                f"{e['e_MC_SC']:.17g},{e['e_MC_TC']:.17g},{e['status']}\n"
            )

    summary = {
        "package": "memdrift",
        "version": __version__,
        "backend": BACKEND,
        "created_utc": _utc_now(),
        "threads": threads,
        "matrix": STUDY_FILE,
        "n_jobs": len(jobs),
        "rows": rows,
        "jobs": {
            name: {
                "completed": bool(results.get(name, {}).get("completed")),
                "message": results.get(name, {}).get("message", ""),
                "wall_s": results.get(name, {}).get("wall_s"),
            }
            for name in sorted(jobs)
        },
    }
    with open(os.path.join(out_root, "study_manifest.json"), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return summary


def _cmd_study(args) -> int:
    path = _resolve_config(args.config)
    cfg = cf.load_config(path, overrides=_cli_overrides(args))
    out_root = args.out or cfg.get("outputs", "dir")
    summary = run_study(cfg, out_root, threads=max(1, args.threads))
    n_bad = sum(0 if j["completed"] else 1 for j in summary["jobs"].values())
    print(f"study: {out_root}  jobs={summary['n_jobs']}  failed={n_bad}")
    for e in summary["rows"]:
        print(
            f"  h_T={e['h_T_m']:.3g} m  h_E/h_C={e['h_E_over_h_C']:.3g}  "
            f"e_MC_SC={e['e_MC_SC']:.4g}  e_MC_TC={e['e_MC_TC']:.4g}  {e['status']}"
        )
    return 1 if n_bad else 0


def _cmd_compare(args) -> int:
    a, b = args.run_a, args.run_b
    sa = ob.read_sweep_csv(os.path.join(a, SWEEP_FILE))
    sb = ob.read_sweep_csv(os.path.join(b, SWEEP_FILE))
    if args.metric == "l2":
        e = ob.l2_current_error(sa["i_A"], sb["i_A"])
        print(f"l2_current_error = {e:.17g}")
        return 0
    if args.metric == "current":
        rel, masked = ob.relative_current_difference(sa["i_A"], sb["i_A"])
        vals = rel[~masked]
        mx = float(vals.max()) if vals.size else float("nan")
        print(f"max_relative_current_difference = {mx:.17g}")
        print(f"masked_samples = {int(masked.sum())} of {masked.size}")
        return 0
    # density: snapshots common to both run directories, per-carrier maxima
    snaps = sorted(
        f
        for f in os.listdir(a)
        if f.startswith("snapshot_") and f.endswith(".csv") and os.path.exists(os.path.join(b, f))
    )
    if not snaps:
        print("no common snapshot files to compare", file=sys.stderr)
        return 2
    for name in snaps:
        da = ob.read_snapshot_csv(os.path.join(a, name))
        db = ob.read_snapshot_csv(os.path.join(b, name))
        out = []
        for col in ("n_n", "n_p", "n_a"):
            d = ob.relative_density_difference(da[col], db[col])
            out.append(f"{col}: {float(d.max()):.17g}")
        print(f"{name}  max relative density difference  " + "  ".join(out))
    return 0


def _cmd_validate(args) -> int:
    path = _resolve_config(args.config)
    cfg = cf.load_config(path)
    cf.build_simulation(cfg)
    if cfg.get("study", "ratios").strip() or cfg.get("study", "thicknesses").strip():
        cf.build_study(cfg)
    print(f"configuration valid: {path}")
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="memdrift",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "Config values can be overridden by environment variables with the\n"
            f"prefix {cf.ENV_PREFIX}: section parts and the key are joined by\n"
            "double underscores, e.g. MEMDRIFT_CONTACTS__MODEL=ohmic or\n"
            "MEMDRIFT_PHYSICS__CARRIERS__N__MOBILITY=1e-4. MEMDRIFT_BACKEND\n"
            "selects the kernel backend (numba or numpy).\n"
            f"Presets: {', '.join(preset_names()) or '(none installed)'}"
        ),
    )
    sub = p.add_subparsers(dest="verb", required=True)

    def add_common(sp):
        sp.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")
        sp.add_argument(
            "--threads", type=int, default=1, help="worker processes for study jobs"
        )

    pr = sub.add_parser("run", help="run one configured voltage sweep")
    pr.add_argument("config", help="config file path or preset name")
    add_common(pr)
    pr.add_argument(
        "--snapshot-times",
        default=None,
        metavar="t1,t2,...",
        help="snapshot times in seconds (overrides outputs.snapshot_times)",
    )
    pr.add_argument(
        "--full",
        action="store_true",
        help=f"raise resolution beyond desk scale (mesh x{_FULL_MESH_FACTOR}, steps x{_FULL_STEP_FACTOR})",
    )
    pr.set_defaults(func=_cmd_run)

    ps = sub.add_parser("study", help="run a geometry study grid")
    ps.add_argument("config", help="config file path or preset name with a [study] grid")
    add_common(ps)
    ps.set_defaults(func=_cmd_study)

    pc = sub.add_parser("compare", help="compare two run directories")
    pc.add_argument("run_a", help="reference run directory")
    pc.add_argument("run_b", help="other run directory")
    pc.add_argument(
        "--metric",
        required=True,
        choices=("density", "current", "l2"),
        help="density: per-carrier snapshot maxima; current: masked pointwise series; l2: scalar error",
    )
    pc.set_defaults(func=_cmd_compare)

    pv = sub.add_parser("validate", help="check a config and list every violated field")
    pv.add_argument("config", help="config file path or preset name")
    pv.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except cf.ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for msg in exc.errors:
            print(f"  {msg}", file=sys.stderr)
        return 2
    except (OSError, ob.ObservableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
