"""Experiment configuration: INI-style file grammar, environment overrides,
validation, and construction of the simulation objects.

Grammar: sections with dotted names hold key = value pairs, e.g.

    [physics.carriers.n]
    mobility = 2.5e-4

Every key has a default (the reference parameter table), so a config file
only states deviations. Environment variables override file values last:
MEMDRIFT_<SECTION>__<KEY> with double underscores separating the dotted
section parts from each other and from the key, e.g.
MEMDRIFT_CONTACTS__MODEL=ohmic or MEMDRIFT_PHYSICS__CARRIERS__N__MOBILITY=1e-4.
Validation collects every violated field before reporting.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field

from . import device as dv
from . import mesh as mm
from . import solver as sv
from .physics import (
    PhysicalCarrier,
    PhysicalParams,
    ValidationError,
    nondimensionalize,
    parse_statistics,
)

ENV_PREFIX = "MEMDRIFT_"

DEFAULTS = {
    "geometry": {
        "dimension": "1",
        "contact_config": "side",
        "h_c": "1e-6",
        "h_t": "15e-9",
        "h_e": "0.0",
        "h_w": "10e-6",
        "nx": "200",
        "nz": "1",
        "grading": "1.0",
    },
    "physics": {
        "temperature": "300.0",
        "relative_permittivity": "10.0",
        "doping_sign": "1",
        "doping_density": "1e21",
    },
    "physics.carriers.n": {
        "z": "-1",
        "mobility": "2.5e-4",
        "reference_density": "1e25",
        "band_energy": "-4.0",
        "statistics": "fermi-dirac-1/2",
    },
    "physics.carriers.p": {
        "z": "1",
        "mobility": "2.5e-4",
        "reference_density": "1.5e25",
        "band_energy": "-5.3",
        "statistics": "fermi-dirac-1/2",
    },
    "physics.carriers.a": {
        "z": "1",
        "mobility": "5e-14",
        "reference_density": "1e28",
        "band_energy": "-4.32",
        "statistics": "fermi-dirac-minus-1",
        "mobile": "true",
    },
    "contacts": {
        "model": "schottky",
        "barrier": "0.001",
        "phi0": "0.0",
        "v_n": "3.6e4",
        "v_p": "3.2e4",
    },
    "protocol.left": {
        "kind": "constant",
        "value": "0.0",
        "amplitude": "13.0",
        "rate": "5.0",
        "cycles": "2",
    },
    "protocol.right": {
        "kind": "cycles",
        "value": "0.0",
        "amplitude": "13.0",
        "rate": "5.0",
        "cycles": "2",
    },
    "solver": {
        "rel_tol": "1e-12",
        "abs_tol": "0.0",
        "max_iterations": "80",
        "update_clamp": "4.0",
    },
    "time": {
        "kind": "uniform",
        "steps_per_cycle": "400",
        "steps": "",
        "t_final": "",
        "tau_init": "1e-4",
        "tau_min": "1e-9",
        "tau_max": "0.1",
        "grow": "1.4",
    },
    "outputs": {
        "dir": "out",
        "snapshot_times": "",
    },
    "study": {
        "ratios": "",
        "thicknesses": "",
        "configurations": "SC,MC,TC",
        "nx": "48",
        "nz": "6",
    },
}

_SECTION_ORDER = list(DEFAULTS)


class ConfigError(ValueError):
    """One or more invalid configuration fields; `errors` lists them all."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    """Fully resolved key/value table plus the objects derived from it."""

    values: dict  # section -> {key: str}
    path: str = ""

    def get(self, section: str, key: str) -> str:
        return self.values[section][key]


def _read_ini(text: str, source: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError([f"{source}: {exc}"]) from exc
    out = {}
    for sec in cp.sections():
        out[sec.strip().lower()] = dict(cp.items(sec))
    return out


def _env_overrides(environ) -> dict:
    out = {}
    for name, val in environ.items():
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        parts = name[len(ENV_PREFIX):].lower().split("__")
        section = ".".join(parts[:-1])
        out.setdefault(section, {})[parts[-1]] = val
    return out


def load_config(path: str | None = None, environ=None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults, an optional config file, environment variables, and
    explicit overrides (strongest last); unknown sections or keys are errors."""
    values = {sec: dict(kv) for sec, kv in DEFAULTS.items()}
    errors = []
    layers = []
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                layers.append((_read_ini(f.read(), str(path)), str(path)))
        except OSError as exc:
            raise ConfigError([f"{path}: {exc}"]) from exc
    if environ is None:
        environ = os.environ
    layers.append((_env_overrides(environ), "environment"))
    if overrides:
        layers.append((overrides, "overrides"))
    for layer, where in layers:
        for sec, kv in layer.items():
            if sec not in values:
                errors.append(f"{where}: unknown section [{sec}]")
                continue
            for key, val in kv.items():
                if key not in values[sec]:
                    errors.append(f"{where}: unknown key {sec}.{key}")
                    continue
                values[sec][key] = str(val)
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(values=values, path=str(path) if path else "")


def config_echo_text(cfg: ExperimentConfig) -> str:
    """Canonical fully resolved config; reloading it reproduces the run."""
    buf = io.StringIO()
    for sec in _SECTION_ORDER:
        buf.write(f"[{sec}]\n")
        for key, val in cfg.values[sec].items():
            buf.write(f"{key} = {val}\n")
        buf.write("\n")
    return buf.getvalue()


class _Checker:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.errors = []

    def _conv(self, section, key, fn, what):
        raw = self.cfg.get(section, key)
        try:
            return fn(raw)
        except (TypeError, ValueError):
            self.errors.append(f"{section}.{key}: not {what}: {raw!r}")
            return None

    def num(self, section, key, low=None, high=None, low_open=False):
        v = self._conv(section, key, float, "a number")
        if v is None:
            return None
        if low is not None and (v <= low if low_open else v < low):
            op = ">" if low_open else ">="
            self.errors.append(f"{section}.{key}: must be {op} {low}")
            return None
        if high is not None and v > high:
            self.errors.append(f"{section}.{key}: must be <= {high}")
            return None
        return v

    def integer(self, section, key, low=None):
        v = self._conv(section, key, int, "an integer")
        if v is None:
            return None
        if low is not None and v < low:
            self.errors.append(f"{section}.{key}: must be >= {low}")
            return None
        return v

    def choice(self, section, key, options):
        raw = self.cfg.get(section, key).strip().lower()
        if raw not in options:
            self.errors.append(
                f"{section}.{key}: must be one of {sorted(options)}, got {raw!r}"
            )
            return None
        return raw

    def flag(self, section, key):
        raw = self.cfg.get(section, key).strip().lower()
        if raw in ("true", "yes", "1", "on"):
            return True
        if raw in ("false", "no", "0", "off"):
            return False
        self.errors.append(f"{section}.{key}: not a boolean: {raw!r}")
        return None

    def float_list(self, section, key):
        raw = self.cfg.get(section, key).strip()
        if not raw:
            return []
        out = []
        for tok in raw.split(","):
            try:
                out.append(float(tok))
            except ValueError:
                self.errors.append(f"{section}.{key}: not a number: {tok.strip()!r}")
                return None
        return out


def _build_protocol(ck: _Checker, section: str):
    kind = ck.choice(section, "kind", {"constant", "cycles"})
    if kind == "constant":
        value = ck.num(section, "value")
        if value is None:
            return None
        return dv.ConstantVoltage(value)
    if kind == "cycles":
        amp = ck.num(section, "amplitude", low=0.0, low_open=True)
        rate = ck.num(section, "rate", low=0.0, low_open=True)
        ncyc = ck.integer(section, "cycles", low=1)
        if None in (amp, rate, ncyc):
            return None
        return dv.PiecewiseLinearCycles(amp, rate, ncyc)
    return None


def build_simulation(cfg: ExperimentConfig):
    """Validated (mesh, device, time grid, Newton settings, outputs) tuple.

    Raises ConfigError listing every violated field.
    """
    ck = _Checker(cfg)

    dim = ck.integer("geometry", "dimension")
    if dim not in (1, 2, None):
        ck.errors.append("geometry.dimension: must be 1 or 2")
        dim = None
    h_c = ck.num("geometry", "h_c", low=0.0, low_open=True)
    h_t = ck.num("geometry", "h_t", low=0.0, low_open=True)
    h_e = ck.num("geometry", "h_e", low=0.0)
    h_w = ck.num("geometry", "h_w", low=0.0, low_open=True)
    nx = ck.integer("geometry", "nx", low=2)
    nz = ck.integer("geometry", "nz", low=1)
    grading = ck.num("geometry", "grading", low=1.0)
    config_name = ck.choice("geometry", "contact_config", {"side", "top", "mixed"})
    if config_name is not None and h_e is not None:
        if config_name == "side" and h_e > 0.0:
            ck.errors.append("geometry.h_e: side contacts require h_e = 0")
        if config_name != "side" and dim == 2 and h_e == 0.0:
            ck.errors.append("geometry.h_e: top/mixed contacts require h_e > 0")

    temp = ck.num("physics", "temperature", low=0.0, low_open=True)
    eps_r = ck.num("physics", "relative_permittivity", low=0.0, low_open=True)
    dope_sign = ck.integer("physics", "doping_sign")
    if dope_sign not in (-1, 1, None):
        ck.errors.append("physics.doping_sign: must be -1 or +1")
        dope_sign = None
    dope = ck.num("physics", "doping_density", low=0.0)

    carriers = {}
    want_z = {"n": -1, "p": +1}
    for name in ("n", "p", "a"):
        sec = f"physics.carriers.{name}"
        z = ck.integer(sec, "z")
        if name in want_z and z not in (want_z[name], None):
            ck.errors.append(f"{sec}.z: must be {want_z[name]}")
        mob = ck.num(sec, "mobility", low=0.0, low_open=True)
        dens = ck.num(sec, "reference_density", low=0.0, low_open=True)
        band = ck.num(sec, "band_energy")
        try:
            stats = parse_statistics(cfg.get(sec, "statistics"), f"{sec}.statistics")
        except ValidationError as exc:
            ck.errors.append(str(exc))
            stats = None
        if None not in (z, mob, dens, band) and stats is not None:
            carriers[name] = PhysicalCarrier(name, z, mob, dens, band, stats)
    ions_mobile = ck.flag("physics.carriers.a", "mobile")

    model_name = ck.choice("contacts", "model", {"schottky", "ohmic"})
    barrier = ck.num("contacts", "barrier")
    phi0 = ck.num("contacts", "phi0")
    v_n = ck.num("contacts", "v_n", low=0.0)
    v_p = ck.num("contacts", "v_p", low=0.0)
    if model_name == "schottky":
        if v_n == 0.0:
            ck.errors.append("contacts.v_n: Schottky contacts need a positive recombination velocity")
        if v_p == 0.0:
            ck.errors.append("contacts.v_p: Schottky contacts need a positive recombination velocity")

    protocols = {}
    for cid, sec in ((0, "protocol.left"), (1, "protocol.right")):
        proto = _build_protocol(ck, sec)
        if proto is not None:
            protocols[cid] = proto

    rel_tol = ck.num("solver", "rel_tol", low=0.0, low_open=True)
    abs_tol = ck.num("solver", "abs_tol", low=0.0)
    max_it = ck.integer("solver", "max_iterations", low=1)
    clamp = ck.num("solver", "update_clamp", low=0.0, low_open=True)

    grid_kind = ck.choice("time", "kind", {"uniform", "adaptive", "auto"})
    steps_raw = cfg.get("time", "steps").strip()
    spc = ck.integer("time", "steps_per_cycle", low=1) if not steps_raw else None
    steps = None
    if steps_raw:
        try:
            steps = int(steps_raw)
        except ValueError:
            ck.errors.append(f"time.steps: not an integer: {steps_raw!r}")
        if steps is not None and steps < 1:
            ck.errors.append("time.steps: must be >= 1")
            steps = None
    t_final_raw = cfg.get("time", "t_final").strip()
    t_final = None
    if t_final_raw:
        try:
            t_final = float(t_final_raw)
        except ValueError:
            ck.errors.append(f"time.t_final: not a number: {t_final_raw!r}")
        if t_final is not None and t_final <= 0.0:
            ck.errors.append("time.t_final: must be positive")
            t_final = None
    tau_init = ck.num("time", "tau_init", low=0.0, low_open=True)
    tau_min = ck.num("time", "tau_min", low=0.0, low_open=True)
    tau_max = ck.num("time", "tau_max", low=0.0, low_open=True)
    grow = ck.num("time", "grow", low=1.0)

    snapshot_times = ck.float_list("outputs", "snapshot_times")
    out_dir = cfg.get("outputs", "dir").strip()
    if not out_dir:
        ck.errors.append("outputs.dir: must not be empty")

    if protocols and all(p.horizon == float("inf") for p in protocols.values()):
        if t_final is None and not ck.errors:
            ck.errors.append(
                "time.t_final: required when every contact voltage is constant"
            )

    if ck.errors:
        raise ConfigError(ck.errors)

    physical = PhysicalParams(
        temperature=temp,
        relative_permittivity=eps_r,
        length=h_c,
        carriers=carriers,
        doping_sign=dope_sign,
        doping_density=dope,
        v_n=v_n,
        v_p=v_p,
    )
    dimless = nondimensionalize(physical)

    if dim == 1:
        mesh = mm.build_interval_mesh(1.0, nx, grading)
    else:
        geom = mm.GeometrySpec(
            contact_config=mm.ContactConfig(config_name),
            h_C=h_c, h_T=h_t, h_E=h_e, nx=nx, nz=nz, grading=grading,
        )
        mesh = mm.build_device_mesh(geom, dimless.scaling)

    contacts = dv.default_contacts(
        dimless,
        dv.ContactModel(model_name),
        barrier,
        phi0,
        v_n,
        v_p,
        protocols,
    )
    device = dv.DeviceSpec(
        dimless=dimless,
        doping=dv.Doping(dope_sign, dimless.doping),
        contacts=contacts,
        initial=dv.thermal_equilibrium(),
        width=h_w,
        thickness=h_t,
        ion_flux_scale=1.0 if ions_mobile else 0.0,
    )
    device.validate()

    settings = sv.NewtonSettings(
        abs_tol=abs_tol, rel_tol=rel_tol,
        max_iterations=max_it, update_clamp=clamp,
    )
    settings.validate()

    horizon = min(p.horizon for p in protocols.values())
    run_t_final = t_final if t_final is not None else horizon
    if grid_kind == "uniform":
        n_steps = steps if steps is not None else spc * _total_cycles(protocols)
        grid = sv.UniformGrid(n_steps)
    elif grid_kind == "adaptive":
        grid = sv.AdaptiveGrid(tau_init, tau_min, tau_max, grow)
    else:
        grid = None  # solver default: uniform with bounded voltage change
    grid is None or grid.validate()

    outputs = {"dir": out_dir, "snapshot_times": snapshot_times}
    return mesh, device, grid, settings, run_t_final, outputs


def _total_cycles(protocols: dict) -> int:
    n = 1
    for p in protocols.values():
        if isinstance(p, dv.PiecewiseLinearCycles):
            n = max(n, p.n_cycles)
    return n


@dataclass
class StudyPlan:
    """Geometry-grid study: electrode ratios x thicknesses x configurations."""

    ratios: list
    thicknesses: list
    configurations: list
    nx: int
    nz: int
    base: ExperimentConfig = field(repr=False)

    @property
    def jobs(self):
        out = []
        for h_t in self.thicknesses:
            for ratio in self.ratios:
                for tag in self.configurations:
                    out.append((h_t, ratio, tag))
        return out


def build_study(cfg: ExperimentConfig) -> StudyPlan:
    ck = _Checker(cfg)
    ratios = ck.float_list("study", "ratios")
    thicknesses = ck.float_list("study", "thicknesses")
    nx = ck.integer("study", "nx", low=2)
    nz = ck.integer("study", "nz", low=1)
    raw = cfg.get("study", "configurations").strip()
    tags = [t.strip().upper() for t in raw.split(",") if t.strip()]
    for t in tags:
        if t not in ("SC", "MC", "TC"):
            ck.errors.append(f"study.configurations: unknown configuration {t!r}")
    if ratios is not None and not ratios:
        ck.errors.append("study.ratios: must list at least one electrode ratio")
    if thicknesses is not None and not thicknesses:
        ck.errors.append("study.thicknesses: must list at least one thickness")
    if ratios:
        for r in ratios:
            if not 0.0 < r <= 0.5:
                ck.errors.append("study.ratios: ratios must lie in (0, 0.5]")
                break
    if thicknesses:
        for t in thicknesses:
            if t <= 0.0:
                ck.errors.append("study.thicknesses: must be positive")
                break
    if ck.errors:
        raise ConfigError(ck.errors)
    return StudyPlan(
        ratios=ratios,
        thicknesses=thicknesses,
        configurations=tags,
        nx=nx,
        nz=nz,
        base=cfg,
    )


STUDY_TAG_SETTINGS = {
    "SC": {"contact_config": "side", "ratio_sets_h_E": False},
    "MC": {"contact_config": "mixed", "ratio_sets_h_E": True},
    "TC": {"contact_config": "top", "ratio_sets_h_E": True},
}


def study_job_config(plan: StudyPlan, h_t: float, ratio: float, tag: str) -> ExperimentConfig:
    """Resolved config of one study job, derived from the base config."""
    values = {sec: dict(kv) for sec, kv in plan.base.values.items()}
    h_c = float(values["geometry"]["h_c"])
    tag_info = STUDY_TAG_SETTINGS[tag]
    geo = values["geometry"]
    geo["dimension"] = "2"
    geo["contact_config"] = tag_info["contact_config"]
    geo["h_t"] = repr(h_t)
    geo["h_e"] = repr(ratio * h_c) if tag_info["ratio_sets_h_E"] else "0.0"
    geo["nx"] = str(plan.nx)
    geo["nz"] = str(plan.nz)
    geo["grading"] = "1.0"
    return ExperimentConfig(values=values, path=plan.base.path)
