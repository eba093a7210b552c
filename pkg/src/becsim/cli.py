"""Command-line runner: validated JSON configs in, delimited data and
rendered figures out.

    becsim <mode> --config cfg.json [--seed N] [--out DIR] [--jobs K]
    becsim preset --preset fig3 [--out DIR] [--seed N]

Modes: meanfield, steady, nonlinear-steady, response, mcwf, master,
fixedpoints, scan, preset. Every run writes a summary.json with the config
hash, a one-line headline, and library versions; data artifacts are
byte-identical across reruns of the same config and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import figures, series
from .errors import BecsimError, ConfigError, NoPhysicalModeError
from .meanfield import (
    BlochState,
    DriveSpec,
    bifurcation_un_threshold,
    find_fixed_points,
    integrate,
)
from .model import (
    PARAM_KEYS,
    ModelParams,
    config_hash,
    derive_rates,
    loss_rates_for,
    params_from_dict,
)
from .presets import get_preset, preset_names
from .quantum import (
    coherent_condensate,
    husimi_q,
    mcwf_ensemble,
    measurement_distributions,
    propagate_master,
)
from .response import (
    resonance_frequency,
    response_bias,
    response_surface,
    response_tunneling,
)
from .steadystate import (
    adiabatic_decay,
    critical_n,
    linear_decay_modes,
    nonlinear_quasi_steady,
    select_physical,
)

MODES = (
    "meanfield", "steady", "nonlinear-steady", "response",
    "mcwf", "master", "fixedpoints", "scan", "preset",
)
AXIS_NAMES = ("J", "U", "epsilon", "gamma_p", "gamma_a1", "gamma_a2", "t1_inv", "f_a", "omega")
_TOP_KEYS = (
    "params", "initial", "time", "drive", "scan",
    "seed", "n_traj", "n_fixed", "max_sector", "distributions",
)


@dataclass
class ScanAxis:
    name: str
    values: np.ndarray


@dataclass
class RunConfig:
    """Validated run configuration; raw holds the normalized mapping that is
    hashed into every artifact."""

    params: ModelParams
    raw: dict
    theta: float | None = None
    phi: float | None = None
    n0: float | None = None
    t_end: float | None = None
    n_points: int | None = None
    drive_kind: str = "none"
    drive_j1: float = 0.0
    drive_eps1: float = 0.0
    drive_omega: float | None = None
    axes: list | None = None
    seed: int | None = None
    n_traj: int | None = None
    n_fixed: float | None = None
    max_sector: int = 30
    distributions: bool = False

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_points)


def _axis_from_dict(spec, violations, label):
    keys = {"name", "min", "max", "points", "spacing"}
    if not isinstance(spec, dict):
        violations.append(f"{label}: expected a mapping")
        return None
    for key in spec:
        if key not in keys:
            violations.append(f"{label}.{key}: unknown key")
    name = spec.get("name")
    if name not in AXIS_NAMES:
        violations.append(f"{label}.name: must be one of {', '.join(AXIS_NAMES)}, got {name!r}")
        return None
    try:
        lo = float(spec["min"])
        hi = float(spec["max"])
        points = int(spec["points"])
    except (KeyError, TypeError, ValueError):
        violations.append(f"{label}: needs numeric min, max and integer points")
        return None
    spacing = spec.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        violations.append(f"{label}.spacing: must be linear or log, got {spacing!r}")
        return None
    if not lo < hi:
        violations.append(f"{label}: need min < max, got [{lo}, {hi}]")
        return None
    if points < 2:
        violations.append(f"{label}.points: must be >= 2, got {points}")
        return None
    if spacing == "log":
        if lo <= 0:
            violations.append(f"{label}: log spacing requires min > 0")
            return None
        values = np.logspace(math.log10(lo), math.log10(hi), points)
    else:
        values = np.linspace(lo, hi, points)
    return ScanAxis(name=name, values=values)


def build_run_config(data: dict, seed_override: int | None = None) -> RunConfig:
    """Validate a config mapping, collecting every violation before raising."""
    if not isinstance(data, dict):
        raise ConfigError([f"config: expected a mapping, got {type(data).__name__}"])
    violations = []
    for key in data:
        if key not in _TOP_KEYS:
            violations.append(f"{key}: unknown key")

    params = None
    if "params" not in data:
        violations.append("params: required")
    else:
        try:
            params = params_from_dict(data["params"])
        except ConfigError as err:
            violations.extend(err.violations)

    cfg = RunConfig(params=params, raw={})

    initial = data.get("initial")
    if initial is not None:
        if not isinstance(initial, dict):
            violations.append("initial: expected a mapping")
        else:
            for key in initial:
                if key not in ("theta", "phi", "n0"):
                    violations.append(f"initial.{key}: unknown key")
            cfg.theta = initial.get("theta", 0.0)
            cfg.phi = initial.get("phi", 0.0)
            cfg.n0 = initial.get("n0")
            if not isinstance(cfg.theta, (int, float)) or not 0.0 <= float(cfg.theta) <= math.pi:
                violations.append(f"initial.theta: must lie in [0, pi], got {cfg.theta!r}")
            if not isinstance(cfg.phi, (int, float)) or not math.isfinite(float(cfg.phi)):
                violations.append(f"initial.phi: must be a finite number, got {cfg.phi!r}")
            if cfg.n0 is None or not isinstance(cfg.n0, (int, float)) or float(cfg.n0) <= 0:
                violations.append(f"initial.n0: must be > 0, got {cfg.n0!r}")

    timing = data.get("time")
    if timing is not None:
        if not isinstance(timing, dict):
            violations.append("time: expected a mapping")
        else:
            for key in timing:
                if key not in ("t_end", "n_points"):
                    violations.append(f"time.{key}: unknown key")
            cfg.t_end = timing.get("t_end")
            cfg.n_points = timing.get("n_points", 401)
            if not isinstance(cfg.t_end, (int, float)) or not (
                math.isfinite(float(cfg.t_end)) and float(cfg.t_end) > 0
            ):
                violations.append(f"time.t_end: must be > 0, got {cfg.t_end!r}")
            if not isinstance(cfg.n_points, int) or cfg.n_points < 2:
                violations.append(f"time.n_points: must be an integer >= 2, got {cfg.n_points!r}")

    drive = data.get("drive")
    if drive is not None:
        if not isinstance(drive, dict):
            violations.append("drive: expected a mapping")
        else:
            for key in drive:
                if key not in ("kind", "J1", "eps1", "omega"):
                    violations.append(f"drive.{key}: unknown key")
            cfg.drive_kind = drive.get("kind", "none")
            cfg.drive_j1 = drive.get("J1", 0.0)
            cfg.drive_eps1 = drive.get("eps1", 0.0)
            cfg.drive_omega = drive.get("omega")
            if cfg.drive_kind not in ("none", "tunneling", "bias"):
                violations.append(
                    f"drive.kind: must be one of none|tunneling|bias, got {cfg.drive_kind!r}"
                )
            for label, val in (("J1", cfg.drive_j1), ("eps1", cfg.drive_eps1)):
                if not isinstance(val, (int, float)) or val < 0:
                    violations.append(f"drive.{label}: must be >= 0, got {val!r}")
            if cfg.drive_omega is not None and (
                not isinstance(cfg.drive_omega, (int, float)) or cfg.drive_omega <= 0
            ):
                violations.append(f"drive.omega: must be > 0 when given, got {cfg.drive_omega!r}")

    scan = data.get("scan")
    if scan is not None:
        if not isinstance(scan, dict) or set(scan) - {"axes"}:
            violations.append("scan: expected a mapping with the single key 'axes'")
        else:
            axes_spec = scan.get("axes", [])
            if not isinstance(axes_spec, list) or not 1 <= len(axes_spec) <= 2:
                violations.append("scan.axes: need a list of one or two axis mappings")
            else:
                axes = []
                for idx, spec in enumerate(axes_spec):
                    axis = _axis_from_dict(spec, violations, f"scan.axes[{idx}]")
                    if axis is not None:
                        axes.append(axis)
                if len(axes) == len(axes_spec):
                    names = [a.name for a in axes]
                    if len(set(names)) != len(names):
                        violations.append("scan.axes: axis names must be distinct")
                    cfg.axes = axes

    seed = data.get("seed") if seed_override is None else seed_override
    if seed is not None:
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            violations.append(f"seed: must be a nonnegative integer, got {seed!r}")
        else:
            cfg.seed = seed

    n_traj = data.get("n_traj")
    if n_traj is not None:
        if not isinstance(n_traj, int) or n_traj < 1:
            violations.append(f"n_traj: must be an integer >= 1, got {n_traj!r}")
        cfg.n_traj = n_traj

    n_fixed = data.get("n_fixed")
    if n_fixed is not None:
        if not isinstance(n_fixed, (int, float)) or float(n_fixed) <= 0:
            violations.append(f"n_fixed: must be > 0, got {n_fixed!r}")
        else:
            cfg.n_fixed = float(n_fixed)

    max_sector = data.get("max_sector")
    if max_sector is not None:
        if not isinstance(max_sector, int) or max_sector < 0:
            violations.append(f"max_sector: must be an integer >= 0, got {max_sector!r}")
        else:
            cfg.max_sector = max_sector

    distributions = data.get("distributions")
    if distributions is not None:
        if not isinstance(distributions, bool):
            violations.append(f"distributions: must be true or false, got {distributions!r}")
        else:
            cfg.distributions = distributions

    if violations:
        raise ConfigError(violations)

    normalized = dict(data)
    if cfg.seed is not None:
        normalized["seed"] = cfg.seed
    cfg.raw = normalized
    return cfg


def _cell_params(base: ModelParams, assignments: dict) -> ModelParams:
    direct = {k: v for k, v in assignments.items() if k in PARAM_KEYS}
    out = replace(base, **{k: float(v) for k, v in direct.items()}) if direct else base
    if "t1_inv" in assignments or "f_a" in assignments:
        rates = derive_rates(out)
        t1 = float(assignments.get("t1_inv", rates.t1_inv))
        fa = float(assignments.get("f_a", rates.f_a))
        ga1, ga2 = loss_rates_for(t1, fa)
        out = replace(out, gamma_a1=ga1, gamma_a2=ga2)
    return out


def _steady_row(cell: ModelParams, n0) -> tuple:
    t1_inv = derive_rates(cell).t1_inv
    un = cell.U * n0 if (cell.U != 0.0 and n0) else 0.0
    try:
        if cell.U == 0.0:
            modes = linear_decay_modes(cell)
        else:
            if not n0:
                raise ConfigError(["initial.n0 is required for interacting scans"])
            modes = nonlinear_quasi_steady(cell, float(n0))
        sel = select_physical(modes)
        n_phys = sum(1 for md in modes if md.physical)
        branch = modes.index(sel)
        return (cell.J, t1_inv, un, sel.kappa.real, sel.alpha, n_phys, branch)
    except (NoPhysicalModeError, ConfigError):
        return (cell.J, t1_inv, un, float("nan"), float("nan"), 0, -1)


def _scan_cell(args) -> tuple:
    base, assignments, n0 = args
    return _steady_row(_cell_params(base, assignments), n0)


def _grid_assignments(axes) -> list[dict]:
    if len(axes) == 1:
        return [{axes[0].name: v} for v in axes[0].values]
    out = []
    for v1 in axes[0].values:
        for v2 in axes[1].values:
            out.append({axes[0].name: v1, axes[1].name: v2})
    return out


# ---------------------------------------------------------------------------
# Mode runners: each returns the headline string


def _require(cfg: RunConfig, violations_spec) -> None:
    missing = [msg for ok, msg in violations_spec if not ok]
    if missing:
        raise ConfigError(missing)


def run_meanfield(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    _require(cfg, [
        (cfg.n0 is not None, "initial: required for meanfield runs"),
        (cfg.t_end is not None, "time.t_end: required for meanfield runs"),
    ])
    drive = None
    if cfg.drive_kind != "none":
        omega = cfg.drive_omega or resonance_frequency(cfg.params)
        drive = DriveSpec(
            kind=cfg.drive_kind, J0=cfg.params.J, J1=cfg.drive_j1,
            eps0=cfg.params.epsilon, eps1=cfg.drive_eps1, omega=omega,
        )
    initial = BlochState.from_angles(cfg.theta, cfg.phi, float(cfg.n0))
    grid = cfg.time_grid()
    out_series = integrate(initial, cfg.params, drive=drive, t_span=(0.0, cfg.t_end), output_grid=grid)
    series.write_series_csv(out / "meanfield.csv", out_series, chash, echo)
    figures.render_series(out_series, out / "meanfield.png")
    return (
        f"alpha(t_end)={out_series.alpha[-1]:.6g} purity={out_series.purity[-1]:.6g} "
        f"n/n0={out_series.n[-1] / out_series.n[0]:.6g}"
    )


def run_steady(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    modes = linear_decay_modes(cfg.params)
    t1_inv = derive_rates(cfg.params).t1_inv
    rows = []
    for idx, md in enumerate(modes):
        rows.append((
            cfg.params.J, t1_inv, 0.0, md.kappa.real,
            md.alpha if md.physical else float("nan"),
            sum(1 for m in modes if m.physical), idx,
        ))
    series.write_scan_csv(out / "steady.csv", rows, chash, echo)
    sel = select_physical(modes)
    return f"kappa={sel.kappa.real:.6g} alpha={sel.alpha:.6g}"


def run_nonlinear_steady(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    _require(cfg, [
        (cfg.n0 is not None, "initial.n0: required for nonlinear-steady runs"),
    ])
    n0 = float(cfg.n0)
    sols = nonlinear_quasi_steady(cfg.params, n0)
    t1_inv = derive_rates(cfg.params).t1_inv
    n_phys = sum(1 for s in sols if s.physical)
    rows = [
        (cfg.params.J, t1_inv, cfg.params.U * n0, s.kappa.real,
         s.alpha if s.physical else float("nan"), n_phys, idx)
        for idx, s in enumerate(sols)
    ]
    series.write_scan_csv(out / "nonlinear_steady.csv", rows, chash, echo)
    sel = select_physical(sols)
    headline = (
        f"{n_phys} physical branches at Un={cfg.params.U * n0:.6g}; "
        f"slow kappa={sel.kappa.real:.6g} alpha={sel.alpha:.6g}"
    )
    if cfg.t_end is not None:
        adia = adiabatic_decay(cfg.params, n0, cfg.t_end)
        series.write_adiabatic_csv(out / "adiabatic.csv", adia, chash, echo)
        figures.render_adiabatic(adia, out / "adiabatic.png")
        if adia.branch_lost:
            headline += f"; branch lost at n={adia.n_loss:.6g}"
    return headline


def run_response(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    _require(cfg, [
        (cfg.drive_kind in ("tunneling", "bias"),
         "drive.kind: response runs need tunneling or bias"),
    ])
    kind = cfg.drive_kind
    amp = cfg.drive_j1 if kind == "tunneling" else cfg.drive_eps1
    if amp <= 0:
        raise ConfigError([f"drive.{'J1' if kind == 'tunneling' else 'eps1'}: must be > 0"])

    axes = cfg.axes or []
    names = [a.name for a in axes]

    if names == ["omega"]:
        rows = []
        t1_inv = derive_rates(cfg.params).t1_inv
        for w in axes[0].values:
            try:
                sol = (response_tunneling if kind == "tunneling" else response_bias)(
                    cfg.params, amp, float(w)
                )
                rows.append((cfg.params.J, t1_inv, sol.omega, sol.response, kind))
            except BecsimError:
                rows.append((cfg.params.J, t1_inv, float(w), float("nan"), kind))
        series.write_response_csv(out / "response.csv", rows, chash, echo)
        resp = np.array([r[3] for r in rows])
        figures.render_response_curve(axes[0].values, resp, out / "response.png",
                                      label=f"J0={cfg.params.J:g}")
        best = int(np.nanargmax(resp))
        return f"max response={resp[best]:.6g} at omega={axes[0].values[best]:.6g}"

    if axes and set(names) <= {"J", "t1_inv"}:
        j_axis = next((a for a in axes if a.name == "J"), None)
        t_axis = next((a for a in axes if a.name == "t1_inv"), None)
        j_values = j_axis.values if j_axis else np.array([cfg.params.J])
        t_values = t_axis.values if t_axis else np.array([derive_rates(cfg.params).t1_inv])
        rel = amp / cfg.params.J if (kind == "tunneling" and cfg.params.J > 0) else 0.1
        surface = response_surface(
            cfg.params, j_values, t_values, kind=kind, rel_amp=rel, omega=cfg.drive_omega
        )
        rows = []
        for i, j0 in enumerate(surface.j0):
            for k, t1 in enumerate(surface.t1_inv):
                rows.append((j0, t1, surface.omega[i, k], surface.response[i, k], kind))
        series.write_response_csv(out / "response.csv", rows, chash, echo)
        if len(j_values) > 1 and len(t_values) > 1:
            figures.render_response_surface(surface, out / "response.png")
        else:
            axis = j_values if len(j_values) > 1 else t_values
            flat = surface.response.reshape(-1)
            figures.render_response_curve(axis, flat, out / "response.png")
        masked = int(np.isnan(surface.response).sum())
        best = np.unravel_index(np.nanargmax(surface.response), surface.response.shape)
        return (
            f"max response={surface.response[best]:.6g} at J0={surface.j0[best[0]]:.6g}, "
            f"T1_inv={surface.t1_inv[best[1]]:.6g}; {masked} masked cells"
        )

    if axes:
        raise ConfigError(["scan.axes: response runs scan omega, or J and/or t1_inv"])

    omega = cfg.drive_omega
    sol = (response_tunneling if kind == "tunneling" else response_bias)(cfg.params, amp, omega)
    t1_inv = derive_rates(cfg.params).t1_inv
    series.write_response_csv(
        out / "response.csv", [(cfg.params.J, t1_inv, sol.omega, sol.response, kind)], chash, echo
    )
    return f"response={sol.response:.6g} at omega={sol.omega:.6g}"


def run_scan(cfg: RunConfig, out: Path, chash: str, echo: dict, jobs: int = 1) -> str:
    _require(cfg, [(cfg.axes is not None, "scan.axes: required for scan runs")])
    assignments = _grid_assignments(cfg.axes)
    for a in cfg.axes:
        if a.name == "omega":
            raise ConfigError(["scan.axes: omega scans belong to response mode"])
    n0 = float(cfg.n0) if cfg.n0 is not None else None
    work = [(cfg.params, asg, n0) for asg in assignments]
    if jobs > 1:
        with Pool(processes=jobs) as pool:
            rows = pool.map(_scan_cell, work)
    else:
        rows = [_scan_cell(item) for item in work]
    series.write_scan_csv(out / "scan.csv", rows, chash, echo)

    masked = sum(1 for r in rows if r[6] == -1)
    if len(cfg.axes) == 1:
        alpha = np.array([r[4] for r in rows])
        figures.render_scan([(cfg.axes[0].name, cfg.axes[0].values, alpha)], out / "scan.png")
        shape = f"{len(cfg.axes[0].values)}"
    else:
        shape = f"{len(cfg.axes[0].values)}x{len(cfg.axes[1].values)}"
        alpha = np.array([r[4] for r in rows]).reshape(
            len(cfg.axes[0].values), len(cfg.axes[1].values)
        )
        fig_rows = [
            (f"{cfg.axes[1].name}={v:.4g}", cfg.axes[0].values, alpha[:, k])
            for k, v in enumerate(cfg.axes[1].values[:8])
        ]
        figures.render_scan(fig_rows, out / "scan.png")
    return f"grid {shape} over {'/'.join(a.name for a in cfg.axes)}; {masked} masked cells"


def run_mcwf(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    _require(cfg, [
        (cfg.n0 is not None, "initial: required for mcwf runs"),
        (cfg.t_end is not None, "time.t_end: required for mcwf runs"),
        (cfg.seed is not None, "seed: required for mcwf runs"),
        (cfg.n_traj is not None, "n_traj: required for mcwf runs"),
    ])
    n0 = cfg.n0
    if float(n0) != int(n0):
        raise ConfigError([f"initial.n0: must be an integer particle number, got {n0!r}"])
    state = coherent_condensate(int(n0), cfg.theta, cfg.phi)
    grid = cfg.time_grid()
    ens = mcwf_ensemble(
        state, cfg.params, grid, cfg.n_traj, cfg.seed,
        collect_final_density=cfg.distributions,
    )
    series.write_ensemble_csv(out / "ensemble.csv", ens, chash, echo)
    mf = integrate(
        BlochState.from_angles(cfg.theta, cfg.phi, float(n0)),
        cfg.params, t_span=(0.0, cfg.t_end), output_grid=grid,
    )
    figures.render_ensemble(ens, out / "ensemble.png", meanfield=mf)
    if cfg.distributions and ens.final_density is not None:
        final = ens.final_density
        dists = measurement_distributions(final)
        series.write_histogram_csv(out / "histograms.csv", dists, chash, echo)
        figures.render_histograms(dists, out / "histograms.png")
        husimi = husimi_q(final)
        series.write_husimi_csv(out / "husimi.csv", husimi, chash, echo)
        figures.render_husimi(husimi, out / "husimi.png")
    ens_purity = (
        ens.s_x[-1] ** 2 + ens.s_y[-1] ** 2 + ens.s_z[-1] ** 2
    ) / max(ens.n_mean[-1], 1e-300) ** 2
    return (
        f"alpha_mean(t_end)={ens.alpha_mean[-1]:.6g}+-{ens.alpha_se[-1]:.2g} "
        f"ensemble purity={ens_purity:.6g} n_mean={ens.n_mean[-1]:.6g} "
        f"({ens.n_traj} trajectories)"
    )


def run_master(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    _require(cfg, [
        (cfg.n0 is not None, "initial: required for master runs"),
        (cfg.t_end is not None, "time.t_end: required for master runs"),
    ])
    n0 = cfg.n0
    if float(n0) != int(n0):
        raise ConfigError([f"initial.n0: must be an integer particle number, got {n0!r}"])
    state = coherent_condensate(int(n0), cfg.theta, cfg.phi)
    grid = cfg.time_grid()
    ms = propagate_master(state, cfg.params, grid, max_sector=cfg.max_sector)
    series.write_series_csv(out / "master.csv", ms, chash, echo)
    figures.render_series(ms, out / "master.png")
    dists = measurement_distributions(ms.final_state)
    series.write_histogram_csv(out / "histograms.csv", dists, chash, echo)
    figures.render_histograms(dists, out / "histograms.png")
    husimi = husimi_q(ms.final_state)
    series.write_husimi_csv(out / "husimi.csv", husimi, chash, echo)
    figures.render_husimi(husimi, out / "husimi.png")
    return (
        f"alpha(t_end)={ms.alpha[-1]:.6g} purity={ms.purity[-1]:.6g} "
        f"n_mean={ms.n[-1]:.6g} trace drift={abs(ms.trace[-1] - ms.trace[0]):.2g}"
    )


def run_fixedpoints(cfg: RunConfig, out: Path, chash: str, echo: dict) -> str:
    _require(cfg, [(cfg.n_fixed is not None, "n_fixed: required for fixedpoints runs")])
    points = find_fixed_points(cfg.params, cfg.n_fixed)
    series.write_fixedpoints_csv(out / "fixedpoints.csv", points, chash, echo)
    figures.render_fixedpoints(points, out / "fixedpoints.png")
    kinds = {}
    for fp in points:
        kinds[fp.stability] = kinds.get(fp.stability, 0) + 1
    desc = ", ".join(f"{v} {k}" for k, v in sorted(kinds.items())) or "none"
    headline = f"{len(points)} fixed points ({desc}) at Un={cfg.params.U * cfg.n_fixed:.6g}"
    if cfg.params.U > 0:
        try:
            headline += f"; critical n={critical_n(cfg.params):.6g}"
        except ConfigError:
            pass
    return headline


def run(mode: str, cfg: RunConfig, out_dir, jobs: int = 1) -> dict:
    """Execute one mode, write its artifacts, and return the summary mapping."""
    if mode not in MODES or mode == "preset":
        raise ConfigError([f"mode: expected one of {', '.join(MODES[:-1])}, got {mode!r}"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash({"mode": mode, "config": cfg.raw})
    echo = {"mode": mode, **cfg.params.to_dict()}
    if cfg.seed is not None:
        echo["seed"] = cfg.seed
    if cfg.n_traj is not None:
        echo["n_traj"] = cfg.n_traj

    start = time.perf_counter()
    if mode == "meanfield":
        headline = run_meanfield(cfg, out, chash, echo)
    elif mode == "steady":
        headline = run_steady(cfg, out, chash, echo)
    elif mode == "nonlinear-steady":
        headline = run_nonlinear_steady(cfg, out, chash, echo)
    elif mode == "response":
        headline = run_response(cfg, out, chash, echo)
    elif mode == "mcwf":
        headline = run_mcwf(cfg, out, chash, echo)
    elif mode == "master":
        headline = run_master(cfg, out, chash, echo)
    elif mode == "fixedpoints":
        headline = run_fixedpoints(cfg, out, chash, echo)
    else:
        headline = run_scan(cfg, out, chash, echo, jobs=jobs)
    wall = time.perf_counter() - start

    series.write_summary_json(out / "summary.json", chash, mode, headline, wall)
    return {"config_hash": chash, "mode": mode, "headline": headline, "wall_time_s": wall}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="becsim",
        description="Two-mode condensate simulator: mean-field, quasi-steady, "
                    "response, and exact open-system dynamics.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default="becsim_out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for scan grids")
    parser.add_argument("--preset", default=None,
                        help=f"preset name for preset mode ({', '.join(preset_names())})")
    args = parser.parse_args(argv)

    try:
        if args.mode == "preset":
            if not args.preset:
                raise ConfigError(["--preset: required for preset mode"])
            mode, config, note = get_preset(args.preset)
            if args.config:
                raise ConfigError(["--config: presets carry their own configuration"])
            cfg = build_run_config(config, seed_override=args.seed)
            summary = run(mode, cfg, args.out, jobs=args.jobs)
            summary["headline"] += f" [preset {args.preset}: {note}]"
            series.write_summary_json(
                Path(args.out) / "summary.json", summary["config_hash"], mode,
                summary["headline"], summary["wall_time_s"],
            )
        else:
            if not args.config:
                raise ConfigError(["--config: required"])
            try:
                with open(args.config) as handle:
                    data = json.load(handle)
            except FileNotFoundError:
                raise ConfigError([f"--config: no such file: {args.config}"]) from None
            except json.JSONDecodeError as err:
                raise ConfigError([f"--config: invalid JSON: {err}"]) from None
            cfg = build_run_config(data, seed_override=args.seed)
            summary = run(args.mode, cfg, args.out, jobs=args.jobs)
    except BecsimError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    print(f"[{summary['mode']}] {summary['headline']} -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
