"""Delimited output with pinned headers and deterministic formatting.

Every CSV starts with one `#` comment line carrying the config hash and a
parameter echo, followed by the header row. Numbers are written with %.12g
so that reruns of the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np
import scipy

SERIES_HEADER = ["t", "s_x", "s_y", "s_z", "n", "alpha", "purity"]
SCAN_HEADER = ["J", "T1_inv", "Un", "kappa", "alpha", "n_solutions", "branch_id"]
RESPONSE_HEADER = ["J0", "T1_inv", "omega", "response", "kind"]
ENSEMBLE_HEADER = [
    "t", "alpha_mean", "alpha_se", "purity_mean", "purity_se",
    "n_mean", "n_se", "sx", "sy", "sz",
]
HISTOGRAM_HEADER = ["bin_center", "probability", "kind"]
HUSIMI_HEADER = ["theta", "phi", "Q"]
ADIABATIC_HEADER = ["t", "n", "kappa", "alpha"]
FIXEDPOINT_HEADER = [
    "x", "y", "z", "stability", "eig1_re", "eig1_im", "eig2_re", "eig2_im",
]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return "nan"
    return f"{v:.12g}"


def comment_line(config_hash: str, echo: dict) -> str:
    parts = [f"config={config_hash}"]
    parts += [f"{key}={_fmt(val)}" for key, val in echo.items()]
    return "# " + " ".join(parts)


def write_csv(path, header, rows, config_hash: str, echo: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(comment_line(config_hash, echo) + "\r\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path):
    """Read back one of these files: (header, list of string rows)."""
    with open(path, "r", newline="") as handle:
        lines = [ln for ln in handle.read().splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_series_csv(path, series, config_hash: str, echo: dict) -> None:
    rows = zip(series.t, series.s_x, series.s_y, series.s_z, series.n, series.alpha, series.purity)
    write_csv(path, SERIES_HEADER, rows, config_hash, echo)


def write_ensemble_csv(path, ens, config_hash: str, echo: dict) -> None:
    rows = zip(
        ens.t, ens.alpha_mean, ens.alpha_se, ens.purity_mean, ens.purity_se,
        ens.n_mean, ens.n_se, ens.s_x, ens.s_y, ens.s_z,
    )
    write_csv(path, ENSEMBLE_HEADER, rows, config_hash, echo)


def write_scan_csv(path, rows, config_hash: str, echo: dict) -> None:
    write_csv(path, SCAN_HEADER, rows, config_hash, echo)


def write_response_csv(path, rows, config_hash: str, echo: dict) -> None:
    write_csv(path, RESPONSE_HEADER, rows, config_hash, echo)


def write_histogram_csv(path, dists, config_hash: str, echo: dict) -> None:
    rows = [(v, p, "sz") for v, p in zip(dists.sz_values, dists.sz_prob)]
    rows += [(c, p, "phi") for c, p in zip(dists.phi_centers, dists.phi_prob)]
    write_csv(path, HISTOGRAM_HEADER, rows, config_hash, echo)


def write_husimi_csv(path, grid, config_hash: str, echo: dict) -> None:
    rows = (
        (grid.theta[i], grid.phi[j], grid.q[i, j])
        for i in range(len(grid.theta))
        for j in range(len(grid.phi))
    )
    write_csv(path, HUSIMI_HEADER, rows, config_hash, echo)


def write_adiabatic_csv(path, adia, config_hash: str, echo: dict) -> None:
    rows = zip(adia.t, adia.n, adia.kappa, adia.alpha)
    write_csv(path, ADIABATIC_HEADER, rows, config_hash, echo)


def write_fixedpoints_csv(path, points, config_hash: str, echo: dict) -> None:
    rows = []
    for fp in points:
        e = list(fp.jacobian_eigenvalues) + [0.0, 0.0]
        rows.append(
            (
                fp.direction[0], fp.direction[1], fp.direction[2], fp.stability,
                complex(e[0]).real, complex(e[0]).imag,
                complex(e[1]).real, complex(e[1]).imag,
            )
        )
    write_csv(path, FIXEDPOINT_HEADER, rows, config_hash, echo)


def versions() -> dict:
    from . import __version__

    return {
        "becsim": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_summary_json(path, config_hash: str, mode: str, headline: str, wall_time_s: float) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "config_hash": config_hash,
        "mode": mode,
        "headline": headline,
        "versions": versions(),
        "wall_time_s": round(float(wall_time_s), 6),
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
