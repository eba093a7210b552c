"""Linear response of the slow decay mode to a weak harmonic drive.

The background is the slowest physical decay mode v0 e^{-kappa t} of the
U = 0 system. A weak modulation of the tunneling rate or the bias adds an
oscillating component v1 e^{(i omega - kappa) t} + c.c. obeying

    [M0 + (i omega - kappa) I] v1 = -M1 v0

where M1 is the derivative of the decay matrix with respect to the driven
parameter times the drive amplitude. With v1 normalized this way the
reported response equals the peak-to-mean amplitude of the oscillations of
the measured ratio signal (s_z/n for tunneling drive, s_x/n for bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from scipy.integrate import solve_ivp

from .errors import ConfigError, ResonanceSingularityError
from .meanfield import DriveSpec, bloch_rhs
from .model import ModelParams, derive_rates, loss_rates_for
from .steadystate import build_decay_matrix, linear_decay_modes, select_physical


@dataclass(frozen=True)
class ResponseSolution:
    """First-order response of the slow mode to one harmonic drive."""

    kind: str
    omega: float
    s1: np.ndarray
    n1: complex
    response: float
    kappa: complex
    s0: np.ndarray
    n0: float

    def __post_init__(self):
        object.__setattr__(self, "s1", np.asarray(self.s1, dtype=complex))
        object.__setattr__(self, "s0", np.asarray(self.s0, dtype=float))


def resonance_frequency(params: ModelParams) -> float:
    """Default drive frequency sqrt(J^2 + epsilon^2)."""
    return math.hypot(params.J, params.epsilon)


def _background(params: ModelParams):
    mode = select_physical(linear_decay_modes(params))
    v0 = np.concatenate([np.asarray(mode.s0, dtype=float), [float(mode.n0)]])
    return mode, v0


def _solve_first_order(params, m1, omega):
    mode, v0 = _background(params)
    m0 = build_decay_matrix(params)
    lhs = m0 + (1j * omega - mode.kappa.real) * np.eye(4)
    try:
        v1 = np.linalg.solve(lhs, -m1 @ v0)
    except np.linalg.LinAlgError as exc:
        raise ResonanceSingularityError(
            f"first-order system singular at omega = {omega:.6g}"
        ) from exc
    return mode, v0, v1


def response_tunneling(params: ModelParams, j1: float, omega: float | None = None) -> ResponseSolution:
    """Response to J(t) = J + j1 cos(omega t); requires U = 0.

    The reported scalar is |s1_z - (s0_z/n0) n1| / n0, the amplitude of the
    oscillations of s_z(t)/n(t).
    """
    if params.U != 0.0:
        raise ConfigError(["linear response requires U = 0"])
    if j1 < 0:
        raise ConfigError([f"j1: amplitude must be >= 0, got {j1!r}"])
    if omega is None:
        omega = resonance_frequency(params)
    if omega <= 0:
        raise ConfigError([f"omega: must be > 0, got {omega!r}"])
    m1 = np.zeros((4, 4))
    m1[1, 2] = -2.0 * j1
    m1[2, 1] = 2.0 * j1
    mode, v0, v1 = _solve_first_order(params, m1, omega)
    s0z, n0 = v0[2], v0[3]
    resp = abs(v1[2] - (s0z / n0) * v1[3]) / n0
    return ResponseSolution(
        kind="tunneling", omega=float(omega), s1=v1[:3], n1=complex(v1[3]),
        response=float(resp), kappa=mode.kappa, s0=v0[:3], n0=float(n0),
    )


def response_bias(params: ModelParams, eps1: float, omega: float | None = None) -> ResponseSolution:
    """Response to eps(t) = eps1 cos(omega t) around eps = 0; requires U = 0.

    The bias drive couples only into s_x here, so n1 = 0 and s1_y = s1_z = 0
    up to roundoff; this is asserted before returning. The reported scalar is
    |s1_x| / n0, the amplitude of the oscillations of s_x(t)/n(t).
    """
    violations = []
    if params.U != 0.0:
        violations.append("linear response requires U = 0")
    if params.epsilon != 0.0:
        violations.append("bias response is defined around epsilon = 0")
    if eps1 < 0:
        violations.append(f"eps1: amplitude must be >= 0, got {eps1!r}")
    if violations:
        raise ConfigError(violations)
    if omega is None:
        omega = resonance_frequency(params)
    if omega <= 0:
        raise ConfigError([f"omega: must be > 0, got {omega!r}"])
    m1 = np.zeros((4, 4))
    m1[0, 1] = 2.0 * eps1
    m1[1, 0] = -2.0 * eps1
    mode, v0, v1 = _solve_first_order(params, m1, omega)
    norm1 = np.linalg.norm(v1)
    if norm1 > 0 and max(abs(v1[1]), abs(v1[2]), abs(v1[3])) > 1e-12 * norm1:
        raise AssertionError("bias response leaked out of the s_x channel")
    resp = abs(v1[0]) / v0[3]
    return ResponseSolution(
        kind="bias", omega=float(omega), s1=v1[:3], n1=complex(v1[3]),
        response=float(resp), kappa=mode.kappa, s0=v0[:3], n0=float(v0[3]),
    )


def linear_response(params: ModelParams, drive: DriveSpec) -> ResponseSolution:
    """Dispatch on drive.kind; drive.J0/eps0 must match the static params."""
    if drive.kind == "tunneling":
        if drive.J0 != params.J:
            raise ConfigError(["drive.J0 must equal params.J for the response calculation"])
        return response_tunneling(params, drive.J1, drive.omega or None)
    if drive.kind == "bias":
        if drive.eps0 != params.epsilon:
            raise ConfigError(["drive.eps0 must equal params.epsilon for the response calculation"])
        return response_bias(params, drive.eps1, drive.omega or None)
    raise ConfigError([f"drive.kind: response needs tunneling or bias, got {drive.kind!r}"])


def driven_ratio_series(
    params: ModelParams,
    kind: str,
    amp1: float,
    omega: float | None = None,
    n_periods: int = 12,
    settle_factor: float = 5.0,
):
    """Integrate the driven ratio signal x = s/n and return the settled window.

    At U = 0 the Bloch equations are linear in (s, n), so x obeys the closed
    equation dx/dt = rhs(x, 1)[:3] - x rhs(x, 1)[3]. Integrating x instead of
    (s, n) keeps the state O(1) no matter how many decay times elapse; the raw
    components underflow past any tolerance within a few hundred 1/kappa.

    Transients of x decay at the gap between the slow rate and the next one,
    not at kappa itself, so the settle time is settle_factor / gap (at least
    settle_factor periods), rounded up to whole periods. Returns (t, x) with
    x of shape (3, len(t)) covering n_periods full periods after settling.
    """
    if params.U != 0.0:
        raise ConfigError(["U: the driven ratio signal closes only at U = 0"])
    if omega is None:
        omega = resonance_frequency(params)
    if omega <= 0:
        raise ConfigError([f"omega: must be > 0 for a measured response, got {omega!r}"])
    if kind == "tunneling":
        drive = DriveSpec(kind="tunneling", J0=params.J, J1=amp1, eps0=params.epsilon, omega=omega)
    elif kind == "bias":
        drive = DriveSpec(kind="bias", J0=params.J, eps0=params.epsilon, eps1=amp1, omega=omega)
    else:
        raise ConfigError([f"kind: must be tunneling or bias, got {kind!r}"])

    modes = linear_decay_modes(params)
    slow = select_physical(modes)
    gap = min(
        (m.kappa.real - slow.kappa.real for m in modes if m.kappa.real > slow.kappa.real + 1e-12),
        default=slow.kappa.real,
    )
    period = 2.0 * math.pi / omega
    t_settle = max(settle_factor / max(gap, 1e-12), settle_factor * period)
    t_settle = math.ceil(t_settle / period) * period
    t_end = t_settle + n_periods * period
    grid = np.linspace(0.0, t_end, int(200 * t_end / period) + 1)

    def rhs(t, x):
        v = np.array([x[0], x[1], x[2], 1.0])
        dv = bloch_rhs(v, params, t, drive)
        return dv[:3] - x * dv[3]

    sol = solve_ivp(
        rhs, (0.0, t_end), np.asarray(slow.s0, dtype=float),
        t_eval=grid, method="DOP853", rtol=1e-10, atol=1e-12,
    )
    if not sol.success:
        raise ConfigError([f"driven ratio integration failed: {sol.message}"])
    mask = grid >= t_settle - 1e-12
    return grid[mask], sol.y[:, mask]


def projected_amplitude(t: np.ndarray, signal: np.ndarray, omega: float) -> float:
    """Oscillation amplitude of signal at omega: 2 |projection onto e^{-i omega t}|
    over the (whole-period) window."""
    window = t[-1] - t[0]
    proj = np.trapezoid(signal * np.exp(-1j * omega * t), t) / window
    return 2.0 * abs(proj)


def measured_response(
    params: ModelParams,
    kind: str,
    amp1: float,
    omega: float | None = None,
    n_periods: int = 12,
    settle_factor: float = 5.0,
) -> float:
    """Drive the full mean-field ratio equations and measure the amplitude of
    the ratio signal the linear response predicts (s_z/n for tunneling,
    s_x/n for bias)."""
    if omega is None:
        omega = resonance_frequency(params)
    t, x = driven_ratio_series(params, kind, amp1, omega, n_periods, settle_factor)
    component = 2 if kind == "tunneling" else 0
    return projected_amplitude(t, x[component], omega)


@dataclass
class ResponseSurface:
    """Response scalar over a (J0, 1/T1) grid; failed cells hold nan."""

    j0: np.ndarray
    t1_inv: np.ndarray
    omega: np.ndarray
    response: np.ndarray
    kind: str


def response_surface(
    params: ModelParams,
    j0_values,
    t1inv_values,
    kind: str = "tunneling",
    rel_amp: float = 0.1,
    omega: float | None = None,
) -> ResponseSurface:
    """Tabulate the response over a (J0, 1/T1) grid at fixed loss asymmetry.

    Each cell drives with amplitude rel_amp * J0 at the resonance frequency
    (or a fixed omega when given). Cells where no physical background mode
    exists or the solve is singular are reported as nan, never dropped.
    """
    if kind not in ("tunneling", "bias"):
        raise ConfigError([f"kind: must be tunneling or bias, got {kind!r}"])
    j0_values = np.asarray(j0_values, dtype=float)
    t1inv_values = np.asarray(t1inv_values, dtype=float)
    f_a = derive_rates(params).f_a
    omega_grid = np.full((len(j0_values), len(t1inv_values)), np.nan)
    resp_grid = np.full_like(omega_grid, np.nan)
    for i, j0 in enumerate(j0_values):
        for k, t1inv in enumerate(t1inv_values):
            ga1, ga2 = loss_rates_for(t1inv, f_a)
            cell = replace(params, J=float(j0), gamma_a1=ga1, gamma_a2=ga2)
            w = resonance_frequency(cell) if omega is None else float(omega)
            try:
                if kind == "tunneling":
                    sol = response_tunneling(cell, rel_amp * j0, w)
                else:
                    sol = response_bias(cell, rel_amp * j0, w)
            except Exception:
                continue
            omega_grid[i, k] = sol.omega
            resp_grid[i, k] = sol.response
    return ResponseSurface(
        j0=j0_values, t1_inv=t1inv_values, omega=omega_grid, response=resp_grid, kind=kind
    )
