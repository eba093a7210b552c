"""Dissipative mean-field Bloch dynamics and fixed-point analysis.

The mean-field state is the Bloch vector in particle units plus the total
particle number, y = (s_x, s_y, s_z, n). With the damping rates of
``model.derive_rates`` the equations of motion are

    ds_x/dt = -2 eps s_y - U s_y s_z - T2inv s_x
    ds_y/dt = +2 J s_z + 2 eps s_x + U s_x s_z - T2inv s_y
    ds_z/dt = -2 J s_y - T1inv s_z - f_a T1inv n
    dn/dt   = -T1inv n - f_a T1inv s_z

with second-order covariances truncated to zero. For f_a > 0 the loss
asymmetry pumps s_z toward the -z pole (mode 1 is the long-lived one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import root

from .errors import ConfigError, IntegrationError, UndefinedObservableError
from .model import ModelParams, derive_rates


@dataclass(frozen=True)
class BlochState:
    """Bloch vector (particle units) and total particle number."""

    s_x: float
    s_y: float
    s_z: float
    n: float

    def __post_init__(self):
        if self.n < 0:
            raise ConfigError([f"n: must be >= 0, got {self.n!r}"])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.s_x, self.s_y, self.s_z, self.n], dtype=float)

    @classmethod
    def from_angles(cls, theta: float, phi: float, n: float) -> "BlochState":
        """Pure condensate pointing along (theta, phi) with |s| = n."""
        return cls(
            s_x=n * math.sin(theta) * math.cos(phi),
            s_y=n * math.sin(theta) * math.sin(phi),
            s_z=n * math.cos(theta),
            n=n,
        )


@dataclass(frozen=True)
class DriveSpec:
    """Harmonic modulation of the tunneling rate or the energy bias.

    kind='tunneling': J(t) = J0 + J1 cos(omega t), bias fixed at eps0.
    kind='bias':      eps(t) = eps0 + eps1 cos(omega t), tunneling fixed at J0.
    kind='none':      parameters come from ModelParams; J1 = eps1 = 0 required.
    """

    kind: str = "none"
    J0: float = 0.0
    J1: float = 0.0
    eps0: float = 0.0
    eps1: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        violations = []
        if self.kind not in ("none", "tunneling", "bias"):
            violations.append(f"drive.kind: must be one of none|tunneling|bias, got {self.kind!r}")
        if self.J1 < 0:
            violations.append(f"drive.J1: amplitude must be >= 0, got {self.J1!r}")
        if self.eps1 < 0:
            violations.append(f"drive.eps1: amplitude must be >= 0, got {self.eps1!r}")
        if self.omega < 0:
            violations.append(f"drive.omega: must be >= 0, got {self.omega!r}")
        if self.kind == "none" and (self.J1 != 0 or self.eps1 != 0):
            violations.append("drive: kind='none' requires J1 = eps1 = 0")
        if violations:
            raise ConfigError(violations)


def drive_rates(t: float, params: ModelParams, drive: DriveSpec | None):
    """Instantaneous (J, eps) including any harmonic drive."""
    if drive is None or drive.kind == "none":
        return params.J, params.epsilon
    j = drive.J0
    eps = drive.eps0
    if drive.kind == "tunneling":
        j = drive.J0 + drive.J1 * math.cos(drive.omega * t)
    elif drive.kind == "bias":
        eps = drive.eps0 + drive.eps1 * math.cos(drive.omega * t)
    return j, eps


def bloch_rhs(state, params: ModelParams, t: float = 0.0, drive: DriveSpec | None = None) -> np.ndarray:
    """Time derivative of (s_x, s_y, s_z, n); covariances truncated to zero.

    ``state`` may be a BlochState or any length-4 array-like.
    """
    if isinstance(state, BlochState):
        sx, sy, sz, n = state.s_x, state.s_y, state.s_z, state.n
    else:
        sx, sy, sz, n = state
    j, eps = drive_rates(t, params, drive)
    rates = derive_rates(params)
    t1, t2, fa = rates.t1_inv, rates.t2_inv, rates.f_a
    u = params.U
    return np.array(
        [
            -2.0 * eps * sy - u * sy * sz - t2 * sx,
            2.0 * j * sz + 2.0 * eps * sx + u * sx * sz - t2 * sy,
            -2.0 * j * sy - t1 * sz - fa * t1 * n,
            -t1 * n - fa * t1 * sz,
        ]
    )


@dataclass
class ObservableSeries:
    """Mean-field observables on a time grid."""

    t: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray
    s_z: np.ndarray
    n: np.ndarray
    alpha: np.ndarray
    purity: np.ndarray

    @classmethod
    def from_components(cls, t, sx, sy, sz, n) -> "ObservableSeries":
        t = np.asarray(t, dtype=float)
        sx, sy, sz, n = (np.asarray(a, dtype=float) for a in (sx, sy, sz, n))
        with np.errstate(divide="ignore", invalid="ignore"):
            alpha = np.where(n > 0, np.hypot(sx, sy) / np.where(n > 0, n, 1.0), np.nan)
            purity = np.where(n > 0, (sx**2 + sy**2 + sz**2) / np.where(n > 0, n, 1.0) ** 2, np.nan)
        return cls(t=t, s_x=sx, s_y=sy, s_z=sz, n=n, alpha=alpha, purity=purity)

    def __len__(self):
        return len(self.t)


def integrate(
    initial: BlochState,
    params: ModelParams,
    drive: DriveSpec | None = None,
    t_span: tuple[float, float] = (0.0, 1.0),
    output_grid=None,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> ObservableSeries:
    """Integrate the Bloch equations with an adaptive embedded Runge-Kutta scheme.

    output_grid defaults to 401 evenly spaced times across t_span; it must lie
    within t_span. Raises IntegrationError naming the time reached on failure.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 <= t0:
        raise ConfigError([f"t_span: need finite t0 < t1, got {t_span!r}"])
    if output_grid is None:
        output_grid = np.linspace(t0, t1, 401)
    grid = np.asarray(output_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ConfigError(["output_grid: must be a nonempty 1-d array"])
    if grid.min() < t0 - 1e-12 or grid.max() > t1 + 1e-12:
        raise ConfigError(["output_grid: must lie within t_span"])

    sol = solve_ivp(
        lambda t, y: bloch_rhs(y, params, t, drive),
        (t0, t1),
        initial.vector,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=grid,
    )
    if not sol.success:
        t_reached = sol.t[-1] if len(sol.t) else t0
        raise IntegrationError(
            f"mean-field integration failed at t = {t_reached:.6g} s: {sol.message}",
            t_reached=t_reached,
        )
    return ObservableSeries.from_components(sol.t, sol.y[0], sol.y[1], sol.y[2], sol.y[3])


def contrast(state: BlochState) -> float:
    """Interference contrast sqrt(s_x^2 + s_y^2)/n; requires n > 0."""
    if state.n <= 0:
        raise UndefinedObservableError("contrast is undefined at n = 0")
    return math.hypot(state.s_x, state.s_y) / state.n


def purity_mf(state: BlochState) -> float:
    """Mean-field purity |s|^2 / n^2; requires n > 0."""
    if state.n <= 0:
        raise UndefinedObservableError("purity is undefined at n = 0")
    return (state.s_x**2 + state.s_y**2 + state.s_z**2) / state.n**2


# ---------------------------------------------------------------------------
# Fixed points of the rescaled direction dynamics (frozen particle number)


@dataclass(frozen=True)
class FixedPoint:
    """Fixed point of the direction dynamics on the unit sphere."""

    direction: np.ndarray
    stability: str
    jacobian_eigenvalues: tuple

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "direction", d)


def _direction_flow(x, t1, t2, fa, j, eps, g):
    """Flow of x = s/n with n frozen; the growth term keeps the flow on the sphere
    whenever the sphere is invariant (no dephasing)."""
    xx, xy, xz = x
    grow = t1 * (1.0 + fa * xz)
    return np.array(
        [
            -2.0 * eps * xy - g * xy * xz - t2 * xx + grow * xx,
            2.0 * j * xz + 2.0 * eps * xx + g * xx * xz - t2 * xy + grow * xy,
            -2.0 * j * xy - t1 * xz - fa * t1 + grow * xz,
        ]
    )


def _direction_jacobian(x, t1, t2, fa, j, eps, g):
    xx, xy, xz = x
    grow = t1 * (1.0 + fa * xz)
    return np.array(
        [
            [-t2 + grow, -2.0 * eps - g * xz, -g * xy + t1 * fa * xx],
            [2.0 * eps + g * xz, -t2 + grow, 2.0 * j + g * xx + t1 * fa * xy],
            [0.0, -2.0 * j, 2.0 * t1 * fa * xz],
        ]
    )


def _fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * k + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(golden * k), r * np.sin(golden * k), z])


def _tangent_basis(x):
    ref = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(x, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(x, e1)
    return e1, e2


def _solve_from_seed(seed, rates_tuple):
    """Root-solve the tangential flow in a local chart around the seed."""

    if abs(seed[2]) <= 0.9:
        # spherical chart away from the poles
        theta0 = math.acos(min(1.0, max(-1.0, seed[2])))
        phi0 = math.atan2(seed[1], seed[0])

        def residual(q):
            th, ph = q
            st, ct = math.sin(th), math.cos(th)
            x = np.array([st * math.cos(ph), st * math.sin(ph), ct])
            f = _direction_flow(x, *rates_tuple)
            e_th = np.array([ct * math.cos(ph), ct * math.sin(ph), -st])
            e_ph = np.array([-math.sin(ph), math.cos(ph), 0.0])
            return np.array([f @ e_th, f @ e_ph])

        res = root(residual, np.array([theta0, phi0]), method="hybr", tol=1e-13)
        if not res.success:
            return None
        th, ph = res.x
        st = math.sin(th)
        return np.array([st * math.cos(ph), st * math.sin(ph), math.cos(th)])

    # pole-centered chart: solve for the transverse components
    sign = 1.0 if seed[2] > 0 else -1.0

    def residual(q):
        u, v = q
        rsq = u * u + v * v
        if rsq >= 1.0:
            return np.array([1e6 * u, 1e6 * v])
        x = np.array([u, v, sign * math.sqrt(1.0 - rsq)])
        f = _direction_flow(x, *rates_tuple)
        ft = f - (f @ x) * x
        return ft[:2]

    res = root(residual, np.array([seed[0], seed[1]]), method="hybr", tol=1e-13)
    if not res.success:
        return None
    u, v = res.x
    rsq = u * u + v * v
    if rsq >= 1.0:
        return None
    return np.array([u, v, sign * math.sqrt(1.0 - rsq)])


def find_fixed_points(params: ModelParams, n_fixed: float) -> list[FixedPoint]:
    """Fixed points of the frozen-n direction dynamics on the unit sphere.

    Multi-start root search from a 26-point sphere grid plus the coordinate
    axes; duplicates within 1e-8 are merged. Each point is classified by the
    two eigenvalues of the tangent-plane Jacobian.
    """
    if n_fixed <= 0:
        raise ConfigError([f"n_fixed: must be > 0, got {n_fixed!r}"])
    rates = derive_rates(params)
    rt = (
        rates.t1_inv,
        rates.t2_inv,
        rates.f_a,
        params.J,
        params.epsilon,
        params.U * float(n_fixed),
    )
    scale = rt[0] + rt[1] + 2.0 * abs(rt[3]) + 2.0 * abs(rt[4]) + abs(rt[5])
    if scale == 0.0:
        # no dynamics at all: every direction is stationary; report none
        return []

    seeds = list(_fibonacci_sphere(26))
    for axis in range(3):
        for sign in (1.0, -1.0):
            e = np.zeros(3)
            e[axis] = sign
            seeds.append(e)

    found: list[np.ndarray] = []
    for seed in seeds:
        x = _solve_from_seed(seed, rt)
        if x is None:
            continue
        f = _direction_flow(x, *rt)
        ft = f - (f @ x) * x
        if np.linalg.norm(ft) > 1e-9 * scale:
            continue
        if all(np.linalg.norm(x - y) > 1e-8 for y in found):
            found.append(x)

    points = []
    for x in found:
        f = _direction_flow(x, *rt)
        nu = f @ x
        jac = _direction_jacobian(x, *rt)
        e1, e2 = _tangent_basis(x)
        basis = np.column_stack([e1, e2])
        jt = basis.T @ (jac - nu * np.eye(3)) @ basis
        eigs = np.linalg.eigvals(jt)
        tol_c = 1e-6 * max(np.abs(eigs).max(), scale)
        re = np.real(eigs)
        if np.all(re < -tol_c):
            kind = "attractive"
        elif np.all(re > tol_c):
            kind = "repulsive"
        elif np.all(np.abs(re) <= tol_c):
            kind = "elliptic"
        else:
            kind = "saddle"
        points.append(
            FixedPoint(direction=x, stability=kind, jacobian_eigenvalues=tuple(eigs))
        )
    points.sort(key=lambda p: (round(p.direction[2], 6), round(p.direction[0], 6)))
    return points


def bifurcation_un_threshold(
    params: ModelParams, n_fixed: float, un_lo: float, un_hi: float, rel_tol: float = 1e-3
) -> float:
    """Locate by bisection the Un value where the fixed-point count changes.

    Brackets must produce different counts; returns the midpoint of the final
    bracket with relative width below rel_tol.
    """
    from dataclasses import replace

    def count(un):
        p = replace(params, U=un / n_fixed)
        return len(find_fixed_points(p, n_fixed))

    lo, hi = float(un_lo), float(un_hi)
    c_lo, c_hi = count(lo), count(hi)
    if c_lo == c_hi:
        raise ConfigError(
            [f"bifurcation bracket [{lo}, {hi}] has equal fixed-point counts ({c_lo})"]
        )
    while (hi - lo) > rel_tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if count(mid) == c_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
