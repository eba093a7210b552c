"""Quasi-stationary decay modes of the dissipative two-mode condensate.

With U = 0 the Bloch equations are linear, d/dt v = -M v for
v = (s_x, s_y, s_z, n), and every decay mode is an eigenpair of M. With
U != 0 (and eps = 0) the same exponential ansatz s, n ~ e^{-kappa t} at
frozen interaction energy g = U n leads to a quartic equation for kappa;
its roots and the reconstructed mode vectors describe the slow decay
stages, and following them while n(t) shrinks gives the adiabatic decay
picture including loss of the coherent branch at the critical number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NoPhysicalModeError, NoResonanceError
from .meanfield import bloch_rhs
from .model import ModelParams, derive_rates

_REL_TOL = 1e-8


@dataclass(frozen=True)
class DecayModeSolution:
    """One exponential decay mode: (s, n)(t) = (s0, n0) e^{-kappa t}."""

    kappa: complex
    s0: np.ndarray
    n0: float
    alpha: float
    physical: bool

    def __post_init__(self):
        object.__setattr__(self, "s0", np.asarray(self.s0))


def build_decay_matrix(params: ModelParams) -> np.ndarray:
    """The 4x4 matrix M with d/dt (s_x, s_y, s_z, n) = -M v at U = 0.

    The closed form is cross-checked column by column against the U = 0
    Bloch right-hand side on every call; a mismatch means the two modules
    disagree about conventions and is raised immediately.
    """
    rates = derive_rates(params)
    t1, t2, fa = rates.t1_inv, rates.t2_inv, rates.f_a
    j, eps = params.J, params.epsilon
    m = np.array(
        [
            [t2, 2.0 * eps, 0.0, 0.0],
            [-2.0 * eps, t2, -2.0 * j, 0.0],
            [0.0, 2.0 * j, t1, fa * t1],
            [0.0, 0.0, fa * t1, t1],
        ]
    )
    linear = replace(params, U=0.0)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        col = -bloch_rhs(e, linear)
        if not np.allclose(col, m[:, i], rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise AssertionError("decay matrix disagrees with the Bloch equations")
    return m


def linear_decay_modes(params: ModelParams) -> list[DecayModeSolution]:
    """All four eigenmodes of the U = 0 decay matrix.

    Modes with nonzero particle content are normalized to n0 = 1. A mode is
    flagged physical when kappa is real and nonnegative, the vector is real
    with n0 > 0, |s0| <= n0, and the contrast lies in [0, 1].
    """
    if params.U != 0.0:
        raise ConfigError(["linear decay modes require U = 0; use nonlinear_quasi_steady"])
    m = build_decay_matrix(params)
    scale = max(1.0, np.abs(m).max())
    kappas, vecs = np.linalg.eig(m)

    modes = []
    for i in range(4):
        kappa = kappas[i]
        v = vecs[:, i].astype(complex)
        real_kappa = abs(kappa.imag) <= _REL_TOL * scale
        if abs(v[3]) > 1e-12:
            v = v / v[3]
        else:
            # no particle content; fix the phase by the largest component
            k = int(np.argmax(np.abs(v)))
            v = v / v[k]
        real_vec = np.abs(v.imag).max() <= _REL_TOL * max(1.0, np.abs(v).max())

        physical = bool(real_kappa and real_vec and kappa.real >= -_REL_TOL * scale)
        s0 = v[:3]
        n0 = v[3]
        if physical:
            s0 = s0.real
            n0 = float(n0.real)
            physical = n0 > 0.0
        if physical:
            norm_s = float(np.linalg.norm(s0))
            physical = norm_s <= n0 * (1.0 + _REL_TOL)
            alpha = float(np.hypot(s0[0], s0[1]) / n0)
            physical = physical and (0.0 <= alpha <= 1.0 + _REL_TOL)
        else:
            alpha = float("nan")
            n0 = complex(n0)
        modes.append(
            DecayModeSolution(
                kappa=complex(kappa), s0=s0, n0=n0, alpha=alpha, physical=physical
            )
        )
    modes.sort(key=lambda md: (md.kappa.real, md.kappa.imag))
    return modes


def select_physical(modes: list[DecayModeSolution]) -> DecayModeSolution:
    """The slowest physical mode; this is the one that survives at long times."""
    candidates = [md for md in modes if md.physical]
    if not candidates:
        raise NoPhysicalModeError([md.kappa for md in modes])
    return min(candidates, key=lambda md: md.kappa.real)


def alpha_closed_form(kappa: float, params: ModelParams) -> float:
    """Contrast of a decay mode with rate kappa, eps = 0 closed form."""
    if params.epsilon != 0.0:
        raise ConfigError(["closed-form contrast requires epsilon = 0"])
    rates = derive_rates(params)
    f_big = rates.f_a * rates.t1_inv
    if f_big == 0.0:
        raise ConfigError(["closed-form contrast requires asymmetric losses (f_a T1inv > 0)"])
    a = kappa - rates.t1_inv
    b = kappa - rates.t2_inv
    if b == 0.0:
        return math.inf
    return abs(2.0 * params.J * a / (f_big * b))


def alpha_limits(params: ModelParams) -> tuple[float, float]:
    """Contrast of the slow mode in the small-J and large-J limits (eps = 0).

    Returns (2J / (gamma_p + f_a T1inv), f_a T1inv / (2J)).
    """
    if params.epsilon != 0.0:
        raise ConfigError(["contrast limits require epsilon = 0"])
    if params.J <= 0.0:
        raise ConfigError([f"contrast limits require J > 0, got {params.J!r}"])
    rates = derive_rates(params)
    f_big = rates.f_a * rates.t1_inv
    denom = params.gamma_p + f_big
    if denom <= 0.0:
        raise ConfigError(["small-J contrast limit requires gamma_p + f_a T1inv > 0"])
    return 2.0 * params.J / denom, f_big / (2.0 * params.J)


def sr_condition_J(params: ModelParams) -> float:
    """Tunneling rate where the slow-mode contrast peaks as a function of J.

    J* = (1/2) sqrt(f_a^2 T1inv^2 + f_a gamma_p T1inv); requires f_a > 0.
    """
    rates = derive_rates(params)
    if rates.f_a <= 0.0 or rates.t1_inv <= 0.0:
        raise NoResonanceError("contrast resonance requires asymmetric losses (f_a > 0)")
    return 0.5 * math.sqrt(
        rates.f_a**2 * rates.t1_inv**2 + rates.f_a * params.gamma_p * rates.t1_inv
    )


def sr_condition_t1inv(params: ModelParams) -> float:
    """Loss rate 1/T1 where the same peak condition is met at fixed J.

    Positive root of f_a^2 x^2 + f_a gamma_p x = 4 J^2; requires f_a > 0
    and J > 0.
    """
    rates = derive_rates(params)
    if rates.f_a <= 0.0:
        raise NoResonanceError("contrast resonance requires asymmetric losses (f_a > 0)")
    if params.J <= 0.0:
        raise NoResonanceError(f"contrast resonance requires J > 0, got {params.J!r}")
    gp = params.gamma_p
    return (-gp + math.sqrt(gp * gp + 16.0 * params.J**2)) / (2.0 * rates.f_a)


def _quartic_coefficients(t1: float, t2: float, f_big: float, g: float, j: float) -> np.ndarray:
    """Coefficients (highest power first) of the quasi-steady rate quartic.

    With a = kappa - T1inv and b = kappa - T2inv the equation is
    (a^2 - F^2)(F^2 b^2 + g^2 a^2) + 4 J^2 F^2 a b = 0.
    """
    pa = np.array([1.0, -t1])
    pb = np.array([1.0, -t2])
    a2 = np.polymul(pa, pa)
    b2 = np.polymul(pb, pb)
    lhs = np.polymul(
        np.polyadd(a2, np.array([-(f_big**2)])),
        np.polyadd(f_big**2 * b2, g**2 * a2),
    )
    cross = 4.0 * j**2 * f_big**2 * np.polymul(pa, pb)
    return np.polyadd(lhs, cross)


def nonlinear_quasi_steady(params: ModelParams, n0: float) -> list[DecayModeSolution]:
    """Exponential decay modes at frozen interaction energy g = U n0, eps = 0.

    Solves the rate quartic, polishes each root by Newton iteration, merges
    kappa values that coincide, and reconstructs the mode vector

        s_z0 = (a/F) n0
        s_y0 = (a^2 - F^2) / (2 J F) n0
        s_x0 = (a/b) (a^2 - F^2) / (2 J F^2) g n0

    With pure particle loss (gamma_p = 0) the quartic factorizes as
    a^2 [(a^2 - F^2)(F^2 + g^2) + 4 J^2 F^2] = 0 and the a -> 0 double root
    is handled by its analytic limit (a/b -> 1 there since T1inv = T2inv).
    """
    violations = []
    if params.epsilon != 0.0:
        violations.append("quasi-steady modes require epsilon = 0")
    if params.J == 0.0:
        violations.append("quasi-steady reconstruction requires J != 0")
    rates = derive_rates(params)
    f_big = rates.f_a * rates.t1_inv
    if f_big == 0.0:
        violations.append("quasi-steady reconstruction requires asymmetric losses (f_a T1inv > 0)")
    if n0 <= 0.0:
        violations.append(f"n0: must be > 0, got {n0!r}")
    if violations:
        raise ConfigError(violations)

    t1, t2 = rates.t1_inv, rates.t2_inv
    j = params.J
    g = params.U * n0
    scale = max(t1, t2, abs(g), 2.0 * abs(j), f_big)

    if params.gamma_p == 0.0:
        # factorized spectrum: double root at a = 0 plus a symmetric pair
        a_vals = [0.0]
        disc = f_big**2 * (g**2 + f_big**2 - 4.0 * j**2) / (f_big**2 + g**2)
        if disc >= 0.0:
            a_vals += [math.sqrt(disc), -math.sqrt(disc)]
        else:
            a_vals += [complex(0.0, math.sqrt(-disc)), complex(0.0, -math.sqrt(-disc))]
        roots = [t1 + a for a in a_vals]
    else:
        coeffs = _quartic_coefficients(t1, t2, f_big, g, j)
        raw = np.roots(coeffs)
        deriv = np.polyder(coeffs)
        roots = []
        for r in raw:
            for _ in range(50):
                fval = np.polyval(coeffs, r)
                dval = np.polyval(deriv, r)
                if dval == 0:
                    break
                step = fval / dval
                r = r - step
                if abs(step) < 1e-15 * max(1.0, abs(r)):
                    break
            roots.append(r)
        # merge roots that polished to the same value
        merged = []
        for r in sorted(roots, key=lambda z: (z.real, z.imag)):
            if all(abs(r - q) > 1e-7 * scale for q in merged):
                merged.append(r)
        roots = merged

    solutions = []
    for r in roots:
        real_kappa = abs(complex(r).imag) <= 1e-8 * scale
        kappa = complex(r)
        if not real_kappa:
            solutions.append(
                DecayModeSolution(kappa=kappa, s0=np.zeros(3), n0=float(n0), alpha=float("nan"), physical=False)
            )
            continue
        kr = kappa.real
        a = kr - t1
        b = kr - t2
        sz = (a / f_big) * n0
        sy = (a * a - f_big * f_big) / (2.0 * j * f_big) * n0
        if b == 0.0 and a == 0.0:
            ratio = 1.0  # gamma_p = 0 limit where a and b vanish together
        elif b == 0.0:
            ratio = math.inf
        else:
            ratio = a / b
        sx = ratio * (a * a - f_big * f_big) / (2.0 * j * f_big**2) * g * n0
        s0 = np.array([sx, sy, sz])
        norm_s = float(np.linalg.norm(s0))
        alpha = float(np.hypot(sx, sy) / n0)
        physical = (
            kr >= -1e-8 * scale
            and math.isfinite(norm_s)
            and norm_s <= n0 * (1.0 + _REL_TOL)
            and alpha <= 1.0 + _REL_TOL
        )
        solutions.append(
            DecayModeSolution(kappa=kappa, s0=s0, n0=float(n0), alpha=alpha, physical=physical)
        )
    solutions.sort(key=lambda md: (md.kappa.real, md.kappa.imag))
    return solutions


def critical_n(params: ModelParams) -> float:
    """Particle number below which the symmetric pair of coherent decay
    branches no longer exists: n_c = sqrt(max(0, 4J^2 - F^2)) / U."""
    if params.U <= 0.0:
        raise ConfigError([f"critical number requires U > 0, got {params.U!r}"])
    rates = derive_rates(params)
    f_big = rates.f_a * rates.t1_inv
    return math.sqrt(max(0.0, 4.0 * params.J**2 - f_big**2)) / params.U


@dataclass
class AdiabaticSeries:
    """Particle number decaying along a tracked quasi-steady branch."""

    t: np.ndarray
    n: np.ndarray
    kappa: np.ndarray
    alpha: np.ndarray
    branch_lost: bool
    t_loss: float | None
    n_loss: float | None


def adiabatic_decay(
    params: ModelParams,
    n_start: float,
    t_end: float,
    n_steps: int = 400,
) -> AdiabaticSeries:
    """Integrate dn/dt = -kappa(n) n following the slowest coherent branch.

    kappa(n) is re-solved from the rate quartic at every Runge-Kutta stage and
    continued by nearest-kappa matching. When the number of distinct physical
    branches drops (branch merger or disappearance) the event time and number
    are recorded; integration continues on the nearest surviving branch.
    """
    if t_end <= 0.0 or n_steps < 2:
        raise ConfigError(["adiabatic decay requires t_end > 0 and n_steps >= 2"])

    def branch_kappa(n, kappa_prev):
        sols = [s for s in nonlinear_quasi_steady(params, n) if s.physical]
        if not sols:
            return None, 0, float("nan")
        best = min(sols, key=lambda s: abs(s.kappa.real - kappa_prev))
        return best.kappa.real, len({round(s.kappa.real, 10) for s in sols}), best.alpha

    initial = select_physical(nonlinear_quasi_steady(params, n_start))
    kappa_tr = initial.kappa.real

    dt = t_end / (n_steps - 1)
    t_grid = np.linspace(0.0, t_end, n_steps)
    n_arr = np.empty(n_steps)
    k_arr = np.empty(n_steps)
    a_arr = np.empty(n_steps)
    n_arr[0] = n_start
    k_arr[0] = kappa_tr
    a_arr[0] = initial.alpha
    _, count_prev, _ = branch_kappa(n_start, kappa_tr)

    branch_lost = False
    t_loss = None
    n_loss = None

    for i in range(1, n_steps):
        n_cur = n_arr[i - 1]

        def rate(n):
            k, _, _ = branch_kappa(max(n, 1e-12), kappa_tr)
            if k is None:
                return -kappa_tr * n
            return -k * n

        k1 = rate(n_cur)
        k2 = rate(n_cur + 0.5 * dt * k1)
        k3 = rate(n_cur + 0.5 * dt * k2)
        k4 = rate(n_cur + dt * k3)
        n_next = n_cur + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        n_next = max(n_next, 1e-12)

        kappa_new, count_new, alpha_new = branch_kappa(n_next, kappa_tr)
        if kappa_new is None:
            kappa_new, alpha_new = kappa_tr, a_arr[i - 1]
            count_new = 0
        if count_new < count_prev and not branch_lost:
            branch_lost = True
            t_loss = t_grid[i]
            n_loss = n_next
        count_prev = count_new
        kappa_tr = kappa_new
        n_arr[i] = n_next
        k_arr[i] = kappa_tr
        a_arr[i] = alpha_new

    return AdiabaticSeries(
        t=t_grid, n=n_arr, kappa=k_arr, alpha=a_arr,
        branch_lost=branch_lost, t_loss=t_loss, n_loss=n_loss,
    )
