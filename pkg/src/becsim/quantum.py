"""Exact open-system dynamics in the particle-loss sector decomposition.

Both one-body loss channels and both dephasing channels commute with the
block structure over total particle number, so a density operator that
starts without inter-sector coherences never develops any. States are
therefore stored as one block per sector: a vector for pure states, a
density matrix for mixed ones. Loss only feeds population downward, which
keeps the exact master equation tractable up to a few tens of particles;
quantum-trajectory unraveling covers larger systems.

Jump channels are ordered [dephasing mode 1, dephasing mode 2, loss mode 1,
loss mode 2] with rates [gamma_p, gamma_p, gamma_a1, gamma_a2].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ConfigError,
    ConvergenceError,
    IntegrationError,
    UndefinedObservableError,
)
from .model import (
    FockSector,
    ModelParams,
    angular_momentum_ops,
    build_hamiltonian,
    coherent_state,
    lowering_ops,
)

JUMP_CHANNEL_LABELS = ("dephase_mode1", "dephase_mode2", "loss_mode1", "loss_mode2")

MAX_MASTER_SECTOR = 30


@lru_cache(maxsize=512)
def _sector_ops(n: int):
    sector = FockSector(n)
    lx, ly, lz = angular_momentum_ops(sector)
    a1, a2 = lowering_ops(sector)
    i = np.arange(1, n + 1)
    return {
        "lx": lx,
        "ly": ly,
        "lz": lz,
        "lz_diag": sector.lz_values(),
        "offd": np.sqrt(i * (n - i + 1.0)),
        "n1": sector.n1_values(),
        "n2": sector.n2_values(),
        "a1": a1,
        "a2": a2,
    }


@dataclass(frozen=True)
class JumpOperatorSet:
    """The four dissipation channels in their fixed order."""

    gamma_p: float
    gamma_a1: float
    gamma_a2: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "JumpOperatorSet":
        return cls(gamma_p=params.gamma_p, gamma_a1=params.gamma_a1, gamma_a2=params.gamma_a2)

    @property
    def labels(self):
        return JUMP_CHANNEL_LABELS

    def decay_diagonal(self, n: int) -> np.ndarray:
        """Diagonal of sum_k L_k^dag L_k inside sector n."""
        ops = _sector_ops(n)
        return (
            self.gamma_a1 * ops["n1"]
            + self.gamma_a2 * ops["n2"]
            + self.gamma_p * (ops["n1"] ** 2 + ops["n2"] ** 2)
        )

    def channel_weights(self, n: int, abs2: np.ndarray) -> np.ndarray:
        """Jump weights gamma_k <L_k^dag L_k> for occupation probabilities abs2."""
        ops = _sector_ops(n)
        return np.array(
            [
                self.gamma_p * float(ops["n1"] ** 2 @ abs2),
                self.gamma_p * float(ops["n2"] ** 2 @ abs2),
                self.gamma_a1 * float(ops["n1"] @ abs2),
                self.gamma_a2 * float(ops["n2"] @ abs2),
            ]
        )


@dataclass
class QuantumState:
    """Block-diagonal state over particle-number sectors.

    blocks[n] is a length n+1 amplitude vector when pure, else an
    (n+1, n+1) density block. Weights are carried inside the blocks; a
    normalized state has total weight 1.
    """

    blocks: dict
    pure: bool

    def __post_init__(self):
        clean = {}
        for n, block in self.blocks.items():
            n = int(n)
            arr = np.asarray(block, dtype=complex)
            want = (n + 1,) if self.pure else (n + 1, n + 1)
            if arr.shape != want:
                raise ConfigError(
                    [f"blocks[{n}]: expected shape {want}, got {arr.shape}"]
                )
            clean[n] = arr
        self.blocks = clean

    @property
    def n_max(self) -> int:
        return max(self.blocks) if self.blocks else 0

    def weights(self) -> dict:
        if self.pure:
            return {n: float(np.vdot(v, v).real) for n, v in self.blocks.items()}
        return {n: float(np.trace(rho).real) for n, rho in self.blocks.items()}

    def total_weight(self) -> float:
        return sum(self.weights().values())

    def normalized(self) -> "QuantumState":
        w = self.total_weight()
        if w <= 0:
            raise UndefinedObservableError("cannot normalize a zero-weight state")
        scale = 1.0 / math.sqrt(w) if self.pure else 1.0 / w
        return QuantumState(
            blocks={n: b * scale for n, b in self.blocks.items()}, pure=self.pure
        )

    def to_mixed(self) -> "QuantumState":
        if not self.pure:
            return QuantumState(blocks=dict(self.blocks), pure=False)
        return QuantumState(
            blocks={n: np.outer(v, v.conj()) for n, v in self.blocks.items()}, pure=False
        )


def coherent_condensate(n_total: int, theta: float, phi: float) -> QuantumState:
    """All n_total particles in the single-particle state along (theta, phi)."""
    sector = FockSector(n_total)
    return QuantumState(blocks={n_total: coherent_state(sector, theta, phi)}, pure=True)


def dicke_state(n_total: int, n1: int) -> QuantumState:
    """Number state with n1 particles in mode 1 and n_total - n1 in mode 2."""
    sector = FockSector(n_total)
    if not 0 <= n1 <= n_total:
        raise ConfigError([f"n1: must lie in [0, {n_total}], got {n1!r}"])
    v = np.zeros(sector.dim, dtype=complex)
    v[n1] = 1.0
    return QuantumState(blocks={n_total: v}, pure=True)


def bloch_expectations(state: QuantumState):
    """(s, n_mean, trace) with s = 2<L> in particle units."""
    sx = sy = sz = n_mean = trace = 0.0
    for n, block in state.blocks.items():
        ops = _sector_ops(n)
        if state.pure:
            w = float(np.vdot(block, block).real)
            lp = complex(np.vdot(block[:-1], ops["offd"] * block[1:])) if n > 0 else 0.0
            lzv = float(ops["lz_diag"] @ np.abs(block) ** 2)
        else:
            w = float(np.trace(block).real)
            lp = complex(np.einsum("i,i->", ops["offd"], np.diagonal(block, offset=-1))) if n > 0 else 0.0
            lzv = float((ops["lz_diag"] @ np.diagonal(block)).real)
        sx += 2.0 * lp.real
        sy += 2.0 * lp.imag
        sz += 2.0 * lzv
        n_mean += n * w
        trace += w
    return np.array([sx, sy, sz]), n_mean, trace


def reduced_spdm(state: QuantumState) -> np.ndarray:
    """Single-particle density matrix rho[j, k] = <a_k^dag a_j> / <n>."""
    s, n_mean, _ = bloch_expectations(state)
    if n_mean <= 0:
        raise UndefinedObservableError("reduced density matrix undefined at <n> = 0")
    lp = 0.5 * (s[0] + 1j * s[1])
    rho = np.array(
        [
            [0.5 * (n_mean - s[2]), lp],
            [lp.conjugate(), 0.5 * (n_mean + s[2])],
        ],
        dtype=complex,
    )
    return rho / n_mean


def purity_q(state: QuantumState) -> float:
    """p = 2 tr(rho_red^2) - 1; equals |s|^2 / <n>^2."""
    rho = reduced_spdm(state)
    return float(2.0 * np.trace(rho @ rho).real - 1.0)


def contrast_q(state: QuantumState) -> float:
    s, n_mean, _ = bloch_expectations(state)
    if n_mean <= 0:
        raise UndefinedObservableError("contrast undefined at <n> = 0")
    return float(np.hypot(s[0], s[1]) / n_mean)


@dataclass
class CovarianceSet:
    """Symmetrized second moments delta_jk = <L_j L_k + L_k L_j> - 2 <L_j><L_k>."""

    matrix: np.ndarray
    axes: tuple = ("x", "y", "z")

    def component(self, a: str, b: str) -> float:
        i, j = self.axes.index(a), self.axes.index(b)
        return float(self.matrix[i, j])


def covariances(state: QuantumState) -> CovarianceSet:
    mixed = state.to_mixed()
    ls_mean = np.zeros(3)
    sec_ops = {}
    for n in mixed.blocks:
        ops = _sector_ops(n)
        sec_ops[n] = (ops["lx"], ops["ly"], ops["lz"])
    for n, rho in mixed.blocks.items():
        for j, op in enumerate(sec_ops[n]):
            ls_mean[j] += np.einsum("ij,ji->", rho, op).real
    mat = np.zeros((3, 3))
    for n, rho in mixed.blocks.items():
        lops = sec_ops[n]
        for j in range(3):
            for k in range(j, 3):
                anti = lops[j] @ lops[k] + lops[k] @ lops[j]
                mat[j, k] += np.einsum("ij,ji->", rho, anti).real
    for j in range(3):
        for k in range(j, 3):
            mat[j, k] -= 2.0 * ls_mean[j] * ls_mean[k]
            mat[k, j] = mat[j, k]
    return CovarianceSet(matrix=mat)


# ---------------------------------------------------------------------------
# Exact master equation


@dataclass
class MasterSeries:
    """Observables of the exact master equation on a time grid."""

    t: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray
    s_z: np.ndarray
    n: np.ndarray
    alpha: np.ndarray
    purity: np.ndarray
    trace: np.ndarray
    final_state: QuantumState
    states: list | None = None


def _master_rhs(blocks, hams, k_diags, sandwiches, feeds):
    n_top = len(blocks) - 1
    out = []
    for n in range(n_top + 1):
        rho = blocks[n]
        h = hams[n]
        k = k_diags[n]
        d = -1j * (h @ rho - rho @ h)
        d += sandwiches[n] * rho
        d -= 0.5 * (k[:, None] + k[None, :]) * rho
        if n < n_top:
            ga1_a1, ga2_a2 = feeds[n + 1]
            upper = blocks[n + 1]
            if ga1_a1 is not None:
                d += ga1_a1 @ upper @ ga1_a1.conj().T
            if ga2_a2 is not None:
                d += ga2_a2 @ upper @ ga2_a2.conj().T
        out.append(d)
    return out


def propagate_master(
    state: QuantumState,
    params: ModelParams,
    t_grid,
    tol: float = 1e-8,
    max_halvings: int = 8,
    max_sector: int = MAX_MASTER_SECTOR,
    store_states: bool = False,
) -> MasterSeries:
    """Integrate the exact master equation with a fixed-step fourth-order
    Runge-Kutta scheme, halving the step until neither the final state nor
    any recorded observable moves by more than tol; raises ConvergenceError
    when max_halvings is exhausted.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
        raise ConfigError(["t_grid: need a strictly increasing 1-d grid"])
    n_top = state.n_max
    if n_top > max_sector:
        raise ConfigError(
            [f"initial sector {n_top} exceeds the exact-propagation guard ({max_sector}); "
             "raise max_sector explicitly or use the trajectory solver"]
        )

    mixed = state.to_mixed()
    blocks0 = []
    for n in range(n_top + 1):
        if n in mixed.blocks:
            blocks0.append(np.array(mixed.blocks[n], dtype=complex))
        else:
            blocks0.append(np.zeros((n + 1, n + 1), dtype=complex))

    jumps = JumpOperatorSet.from_params(params)
    hams, k_diags, sandwiches, feeds = [], [], [], []
    for n in range(n_top + 1):
        sector = FockSector(n)
        ops = _sector_ops(n)
        hams.append(build_hamiltonian(sector, params).astype(complex))
        k_diags.append(jumps.decay_diagonal(n))
        sandwiches.append(
            params.gamma_p
            * (np.outer(ops["n1"], ops["n1"]) + np.outer(ops["n2"], ops["n2"]))
        )
        if n == 0:
            feeds.append((None, None))
        else:
            a1 = math.sqrt(params.gamma_a1) * ops["a1"] if params.gamma_a1 > 0 else None
            a2 = math.sqrt(params.gamma_a2) * ops["a2"] if params.gamma_a2 > 0 else None
            feeds.append((a1, a2))

    rate_scale = max(
        (k_diags[n].max() if len(k_diags[n]) else 0.0)
        + 2.0 * np.abs(hams[n]).sum(axis=1).max()
        for n in range(n_top + 1)
    )
    rate_scale = max(rate_scale, 1e-12)
    span = grid[-1] - grid[0] if len(grid) > 1 else 0.0

    def run(dt_target):
        blocks = [b.copy() for b in blocks0]
        records = [_record_master(blocks)]
        kept = [_copy_blocks(blocks)] if store_states else None
        for left, right in zip(grid[:-1], grid[1:]):
            m = max(1, int(math.ceil((right - left) / dt_target)))
            h = (right - left) / m
            for _ in range(m):
                k1 = _master_rhs(blocks, hams, k_diags, sandwiches, feeds)
                y2 = [b + 0.5 * h * k for b, k in zip(blocks, k1)]
                k2 = _master_rhs(y2, hams, k_diags, sandwiches, feeds)
                y3 = [b + 0.5 * h * k for b, k in zip(blocks, k2)]
                k3 = _master_rhs(y3, hams, k_diags, sandwiches, feeds)
                y4 = [b + h * k for b, k in zip(blocks, k3)]
                k4 = _master_rhs(y4, hams, k_diags, sandwiches, feeds)
                blocks = [
                    b + (h / 6.0) * (a + 2.0 * bb + 2.0 * c + d)
                    for b, a, bb, c, d in zip(blocks, k1, k2, k3, k4)
                ]
            records.append(_record_master(blocks))
            if store_states:
                kept.append(_copy_blocks(blocks))
        return blocks, records, kept

    if span == 0.0:
        final, records, kept = run(1.0)
    else:
        dt = min(1.0 / rate_scale, np.diff(grid).min())
        final, records, kept = run(dt)
        converged = False
        for _ in range(max_halvings):
            dt *= 0.5
            final2, records2, kept2 = run(dt)
            diff = max(
                float(np.abs(a - b).max()) for a, b in zip(final, final2)
            )
            diff = max(diff, float(np.abs(np.array(records) - np.array(records2)).max()))
            final, records, kept = final2, records2, kept2
            if diff < tol:
                converged = True
                break
        if not converged:
            raise ConvergenceError(
                f"master propagation did not converge below {tol:g} after {max_halvings} halvings"
            )

    trace0 = sum(float(np.trace(b).real) for b in blocks0)
    rows = np.array(records)
    traces = rows[:, 4]
    if np.abs(traces - trace0).max() > 1e-8 * max(1.0, trace0):
        raise ConvergenceError("trace drifted beyond 1e-8 during master propagation")
    herm = max(
        float(np.abs(b - b.conj().T).max()) for b in final
    )
    if herm > 1e-10:
        raise ConvergenceError("hermiticity drifted beyond 1e-10 during master propagation")

    sx, sy, sz, n_mean = rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(n_mean > 0, np.hypot(sx, sy) / np.where(n_mean > 0, n_mean, 1.0), np.nan)
        purity = np.where(
            n_mean > 0, (sx**2 + sy**2 + sz**2) / np.where(n_mean > 0, n_mean, 1.0) ** 2, np.nan
        )
    final_state = QuantumState(
        blocks={n: final[n] for n in range(n_top + 1)}, pure=False
    )
    states = None
    if store_states:
        states = [
            QuantumState(blocks={n: blk[n] for n in range(n_top + 1)}, pure=False)
            for blk in kept
        ]
    return MasterSeries(
        t=grid, s_x=sx, s_y=sy, s_z=sz, n=n_mean, alpha=alpha, purity=purity,
        trace=traces, final_state=final_state, states=states,
    )


def _copy_blocks(blocks):
    return [b.copy() for b in blocks]


def _record_master(blocks):
    sx = sy = sz = n_mean = trace = 0.0
    for n, rho in enumerate(blocks):
        ops = _sector_ops(n)
        w = float(np.trace(rho).real)
        if n > 0:
            lp = complex(ops["offd"] @ np.diagonal(rho, offset=-1))
            sx += 2.0 * lp.real
            sy += 2.0 * lp.imag
        sz += 2.0 * float((ops["lz_diag"] @ np.diagonal(rho)).real)
        n_mean += n * w
        trace += w
    return (sx, sy, sz, n_mean, trace)


# ---------------------------------------------------------------------------
# Quantum trajectories (Monte Carlo wave function, waiting-time sampling)


@lru_cache(maxsize=256)
def _sector_evolution(params: ModelParams, n: int):
    """Eigendecomposition of H_eff = H - (i/2) diag(K) for one sector.

    Returns (lam, v, v_inv, k_diag, fallback). When the eigenbasis is
    ill-conditioned the segment propagator falls back to direct integration.
    """
    sector = FockSector(n)
    ham = build_hamiltonian(sector, params).astype(complex)
    k_diag = JumpOperatorSet.from_params(params).decay_diagonal(n)
    heff = ham - 0.5j * np.diag(k_diag)
    scale = max(1.0, float(np.abs(heff).max()))
    try:
        lam, v = np.linalg.eig(heff)
        v_inv = np.linalg.inv(v)
        residual = float(np.abs(heff @ v - v * lam).max())
        cond = float(np.linalg.cond(v))
        fallback = residual > 1e-10 * scale * sector.dim or cond > 1e10
    except np.linalg.LinAlgError:
        lam = v = v_inv = None
        fallback = True
    return lam, v, v_inv, k_diag, heff, fallback


def _fallback_segment(heff, psi, r, t_rem):
    """Integrate the unnormalized Schrodinger equation until the squared norm
    crosses r; returns (jump_delta or None, dense evaluator)."""
    d = len(psi)

    def rhs(_t, y):
        p = y[:d] + 1j * y[d:]
        dp = -1j * (heff @ p)
        return np.concatenate([dp.real, dp.imag])

    def crossing(_t, y):
        return float(y @ y) - r

    crossing.terminal = True
    crossing.direction = -1
    y0 = np.concatenate([psi.real, psi.imag])
    sol = solve_ivp(
        rhs, (0.0, t_rem), y0, method="DOP853", rtol=1e-10, atol=1e-13,
        events=crossing, dense_output=True,
    )
    if not sol.success:
        raise IntegrationError(
            f"trajectory segment integration failed: {sol.message}", t_reached=sol.t[-1]
        )

    def evaluate(tau):
        y = sol.sol(tau)
        return y[:d] + 1j * y[d:]

    delta = sol.t_events[0][0] if len(sol.t_events[0]) else None
    return delta, evaluate


def _find_jump_time(lam, v, c, k_diag, r, t_rem):
    """Safeguarded Newton search for ||psi(delta)||^2 = r on (0, t_rem)."""

    def norm2_and_state(delta):
        psi = v @ (c * np.exp(-1j * lam * delta))
        a2 = np.abs(psi) ** 2
        return float(a2.sum()), psi, a2

    lo, hi = 0.0, t_rem
    gamma0 = float(k_diag @ np.abs(v @ c) ** 2)
    if gamma0 > 0 and r > 0:
        delta = min(-math.log(r) / gamma0, 0.5 * (lo + hi))
    else:
        delta = 0.5 * (lo + hi)
    if not lo < delta < hi:
        delta = 0.5 * (lo + hi)

    psi = a2 = None
    for _ in range(100):
        norm2, psi, a2 = norm2_and_state(delta)
        g = norm2 - r
        if abs(g) < 1e-13:
            return delta, psi, a2
        if g > 0:
            lo = delta
        else:
            hi = delta
        slope = -float(k_diag @ a2)
        step = g / slope if slope < 0 else None
        candidate = delta - step if step is not None else None
        if candidate is None or not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        delta = candidate
        if hi - lo < 1e-15 * max(1.0, hi):
            norm2, psi, a2 = norm2_and_state(delta)
            return delta, psi, a2
    norm2, psi, a2 = norm2_and_state(delta)
    if abs(norm2 - r) > 1e-6:
        raise ConvergenceError("jump-time search failed to converge")
    return delta, psi, a2


def _apply_jump(channel, psi, n_sec):
    ops = _sector_ops(n_sec)
    if channel == 0:
        psi = ops["n1"] * psi
    elif channel == 1:
        psi = ops["n2"] * psi
    elif channel == 2:
        psi = ops["a1"] @ psi
        n_sec -= 1
    else:
        psi = ops["a2"] @ psi
        n_sec -= 1
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ConvergenceError("jump produced a zero state; channel weights inconsistent")
    return psi / nrm, n_sec


def _traj_observables(psi, n_sec):
    ops = _sector_ops(n_sec)
    lp = complex(np.vdot(psi[:-1], ops["offd"] * psi[1:])) if n_sec > 0 else 0.0
    sx, sy = 2.0 * lp.real, 2.0 * lp.imag
    sz = 2.0 * float(ops["lz_diag"] @ np.abs(psi) ** 2)
    return sx, sy, sz


def _run_trajectory(params: ModelParams, n0: int, psi0: np.ndarray, grid: np.ndarray, rng):
    """One waiting-time trajectory; returns observables on the grid, the jump
    counts per channel, and the normalized state at the final grid time."""
    jumps = JumpOperatorSet.from_params(params)
    n_grid = len(grid)
    sx = np.zeros(n_grid)
    sy = np.zeros(n_grid)
    sz = np.zeros(n_grid)
    n_arr = np.zeros(n_grid)
    counts = np.zeros(4, dtype=np.int64)

    psi = psi0 / np.linalg.norm(psi0)
    n_sec = n0
    t_cur = grid[0]
    sx[0], sy[0], sz[0] = _traj_observables(psi, n_sec)
    n_arr[0] = n_sec
    gi = 1
    r = rng.random()

    while gi < n_grid:
        lam, v, v_inv, k_diag, heff, fallback = _sector_evolution(params, n_sec)
        t_rem = grid[-1] - t_cur

        if fallback:
            delta, evaluate = _fallback_segment(heff, psi, r, t_rem)
            seg_end = t_rem if delta is None else delta
            while gi < n_grid and grid[gi] <= t_cur + seg_end + 1e-12:
                tau = evaluate(grid[gi] - t_cur)
                tau = tau / np.linalg.norm(tau)
                sx[gi], sy[gi], sz[gi] = _traj_observables(tau, n_sec)
                n_arr[gi] = n_sec
                gi += 1
            if delta is None:
                raw = evaluate(t_rem)
                psi = raw / np.linalg.norm(raw)
                break
            psi_raw = evaluate(delta)
            a2 = np.abs(psi_raw) ** 2
            t_cur += delta
        else:
            c = v_inv @ psi
            psi_end = v @ (c * np.exp(-1j * lam * t_rem))
            norm2_end = float(np.vdot(psi_end, psi_end).real)
            if norm2_end >= r:
                # no jump before the end of the grid
                while gi < n_grid:
                    tau = v @ (c * np.exp(-1j * lam * (grid[gi] - t_cur)))
                    tau = tau / np.linalg.norm(tau)
                    sx[gi], sy[gi], sz[gi] = _traj_observables(tau, n_sec)
                    n_arr[gi] = n_sec
                    gi += 1
                psi = psi_end / math.sqrt(norm2_end)
                break
            delta, psi_raw, a2 = _find_jump_time(lam, v, c, k_diag, r, t_rem)
            while gi < n_grid and grid[gi] <= t_cur + delta + 1e-12:
                tau = v @ (c * np.exp(-1j * lam * (grid[gi] - t_cur)))
                tau = tau / np.linalg.norm(tau)
                sx[gi], sy[gi], sz[gi] = _traj_observables(tau, n_sec)
                n_arr[gi] = n_sec
                gi += 1
            t_cur += delta

        weights = jumps.channel_weights(n_sec, a2)
        total = weights.sum()
        if total <= 0:
            raise ConvergenceError("norm decayed without any open jump channel")
        pick = rng.random() * total
        channel = int(np.searchsorted(np.cumsum(weights), pick, side="right"))
        channel = min(channel, 3)
        psi, n_sec = _apply_jump(channel, psi_raw, n_sec)
        counts[channel] += 1
        r = rng.random()

    return sx, sy, sz, n_arr, counts, psi, n_sec


@dataclass
class EnsembleSeries:
    """Trajectory-ensemble observables with standard errors."""

    t: np.ndarray
    alpha_mean: np.ndarray
    alpha_se: np.ndarray
    purity_mean: np.ndarray
    purity_se: np.ndarray
    n_mean: np.ndarray
    n_se: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray
    s_z: np.ndarray
    jump_counts: np.ndarray
    n_traj: int
    final_density: QuantumState | None = None


def mcwf_ensemble(
    state: QuantumState,
    params: ModelParams,
    t_grid,
    n_traj: int,
    seed: int,
    collect_final_density: bool = False,
) -> EnsembleSeries:
    """Monte Carlo wave-function ensemble with waiting-time jump sampling.

    Each trajectory k uses its own generator seeded with [seed, k], so results
    are bit-identical for a given (seed, n_traj, grid) regardless of execution
    order. Per-trajectory contrast and purity are averaged with their standard
    errors; s_x, s_y, s_z are plain ensemble means.
    """
    violations = []
    if not state.pure:
        violations.append("trajectory unraveling requires a pure initial state")
    if n_traj < 1:
        violations.append(f"n_traj: must be >= 1, got {n_traj!r}")
    if seed is None or (not isinstance(seed, (int, np.integer))) or seed < 0:
        violations.append(f"seed: a nonnegative integer is required, got {seed!r}")
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
        violations.append("t_grid: need a strictly increasing 1-d grid")
    if violations:
        raise ConfigError(violations)

    weights = state.weights()
    sectors = sorted(state.blocks)
    probs = np.array([weights[n] for n in sectors])
    probs = probs / probs.sum()

    n_grid = len(grid)
    sx_all = np.zeros((n_traj, n_grid))
    sy_all = np.zeros((n_traj, n_grid))
    sz_all = np.zeros((n_traj, n_grid))
    n_all = np.zeros((n_traj, n_grid))
    counts = np.zeros(4, dtype=np.int64)
    density_blocks: dict[int, np.ndarray] = {}

    for k in range(n_traj):
        rng = np.random.default_rng([int(seed), k])
        if len(sectors) == 1:
            n0 = sectors[0]
        else:
            n0 = int(rng.choice(sectors, p=probs))
        psi0 = state.blocks[n0]
        sx, sy, sz, n_arr, cts, psi_f, nf = _run_trajectory(params, n0, psi0, grid, rng)
        sx_all[k] = sx
        sy_all[k] = sy
        sz_all[k] = sz
        n_all[k] = n_arr
        counts += cts
        if collect_final_density:
            density_blocks.setdefault(nf, np.zeros((nf + 1, nf + 1), dtype=complex))
            density_blocks[nf] += np.outer(psi_f, psi_f.conj()) / n_traj

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        alpha_all = np.where(n_all > 0, np.hypot(sx_all, sy_all) / np.where(n_all > 0, n_all, 1.0), np.nan)
        pur_all = np.where(
            n_all > 0,
            (sx_all**2 + sy_all**2 + sz_all**2) / np.where(n_all > 0, n_all, 1.0) ** 2,
            np.nan,
        )
        alpha_mean = np.nanmean(alpha_all, axis=0)
        pur_mean = np.nanmean(pur_all, axis=0)
        m_alpha = np.sum(~np.isnan(alpha_all), axis=0)
        alpha_se = np.where(
            m_alpha > 1, np.nanstd(alpha_all, axis=0, ddof=1) / np.sqrt(np.maximum(m_alpha, 2)), np.nan
        )
        pur_se = np.where(
            m_alpha > 1, np.nanstd(pur_all, axis=0, ddof=1) / np.sqrt(np.maximum(m_alpha, 2)), np.nan
        )

    n_se = n_all.std(axis=0, ddof=1) / math.sqrt(n_traj) if n_traj > 1 else np.full(n_grid, np.nan)
    final_density = None
    if collect_final_density:
        final_density = QuantumState(blocks=density_blocks, pure=False)
    return EnsembleSeries(
        t=grid,
        alpha_mean=alpha_mean,
        alpha_se=alpha_se,
        purity_mean=pur_mean,
        purity_se=pur_se,
        n_mean=n_all.mean(axis=0),
        n_se=n_se,
        s_x=sx_all.mean(axis=0),
        s_y=sy_all.mean(axis=0),
        s_z=sz_all.mean(axis=0),
        jump_counts=counts,
        n_traj=n_traj,
        final_density=final_density,
    )


# ---------------------------------------------------------------------------
# Measurement distributions and phase-space representation


@dataclass
class MeasurementDistributions:
    """Number-difference and relative-phase distributions."""

    sz_values: np.ndarray
    sz_prob: np.ndarray
    phi_centers: np.ndarray
    phi_prob: np.ndarray


def measurement_distributions(state: QuantumState, n_phi_bins: int = 256) -> MeasurementDistributions:
    """P(s_z) on the half-integer grid of the largest sector, and P(phi) from
    per-sector phase states accumulated onto a fixed uniform bin grid."""
    mixed = state.to_mixed()
    total = mixed.total_weight()
    if total <= 0:
        raise UndefinedObservableError("distributions undefined for a zero-weight state")
    n_max = mixed.n_max

    sz_values = (np.arange(2 * n_max + 1) - n_max) / 2.0
    sz_prob = np.zeros_like(sz_values)
    width = 2.0 * math.pi / n_phi_bins
    phi_centers = -math.pi + (np.arange(n_phi_bins) + 0.5) * width
    phi_prob = np.zeros(n_phi_bins)

    for n, rho in mixed.blocks.items():
        pops = np.diagonal(rho).real
        lz = _sector_ops(n)["lz_diag"]
        for i, val in enumerate(lz):
            g = int(round(2 * val)) + n_max
            sz_prob[g] += pops[i]

        dim = n + 1
        m = np.arange(dim)
        phis = 2.0 * math.pi * m / dim
        # phase-state overlap matrix U[m, i] = exp(-i phi_m s_z_i)/sqrt(dim)
        u = np.exp(-1j * np.outer(phis, lz)) / math.sqrt(dim)
        probs = np.einsum("mi,ij,mj->m", u, rho, u.conj()).real
        wrapped = np.mod(phis + math.pi, 2.0 * math.pi) - math.pi
        bins = np.clip(((wrapped + math.pi) / width).astype(int), 0, n_phi_bins - 1)
        np.add.at(phi_prob, bins, probs)

    sz_prob /= total
    phi_prob /= total
    return MeasurementDistributions(
        sz_values=sz_values, sz_prob=sz_prob, phi_centers=phi_centers, phi_prob=phi_prob
    )


@dataclass
class HusimiGrid:
    """Spherical Husimi distribution on a product quadrature grid."""

    theta: np.ndarray
    phi: np.ndarray
    q: np.ndarray
    theta_weights: np.ndarray

    def integral(self) -> float:
        dphi = 2.0 * math.pi / len(self.phi)
        return float(self.theta_weights @ self.q.sum(axis=1) * dphi)


def husimi_q(state: QuantumState, n_theta: int | None = None, n_phi: int | None = None) -> HusimiGrid:
    """Q(theta, phi) = sum_n (n+1)/(4 pi) <theta phi; n| rho_n |theta phi; n>.

    Gauss-Legendre nodes in cos(theta) and a uniform phi grid make the
    integral over the sphere exact for the polynomial content; a normalized
    state integrates to 1. The vacuum sector contributes a flat 1/(4 pi).
    """
    mixed = state.to_mixed()
    n_max = mixed.n_max
    if n_theta is None:
        n_theta = max(32, n_max // 2 + 2)
    if n_phi is None:
        n_phi = max(64, n_max + 2)

    x, w = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(np.arccos(x))
    theta = np.arccos(x)[order]
    weights = w[order]
    dphi_centers = -math.pi + (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)

    q = np.zeros((n_theta, n_phi))
    half = 0.5 * theta
    for n, rho in mixed.blocks.items():
        k = np.arange(n + 1)
        root_binom = np.array([math.sqrt(math.comb(n, int(kk))) for kk in k])
        # amplitude magnitudes depend on theta, phases on phi
        mag = root_binom[None, :] * np.sin(half)[:, None] ** k * np.cos(half)[:, None] ** (n - k)
        phase = np.exp(1j * np.outer(dphi_centers, k))
        pref = (n + 1) / (4.0 * math.pi)
        c = mag[:, None, :] * phase[None, :, :]  # (n_theta, n_phi, dim)
        inner = np.einsum("tpi,ij,tpj->tp", c.conj(), rho, c, optimize=True)
        q += pref * inner.real

    return HusimiGrid(theta=theta, phi=dphi_centers, q=q, theta_weights=weights)
