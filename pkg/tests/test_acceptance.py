"""Acceptance scorecard: eleven end-to-end checks of the headline results.

Each test exercises one claim at stated tolerances and prints a single
scorecard line before asserting, so the measurement stays visible even when
a clause fails. Run with

    python3 -m pytest tests/test_acceptance.py -s -v

One clause is known to fail and is asserted as stated rather than loosened:
the location of the contrast maximum in check 01, where the closed-form
intersection point misses the true argmax by ~46% at the reference rates.
"""

import math
import time

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from becsim.errors import NoPhysicalModeError
from becsim.meanfield import (
    BlochState,
    bifurcation_un_threshold,
    find_fixed_points,
    integrate,
)
from becsim.model import (
    FockSector,
    ModelParams,
    angular_momentum_ops,
    derive_rates,
    loss_rates_for,
)
from becsim.quantum import (
    bloch_expectations,
    coherent_condensate,
    mcwf_ensemble,
    propagate_master,
)
from becsim.response import (
    driven_ratio_series,
    measured_response,
    projected_amplitude,
    resonance_frequency,
    response_bias,
    response_surface,
    response_tunneling,
)
from becsim.steadystate import (
    _quartic_coefficients,
    alpha_limits,
    build_decay_matrix,
    critical_n,
    linear_decay_modes,
    nonlinear_quasi_steady,
    select_physical,
    sr_condition_t1inv,
)


def report(num: int, passed: bool, wall: float, limit: float, detail: str) -> None:
    verdict = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {num:02d} {verdict} ({wall:.2f}s/{limit:.0f}s) {detail}")


def single_peaked(values: np.ndarray) -> bool:
    """True when the sequence rises to a unique maximum and falls after it."""
    k = int(np.argmax(values))
    up = np.diff(values[: k + 1])
    down = np.diff(values[k:])
    return bool(np.all(up > 0.0) and np.all(down < 0.0))


def quasi_steady_alpha(t1_inv: float, j: float, gamma_p: float, f_a: float) -> float:
    ga1, ga2 = loss_rates_for(t1_inv, f_a)
    p = ModelParams(J=j, gamma_p=gamma_p, gamma_a1=ga1, gamma_a2=ga2)
    return select_physical(linear_decay_modes(p)).alpha


def test_01_contrast_maximum_location():
    t0 = time.perf_counter()
    xs = np.geomspace(0.5, 30.0, 300)
    vals = np.array([quasi_steady_alpha(x, 2.0, 5.0, 0.5) for x in xs])
    interior = single_peaked(vals) and 0 < int(np.argmax(vals)) < len(xs) - 1
    k = int(np.argmax(vals))
    refine = minimize_scalar(
        lambda x: -quasi_steady_alpha(x, 2.0, 5.0, 0.5),
        bounds=(xs[k - 1], xs[k + 1]),
        method="bounded",
        options={"xatol": 1e-6},
    )
    x_star = float(refine.x)
    root = sr_condition_t1inv(ModelParams(J=2.0, gamma_p=5.0, gamma_a1=0.5, gamma_a2=1.5))
    dev = abs(x_star - root) / root
    wall = time.perf_counter() - t0
    ok = interior and dev <= 0.15 and wall < 1.0
    report(
        1, ok, wall, 1.0,
        f"argmax 1/T1 = {x_star:.4f}, predicted crossing {root:.4f}, rel dev {dev:.2%} (tol 15%)",
    )
    assert interior
    assert wall < 1.0
    # Known failure: the crossing of the two closed-form branches sits well
    # below the true maximum of the exact mode contrast at these rates.
    assert dev <= 0.15


def test_02_closed_form_limits():
    t0 = time.perf_counter()
    ratios = []
    for j in (0.05, 50.0):
        ga1, ga2 = loss_rates_for(1.0, 0.5)
        p = ModelParams(J=j, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
        exact = select_physical(linear_decay_modes(p)).alpha
        small_j, large_j = alpha_limits(p)
        ratios.append(exact / (small_j if j < 1.0 else large_j))
    wall = time.perf_counter() - t0
    ok = all(abs(r - 1.0) <= 0.05 for r in ratios) and wall < 1.0
    report(
        2, ok, wall, 1.0,
        f"exact/limit = {ratios[0]:.6f} (weak tunneling), {ratios[1]:.6f} (strong tunneling), tol 5%",
    )
    assert wall < 1.0
    for r in ratios:
        assert abs(r - 1.0) <= 0.05


def test_03_relaxation_timing():
    t0 = time.perf_counter()
    # The loss asymmetry and initial orientation are free choices here. At
    # asymmetry 0.5 the two windows barely intersect (a fully relaxed
    # trajectory still keeps 47% of the atoms at t = 1 s), so the check uses
    # asymmetry 0.2 and a tilted condensate, where both clauses hold with
    # wide margins. The fig3 preset ships the same configuration.
    p = ModelParams(J=4.0, epsilon=10.0, gamma_p=5.0, gamma_a1=0.8, gamma_a2=1.2)
    star = select_physical(linear_decay_modes(p)).alpha
    s0 = BlochState.from_angles(19.0 * np.pi / 36.0, 3.0 * np.pi / 8.0, 100.0)
    grid = np.linspace(0.0, 1.0, 101)
    mf = integrate(s0, p, t_span=(0.0, 1.0), output_grid=grid)
    n_ratio = mf.n[-1] / mf.n[0]
    alpha_end = math.hypot(mf.s_x[-1], mf.s_y[-1]) / mf.n[-1]
    dev = abs(alpha_end - star) / star
    wall = time.perf_counter() - t0
    ok = 0.35 <= n_ratio <= 0.45 and dev < 0.10 and wall < 1.0
    report(
        3, ok, wall, 1.0,
        f"n(1)/n(0) = {n_ratio:.4f} (window [0.35, 0.45]), contrast dev {dev:.2%} (tol 10%)",
    )
    assert wall < 1.0
    assert 0.35 <= n_ratio <= 0.45
    assert dev < 0.10


def test_04_interaction_shift_of_maximum():
    t0 = time.perf_counter()
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    js = np.geomspace(0.3, 8.0, 300)
    argmaxes, maxima = [], []
    for un in (0.0, 5.0, 10.0):
        vals = []
        for j in js:
            p = ModelParams(J=float(j), U=un / 100.0, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
            try:
                sols = linear_decay_modes(p) if un == 0.0 else nonlinear_quasi_steady(p, 100.0)
                vals.append(select_physical(sols).alpha)
            except NoPhysicalModeError:
                vals.append(np.nan)
        vals = np.array(vals)
        k = int(np.nanargmax(vals))
        argmaxes.append(float(js[k]))
        maxima.append(float(vals[k]))
    spread = (max(maxima) - min(maxima)) / np.mean(maxima)
    increasing = argmaxes[0] < argmaxes[1] < argmaxes[2]
    wall = time.perf_counter() - t0
    ok = increasing and spread < 0.02 and wall < 10.0
    report(
        4, ok, wall, 10.0,
        f"argmax J = {argmaxes[0]:.3f} < {argmaxes[1]:.3f} < {argmaxes[2]:.3f}, "
        f"height spread {spread:.2e} (tol 2%)",
    )
    assert wall < 10.0
    assert increasing
    assert spread < 0.02


def test_05_oracle_chain_without_interaction():
    t0 = time.perf_counter()
    p = ModelParams(J=2.0, U=0.0, epsilon=1.0, gamma_p=0.8, gamma_a1=0.4, gamma_a2=1.2)
    n0 = 12
    theta, phi = 2.0 * np.pi / 3.0, 0.3
    grid = np.linspace(0.0, 2.0, 51)

    mf = integrate(BlochState.from_angles(theta, phi, float(n0)), p,
                   t_span=(0.0, 2.0), output_grid=grid)
    v_mf = np.stack([mf.s_x, mf.s_y, mf.s_z, mf.n], axis=1)

    m = build_decay_matrix(p)
    v_exp = np.stack([expm(-m * t) @ v_mf[0] for t in grid])

    st = coherent_condensate(n0, theta, phi)
    ms = propagate_master(st, p, grid)
    v_ms = np.stack([ms.s_x, ms.s_y, ms.s_z, ms.n], axis=1)

    def rel(a, b):
        return float(np.max(np.abs(a - b) / np.maximum(np.abs(b).max(axis=1, keepdims=True), 1e-12)))

    pair_devs = (rel(v_mf, v_exp), rel(v_mf, v_ms), rel(v_exp, v_ms))

    # One trajectory per seed so the standard error is estimated from 1000
    # independent samples instead of a handful of batch means.
    samples = []
    for seed in range(1000):
        ens = mcwf_ensemble(st, p, grid, n_traj=1, seed=seed)
        samples.append(np.stack([ens.s_x, ens.s_y, ens.s_z, ens.n_mean], axis=1))
    samples = np.stack(samples)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    z = np.abs(mean - v_ms) / np.maximum(3.0 * se, 1e-300)
    z_max = float(z[1:].max())  # t = 0 rows are identical by construction

    wall = time.perf_counter() - t0
    ok = max(pair_devs) <= 1e-6 and z_max <= 1.0 and wall < 300.0
    report(
        5, ok, wall, 300.0,
        f"pairwise deviations {pair_devs[0]:.1e}/{pair_devs[1]:.1e}/{pair_devs[2]:.1e} "
        f"(tol 1e-6), trajectories max |diff|/3SE = {z_max:.3f}",
    )
    assert wall < 300.0
    for d in pair_devs:
        assert d <= 1e-6
    assert z_max <= 1.0


def test_06_dephasing_thermalization():
    t0 = time.perf_counter()
    p = ModelParams(J=1.0, gamma_p=1.0)
    st = coherent_condensate(6, 1.0, 0.5)
    grid = np.linspace(0.0, 100.0, 101)
    ms = propagate_master(st, p, grid)
    pops = np.diag(ms.final_state.blocks[6]).real
    pop_dev = float(np.abs(pops - 1.0 / 7.0).max())
    s, _, _ = bloch_expectations(ms.final_state)
    l_norm = float(np.linalg.norm(s)) / 2.0
    wall = time.perf_counter() - t0
    ok = pop_dev <= 1e-6 and l_norm <= 1e-6 and wall < 10.0
    report(
        6, ok, wall, 10.0,
        f"max |population - 1/7| = {pop_dev:.1e}, |<L>| = {l_norm:.1e} (tol 1e-6)",
    )
    assert wall < 10.0
    assert pop_dev <= 1e-6
    assert l_norm <= 1e-6


def test_07_driven_response_grid():
    t0 = time.perf_counter()
    base = ModelParams(J=1.0, gamma_p=5.0, gamma_a1=0.5, gamma_a2=1.5)
    axis = np.geomspace(0.25, 8.0, 12)
    ridge_ok = True
    for kind in ("tunneling", "bias"):
        surf = response_surface(base, axis, axis, kind=kind, rel_amp=0.1)
        assert np.all(np.isfinite(surf.response)), kind
        for k in range(len(axis)):
            column = surf.response[:, k]  # vary J0 at fixed 1/T1
            ridge_ok &= single_peaked(column) and 0 < int(np.argmax(column)) < len(axis) - 1
        for i, j0 in enumerate(axis):
            row = surf.response[i, :]  # vary 1/T1 at fixed J0
            ridge_ok &= single_peaked(row)
            cell = ModelParams(J=float(j0), gamma_p=5.0, gamma_a1=0.5, gamma_a2=1.5)
            predicted = sr_condition_t1inv(cell)
            if axis[0] < predicted < axis[-1]:
                ridge_ok &= 0 < int(np.argmax(row)) < len(axis) - 1

    td_devs = []
    for j0, t1inv in ((0.25, 0.25), (0.25, 8.0), (8.0, 0.25), (8.0, 8.0), (1.5, 2.0), (2.0, 4.0)):
        ga1, ga2 = loss_rates_for(t1inv, 0.5)
        p = ModelParams(J=j0, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
        linear = response_tunneling(p, 0.1 * j0).response
        measured = measured_response(p, "tunneling", 0.1 * j0)
        td_devs.append(abs(measured - linear) / linear)
    td_max = max(td_devs)

    wall = time.perf_counter() - t0
    ok = ridge_ok and td_max <= 0.05 and wall < 60.0
    report(
        7, ok, wall, 60.0,
        f"ridge interior and single-peaked: {ridge_ok}, "
        f"time-domain vs linear max dev {td_max:.2%} over 6 cells (tol 5%)",
    )
    assert wall < 60.0
    assert ridge_ok
    assert td_max <= 0.05


def test_08_bias_drive_null():
    t0 = time.perf_counter()
    p = ModelParams(J=2.0, gamma_p=5.0, gamma_a1=2.0, gamma_a2=6.0)
    sol = response_bias(p, 1.0)
    s1_norm = float(np.linalg.norm(sol.s1))
    null_y = abs(sol.s1[1]) <= 1e-12 * s1_norm
    null_z = abs(sol.s1[2]) <= 1e-12 * s1_norm

    omega = resonance_frequency(p)
    t, x = driven_ratio_series(p, "bias", 1.0, n_periods=16, settle_factor=8.0)
    a_fund = projected_amplitude(t, x[2], omega)
    a_second = projected_amplitude(t, x[2], 2.0 * omega)
    power_ratio = (a_second / max(a_fund, 1e-300)) ** 2

    wall = time.perf_counter() - t0
    ok = null_y and null_z and power_ratio >= 1e3 and wall < 30.0
    report(
        8, ok, wall, 30.0,
        f"|s1_y|, |s1_z| <= 1e-12 |s1|: {null_y and null_z}, "
        f"s_z/n power at 2w over w = {power_ratio:.1e} (floor 1e3)",
    )
    assert wall < 30.0
    assert null_y
    assert null_z
    assert power_ratio >= 1e3


def dip_revival(purity: np.ndarray, grid: np.ndarray):
    """Dip before the in-window peak and the first post-peak drop below 0.5."""
    window = (grid >= 1.0) & (grid <= 3.0)
    peak_idx = int(np.where(window)[0][np.argmax(purity[window])])
    dip = float(purity[: peak_idx + 1].min())
    after = np.where((np.arange(len(grid)) > peak_idx) & (purity < 0.5))[0]
    t_end = float(grid[after[0]]) if len(after) else math.nan
    return dip, float(purity[peak_idx]), float(grid[peak_idx]), t_end


def test_09_purity_dip_and_revival():
    t0 = time.perf_counter()
    p = ModelParams(J=10.0, U=10.0, gamma_p=5.0, gamma_a1=1.0, gamma_a2=3.0)
    theta = 2.0 * np.pi / 3.0
    grid = np.linspace(0.0, 3.5, 351)

    mf = integrate(BlochState.from_angles(theta, 0.0, 100.0), p,
                   t_span=(0.0, 3.5), output_grid=grid)
    mf_dip, mf_peak, mf_t_peak, mf_t_rev = dip_revival(mf.purity, grid)
    n_c = critical_n(p)
    below = np.where(mf.n < n_c)[0]
    t_cross = float(grid[below[0]])
    cross_dev = abs(mf_t_rev - t_cross) / t_cross

    ens = mcwf_ensemble(coherent_condensate(100, theta, 0.0), p, grid, n_traj=100, seed=1234)
    ens_purity = (ens.s_x**2 + ens.s_y**2 + ens.s_z**2) / np.maximum(ens.n_mean, 1e-300) ** 2
    ens_dip, ens_peak, ens_t_peak, _ = dip_revival(ens_purity, grid)

    wall = time.perf_counter() - t0
    ok = (
        mf_dip < 0.5 and mf_peak > 0.8 and 1.0 <= mf_t_peak <= 3.0
        and cross_dev <= 0.2
        and ens_dip < 0.5 and ens_peak > 0.7 and 1.0 <= ens_t_peak <= 3.0
        and wall < 600.0
    )
    report(
        9, ok, wall, 600.0,
        f"mean-field dip {mf_dip:.3f} -> peak {mf_peak:.3f} at t = {mf_t_peak:.2f}, "
        f"revival end {mf_t_rev:.2f} vs n_crit crossing {t_cross:.2f} (dev {cross_dev:.2%}), "
        f"trajectories dip {ens_dip:.3f} -> peak {ens_peak:.3f}",
    )
    assert wall < 600.0
    assert mf_dip < 0.5
    assert mf_peak > 0.8
    assert 1.0 <= mf_t_peak <= 3.0
    assert cross_dev <= 0.2
    assert ens_dip < 0.5
    assert ens_peak > 0.7
    assert 1.0 <= ens_t_peak <= 3.0


def test_10_fixed_point_structure():
    t0 = time.perf_counter()
    free = ModelParams(J=10.0, U=1.0)
    points = find_fixed_points(free, 40.0)
    four = len(points) == 4
    expected = {(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0),
                (-0.5, 0.0, math.sqrt(0.75)), (-0.5, 0.0, -math.sqrt(0.75))}
    found = {tuple(np.round(fp.direction, 6)) for fp in points}
    positions_match = all(
        min(np.linalg.norm(np.array(f) - np.array(e)) for e in expected) < 1e-6 for f in found
    )

    lossy = ModelParams(J=10.0, U=1.0, gamma_a1=5.0, gamma_a2=15.0)
    kinds = {fp.stability for fp in find_fixed_points(lossy, 40.0)}
    has_both = "attractive" in kinds and "repulsive" in kinds

    threshold = bifurcation_un_threshold(ModelParams(J=10.0, U=1.0), 40.0, 10.0, 30.0, rel_tol=1e-4)
    thr_dev = abs(threshold - 20.0) / 20.0

    wall = time.perf_counter() - t0
    ok = four and positions_match and has_both and thr_dev <= 0.01 and wall < 10.0
    report(
        10, ok, wall, 10.0,
        f"{len(points)} conservative fixed points, lossy kinds {sorted(kinds)}, "
        f"bifurcation threshold {threshold:.4f} vs 20 (dev {thr_dev:.3%}, tol 1%)",
    )
    assert wall < 10.0
    assert four
    assert positions_match
    assert has_both
    assert thr_dev <= 0.01


def test_11_property_bundle():
    t0 = time.perf_counter()

    # Algebra of the collective operators at n = 60.
    lx, ly, lz = angular_momentum_ops(FockSector(60))
    scale = np.abs(lx).max() * np.abs(ly).max()
    comm_res = max(
        np.abs(lx @ ly - ly @ lx - 1j * lz).max(),
        np.abs(ly @ lz - lz @ ly - 1j * lx).max(),
        np.abs(lz @ lx - lx @ lz - 1j * ly).max(),
    ) / scale
    casimir = lx @ lx + ly @ ly + lz @ lz
    cas_expected = 30.0 * 31.0
    cas_res = float(np.abs(casimir - cas_expected * np.eye(61)).max()) / cas_expected

    # Trace, hermiticity, positivity of a dissipative propagation.
    p = ModelParams(J=1.3, U=0.7, epsilon=0.4, gamma_p=0.9, gamma_a1=0.35, gamma_a2=1.1)
    ms = propagate_master(coherent_condensate(6, 1.0, 0.7), p, np.linspace(0.0, 2.0, 21))
    trace_drift = float(np.abs(ms.trace - 1.0).max())
    herm = 0.0
    min_eig = np.inf
    for block in ms.final_state.blocks.values():
        herm = max(herm, float(np.abs(block - block.conj().T).max()))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (block + block.conj().T)).min()))

    # Quasi-steady rates satisfy their quartic; modes satisfy the eigenproblem.
    p4 = ModelParams(J=1.5, U=0.05, gamma_p=5.0, gamma_a1=1.0, gamma_a2=3.0)
    rates = derive_rates(p4)
    coeffs = _quartic_coefficients(
        rates.t1_inv, rates.t2_inv, rates.f_a * rates.t1_inv, p4.U * 100.0, p4.J
    )
    quartic_res = 0.0
    for sol in nonlinear_quasi_steady(p4, 100.0):
        denom = float(np.polyval(np.abs(coeffs), abs(sol.kappa)))
        quartic_res = max(quartic_res, abs(np.polyval(coeffs, sol.kappa)) / denom)

    p_eig = ModelParams(J=4.0, epsilon=10.0, gamma_p=5.0, gamma_a1=0.5, gamma_a2=1.5)
    m = build_decay_matrix(p_eig)
    eig_res = 0.0
    for mode in linear_decay_modes(p_eig):
        v = np.append(mode.s0, mode.n0)
        eig_res = max(
            eig_res,
            float(np.linalg.norm(m @ v - mode.kappa * v))
            / (np.linalg.norm(m, 2) * np.linalg.norm(v)),
        )

    # Seeded trajectories are bit-reproducible and seeds actually matter.
    st = coherent_condensate(8, 1.2, 0.4)
    p_tr = ModelParams(J=1.0, U=0.2, gamma_p=0.5, gamma_a1=0.3, gamma_a2=0.9)
    grid = np.linspace(0.0, 1.0, 11)
    a = mcwf_ensemble(st, p_tr, grid, n_traj=20, seed=7)
    b = mcwf_ensemble(st, p_tr, grid, n_traj=20, seed=7)
    c = mcwf_ensemble(st, p_tr, grid, n_traj=20, seed=8)
    repro = (
        np.array_equal(a.alpha_mean, b.alpha_mean)
        and np.array_equal(a.s_x, b.s_x)
        and not np.array_equal(a.alpha_mean, c.alpha_mean)
    )

    wall = time.perf_counter() - t0
    checks = {
        "commutators": comm_res <= 1e-12,
        "casimir": cas_res <= 1e-12,
        "trace": trace_drift <= 1e-6,
        "hermiticity": herm <= 1e-10,
        "positivity": min_eig >= -1e-10,
        "quartic": quartic_res <= 1e-10,
        "eigenmodes": eig_res <= 1e-10,
        "seeding": repro,
    }
    ok = all(checks.values()) and wall < 120.0
    failed = [k for k, v in checks.items() if not v]
    report(
        11, ok, wall, 120.0,
        f"residuals: commutator {comm_res:.1e}, casimir {cas_res:.1e}, trace {trace_drift:.1e}, "
        f"hermiticity {herm:.1e}, min eig {min_eig:.1e}, quartic {quartic_res:.1e}, "
        f"eigen {eig_res:.1e}" + (f"; FAILED {failed}" if failed else ""),
    )
    assert wall < 120.0
    assert not failed, failed
