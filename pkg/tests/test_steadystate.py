"""Decay modes, quasi-steady solutions, and the slow-branch survival criteria."""

import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from becsim.errors import ConfigError, NoPhysicalModeError, NoResonanceError
from becsim.meanfield import bloch_rhs
from becsim.model import ModelParams, derive_rates, loss_rates_for
from becsim.steadystate import (
    DecayModeSolution,
    adiabatic_decay,
    alpha_closed_form,
    alpha_limits,
    build_decay_matrix,
    critical_n,
    linear_decay_modes,
    nonlinear_quasi_steady,
    select_physical,
    sr_condition_J,
    sr_condition_t1inv,
)

FIG2_RATES = dict(gamma_p=5.0, gamma_a1=0.5, gamma_a2=1.5)


def test_decay_matrix_columns_match_bloch_rhs():
    p = ModelParams(J=2.3, epsilon=0.9, gamma_p=1.2, gamma_a1=0.4, gamma_a2=1.6)
    m = build_decay_matrix(p)
    for k in range(4):
        v = np.zeros(4)
        v[k] = 1.0
        assert np.allclose(-m @ v, bloch_rhs(v, p), atol=1e-12)


def test_zero_tunneling_spectrum():
    p = ModelParams(J=0.0, epsilon=1.3, gamma_p=2.0, gamma_a1=0.7, gamma_a2=2.1)
    rates = derive_rates(p)
    kappas = sorted((m.kappa for m in linear_decay_modes(p)), key=lambda z: (z.real, z.imag))
    expected = sorted(
        [complex(p.gamma_a1), complex(p.gamma_a2),
         rates.t2_inv - 2j * p.epsilon, rates.t2_inv + 2j * p.epsilon],
        key=lambda z: (z.real, z.imag),
    )
    for got, want in zip(kappas, expected):
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_modes_are_eigenpairs_and_selection():
    p = ModelParams(J=2.0, **FIG2_RATES)
    m = build_decay_matrix(p)
    modes = linear_decay_modes(p)
    for mode in modes:
        v = np.concatenate([mode.s0, [mode.n0]])
        assert np.linalg.norm(m @ v - mode.kappa * v) <= 1e-9 * np.linalg.norm(v)
    slow = select_physical(modes)
    assert slow.kappa.real == pytest.approx(0.922567808569, rel=1e-9)
    assert slow.alpha == pytest.approx(0.122002127865, rel=1e-9)
    assert slow.n0 == pytest.approx(1.0)


def test_slow_mode_with_bias():
    # independent anchor with epsilon != 0
    ga1, ga2 = loss_rates_for(1.0, 0.5)
    p = ModelParams(J=4.0, epsilon=10.0, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
    slow = select_physical(linear_decay_modes(p))
    assert slow.kappa.real == pytest.approx(0.75684, abs=2e-5)
    assert slow.alpha == pytest.approx(0.18817, abs=2e-5)


def test_select_physical_requires_a_candidate():
    dud = DecayModeSolution(
        kappa=1.0 + 2.0j, s0=np.zeros(3), n0=0.0, alpha=float("nan"), physical=False
    )
    with pytest.raises(NoPhysicalModeError):
        select_physical([dud])


def test_alpha_closed_form_matches_modes():
    p = ModelParams(J=2.0, **FIG2_RATES)
    slow = select_physical(linear_decay_modes(p))
    assert alpha_closed_form(slow.kappa.real, p) == pytest.approx(slow.alpha, rel=1e-10)


def test_alpha_limits_bracket_slow_alpha():
    for jfac, pick in ((0.05, 0), (50.0, 1)):
        ga1, ga2 = loss_rates_for(1.0, 0.5)
        p = ModelParams(J=jfac, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
        alpha = select_physical(linear_decay_modes(p)).alpha
        lim = alpha_limits(p)[pick]
        assert abs(alpha / lim - 1.0) <= 0.05


def test_sr_condition_matches_scan_argmax():
    # resonance in J at fixed rates: closed-form estimate vs actual maximum
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    base = ModelParams(J=1.0, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)

    def neg_alpha(j):
        p = ModelParams(J=float(j), gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
        return -select_physical(linear_decay_modes(p)).alpha

    res = minimize_scalar(neg_alpha, bracket=(0.5, 1.3, 4.0))
    j_star = sr_condition_J(base)
    assert abs(res.x - j_star) / j_star <= 0.08
    with pytest.raises(NoResonanceError):
        sr_condition_J(ModelParams(J=1.0, gamma_p=5.0))
    t1_star = sr_condition_t1inv(base)
    expected = (-5.0 + math.sqrt(25.0 + 16 * 1.0)) / (2 * 0.5)
    assert t1_star == pytest.approx(expected, rel=1e-12)


def quartic_residual(p, n0, kappa):
    rates = derive_rates(p)
    a = kappa - rates.t1_inv
    b = kappa - rates.t2_inv
    f_big = rates.f_a * rates.t1_inv
    g = p.U * n0
    return (a * a - f_big * f_big) * (f_big * f_big * b * b + g * g * a * a) \
        + 4 * p.J**2 * f_big**2 * a * b


def test_nonlinear_solutions_are_quasi_steady():
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    p = ModelParams(J=2.0, U=0.1, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
    n0 = 100.0
    rates = derive_rates(p)
    scale = rates.t2_inv + 2 * p.J + p.U * n0
    sols = nonlinear_quasi_steady(p, n0)
    assert any(s.physical for s in sols)
    for sol in sols:
        assert abs(quartic_residual(p, n0, sol.kappa)) <= 1e-10 * scale**4
        if not sol.physical:
            continue
        # defining property: the full nonlinear rhs is -kappa times the state
        v = np.concatenate([sol.s0, [sol.n0]])
        rhs = bloch_rhs(v, p)
        assert np.linalg.norm(rhs + sol.kappa.real * v) <= 1e-8 * scale * n0


@pytest.mark.parametrize("un", [0.5, 2.0, 10.0, 25.0])
def test_solution_count_is_one_or_three(un):
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    n0 = 100.0
    for j in np.geomspace(0.05, 10.0, 40):
        p = ModelParams(J=float(j), U=un / n0, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
        count = sum(1 for s in nonlinear_quasi_steady(p, n0) if s.physical)
        assert count in (1, 3)


def test_pure_loss_pair_sits_on_the_sphere():
    # gamma_p = 0 above the self-trapping threshold: the split pair stays pure
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    p = ModelParams(J=2.0, U=0.5, gamma_a1=ga1, gamma_a2=ga2)
    n0 = 100.0  # Un = 50 > 2J
    sols = [s for s in nonlinear_quasi_steady(p, n0) if s.physical]
    on_sphere = [s for s in sols if abs(np.linalg.norm(s.s0) - s.n0) <= 1e-8 * s.n0]
    assert len(on_sphere) >= 2


def test_interaction_free_limit_recovers_linear_modes():
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    p_lin = ModelParams(J=2.0, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
    kappa_lin = select_physical(linear_decay_modes(p_lin)).kappa.real
    p_nl = ModelParams(J=2.0, U=1e-8, gamma_p=5.0, gamma_a1=ga1, gamma_a2=ga2)
    kappa_nl = select_physical(nonlinear_quasi_steady(p_nl, 100.0)).kappa.real
    assert abs(kappa_nl - kappa_lin) <= 1e-4 * kappa_lin


def test_critical_n_formula():
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    p = ModelParams(J=10.0, U=1.0, gamma_a1=ga1, gamma_a2=ga2)
    f_big = 0.5 * 2.0
    assert critical_n(p) == pytest.approx(math.sqrt(4 * 100.0 - f_big**2) / 1.0, rel=1e-12)
    with pytest.raises(ConfigError):
        critical_n(ModelParams(J=10.0))


def test_adiabatic_branch_loss_near_critical_n():
    ga1, ga2 = loss_rates_for(2.0, 0.5)
    p = ModelParams(J=10.0, U=1.0, gamma_a1=ga1, gamma_a2=ga2)
    series = adiabatic_decay(p, 100.0, 1.5)
    assert series.branch_lost
    n_crit = critical_n(p)
    # detection is quantized by the fixed step; dn per step is about 0.1 here
    assert abs(series.n_loss - n_crit) <= 5e-3 * n_crit
    assert np.all(np.diff(series.n) < 0)
    assert np.all(series.kappa[np.isfinite(series.kappa)] > 0)


def test_nonlinear_guards():
    with pytest.raises(ConfigError):
        nonlinear_quasi_steady(ModelParams(J=2.0, U=0.1, epsilon=1.0, gamma_a1=1.0, gamma_a2=3.0), 10.0)
    with pytest.raises(ConfigError):
        nonlinear_quasi_steady(ModelParams(J=0.0, U=0.1, gamma_a1=1.0, gamma_a2=3.0), 10.0)
    with pytest.raises(ConfigError):
        nonlinear_quasi_steady(ModelParams(J=2.0, U=0.1, gamma_a1=1.0, gamma_a2=1.0), 10.0)
    with pytest.raises(ConfigError):
        linear_decay_modes(ModelParams(J=2.0, U=0.5))
