"""Operator algebra, Hamiltonian, coherent states, and config plumbing."""

import math

import numpy as np
import pytest

from becsim.errors import ConfigError
from becsim.model import (
    FockSector,
    ModelParams,
    angular_momentum_ops,
    build_hamiltonian,
    coherent_state,
    config_hash,
    derive_rates,
    loss_rates_for,
    lowering_ops,
    params_from_dict,
)


def tensor_ground_energy(n: int, j: float, u: float, eps: float) -> float:
    # independent route: two single-mode Fock spaces, project on total number n
    dim = n + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    n1 = a1.conj().T @ a1
    n2 = a2.conj().T @ a2
    h = (
        -j * (a1.conj().T @ a2 + a2.conj().T @ a1)
        + eps * (n2 - n1)
        + u * (0.5 * (n2 - n1)) @ (0.5 * (n2 - n1))
    )
    total = np.diag(n1 + n2).real.round().astype(int)
    keep = total == n
    h_sector = h[np.ix_(keep, keep)]
    return float(np.linalg.eigvalsh(h_sector)[0])


@pytest.mark.parametrize("n", [1, 5, 40, 200])
def test_su2_algebra_and_casimir(n):
    lx, ly, lz = angular_momentum_ops(FockSector(n))
    scale = (n / 2.0) ** 2
    assert np.abs(lx @ ly - ly @ lx - 1j * lz).max() <= 1e-12 * max(scale, 1.0)
    assert np.abs(ly @ lz - lz @ ly - 1j * lx).max() <= 1e-12 * max(scale, 1.0)
    assert np.abs(lz @ lx - lx @ lz - 1j * ly).max() <= 1e-12 * max(scale, 1.0)
    casimir = lx @ lx + ly @ ly + lz @ lz
    expected = (n / 2.0) * (n / 2.0 + 1.0) * np.eye(n + 1)
    assert np.abs(casimir - expected).max() <= 1e-12 * max(scale, 1.0)


def test_lz_basis_convention():
    # basis index is n1, ascending; index 0 holds every particle in mode 2
    _, _, lz = angular_momentum_ops(FockSector(6))
    diag = np.diag(lz).real
    assert diag[0] == 3.0
    assert diag[-1] == -3.0
    assert np.allclose(diag, (6 - 2 * np.arange(7)) / 2.0)


def test_exchange_symmetry_at_zero_bias():
    sector = FockSector(9)
    params = ModelParams(J=3.0, U=0.7)
    h = build_hamiltonian(sector, params)
    perm = np.eye(10)[::-1]
    assert np.abs(perm @ h @ perm - h).max() <= 1e-12 * np.abs(h).max()
    biased = build_hamiltonian(sector, ModelParams(J=3.0, U=0.7, epsilon=1.0))
    assert np.abs(perm @ biased @ perm - biased).max() > 1.0


def test_ground_energy_against_tensor_route():
    n, j, u, eps = 20, 10.0, 1.0, 3.0
    oracle = tensor_ground_energy(n, j, u, eps)
    h = build_hamiltonian(FockSector(n), ModelParams(J=j, U=u, epsilon=eps))
    e0 = float(np.linalg.eigvalsh(h)[0])
    assert abs(e0 - oracle) <= 1e-9 * abs(oracle)
    assert abs(e0 - (-200.3981377239)) <= 1e-8


def test_lowering_ops_matrix_elements():
    a1, a2 = lowering_ops(FockSector(3))
    assert a1.shape == (3, 4)
    # a1 |n1=2, n2=1> = sqrt(2) |n1=1, n2=1>
    assert a1[1, 2] == pytest.approx(math.sqrt(2.0))
    assert a2[2, 2] == pytest.approx(1.0)  # a2 |1,2> = sqrt(2)... index i=n1
    assert a2[1, 1] == pytest.approx(math.sqrt(2.0))
    a1_zero, a2_zero = lowering_ops(FockSector(0))
    assert a1_zero.shape == (0, 1) and a2_zero.shape == (0, 1)


@pytest.mark.parametrize("n,theta,phi", [(1, 1.1, 2.2), (17, 0.6, -1.3), (40, 2.9, 4.0)])
def test_coherent_state_expectations(n, theta, phi):
    sector = FockSector(n)
    amp = coherent_state(sector, theta, phi)
    assert np.abs(np.vdot(amp, amp) - 1.0) <= 1e-12
    lx, ly, lz = angular_momentum_ops(sector)
    ex = np.vdot(amp, lx @ amp).real
    ey = np.vdot(amp, ly @ amp).real
    ez = np.vdot(amp, lz @ amp).real
    half = n / 2.0
    assert ex == pytest.approx(half * math.sin(theta) * math.cos(phi), abs=1e-12 * max(n, 1))
    assert ey == pytest.approx(half * math.sin(theta) * math.sin(phi), abs=1e-12 * max(n, 1))
    assert ez == pytest.approx(half * math.cos(theta), abs=1e-12 * max(n, 1))


def test_coherent_state_poles():
    amp = coherent_state(FockSector(5), 0.0, 0.3)
    assert np.argmax(np.abs(amp)) == 0  # all particles in mode 2
    amp_pi = coherent_state(FockSector(5), math.pi, 0.3)
    assert np.argmax(np.abs(amp_pi)) == 5
    with pytest.raises(ConfigError):
        coherent_state(FockSector(5), -0.1, 0.0)


def test_params_validation_collects_everything():
    with pytest.raises(ConfigError) as err:
        ModelParams(J=float("nan"), gamma_p=-1.0, gamma_a1="x")
    msgs = "; ".join(err.value.violations)
    assert "J" in msgs and "gamma_p" in msgs and "gamma_a1" in msgs
    with pytest.raises(ConfigError) as err:
        params_from_dict({"J": 1.0, "bogus": 2, "gamma_p": -3.0})
    msgs = "; ".join(err.value.violations)
    assert "params.bogus" in msgs and "params.gamma_p" in msgs


def test_derived_rates():
    p = ModelParams(J=1.0, gamma_p=5.0, gamma_a1=1.0, gamma_a2=3.0)
    rates = derive_rates(p)
    assert rates.t1_inv == pytest.approx(2.0)
    assert rates.t2_inv == pytest.approx(7.0)
    assert rates.f_a == pytest.approx(0.5)
    assert derive_rates(ModelParams(J=1.0)).f_a == 0.0
    ga1, ga2 = loss_rates_for(rates.t1_inv, rates.f_a)
    assert (ga1, ga2) == (pytest.approx(1.0), pytest.approx(3.0))


def test_config_hash_canonical():
    h1 = config_hash({"b": 1, "a": [1, 2]})
    h2 = config_hash({"a": [1, 2], "b": 1})
    assert h1 == h2
    assert config_hash({"a": [1, 2], "b": 2}) != h1
    assert len(h1) == 64


def test_sector_guards():
    assert FockSector(0).dim == 1
    with pytest.raises(ConfigError):
        FockSector(-1)
    with pytest.raises(ConfigError):
        FockSector(2.5)
