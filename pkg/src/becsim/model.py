"""Model parameters, derived damping rates, and fixed-number sector operators.

Conventions used across the package:

* Two bosonic modes, basis ordered by the occupation of mode 1: within the
  sector of ``n_total = n`` particles the basis index ``i`` means the Dicke
  state ``|n1 = i, n2 = n - i>`` for ``i = 0 .. n``.
* ``Lz`` is diagonal with entries ``(n2 - n1)/2``; the raising operator
  ``L+ = a2^dag a1`` moves a particle from mode 1 to mode 2.
* ``hbar = 1``; every energy and rate is expressed in 1/s.
* Bloch vector in particle units: ``s_j = 2 <L_j>``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError

PARAM_KEYS = ("J", "U", "epsilon", "gamma_p", "gamma_a1", "gamma_a2")


@dataclass(frozen=True)
class ModelParams:
    """Static model parameters, all in units of 1/s.

    J: tunneling rate, U: interaction strength per particle pair,
    epsilon: on-site energy bias (mode 2 minus mode 1),
    gamma_p: phase-noise rate, gamma_a1/gamma_a2: per-mode loss rates.
    """

    J: float = 0.0
    U: float = 0.0
    epsilon: float = 0.0
    gamma_p: float = 0.0
    gamma_a1: float = 0.0
    gamma_a2: float = 0.0

    def __post_init__(self):
        violations = []
        for name in PARAM_KEYS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                violations.append(f"{name}: expected a real number, got {value!r}")
                continue
            if not math.isfinite(value):
                violations.append(f"{name}: must be finite, got {value!r}")
        for name in ("gamma_p", "gamma_a1", "gamma_a2"):
            value = getattr(self, name)
            if isinstance(value, (int, float)) and math.isfinite(value) and value < 0:
                violations.append(f"{name}: must be >= 0, got {value!r}")
        if violations:
            raise ConfigError(violations)
        for name in PARAM_KEYS:
            object.__setattr__(self, name, float(getattr(self, name)))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedRates:
    """Damping rates derived from the loss and dephasing channels.

    t1_inv = (gamma_a1 + gamma_a2)/2 damps the longitudinal components
    (s_z and n), t2_inv = gamma_p + t1_inv damps the transversal ones.
    f_a is the loss asymmetry, defined as 0 when both loss rates vanish.
    """

    t1_inv: float
    t2_inv: float
    f_a: float


def derive_rates(params: ModelParams) -> DerivedRates:
    total = params.gamma_a1 + params.gamma_a2
    t1_inv = 0.5 * total
    f_a = (params.gamma_a2 - params.gamma_a1) / total if total > 0 else 0.0
    return DerivedRates(t1_inv=t1_inv, t2_inv=params.gamma_p + t1_inv, f_a=f_a)


def loss_rates_for(t1_inv: float, f_a: float) -> tuple[float, float]:
    """Invert derive_rates: the (gamma_a1, gamma_a2) pair with given T1 rate and asymmetry."""
    if t1_inv < 0:
        raise ConfigError([f"t1_inv: must be >= 0, got {t1_inv!r}"])
    if abs(f_a) > 1:
        raise ConfigError([f"f_a: must lie in [-1, 1], got {f_a!r}"])
    return (1.0 - f_a) * t1_inv, (1.0 + f_a) * t1_inv


@dataclass(frozen=True)
class FockSector:
    """Fixed total particle number sector; dim = n_total + 1."""

    n_total: int

    def __post_init__(self):
        if not isinstance(self.n_total, (int, np.integer)) or isinstance(self.n_total, bool):
            raise ConfigError([f"n_total: expected an integer >= 0, got {self.n_total!r}"])
        if self.n_total < 0:
            raise ConfigError([f"n_total: must be >= 0, got {self.n_total!r}"])
        object.__setattr__(self, "n_total", int(self.n_total))

    @property
    def dim(self) -> int:
        return self.n_total + 1

    def n1_values(self) -> np.ndarray:
        return np.arange(self.dim, dtype=float)

    def n2_values(self) -> np.ndarray:
        return float(self.n_total) - self.n1_values()

    def lz_values(self) -> np.ndarray:
        """Diagonal of Lz, entries (n2 - n1)/2 on the documented basis order."""
        return 0.5 * (self.n2_values() - self.n1_values())


def angular_momentum_ops(sector: FockSector):
    """Dense Hermitian (Lx, Ly, Lz) for one sector.

    L+ = a2^dag a1 has matrix elements <i-1| L+ |i> = sqrt(i (n - i + 1)).
    """
    n = sector.n_total
    dim = sector.dim
    lz = np.diag(sector.lz_values())
    i = np.arange(1, dim)
    offd = np.sqrt(i * (n - i + 1.0))
    lp = np.zeros((dim, dim))
    lp[i - 1, i] = offd
    lx = 0.5 * (lp + lp.T)
    ly = np.zeros((dim, dim), dtype=complex)
    ly[i - 1, i] = -0.5j * offd
    ly[i, i - 1] = +0.5j * offd
    return lx, ly, lz


def build_hamiltonian(sector: FockSector, params: ModelParams) -> np.ndarray:
    """H = -2J Lx + 2 eps Lz + U Lz^2, dense and Hermitian."""
    lx, _, lz = angular_momentum_ops(sector)
    return -2.0 * params.J * lx + 2.0 * params.epsilon * lz + params.U * (lz @ lz)


def lowering_ops(sector: FockSector):
    """Mode annihilation operators mapping sector n to sector n-1.

    Returned matrices have shape (n, n+1): a1 takes |i> to sqrt(i) |i-1>,
    a2 takes |i> to sqrt(n-i) |i> in the lower sector's basis.
    """
    n = sector.n_total
    if n == 0:
        return np.zeros((0, 1)), np.zeros((0, 1))
    a1 = np.zeros((n, n + 1))
    a2 = np.zeros((n, n + 1))
    for i in range(1, n + 1):
        a1[i - 1, i] = math.sqrt(i)
    for i in range(0, n):
        a2[i, i] = math.sqrt(n - i)
    return a1, a2


def coherent_state(sector: FockSector, theta: float, phi: float) -> np.ndarray:
    """Spin coherent state with <L>/(n/2) = (sin t cos f, sin t sin f, cos t).

    theta = 0 puts every particle in mode 2 (the +z pole of Lz).
    """
    if not 0.0 <= theta <= math.pi:
        raise ConfigError([f"theta: must lie in [0, pi], got {theta!r}"])
    n = sector.n_total
    k = np.arange(n + 1)
    half = 0.5 * theta
    # sqrt of binomial weights; exact integer comb keeps this stable to n of a few hundred
    root_binom = np.array([math.sqrt(math.comb(n, int(kk))) for kk in k])
    amp = root_binom * (np.sin(half) * np.exp(1j * phi)) ** k * np.cos(half) ** (n - k)
    nrm = np.linalg.norm(amp)
    return amp / nrm if nrm > 0 else amp


def params_from_dict(data: dict) -> ModelParams:
    """Build ModelParams from a config mapping with exactly the documented keys."""
    if not isinstance(data, dict):
        raise ConfigError([f"params: expected a mapping, got {type(data).__name__}"])
    violations = [f"params.{key}: unknown key" for key in data if key not in PARAM_KEYS]
    kwargs = {key: data[key] for key in PARAM_KEYS if key in data}
    try:
        params = ModelParams(**kwargs)
    except ConfigError as err:
        violations.extend(f"params.{v}" for v in err.violations)
        params = None
    if violations:
        raise ConfigError(violations)
    return params


def config_hash(obj) -> str:
    """Deterministic sha256 over the canonical JSON form of a config object."""
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
