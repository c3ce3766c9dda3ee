"""Kraus channels of the noise model and their composition into gate noise.

Durations are seconds.  Channels are exact Kraus families; completeness
holds to machine precision by construction and is asserted in tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuits import I2, X_MATRIX

_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_SIGMA = [I2, X_MATRIX, _Y, _Z]


@dataclass(frozen=True)
class NoiseParams:
    """Hardware noise figures; the defaults are the bundled device values."""

    T1: float = 78.11e-6
    T2: float = 114.09e-6
    Tg: float = 35.55e-9
    p1: float = 0.000276
    p2: float = 0.001
    pm: float = 0.02
    tau_factor: float = 13.0
    per_qubit: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        for name in ("T1", "T2", "Tg"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("p1", "p2", "pm"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.T2 > 2 * self.T1:
            warnings.warn(f"T2={self.T2} exceeds 2*T1={2 * self.T1}: unphysical "
                          "dephasing regime", stacklevel=2)

    def relaxation(self, slot: int | None = None) -> tuple[float, float]:
        """(T1, T2) for a slot, honoring per-qubit overrides."""
        if slot is not None and slot in self.per_qubit:
            ov = self.per_qubit[slot]
            return ov.get("T1", self.T1), ov.get("T2", self.T2)
        return self.T1, self.T2

    def zero_noise(self) -> bool:
        return (self.p1 == 0 and self.p2 == 0 and self.pm == 0
                and math.isinf(self.T1) and math.isinf(self.T2))


def ideal_params() -> NoiseParams:
    """No decoherence, no depolarizing, no readout error."""
    return NoiseParams(T1=math.inf, T2=math.inf, Tg=35.55e-9, p1=0.0, p2=0.0, pm=0.0)


@dataclass(frozen=True)
class KrausChannel:
    """A channel as an explicit Kraus family on 1 or 2 qubits."""

    name: str
    ops: tuple[np.ndarray, ...]

    @property
    def nqubits(self) -> int:
        return 1 if self.ops[0].shape[0] == 2 else 2

    def completeness_defect(self) -> float:
        dim = self.ops[0].shape[0]
        acc = np.zeros((dim, dim), dtype=complex)
        for k in self.ops:
            acc += k.conj().T @ k
        return float(np.max(np.abs(acc - np.eye(dim))))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho)
        for k in self.ops:
            out += k @ rho @ k.conj().T
        return out

    def superop(self) -> np.ndarray:
        dim = self.ops[0].shape[0]
        s = np.zeros((dim * dim, dim * dim), dtype=complex)
        for k in self.ops:
            s += np.kron(k, k.conj())
        return s


def gamma_amplitude(Tg: float, T1: float) -> float:
    return 1.0 - math.exp(-Tg / T1)


def gamma_phase(Tg: float, T1: float, T2: float) -> float:
    # negative only in the unphysical T2 > 2*T1 regime; floor at zero so the
    # Kraus square roots stay real
    return max(1.0 - math.exp(-2.0 * Tg * (1.0 / T2 - 1.0 / (2.0 * T1))), 0.0)


def amplitude_damping(Tg: float, T1: float) -> KrausChannel:
    if T1 <= 0:
        raise ValueError("T1 must be positive")
    g = gamma_amplitude(Tg, T1)
    k1 = np.array([[1, 0], [0, math.sqrt(1 - g)]], dtype=complex)
    k2 = np.array([[0, math.sqrt(g)], [0, 0]], dtype=complex)
    return KrausChannel("AD", (k1, k2))


def phase_damping(Tg: float, T1: float, T2: float) -> KrausChannel:
    if T1 <= 0 or T2 <= 0:
        raise ValueError("T1 and T2 must be positive")
    g = gamma_phase(Tg, T1, T2)
    k1 = np.array([[1, 0], [0, math.sqrt(1 - g)]], dtype=complex)
    k2 = np.array([[0, 0], [0, math.sqrt(g)]], dtype=complex)
    return KrausChannel("PD", (k1, k2))


def amplitude_phase(Tg: float, T1: float, T2: float) -> KrausChannel:
    """Amplitude damping followed by phase damping over the same interval."""
    ad = amplitude_damping(Tg, T1)
    pd = phase_damping(Tg, T1, T2)
    ops = tuple(p @ a for p in pd.ops for a in ad.ops)
    return KrausChannel("AP", ops)


def depolarizing_1q(p1: float) -> KrausChannel:
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must lie in [0, 1], got {p1}")
    ops = [math.sqrt(1 - 0.75 * p1) * _SIGMA[0]]
    ops += [math.sqrt(p1 / 4) * s for s in _SIGMA[1:]]
    return KrausChannel("D1", tuple(ops))


def depolarizing_2q(p2: float) -> KrausChannel:
    if not 0.0 <= p2 <= 1.0:
        raise ValueError(f"p2 must lie in [0, 1], got {p2}")
    ops = []
    for i in range(4):
        for j in range(4):
            coeff = math.sqrt(1 - 15.0 / 16.0 * p2) if i == j == 0 else math.sqrt(p2 / 16)
            ops.append(coeff * np.kron(_SIGMA[i], _SIGMA[j]))
    return KrausChannel("D2", tuple(ops))


def measurement_flip(pm: float) -> KrausChannel:
    if not 0.0 <= pm <= 1.0:
        raise ValueError(f"pm must lie in [0, 1], got {pm}")
    k0 = math.sqrt(1 - pm) * I2
    k1 = math.sqrt(pm) * X_MATRIX
    return KrausChannel("M", (k0, k1))


def reset_to_zero_channel() -> KrausChannel:
    k0 = np.array([[1, 0], [0, 0]], dtype=complex)
    k1 = np.array([[0, 1], [0, 0]], dtype=complex)
    return KrausChannel("RESET", (k0, k1))
