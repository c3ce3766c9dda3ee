"""Dense density-matrix simulation of noisy circuits for up to 10 qubits.

Every gate is compiled into one superoperator acting on its target qubits:
the exact composition of the surrounding relaxation, depolarizing and
readout-flip channels with the gate unitary.  The hot loop then just applies
local superoperators (compiled kernel or numpy fallback) and samples
mid-circuit measurements.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .channels import (
    KrausChannel,
    NoiseParams,
    amplitude_phase,
    depolarizing_1q,
    depolarizing_2q,
    measurement_flip,
    reset_to_zero_channel,
)
from .circuits import Circuit, gate_matrix
from .decoder import SyndromeEntry, SyndromeRecord
from .pauli import PauliString

TRACE_TOL = 1e-9
_EYE4 = np.eye(4, dtype=complex)

SNAPSHOT_MAGIC = b"RQECSNAP"


@dataclass
class DensityMatrix:
    """Dense state with basic physicality checks (slot 0 = most significant bit)."""

    n: int
    rho: np.ndarray

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        n = int(np.log2(len(psi)))
        if 2 ** n != len(psi):
            raise ValueError("statevector length must be a power of two")
        rho = np.outer(psi, psi.conj())
        return cls(n, np.ascontiguousarray(rho))

    def validate(self, tol: float = TRACE_TOL):
        tr = np.trace(self.rho)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr} deviates from 1")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        evals = np.linalg.eigvalsh(self.rho)
        if evals.min() < -tol:
            raise ValueError(f"negative eigenvalue {evals.min()}")

    def fidelity_to(self, psi: np.ndarray) -> float:
        return fidelity(self.rho, psi)


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """sqrt(<psi| rho |psi>) for a pure target, clamped into [0, 1]."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if rho.shape != (len(psi), len(psi)):
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs psi {len(psi)}")
    val = float(np.real(psi.conj() @ rho @ psi))
    return float(np.sqrt(min(max(val, 0.0), 1.0)))


def save_snapshot(path, rho: np.ndarray):
    """Binary export: 16-byte header (magic, qubit count), then the
    little-endian row-major complex array."""
    n = int(np.log2(rho.shape[0]))
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<Q", n))
        fh.write(np.ascontiguousarray(rho, dtype="<c16").tobytes())


def load_snapshot(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError("not a ringqec snapshot file")
        (n,) = struct.unpack("<Q", fh.read(8))
        dim = 2 ** n
        data = np.frombuffer(fh.read(), dtype="<c16")
    return data.reshape(dim, dim).astype(complex)


# ---------------------------------------------------------------------------
# Superoperator construction


def unitary_superop(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


def lift_superop_1q(s: np.ndarray, which: int) -> np.ndarray:
    """Embed a 1-qubit superoperator as a 2-qubit one acting on slot `which`."""
    t = s.reshape(2, 2, 2, 2)
    eye = np.eye(2)
    if which == 0:
        out = np.einsum("PQRS,AB,CD->PAQCRBSD", t, eye, eye)
    else:
        out = np.einsum("PQRS,AB,CD->APCQBRDS", t, eye, eye)
    return np.ascontiguousarray(out.reshape(16, 16))


@dataclass
class NoisyGate:
    """Ordered superoperator sequence for one noisy gate.

    `steps` lists (label, superop-on-targets) in application order; the labels
    mirror the channel composition so tests can assert the exact ordering.
    """

    kind: str
    targets: tuple[int, ...]
    steps: list[tuple[str, np.ndarray]]

    def superop(self) -> np.ndarray:
        dim = 4 if len(self.targets) == 1 else 16
        total = np.eye(dim, dtype=complex)
        for _, s in self.steps:
            total = s @ total
        return np.ascontiguousarray(total)


def noisy_gate(kind: str, targets: tuple[int, ...], params: NoiseParams,
               tau: float, angle: int | None = None,
               measurement_flip_on_gates: bool = True) -> NoisyGate:
    """Compose the channel sequence around one gate.

    Single-qubit (and idle) gates: AP(tau/2), D1, [unitary], AP(tau/2), [M].
    Two-qubit gates: AP(tau/2) on both, D1 on both, D2, unitary, AP(tau/2) on
    both, [M on both].  The readout-flip channel M is attached to every gate
    when `measurement_flip_on_gates` is set; otherwise it is applied only at
    measurements by the runner.
    """
    steps: list[tuple[str, np.ndarray]] = []
    if len(targets) == 1:
        t1, t2 = params.relaxation(targets[0])
        ap = amplitude_phase(tau / 2, t1, t2).superop()
        steps.append(("AP", ap))
        steps.append(("D1", depolarizing_1q(params.p1).superop()))
        if kind != "ID":
            steps.append(("U", unitary_superop(gate_matrix(kind, angle))))
        steps.append(("AP", ap))
        if measurement_flip_on_gates:
            steps.append(("M", measurement_flip(params.pm).superop()))
    else:
        a, b = targets
        ap_pair = _pair_superop(amplitude_phase(tau / 2, *params.relaxation(a)).superop(),
                                amplitude_phase(tau / 2, *params.relaxation(b)).superop())
        d1 = depolarizing_1q(params.p1).superop()
        steps.append(("AP", ap_pair))
        steps.append(("D1", _pair_superop(d1, d1)))
        steps.append(("D2", depolarizing_2q(params.p2).superop()))
        steps.append(("U", unitary_superop(gate_matrix(kind, angle))))
        steps.append(("AP", ap_pair))
        if measurement_flip_on_gates:
            m = measurement_flip(params.pm).superop()
            steps.append(("M", _pair_superop(m, m)))
    return NoisyGate(kind, targets, steps)


def _pair_superop(sa: np.ndarray, sb: np.ndarray) -> np.ndarray:
    return lift_superop_1q(sa, 0) @ lift_superop_1q(sb, 1)


# ---------------------------------------------------------------------------
# Circuit compilation and execution


@dataclass
class _CompiledSlice:
    ops: list[tuple]  # ("s1", S, slot) | ("s2", S, a, b) | ("mz", slot, record) | ("reset", slot)


class CompiledCircuit:
    """Circuit x noise -> per-slice kernel programs (superops cached)."""

    def __init__(self, circuit: Circuit, params: NoiseParams,
                 measurement_flip_on_gates: bool = True, backend=None):
        if circuit.slots > 10:
            raise ValueError(f"{circuit.slots} slots exceed the dense-simulation limit of 10")
        self.circuit = circuit
        self.params = params
        self.flag_m_on_gates = measurement_flip_on_gates
        self.kernel = backend if backend is not None else kernels.get_backend()
        self._cache: dict = {}
        self.slices = [self._compile_slice(sl) for sl in circuit.slices]
        self._mz_flip = (measurement_flip(params.pm).superop()
                         if not measurement_flip_on_gates and params.pm > 0 else None)

    def _superop(self, gate, tau) -> np.ndarray:
        per_qubit = bool(self.params.per_qubit)
        key = (gate.kind, gate.angle, tau,
               gate.targets if per_qubit else len(gate.targets))
        if key not in self._cache:
            ng = noisy_gate(gate.kind, gate.targets, self.params, tau,
                            angle=gate.angle,
                            measurement_flip_on_gates=self.flag_m_on_gates)
            self._cache[key] = ng.superop()
        return self._cache[key]

    def _compile_slice(self, sl) -> _CompiledSlice:
        classes = {g.duration_class for g in sl}
        if "two" in classes:
            tau = self.params.tau_factor * self.params.Tg
        else:
            tau = self.params.Tg
        ops = []
        for g in sl:
            if g.kind == "MZ":
                ops.append(("mz", g.targets[0], g.record))
            elif g.kind == "RESET":
                ops.append(("reset", g.targets[0]))
            elif len(g.targets) == 1:
                ops.append(("s1", self._superop(g, tau), g.targets[0]))
            else:
                ops.append(("s2", self._superop(g, tau), g.targets[0], g.targets[1]))
        return _CompiledSlice(ops)

    @property
    def reset_superop(self) -> np.ndarray:
        if "reset" not in self._cache:
            self._cache["reset"] = reset_to_zero_channel().superop()
        return self._cache["reset"]


def slice_durations(circuit: Circuit, params: NoiseParams) -> list[float]:
    """Wall-clock duration of each gate slice (events take no time)."""
    out = []
    for sl in circuit.slices:
        classes = {g.duration_class for g in sl}
        if "two" in classes:
            out.append(params.tau_factor * params.Tg)
        elif "single" in classes:
            out.append(params.Tg)
        else:
            out.append(0.0)
    return out


def embed_state(data_state: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Place a data-qubit statevector (qubit 1 = most significant bit) into
    the circuit's slot layout, with every ancilla in |0>."""
    pos = circuit.initial_positions
    slots = circuit.slots
    n_data = sum(1 for p in pos if p > 0)
    data_state = np.asarray(data_state, dtype=complex).ravel()
    if len(data_state) != 2 ** n_data:
        raise ValueError("data state does not match the circuit's data-qubit count")
    full = np.zeros(2 ** slots, dtype=complex)
    for idx in range(len(data_state)):
        amp = data_state[idx]
        if amp == 0:
            continue
        fidx = 0
        for s in range(slots):
            label = pos[s]
            bit = (idx >> (n_data - label)) & 1 if label > 0 else 0
            fidx = (fidx << 1) | bit
        full[fidx] = amp
    return full


def reduced_data_rho(rho: np.ndarray, positions: tuple[int, ...]) -> np.ndarray:
    """Trace out ancilla slots and reorder the data qubits into logical order
    (qubit 1 = most significant bit)."""
    slots = len(positions)
    data_labels = sorted(p for p in positions if p > 0)
    perm = [positions.index(q) for q in data_labels]
    perm += [s for s, p in enumerate(positions) if p <= 0]
    t = rho.reshape((2,) * (2 * slots))
    t = np.transpose(t, axes=perm + [slots + p for p in perm])
    nd = len(data_labels)
    na = slots - nd
    m = t.reshape(2 ** nd, 2 ** na, 2 ** nd, 2 ** na)
    return np.ascontiguousarray(np.einsum("iaja->ij", m))


def sample_measure(rho: np.ndarray, slot: int, n: int,
                   rng: np.random.Generator, backend=None) -> int:
    """Sample a Z measurement of `slot`, collapsing and renormalizing in place."""
    k = backend if backend is not None else kernels.get_backend()
    p0 = k.prob_zero(rho, slot, n)
    if p0 < -TRACE_TOL or p0 > 1.0 + TRACE_TOL:
        raise ValueError(f"measurement probability {p0} outside [0, 1]")
    p0 = min(max(p0, 0.0), 1.0)
    bit = 0 if rng.random() < p0 else 1
    tr = k.project_z(rho, slot, bit, n)
    if tr <= 0:
        raise ValueError("projected onto a zero-probability branch")
    rho *= 1.0 / tr
    return bit


@dataclass
class ShotResult:
    shot: int
    record: SyndromeRecord
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def final_snapshot(self) -> np.ndarray:
        return self.snapshots[max(self.snapshots)]


def iter_shots(circuit: Circuit, data_state: np.ndarray, params: NoiseParams,
               shots: int, seed: int, snapshot_cycles=None,
               measurement_flip_on_gates: bool = True,
               injections=(), backend=None, compiled: CompiledCircuit | None = None):
    """Generate per-shot syndrome records and data-qubit snapshots.

    `snapshot_cycles`: cycles after which to store the reduced data state
    (default: the last cycle only).  `injections` is a test hook: tuples
    (after_t, qubit, letter) apply a Pauli to a data qubit right after the
    measurement step `after_t` (0 = before the circuit).
    """
    if compiled is None:
        compiled = CompiledCircuit(circuit, params,
                                   measurement_flip_on_gates=measurement_flip_on_gates,
                                   backend=backend)
    k = compiled.kernel
    slots = circuit.slots
    dim = 2 ** slots
    psi_full = embed_state(data_state, circuit)
    rho0 = np.outer(psi_full, psi_full.conj())
    cycle_ends = circuit.cycle_end_slices()
    if snapshot_cycles is None:
        snapshot_cycles = [len(cycle_ends)]
    snap_at = {cycle_ends[c - 1]: c for c in snapshot_cycles}
    sched_by_record = {m.record: m for m in circuit.schedule}
    inject_at: dict[int, list] = {}
    for after_t, qubit, letter in injections:
        if after_t == 0:
            boundary = 0
        else:
            m = next(mm for mm in circuit.schedule if mm.t == after_t)
            boundary = m.slice_index + 1
        inject_at.setdefault(boundary, []).append((qubit, letter))
    pauli_sup = {c: np.ascontiguousarray(unitary_superop(PauliString(c).matrix()))
                 for c in "XYZ"}
    seeds = np.random.SeedSequence(seed).spawn(shots)
    scratch = np.empty_like(rho0)
    apply_1q = k.apply_superop_1q
    apply_2q = k.apply_superop_2q
    programs = compiled.slices
    for shot in range(shots):
        rng = np.random.default_rng(seeds[shot])
        rho = np.ascontiguousarray(rho0.copy())
        entries = []
        snapshots = {}
        for kslice, prog in enumerate(programs):
            for qubit, letter in inject_at.get(kslice, ()):
                slot = circuit.positions[kslice].index(qubit)
                apply_1q(rho, scratch, pauli_sup[letter], slot, slots)
                rho, scratch = scratch, rho
            for op in prog.ops:
                tag = op[0]
                if tag == "s1":
                    apply_1q(rho, scratch, op[1], op[2], slots)
                    rho, scratch = scratch, rho
                elif tag == "s2":
                    apply_2q(rho, scratch, op[1], op[2], op[3], slots)
                    rho, scratch = scratch, rho
                elif tag == "mz":
                    slot, record = op[1], op[2]
                    if compiled._mz_flip is not None:
                        apply_1q(rho, scratch, compiled._mz_flip, slot, slots)
                        rho, scratch = scratch, rho
                    bit = sample_measure(rho, slot, slots, rng, backend=k)
                    m = sched_by_record[record]
                    entries.append(SyndromeEntry(t=m.t, record=record,
                                                 generator=m.generator.letters,
                                                 stream=m.stream, cycle=m.cycle, bit=bit))
                else:  # reset
                    apply_1q(rho, scratch, compiled.reset_superop, op[1], slots)
                    rho, scratch = scratch, rho
            tr = np.einsum("ii->", rho).real
            if abs(tr - 1.0) > 1e-12:
                rho *= 1.0 / tr
            boundary = kslice + 1
            if boundary in snap_at:
                snapshots[snap_at[boundary]] = reduced_data_rho(
                    rho, circuit.positions[boundary])
        yield ShotResult(shot=shot, record=SyndromeRecord(tuple(entries), circuit.mode),
                         snapshots=snapshots)


def run_shots(circuit: Circuit, data_state: np.ndarray, params: NoiseParams,
              shots: int, seed: int, **kwargs) -> list[ShotResult]:
    """Materialized form of iter_shots (final-cycle snapshot by default)."""
    return list(iter_shots(circuit, data_state, params, shots, seed, **kwargs))


def single_qubit_memory(params: NoiseParams, durations, ancilla_slot: int | None = None,
                        measurement_flip_on_gates: bool = True) -> float:
    """Fidelity of |1> stored in one physical qubit while idling through the
    given slice durations (the same wall-clock time as a reference circuit)."""
    rho = np.zeros((2, 2), dtype=complex)
    rho[1, 1] = 1.0
    for tau in durations:
        if tau <= 0:
            continue
        ng = noisy_gate("ID", (0,), params, tau,
                        measurement_flip_on_gates=measurement_flip_on_gates)
        s = ng.superop()
        rho = (s @ rho.reshape(4)).reshape(2, 2)
    return fidelity(rho, np.array([0.0, 1.0]))
