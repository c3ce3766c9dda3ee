"""Synthesis of single-ancilla measurement circuits from classified codes.

A measurement "riffle" walks the ancilla across one generator's block of the
ring, coupling each data qubit into the ancilla with a CNS gate (CNOT plus
SWAP, so the ancilla advances one slot per coupling) and Hadamard-wrapping
the couplings at X entries.  Overlapping consecutive blocks replace the edge
coupling(s) with plain CNOTs so shared qubits stay in place.  Circuits are
time-sliced with explicit Id padding so the noise model has per-slot hooks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .pauli import (
    SHOR9,
    NeighborClassification,
    PauliString,
    StabilizerCode,
    block_extent,
    classify_neighboring_blocks,
    is_stabilizer_element,
)

# ---------------------------------------------------------------------------
# Gate matrices

I2 = np.eye(2, dtype=complex)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
CNOT_MATRIX = np.array([[1, 0, 0, 0],
                        [0, 1, 0, 0],
                        [0, 0, 0, 1],
                        [0, 0, 1, 0]], dtype=complex)
SWAP_MATRIX = np.array([[1, 0, 0, 0],
                        [0, 0, 1, 0],
                        [0, 1, 0, 0],
                        [0, 0, 0, 1]], dtype=complex)
ISWAP_MATRIX = np.array([[1, 0, 0, 0],
                         [0, 0, 1j, 0],
                         [0, 1j, 0, 0],
                         [0, 0, 0, 1]], dtype=complex)


def rx_matrix(k: int) -> np.ndarray:
    """Rotation about X by k*pi/2."""
    th = k * np.pi / 2
    c, s = np.cos(th / 2), np.sin(th / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def rz_matrix(k: int) -> np.ndarray:
    th = k * np.pi / 2
    return np.array([[np.exp(-1j * th / 2), 0], [0, np.exp(1j * th / 2)]])


def cns_unitary() -> np.ndarray:
    """The CNS two-qubit gate: CNOT (control = first slot) then SWAP."""
    return SWAP_MATRIX @ CNOT_MATRIX


def iswap_unitary() -> np.ndarray:
    return ISWAP_MATRIX.copy()


def cns_decomposition() -> list[tuple[str, tuple[int, ...], int | None]]:
    """CNS as one iSWAP plus +-pi/2 rotations, in application order.

    Each entry is (kind, targets, quarter-turns); the product equals
    cns_unitary() up to a global phase.
    """
    return [
        ("RZ", (1,), 1),
        ("RX", (1,), 1),
        ("RZ", (0,), -1),
        ("ISWAP", (0, 1), None),
        ("RZ", (0,), 1),
        ("RX", (0,), 1),
        ("RZ", (0,), 1),
    ]


def decomposition_matrix(ops, n_slots: int = 2) -> np.ndarray:
    """Multiply out a list of (kind, targets, angle) ops on n_slots qubits."""
    dim = 2 ** n_slots
    total = np.eye(dim, dtype=complex)
    for kind, targets, angle in ops:
        m = gate_matrix(kind, angle)
        total = _embed(m, targets, n_slots) @ total
    return total


def gate_matrix(kind: str, angle: int | None) -> np.ndarray:
    if kind == "H":
        return H_MATRIX
    if kind == "RX":
        return rx_matrix(angle)
    if kind == "RZ":
        return rz_matrix(angle)
    if kind == "ID":
        return I2
    if kind == "CNOT":
        return CNOT_MATRIX
    if kind == "SWAP":
        return SWAP_MATRIX
    if kind == "CNS":
        return cns_unitary()
    if kind == "ISWAP":
        return ISWAP_MATRIX
    raise ValueError(f"no unitary for gate kind {kind}")


def _embed(m: np.ndarray, targets: tuple[int, ...], n_slots: int) -> np.ndarray:
    """Embed a 1- or 2-qubit unitary acting on `targets` (slot 0 = most
    significant bit) into the full 2^n space."""
    dim = 2 ** n_slots
    out = np.zeros((dim, dim), dtype=complex)
    rest = [s for s in range(n_slots) if s not in targets]
    k = len(targets)
    for col in range(dim):
        bits = [(col >> (n_slots - 1 - s)) & 1 for s in range(n_slots)]
        sub_col = 0
        for t in targets:
            sub_col = (sub_col << 1) | bits[t]
        for sub_row in range(2 ** k):
            amp = m[sub_row, sub_col]
            if amp == 0:
                continue
            new_bits = list(bits)
            for idx, t in enumerate(targets):
                new_bits[t] = (sub_row >> (k - 1 - idx)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            out[row, col] += amp
    return out


@dataclass(frozen=True)
class MeasurementTemplate:
    """Ancilla-coupled template measuring a single X or Z letter."""

    letter: str
    wrap_data_in_h: bool
    outcome_of_bit = staticmethod(lambda bit: +1 if bit == 0 else -1)


def measurement_primitive(letter: str) -> MeasurementTemplate:
    """Coupling template for one generator letter: the data qubit is coupled
    into the ancilla parity (CNOT/CNS, control = data), Hadamard-conjugated
    when the letter is X.  Ancilla bit 0 encodes eigenvalue +1."""
    if letter not in ("X", "Z"):
        raise ValueError("only X and Z letters are measured directly")
    return MeasurementTemplate(letter, wrap_data_in_h=(letter == "X"))


# ---------------------------------------------------------------------------
# Gates, topology, circuits

TWO_QUBIT_KINDS = {"CNOT", "SWAP", "CNS", "ISWAP"}
MOVING_KINDS = {"SWAP", "CNS", "ISWAP"}
EVENT_KINDS = {"MZ", "RESET"}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: int | None = None
    record: int | None = None

    @property
    def duration_class(self) -> str:
        if self.kind in TWO_QUBIT_KINDS:
            return "two"
        if self.kind in EVENT_KINDS:
            return "event"
        return "single"

    def token(self) -> str:
        args = ",".join(str(t) for t in self.targets)
        if self.kind == "MZ":
            return f"MZ({args})->r{self.record}"
        if self.kind in ("RX", "RZ"):
            return f"{self.kind}({args},{self.angle})"
        return f"{self.kind}({args})"


_GATE_RE = re.compile(r"^([A-Z]+)\(([-0-9,]+)\)(?:->r(\d+))?$")


def parse_gate(token: str) -> Gate:
    m = _GATE_RE.match(token)
    if not m:
        raise ValueError(f"bad gate token {token!r}")
    kind, args, rec = m.group(1), [int(x) for x in m.group(2).split(",")], m.group(3)
    angle = None
    if kind in ("RX", "RZ"):
        *targets, angle = args
    else:
        targets = args
    return Gate(kind, tuple(targets), angle=angle,
                record=int(rec) if rec is not None else None)


@dataclass(frozen=True)
class Topology:
    kind: str                      # ring | line | custom
    slots: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def adjacent(self, a: int, b: int) -> bool:
        if a == b:
            return False
        if self.kind == "ring":
            return (a - b) % self.slots in (1, self.slots - 1)
        if self.kind == "line":
            return abs(a - b) == 1
        return (min(a, b), max(a, b)) in self.edges


@dataclass(frozen=True)
class MeasurementInfo:
    record: int
    t: int
    generator: PauliString
    cycle: int
    stream: int = 0
    slice_index: int = -1


@dataclass
class Circuit:
    """Time-sliced gate schedule with position tracking.

    `initial_positions[slot]` is the data-qubit label (1-based) or an ancilla
    label (0, -1, ...).  `positions[k]` gives the map before slice k; the last
    entry is the final map.
    """

    name: str
    topology: Topology
    initial_positions: tuple[int, ...]
    slices: list[list[Gate]]
    schedule: list[MeasurementInfo]
    positions: list[tuple[int, ...]]
    mode: str = "QND"
    meta: dict = field(default_factory=dict)

    @property
    def slots(self) -> int:
        return self.topology.slots

    @property
    def final_positions(self) -> tuple[int, ...]:
        return self.positions[-1]

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for sl in self.slices:
            for g in sl:
                counts[g.kind] = counts.get(g.kind, 0) + 1
        return counts

    def cycle_end_slices(self) -> list[int]:
        """Slice index just after the last measurement of each cycle."""
        ends: dict[int, int] = {}
        for m in self.schedule:
            ends[m.cycle] = max(ends.get(m.cycle, 0), m.slice_index + 1)
        return [ends[c] for c in sorted(ends)]

    def validate(self):
        """Structural invariants: slot-disjoint slices, adjacency, positions
        bijective, measurements target the slot holding an ancilla."""
        for k, sl in enumerate(self.slices):
            seen: set[int] = set()
            for g in sl:
                for t in g.targets:
                    if t in seen:
                        raise ValueError(f"slice {k}: slot {t} used twice")
                    seen.add(t)
                if len(g.targets) == 2 and not self.topology.adjacent(*g.targets):
                    raise ValueError(f"slice {k}: {g.token()} not on adjacent slots")
            pm = self.positions[k]
            if sorted(pm) != sorted(self.initial_positions):
                raise ValueError(f"slice {k}: position map is not a permutation")
            for g in sl:
                if g.kind == "MZ" and pm[g.targets[0]] > 0:
                    raise ValueError(f"slice {k}: MZ targets a data qubit")

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.name == other.name and self.topology == other.topology
                and self.initial_positions == other.initial_positions
                and self.slices == other.slices and self.schedule == other.schedule
                and self.mode == other.mode)


class CircuitBuilder:
    """Greedy left-to-right slice packer with position tracking.

    Gates that permute slots (CNS/SWAP/iSWAP) seal their slice so later
    emissions always see consistent positions; slices stay homogeneous in
    duration class so idle padding is well-defined.
    """

    def __init__(self, name: str, topology: Topology, initial_positions: tuple[int, ...],
                 mode: str = "QND"):
        self.name = name
        self.topology = topology
        self.initial_positions = tuple(initial_positions)
        self.mode = mode
        self.pos: list[int] = list(initial_positions)
        self.slices: list[list[Gate]] = []
        self.positions: list[tuple[int, ...]] = [tuple(initial_positions)]
        self.schedule: list[MeasurementInfo] = []
        self._current: list[Gate] = []
        self._current_class: str | None = None
        self._next_record = 0
        self._next_t = 1
        self.meta: dict = {}

    # -- position helpers

    def slot_of(self, label: int) -> int:
        return self.pos.index(label)

    def label_at(self, slot: int) -> int:
        return self.pos[slot]

    def ancilla_slot(self, ancilla_label: int = 0) -> int:
        return self.slot_of(ancilla_label)

    # -- slice management

    def _seal(self):
        if not self._current:
            return
        if self._current_class in ("single", "two"):
            used = {t for g in self._current for t in g.targets}
            for s in range(self.topology.slots):
                if s not in used:
                    self._current.append(Gate("ID", (s,)))
        self.slices.append(self._current)
        self.positions.append(tuple(self.pos))
        self._current = []
        self._current_class = None

    def emit(self, kind: str, targets: tuple[int, ...], angle: int | None = None,
             record: int | None = None) -> Gate:
        g = Gate(kind, targets, angle=angle, record=record)
        cls = g.duration_class
        conflict = any(t in {x for cg in self._current for x in cg.targets} for t in targets)
        if self._current and (conflict or cls != self._current_class):
            self._seal()
        if len(targets) == 2 and not self.topology.adjacent(*targets):
            raise ValueError(f"{kind} on non-adjacent slots {targets}")
        self._current.append(g)
        self._current_class = cls
        if kind in MOVING_KINDS:
            a, b = targets
            self.pos[a], self.pos[b] = self.pos[b], self.pos[a]
            self._seal()
        return g

    def measure(self, slot: int, generator: PauliString, cycle: int,
                stream: int = 0) -> int:
        rec = self._next_record
        self._next_record += 1
        self.emit("MZ", (slot,), record=rec)
        self.schedule.append(MeasurementInfo(
            record=rec, t=self._next_t, generator=generator, cycle=cycle,
            stream=stream, slice_index=len(self.slices)))
        self._next_t += 1
        if self.mode == "reinit":
            self.emit("RESET", (slot,))
        return rec

    def finish(self) -> Circuit:
        self._seal()
        # fix up slice indices (schedule entries recorded the index of the
        # slice that was open when the MZ was emitted)
        fixed = []
        mz_slice: dict[int, int] = {}
        for k, sl in enumerate(self.slices):
            for g in sl:
                if g.kind == "MZ":
                    mz_slice[g.record] = k
        for m in self.schedule:
            fixed.append(replace(m, slice_index=mz_slice[m.record]))
        c = Circuit(self.name, self.topology, self.initial_positions, self.slices,
                    fixed, self.positions, mode=self.mode, meta=self.meta)
        c.validate()
        return c


# ---------------------------------------------------------------------------
# Riffle walks


def _circular_walk(L: int, R: int, n: int) -> list[int]:
    out = [L]
    p = L
    while p != R:
        p = p % n + 1
        out.append(p)
    return out


def _emit_walk(b: CircuitBuilder, slot_walk: list[tuple[int, str, bool]],
               ancilla_label: int = 0):
    """Couple a sequence of (slot, letter, use_cnot) into the ancilla."""
    for slot, letter, use_cnot in slot_walk:
        sa = b.ancilla_slot(ancilla_label)
        if not b.topology.adjacent(slot, sa):
            raise ValueError(f"ancilla at slot {sa} not adjacent to coupling slot {slot}")
        if letter == "X":
            b.emit("H", (slot,))
        b.emit("CNOT" if use_cnot else "CNS", (slot, sa))
        if letter == "X":
            # after a CNS the data qubit sits where the ancilla was
            b.emit("H", (slot if use_cnot else sa,))


def _slot_walk_for(b: CircuitBuilder, gen: PauliString, qubit_walk: list[int],
                   cnot_first: bool, cnot_last: bool) -> list[tuple[int, str, bool]]:
    """Resolve a logical-qubit walk to slots at the current position map."""
    last = len(qubit_walk) - 1
    walk = []
    for j, q in enumerate(qubit_walk):
        use_cnot = (j == 0 and cnot_first) or (j == last and cnot_last)
        walk.append((b.slot_of(q), gen.letter(q), use_cnot))
    return walk


def _measured_string(b: CircuitBuilder, slot_walk: list[tuple[int, str, bool]],
                     n: int) -> PauliString:
    """Logical operator measured by a slot walk at the current positions."""
    letters = ["I"] * n
    for slot, letter, _ in slot_walk:
        q = b.label_at(slot)
        letters[q - 1] = letter
    return PauliString("".join(letters))


@dataclass(frozen=True)
class RiffleSpec:
    """One ancilla-mediated generator measurement.

    direction `forward` walks the block L..R (the ancilla enters just before
    L); `reverse` walks R..L.  The cnot flags replace the first/last coupling
    with a plain CNOT (no ancilla movement), which is how overlapping
    neighboring blocks hand the ancilla over."""

    generator: PauliString
    direction: str = "forward"
    cnot_first: bool = False
    cnot_last: bool = False

    @classmethod
    def from_variant(cls, generator: PauliString, variant: str) -> "RiffleSpec":
        table = {
            "plain": dict(direction="forward"),
            "reverse": dict(direction="reverse"),
            "cnot-first": dict(direction="forward", cnot_first=True),
            "cnot-last": dict(direction="forward", cnot_last=True),
            "cnot-both": dict(direction="forward", cnot_first=True, cnot_last=True),
        }
        if variant not in table:
            raise ValueError(f"unknown riffle variant {variant!r}")
        return cls(generator, **table[variant])


def _riffle_layout(gen: PauliString, direction: str) -> tuple[int, ...]:
    """Standalone fragment layout: ancilla at slot 0, data arranged so the
    walk entry sits next to the ancilla."""
    ext = block_extent(gen)
    if ext is None:
        raise ValueError(f"{gen.letters} is not one circular block")
    n = gen.n
    labels = [0] * (n + 1)
    if direction == "forward":
        for j in range(1, n + 1):
            labels[j] = (ext.L - 1 + j - 1) % n + 1
    else:
        for j in range(1, n + 1):
            labels[j] = (ext.R + j - 1) % n + 1
    return tuple(labels)


def build_riffle(spec: RiffleSpec) -> Circuit:
    """Standalone circuit fragment measuring one generator."""
    gen = spec.generator
    ext = block_extent(gen)
    if ext is None:
        raise ValueError(f"{gen.letters} is not one circular block")
    n = gen.n
    layout = _riffle_layout(gen, spec.direction)
    topo = Topology("ring", n + 1)
    b = CircuitBuilder(f"riffle-{gen.letters}-{spec.direction}", topo, layout)
    qubit_walk = _circular_walk(ext.L, ext.R, n)
    if spec.direction == "reverse":
        qubit_walk = qubit_walk[::-1]
    walk = _slot_walk_for(b, gen, qubit_walk, spec.cnot_first, spec.cnot_last)
    _emit_walk(b, walk)
    b.measure(b.ancilla_slot(), gen, cycle=1)
    b.meta.update(scheme="riffle", direction=spec.direction)
    return b.finish()


# ---------------------------------------------------------------------------
# Full measurement cycles


def _series_flags(conds: tuple[int, ...], count: int) -> list[tuple[bool, bool]]:
    """(cnot_first, cnot_last) per riffle from the pairwise conditions."""
    flags = [[False, False] for _ in range(count)]
    for i, c in enumerate(conds):
        if c == 2:
            flags[i][1] = True
        elif c == 3:
            flags[i][1] = True
            flags[i + 1][0] = True
    return [tuple(f) for f in flags]


def _ring_layout(n: int, first_L: int) -> tuple[int, ...]:
    """Ancilla at slot 0 with q_{first_L} at slot 1, circular data order."""
    labels = [0] * (n + 1)
    for j in range(1, n + 1):
        labels[j] = (first_L - 1 + j - 1) % n + 1
    return tuple(labels)


def synthesize_cycle(code: StabilizerCode,
                     classification: NeighborClassification | None = None,
                     scheme: str = "forward-backward",
                     cycles: int = 1,
                     mode: str = "QND") -> Circuit:
    """Compile `cycles` measurement cycles for a classified code.

    forward-backward: each cycle measures the generators in order and then in
    reverse order; the net position map is the identity.  half-cycle: one
    series per cycle, repeating the same physical gates, so the measured set
    is the position-permuted generating set (recorded in the schedule).
    reduced-connectivity: the 3-qubit chain variant that never uses one ring
    link, at the price of CNOT couplings.
    """
    if scheme == "reduced-connectivity":
        return _synthesize_reduced_3q(code, cycles=cycles, mode=mode)
    if classification is None:
        classification = classify_neighboring_blocks(code)
    if not classification.ok:
        raise ValueError(f"code not classifiable: {classification.rejected}")
    gens = list(classification.ordered_generators(code))
    exts = [classification.extents[i] for i in classification.order]
    conds = classification.conditions
    n = code.n
    k = len(gens)
    topo = Topology("ring", n + 1)
    layout = _ring_layout(n, exts[0].L)
    name = f"{code.name or 'code'}-{scheme}"
    b = CircuitBuilder(name, topo, layout, mode=mode)
    b.meta.update(scheme=scheme, cycles=cycles, code=code.name,
                  generator_order=list(classification.order),
                  conditions=list(conds))

    fwd_flags = _series_flags(conds, k)
    bwd_flags_rev = _series_flags(tuple(reversed(conds)), k)
    fwd_qwalks = [_circular_walk(e.L, e.R, n) for e in exts]

    if scheme == "forward-backward":
        for cycle in range(1, cycles + 1):
            for i in range(k):
                walk = _slot_walk_for(b, gens[i], fwd_qwalks[i], *fwd_flags[i])
                _emit_walk(b, walk)
                b.measure(b.ancilla_slot(), gens[i], cycle)
            for j in range(k):
                i = k - 1 - j
                walk = _slot_walk_for(b, gens[i], fwd_qwalks[i][::-1], *bwd_flags_rev[j])
                _emit_walk(b, walk)
                b.measure(b.ancilla_slot(), gens[i], cycle)
        circ = b.finish()
        if circ.final_positions != circ.initial_positions and cycles >= 1:
            raise AssertionError("forward-backward cycle did not restore positions")
        return circ

    if scheme == "half-cycle":
        # record the physical slot walks of the first series, then replay them
        slot_walks = []
        for i in range(k):
            walk = _slot_walk_for(b, gens[i], fwd_qwalks[i], *fwd_flags[i])
            slot_walks.append(walk)
            _emit_walk(b, walk)
            b.measure(b.ancilla_slot(), gens[i], cycle=1)
        if b.ancilla_slot() != 0:
            raise ValueError(f"half-cycle unsupported for {code.name or 'this code'}: "
                             "the ancilla does not return home after one series")
        perm = tuple(b.pos)
        for st in slot_walks:
            if not is_stabilizer_element(_measured_string(b, st, n), code):
                raise ValueError("half-cycle unsupported: permuted measurements leave "
                                 "the stabilizer group")
        for cycle in range(2, cycles + 1):
            for st in slot_walks:
                gen_now = _measured_string(b, st, n)
                if not is_stabilizer_element(gen_now, code):
                    raise ValueError("half-cycle unsupported: permuted measurements "
                                     "leave the stabilizer group")
                _emit_walk(b, st)
                b.measure(b.ancilla_slot(), gen_now, cycle)
        b.meta["series_permutation"] = list(perm)
        return b.finish()

    raise ValueError(f"unknown scheme {scheme!r}")


def _synthesize_reduced_3q(code: StabilizerCode, cycles: int, mode: str) -> Circuit:
    """Appendix-style 3-qubit variant on a line: the chain generating set
    {ZZI, IZZ} is measured with cnot-edged riffles so the wrap link is never
    touched."""
    if code.n != 3 or code.k != 2:
        raise ValueError("reduced-connectivity is defined for the 3-qubit code shape")
    chain = StabilizerCode(3, (PauliString("ZZI"), PauliString("IZZ")),
                           name=code.name or "rep3")
    for g in chain.generators:
        if not is_stabilizer_element(g, code):
            raise ValueError("reduced-connectivity requires the 3-qubit repetition stabilizer")
    cls = classify_neighboring_blocks(chain)
    topo = Topology("line", 4)
    b = CircuitBuilder(f"{code.name or 'rep3'}-reduced-connectivity", topo,
                       (0, 1, 2, 3), mode=mode)
    b.meta.update(scheme="reduced-connectivity", cycles=cycles, code=code.name,
                  generator_order=list(cls.order), conditions=list(cls.conditions))
    gens = list(cls.ordered_generators(chain))
    exts = [cls.extents[i] for i in cls.order]
    k = len(gens)
    fwd_flags = _series_flags(cls.conditions, k)
    bwd_flags_rev = _series_flags(tuple(reversed(cls.conditions)), k)
    qwalks = [_circular_walk(e.L, e.R, 3) for e in exts]
    for cycle in range(1, cycles + 1):
        for i in range(k):
            walk = _slot_walk_for(b, gens[i], qwalks[i], *fwd_flags[i])
            _emit_walk(b, walk)
            b.measure(b.ancilla_slot(), gens[i], cycle)
        for j in range(k):
            i = k - 1 - j
            walk = _slot_walk_for(b, gens[i], qwalks[i][::-1], *bwd_flags_rev[j])
            _emit_walk(b, walk)
            b.measure(b.ancilla_slot(), gens[i], cycle)
    return b.finish()


def synthesize_nine_qubit(cycles: int = 1, mode: str = "QND") -> Circuit:
    """Ten-slot circuit measuring all eight nine-qubit-code generators per
    series (two series per cycle)."""
    return synthesize_cycle(SHOR9, scheme="forward-backward", cycles=cycles, mode=mode)


def synthesize_benchmark_two_ancilla(cycles: int = 1, mode: str = "QND") -> Circuit:
    """Conventional comparison scheme: 3 data qubits interleaved with two
    ancillas on a line, measuring {ZZI, IZZ} simultaneously; two series per
    cycle to match one forward-backward cycle (four measurements)."""
    topo = Topology("line", 5)
    # slots: q1 a1 q2 a2 q3 ; ancilla labels 0 and -1
    layout = (1, 0, 2, -1, 3)
    gen_a1 = PauliString("ZZI")
    gen_a2 = PauliString("IZZ")
    b = CircuitBuilder("benchmark-2anc", topo, layout, mode=mode)
    b.meta.update(scheme="benchmark-2anc", cycles=cycles, code="rep3")
    for cycle in range(1, cycles + 1):
        for _series in range(2):
            b.emit("CNOT", (0, 1))
            b.emit("CNOT", (4, 3))
            b.emit("CNOT", (2, 1))
            b.emit("CNOT", (2, 3))
            b.measure(1, gen_a1, cycle, stream=0)
            b.measure(3, gen_a2, cycle, stream=1)
    return b.finish()


# ---------------------------------------------------------------------------
# Serialization (bit-exact round trip)


def serialize_circuit(c: Circuit) -> str:
    lines = ["ringqec-circuit v1", f"name {c.name}",
             f"topology {c.topology.kind} {c.topology.slots}"]
    if c.topology.kind == "custom":
        for a, b in sorted(c.topology.edges):
            lines.append(f"edge {a} {b}")
    lines.append("positions " + ",".join(str(x) for x in c.initial_positions))
    lines.append(f"mode {c.mode}")
    for m in c.schedule:
        lines.append(f"schedule r={m.record} t={m.t} cycle={m.cycle} "
                     f"stream={m.stream} gen={m.generator}")
    for sl in c.slices:
        lines.append("slice " + " ".join(g.token() for g in sl))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    lines = [ln.rstrip() for ln in text.strip().splitlines()]
    if not lines or lines[0] != "ringqec-circuit v1":
        raise ValueError("not a ringqec circuit (bad magic line)")
    name = ""
    topo_kind, slots = "ring", 0
    edges: set[tuple[int, int]] = set()
    positions: tuple[int, ...] = ()
    mode = "QND"
    schedule: list[MeasurementInfo] = []
    slices: list[list[Gate]] = []
    for ln in lines[1:]:
        head, _, rest = ln.partition(" ")
        if head == "name":
            name = rest
        elif head == "topology":
            topo_kind, slots_s = rest.split()
            slots = int(slots_s)
        elif head == "edge":
            a, b = (int(x) for x in rest.split())
            edges.add((min(a, b), max(a, b)))
        elif head == "positions":
            positions = tuple(int(x) for x in rest.split(","))
        elif head == "mode":
            mode = rest
        elif head == "schedule":
            kv = dict(item.split("=", 1) for item in rest.split())
            schedule.append(MeasurementInfo(
                record=int(kv["r"]), t=int(kv["t"]), cycle=int(kv["cycle"]),
                stream=int(kv["stream"]),
                generator=PauliString.from_text(kv["gen"])))
        elif head == "slice":
            slices.append([parse_gate(tok) for tok in rest.split()])
        else:
            raise ValueError(f"unknown line {ln!r}")
    topo = Topology(topo_kind, slots, frozenset(edges))
    # replay position updates and fill schedule slice indices
    pos = list(positions)
    pos_list = [tuple(pos)]
    mz_slice: dict[int, int] = {}
    for k, sl in enumerate(slices):
        for g in sl:
            if g.kind in MOVING_KINDS:
                a, b = g.targets
                pos[a], pos[b] = pos[b], pos[a]
            elif g.kind == "MZ":
                mz_slice[g.record] = k
        pos_list.append(tuple(pos))
    schedule = [replace(m, slice_index=mz_slice[m.record]) for m in schedule]
    c = Circuit(name, topo, positions, slices, schedule, pos_list, mode=mode)
    c.validate()
    return c
