"""Stabilizer-tableau simulation used as the noiseless oracle for circuits.

Rows follow the destabilizer/stabilizer layout with binary x/z matrices and
a sign bit per row; Y is stored as x=z=1.  Scales comfortably to the
24-qubit surface layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import (PauliString, StabilizerCode, complete_stabilizer, gf2_rank,
                    gf2_solve_system)


class Tableau:
    """Aaronson-Gottesman tableau over `n` qubits, initialized to |0...0>."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1          # destabilizer X_i
            self.z[n + i, i] = 1      # stabilizer Z_i

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # -- elementary Clifford updates ---------------------------------------

    def h(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q: int):
        self.s(q)
        self.s(q)
        self.s(q)

    def cnot(self, a: int, b: int):
        self.r ^= self.x[:, a] & self.z[:, b] & (self.x[:, b] ^ self.z[:, a] ^ 1)
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    def cz(self, a: int, b: int):
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def swap(self, a: int, b: int):
        for m in (self.x, self.z):
            m[:, [a, b]] = m[:, [b, a]]

    def cns(self, a: int, b: int):
        """CNOT (control a) followed by SWAP."""
        self.cnot(a, b)
        self.swap(a, b)

    def iswap(self, a: int, b: int):
        self.s(a)
        self.s(b)
        self.cz(a, b)
        self.swap(a, b)

    def pauli_x(self, q: int):
        self.r ^= self.z[:, q]

    def pauli_z(self, q: int):
        self.r ^= self.x[:, q]

    def pauli_y(self, q: int):
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def rz(self, q: int, k: int):
        """Rotation by k*pi/2 about Z (Clifford for integer k)."""
        for _ in range(k % 4):
            self.s(q)

    def rx(self, q: int, k: int):
        self.h(q)
        self.rz(q, -k)
        self.h(q)

    def apply_pauli(self, p: PauliString, slots: list[int]):
        for c, s in zip(p.letters, slots):
            if c == "X":
                self.pauli_x(s)
            elif c == "Y":
                self.pauli_y(s)
            elif c == "Z":
                self.pauli_z(s)

    # -- row arithmetic ------------------------------------------------------

    @staticmethod
    def _g(x1, z1, x2, z2):
        """i-exponent accumulated when multiplying sigma(x1,z1)*sigma(x2,z2)."""
        return np.where(
            (x1 == 0) & (z1 == 0), 0,
            np.where(
                (x1 == 1) & (z1 == 1), z2.astype(np.int64) - x2,
                np.where((x1 == 1) & (z1 == 0),
                         z2.astype(np.int64) * (2 * x2 - 1),
                         x2.astype(np.int64) * (1 - 2 * z2)),
            ),
        )

    def _rowsum_into(self, xh, zh, rh, i):
        """(xh,zh,rh) <- row_i * (xh,zh,rh); returns new sign bit."""
        tot = 2 * rh + 2 * int(self.r[i]) + int(
            np.sum(self._g(self.x[i], self.z[i], xh, zh)))
        xh ^= self.x[i]
        zh ^= self.z[i]
        return (tot % 4) // 2

    def _rowsum(self, h: int, i: int):
        self.r[h] = self._rowsum_into(self.x[h], self.z[h], int(self.r[h]), i)

    # -- measurement -----------------------------------------------------------

    def measure_pauli(self, p: PauliString, slots: list[int] | None = None,
                      rng: np.random.Generator | None = None,
                      force: int | None = None) -> tuple[int, bool]:
        """Projective measurement of a Hermitian Pauli; returns (bit, deterministic).

        Bit 0 encodes the +1 eigenvalue.  `slots` maps p's letters onto
        tableau qubits (default: positions 0..).  `force` pins the outcome of
        a random measurement (used for state preparation).
        """
        if p.phase_exp % 2:
            raise ValueError("cannot measure a non-Hermitian Pauli (phase +-i)")
        n = self.n
        if slots is None:
            slots = list(range(p.n))
        xp = np.zeros(n, dtype=np.uint8)
        zp = np.zeros(n, dtype=np.uint8)
        for c, s in zip(p.letters, slots):
            if c in "XY":
                xp[s] = 1
            if c in "ZY":
                zp[s] = 1
        rp = p.phase_exp // 2
        anti = ((self.x @ zp + self.z @ xp) % 2).astype(bool)
        stab_anti = np.flatnonzero(anti[n:])
        if stab_anti.size:
            pivot = n + int(stab_anti[0])
            for i in np.flatnonzero(anti):
                if int(i) != pivot:
                    self._rowsum(int(i), pivot)
            # old stabilizer becomes the destabilizer of the new measurement
            self.x[pivot - n] = self.x[pivot]
            self.z[pivot - n] = self.z[pivot]
            self.r[pivot - n] = self.r[pivot]
            if force is not None:
                bit = int(force)
            else:
                if rng is None:
                    raise ValueError("random outcome requires an rng (or force=)")
                bit = int(rng.integers(0, 2))
            self.x[pivot] = xp
            self.z[pivot] = zp
            self.r[pivot] = bit ^ rp
            return bit, False
        # deterministic: accumulate the stabilizer product reproducing p
        xs = np.zeros(n, dtype=np.uint8)
        zs = np.zeros(n, dtype=np.uint8)
        rs = 0
        for i in np.flatnonzero(anti[:n]):
            rs = self._rowsum_into(xs, zs, rs, n + int(i))
        if not (np.array_equal(xs, xp) and np.array_equal(zs, zp)):
            raise AssertionError("deterministic measurement did not reproduce the operator")
        return rs ^ rp, True

    def measure_z(self, slot: int, rng: np.random.Generator | None = None,
                  force: int | None = None) -> tuple[int, bool]:
        return self.measure_pauli(PauliString("Z"), [slot], rng=rng, force=force)

    def reset_to_zero(self, slot: int, rng: np.random.Generator | None = None):
        bit, _ = self.measure_z(slot, rng=rng, force=0 if rng is None else None)
        if bit:
            self.pauli_x(slot)

    # -- debug ----------------------------------------------------------------

    def stabilizer_strings(self) -> list[str]:
        out = []
        for i in range(self.n, 2 * self.n):
            letters = "".join("IXZY"[int(self.x[i, q]) + 2 * int(self.z[i, q])]
                              for q in range(self.n))
            out.append(("-" if self.r[i] else "+") + letters)
        return out


def prepare_codeword(code: StabilizerCode, fixing: list[PauliString],
                     n_slots: int | None = None,
                     slot_of_qubit: dict[int, int] | None = None,
                     ancilla_slots: list[int] | None = None) -> Tableau:
    """Tableau stabilized by the generators, the fixing operators and, when
    the layout has ancilla slots, Z on each ancilla (ancillas start in |0>).

    `slot_of_qubit` maps 1-based data-qubit labels to tableau slots; by
    default qubit q sits at slot q-1 and there are no ancillas.
    """
    n_slots = n_slots if n_slots is not None else code.n
    if slot_of_qubit is None:
        slot_of_qubit = {q: q - 1 for q in range(1, code.n + 1)}
    ancilla_slots = ancilla_slots or []
    ops = list(code.generators) + list(fixing)
    rows = np.array([p.symplectic() for p in ops], dtype=np.uint8)
    if gf2_rank(rows) != code.n or len(ops) != code.n:
        raise ValueError("generators plus fixing operators must form "
                         f"{code.n} independent strings (got rank {gf2_rank(rows)})")
    t = Tableau(n_slots)
    data_slots = [slot_of_qubit[q] for q in range(1, code.n + 1)]

    def sym_row(p: PauliString, slots: list[int]) -> np.ndarray:
        row = np.zeros(2 * n_slots, dtype=np.uint8)
        for c, s in zip(p.letters, slots):
            if c in "XY":
                row[s] = 1
            if c in "ZY":
                row[n_slots + s] = 1
        return row

    def lam(u: np.ndarray) -> np.ndarray:
        return np.concatenate([u[n_slots:], u[:n_slots]])

    # the ancillas must stay in |0>, so corrections must commute with their Zs
    pinned = []
    for a in ancilla_slots:
        row = np.zeros(2 * n_slots, dtype=np.uint8)
        row[n_slots + a] = 1
        pinned.append(row)
    for p in ops:
        row = sym_row(p, data_slots)
        bit, det = t.measure_pauli(p, data_slots, force=0)
        if det and bit != 0:
            # flip the sign with a Pauli that anticommutes with p but
            # commutes with everything already pinned
            m = np.array([lam(u) for u in pinned + [row]], dtype=np.uint8)
            b = np.zeros(len(pinned) + 1, dtype=np.uint8)
            b[-1] = 1
            v = gf2_solve_system(m, b)
            if v is None:
                raise ValueError(f"fixing set inconsistent: {p} is forced to -1")
            for s in range(n_slots):
                x, z = v[s], v[n_slots + s]
                if x and z:
                    t.pauli_y(s)
                elif x:
                    t.pauli_x(s)
                elif z:
                    t.pauli_z(s)
            bit, det = t.measure_pauli(p, data_slots, force=0)
            if not det or bit != 0:
                raise ValueError(f"fixing set inconsistent: {p} could not be pinned")
        pinned.append(row)
    # re-measure to confirm every operator is now pinned to +1
    for p in ops:
        bit, det = t.measure_pauli(p, data_slots, force=0)
        if not det or bit != 0:
            raise ValueError(f"state not stabilized by {p} after preparation")
    return t


def default_fixing(code: StabilizerCode) -> list[PauliString]:
    """Logical fixing operators for the bundled codes (a definite codeword),
    falling back to a computed symplectic completion."""
    known = {
        "rep3": [PauliString.from_text("-ZZZ")],          # |111>
        "rep5": [PauliString.from_text("-ZZZZZ")],        # |11111>
        "laflamme5": [PauliString.from_text("ZZZZZ")],    # the logical-zero codeword
        "shor9": [PauliString.from_text("XXXXXXXXX")],
    }
    if code.name in known:
        return known[code.name]
    return complete_stabilizer(code)


# ---------------------------------------------------------------------------
# Circuit-level verification


def run_circuit(t: Tableau, circuit, rng: np.random.Generator | None = None,
                forced: dict[int, int] | None = None) -> list[tuple[int, int, bool]]:
    """Apply a synthesized circuit to a tableau; returns (record, bit,
    deterministic) per measurement.  `forced` pins outcomes by record index."""
    results = []
    for slice_gates in circuit.slices:
        for gate in slice_gates:
            kind = gate.kind
            tg = gate.targets
            if kind == "MZ":
                force = None if forced is None else forced.get(gate.record)
                bit, det = t.measure_z(tg[0], rng=rng, force=force)
                results.append((gate.record, bit, det))
            elif kind == "RESET":
                t.reset_to_zero(tg[0], rng=rng)
            elif kind == "ID":
                pass
            elif kind == "H":
                t.h(tg[0])
            elif kind == "RX":
                t.rx(tg[0], gate.angle)
            elif kind == "RZ":
                t.rz(tg[0], gate.angle)
            elif kind == "CNOT":
                t.cnot(tg[0], tg[1])
            elif kind == "SWAP":
                t.swap(tg[0], tg[1])
            elif kind == "CNS":
                t.cns(tg[0], tg[1])
            elif kind == "ISWAP":
                t.iswap(tg[0], tg[1])
            else:
                raise ValueError(f"non-Clifford or unknown gate {kind}")
    return results


@dataclass
class VerificationReport:
    circuit_name: str
    checks: int
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def render(self) -> str:
        head = f"{self.circuit_name}: {self.checks} checks, " + (
            "all passed" if self.passed else f"{len(self.failures)} FAILED")
        return "\n".join([head] + [f"  - {f}" for f in self.failures])


def _codeword_tableau(circuit, code: StabilizerCode,
                      fixing: list[PauliString] | None) -> Tableau:
    fixing = fixing if fixing is not None else default_fixing(code)
    pm = circuit.initial_positions
    slot_of_qubit = {label: slot for slot, label in enumerate(pm) if label > 0}
    ancillas = [slot for slot, label in enumerate(pm) if label <= 0]
    return prepare_codeword(code, fixing, n_slots=circuit.slots,
                            slot_of_qubit=slot_of_qubit, ancilla_slots=ancillas)


def flip_indicators(circuit, results: list[tuple[int, int, bool]]) -> dict[int, int]:
    """Per-record flip indicator: the recorded bit XOR the previous bit of the
    same ancilla stream (QND accumulation), or the bit itself after a reset.

    This is the quantity that equals the measured generator's eigenvalue bit.
    """
    sched = {m.record: m for m in circuit.schedule}
    by_stream: dict[int, list[tuple[int, int]]] = {}
    for record, bit, _ in results:
        m = sched[record]
        by_stream.setdefault(m.stream, []).append((m.t, record))
    bit_of = {record: bit for record, bit, _ in results}
    lam: dict[int, int] = {}
    for stream, entries in by_stream.items():
        prev = 0  # ancillas start in |0>
        for _, record in sorted(entries):
            if circuit.mode == "reinit":
                lam[record] = bit_of[record]
            else:
                lam[record] = bit_of[record] ^ prev
                prev = bit_of[record]
    return lam


def verify_measurement_circuit(circuit, code: StabilizerCode,
                               fixing: list[PauliString] | None = None) -> VerificationReport:
    """Oracle check of a synthesized measurement circuit.

    (a) On a codeword every recorded outcome is deterministic and encodes +1.
    (b) Injecting each single-qubit Pauli on each data qubit before the
        circuit makes the flip indicator of each measurement equal the
        anticommutation bit of the injection with the measured generator.
    """
    failures: list[str] = []
    checks = 0
    base = _codeword_tableau(circuit, code, fixing)
    clean = run_circuit(base.copy(), circuit)
    checks += len(clean)
    sched = {m.record: m for m in circuit.schedule}
    for record, bit, det in clean:
        if not det:
            failures.append(f"record r{record}: outcome not deterministic on a codeword")
        elif bit != 0:
            failures.append(f"record r{record}: codeword outcome {bit}, expected 0")

    pm = circuit.initial_positions
    slot_of_qubit = {label: slot for slot, label in enumerate(pm) if label > 0}
    for q in sorted(slot_of_qubit):
        for letter in "XYZ":
            t = base.copy()
            t.apply_pauli(PauliString(letter), [slot_of_qubit[q]])
            res = run_circuit(t, circuit)
            lam = flip_indicators(circuit, res)
            checks += len(res)
            for record, bit, det in res:
                gen = sched[record].generator
                gl = gen.letter(q)
                expect = 1 if (gl != "I" and gl != letter) else 0
                if not det:
                    failures.append(f"inject {letter} on q{q}: r{record} became random")
                elif lam[record] != expect:
                    failures.append(
                        f"inject {letter} on q{q}: r{record} ({gen.letters}) "
                        f"flip {lam[record]}, expected {expect}")
    return VerificationReport(circuit.name, checks, failures)


def coverage_by_cycle(circuit, code: StabilizerCode) -> dict[int, dict[str, int]]:
    """How many times each generator is measured in each cycle."""
    out: dict[int, dict[str, int]] = {}
    want = {g.letters for g in code.generators}
    for m in circuit.schedule:
        d = out.setdefault(m.cycle, {k: 0 for k in want})
        key = m.generator.letters
        if key in d:
            d[key] += 1
        else:
            d[key] = d.get(key, 0) + 1
    return out
