"""Pauli-string algebra and stabilizer-code structure checks.

Strings are tensor products of single-qubit Pauli operators with a phase
from {+1, +i, -1, -i}, tracked as an exponent of i so the algebra stays
exact.  Qubit positions are 1-based in every public interface.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

LETTERS = "IXYZ"

# Single-qubit product table: _MUL[(a, b)] = (letter of a*b, k) with a*b = i**k * letter.
_MUL = {
    ("X", "Y"): ("Z", 1),
    ("Y", "X"): ("Z", 3),
    ("Y", "Z"): ("X", 1),
    ("Z", "Y"): ("X", 3),
    ("Z", "X"): ("Y", 1),
    ("X", "Z"): ("Y", 3),
}
for _a in LETTERS:
    _MUL[("I", _a)] = (_a, 0)
    _MUL[(_a, "I")] = (_a, 0)
    if _a != "I":
        _MUL[(_a, _a)] = ("I", 0)

_PHASE_STR = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PHASE_VALUE = {0: 1, 1: 1j, 2: -1, 3: -1j}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator: i**phase_exp times a tensor of I/X/Y/Z."""

    letters: str
    phase_exp: int = 0

    def __post_init__(self):
        if not self.letters or any(c not in LETTERS for c in self.letters):
            raise ValueError(f"letters must be a nonempty string over I,X,Y,Z: {self.letters!r}")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse strings like 'ZXXZI', '-ZZZ', '+iXY', '-iY'."""
        s = text.strip()
        k = 0
        for prefix, exp in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if s.startswith(prefix):
                k = exp
                s = s[len(prefix):]
                break
        return cls(s, k)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def phase(self) -> complex:
        return _PHASE_VALUE[self.phase_exp]

    def support(self) -> tuple[int, ...]:
        """1-based positions with a nontrivial letter."""
        return tuple(i + 1 for i, c in enumerate(self.letters) if c != "I")

    def weight(self) -> int:
        return len(self.support())

    def letter(self, pos: int) -> str:
        """Letter at 1-based position."""
        return self.letters[pos - 1]

    def dagger(self) -> "PauliString":
        return PauliString(self.letters, (-self.phase_exp) % 4)

    def symplectic(self) -> np.ndarray:
        """Binary (x | z) row of length 2n; Y contributes to both halves."""
        x = np.fromiter((c in "XY" for c in self.letters), dtype=np.uint8)
        z = np.fromiter((c in "ZY" for c in self.letters), dtype=np.uint8)
        return np.concatenate([x, z])

    def matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (desk scale only)."""
        m = np.array([[self.phase]], dtype=complex)
        for c in self.letters:
            m = np.kron(m, _MATRICES[c])
        return m

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def __str__(self) -> str:
        return _PHASE_STR[self.phase_exp] + self.letters


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product a*b with accumulated phase."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} != {b.n}")
    out = []
    k = a.phase_exp + b.phase_exp
    for ca, cb in zip(a.letters, b.letters):
        c, dk = _MUL[(ca, cb)]
        out.append(c)
        k += dk
    return PauliString("".join(out), k % 4)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff a and b commute (even number of anticommuting positions)."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} != {b.n}")
    odd = sum(1 for ca, cb in zip(a.letters, b.letters)
              if ca != "I" and cb != "I" and ca != cb)
    return odd % 2 == 0


def identity(n: int) -> PauliString:
    return PauliString("I" * n)


def single(n: int, pos: int, letter: str) -> PauliString:
    """Single-qubit Pauli `letter` at 1-based position `pos`."""
    if not 1 <= pos <= n:
        raise ValueError(f"position {pos} outside 1..{n}")
    return PauliString("I" * (pos - 1) + letter + "I" * (n - pos))


# ---------------------------------------------------------------------------
# GF(2) linear algebra helpers (rows are uint8 arrays)

def gf2_rank(rows: np.ndarray) -> int:
    m = np.array(rows, dtype=np.uint8, copy=True) % 2
    rank = 0
    ncols = m.shape[1] if m.ndim == 2 else 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, m.shape[0]):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def gf2_solve(rows: np.ndarray, target: np.ndarray) -> np.ndarray | None:
    """Coefficients c with sum_i c_i rows[i] == target over GF(2), or None."""
    k = rows.shape[0]
    aug = np.concatenate([rows.T % 2, (target % 2).reshape(-1, 1)], axis=1).astype(np.uint8)
    piv_cols = []
    rank = 0
    for col in range(k):
        pivot = None
        for r in range(rank, aug.shape[0]):
            if aug[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        aug[[rank, pivot]] = aug[[pivot, rank]]
        for r in range(aug.shape[0]):
            if r != rank and aug[r, col]:
                aug[r] ^= aug[rank]
        piv_cols.append(col)
        rank += 1
    for r in range(rank, aug.shape[0]):
        if aug[r, -1]:
            return None
    c = np.zeros(k, dtype=np.uint8)
    for r, col in enumerate(piv_cols):
        c[col] = aug[r, -1]
    return c


def gf2_solve_system(m: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Any v with m @ v == b over GF(2), or None if inconsistent."""
    rows, cols = m.shape
    aug = np.concatenate([m % 2, (b % 2).reshape(-1, 1)], axis=1).astype(np.uint8)
    piv_of_col = {}
    rank = 0
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if aug[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        aug[[rank, pivot]] = aug[[pivot, rank]]
        for r in range(rows):
            if r != rank and aug[r, col]:
                aug[r] ^= aug[rank]
        piv_of_col[col] = rank
        rank += 1
    for r in range(rank, rows):
        if aug[r, -1]:
            return None
    v = np.zeros(cols, dtype=np.uint8)
    for col, r in piv_of_col.items():
        v[col] = aug[r, -1]
    return v


def gf2_nullspace(rows: np.ndarray) -> list[np.ndarray]:
    """Basis of {c : sum_i c_i rows[i] == 0} over GF(2)."""
    k = rows.shape[0]
    m = np.array(rows, dtype=np.uint8, copy=True).T % 2
    piv_of_col = {}
    rank = 0
    for col in range(k):
        pivot = None
        for r in range(rank, m.shape[0]):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        piv_of_col[col] = rank
        rank += 1
    basis = []
    free = [c for c in range(k) if c not in piv_of_col]
    for fc in free:
        v = np.zeros(k, dtype=np.uint8)
        v[fc] = 1
        for col, r in piv_of_col.items():
            if m[r, fc]:
                v[col] = 1
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# Stabilizer codes


@dataclass(frozen=True)
class StabilizerCode:
    """Ordered generating set of a stabilizer group on n data qubits."""

    n: int
    generators: tuple[PauliString, ...]
    name: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if g.n != self.n:
                raise ValueError(f"generator {g} has length {g.n}, expected {self.n}")
            if g.phase_exp != 0:
                raise ValueError(f"generator {g} must have phase +1")
        if len(gens) > self.n:
            raise ValueError("more generators than qubits")

    @property
    def k(self) -> int:
        return len(self.generators)

    @classmethod
    def from_text(cls, text: str) -> "StabilizerCode":
        """Parse the one-generator-per-line format with an `n=.. name=..` header."""
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip() and not ln.strip().startswith("#")]
        if not lines:
            raise ValueError("empty code description")
        header = lines[0]
        fields = dict(f.split("=", 1) for f in header.split() if "=" in f)
        if "n" not in fields:
            raise ValueError(f"header must contain n=<count>: {header!r}")
        n = int(fields["n"])
        name = fields.get("name", "")
        gens = []
        for ln in lines[1:]:
            if any(c not in LETTERS for c in ln):
                raise ValueError(f"bad generator line {ln!r}: letters must be I,X,Y,Z")
            if len(ln) != n:
                raise ValueError(f"generator {ln!r} has length {len(ln)}, expected {n}")
            gens.append(PauliString(ln))
        return cls(n, tuple(gens), name)

    def to_text(self) -> str:
        head = f"n={self.n}" + (f" name={self.name}" if self.name else "")
        return "\n".join([head] + [g.letters for g in self.generators]) + "\n"


@dataclass(frozen=True)
class ValidationReport:
    commuting: bool
    independent: bool
    excludes_minus_identity: bool
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.commuting and self.independent and self.excludes_minus_identity


def validate_generating_set(code: StabilizerCode) -> ValidationReport:
    """Check pairwise commutation, GF(2) independence and -I exclusion."""
    failures = []
    commuting = True
    for (i, a), (j, b) in itertools.combinations(enumerate(code.generators), 2):
        if not commutes(a, b):
            commuting = False
            failures.append(f"generators {i + 1} ({a.letters}) and {j + 1} ({b.letters}) anticommute")
    rows = np.array([g.symplectic() for g in code.generators], dtype=np.uint8)
    independent = gf2_rank(rows) == code.k
    minus_free = True
    if not independent:
        failures.append("generators are dependent over GF(2)")
        for coeffs in gf2_nullspace(rows):
            prod = identity(code.n)
            for c, g in zip(coeffs, code.generators):
                if c:
                    prod = prod * g
            if prod.phase_exp == 2:
                minus_free = False
                failures.append("the generated group contains -I")
                break
    return ValidationReport(commuting, independent, minus_free, tuple(failures))


# ---------------------------------------------------------------------------
# Neighboring-blocks classification


@dataclass(frozen=True)
class BlockExtent:
    """Circular contiguous nontrivial block: first and last 1-based positions.

    The block may wrap n -> 1, in which case L > R.
    """

    L: int
    R: int
    n: int

    def positions(self) -> tuple[int, ...]:
        """Block positions walking circularly from L to R."""
        out = [self.L]
        p = self.L
        while p != self.R:
            p = p % self.n + 1
            out.append(p)
        return tuple(out)

    def __len__(self) -> int:
        return len(self.positions())


def block_extent(g: PauliString) -> BlockExtent | None:
    """Circular block of nontrivial letters, or None if not one block.

    A full-support string is treated as the canonical block (L=1, R=n).
    """
    sup = set(g.support())
    if not sup:
        raise ValueError("all-identity string has no block")
    n = g.n
    if len(sup) == n:
        return BlockExtent(1, n, n)
    # one circular block <=> exactly one boundary where support ends
    ends = [p for p in sup if (p % n + 1) not in sup]
    if len(ends) != 1:
        return None
    R = ends[0]
    starts = [p for p in sup if (p - 2) % n + 1 not in sup]
    L = starts[0]
    return BlockExtent(L, R, n)


def _pair_condition(r_i: int, l_next: int, n: int) -> int | None:
    """Which adjacency/overlap condition the consecutive pair satisfies."""
    if r_i == (l_next - 1 if l_next > 1 else n):
        return 1
    if r_i == l_next:
        return 2
    if r_i == (l_next + 1 if l_next < n else 1):
        return 3
    return None


@dataclass(frozen=True)
class NeighborClassification:
    """Outcome of ordering generators into a neighboring-blocks chain.

    `order` holds 0-based indices into code.generators; `conditions[i]` labels
    the pair (order[i], order[i+1]) with 1 (adjacent), 2 (overlap by one) or
    3 (overlap by two).  `alternatives` counts other valid orderings found.
    """

    order: tuple[int, ...] = ()
    conditions: tuple[int, ...] = ()
    alternatives: int = 0
    rejected: str | None = None
    extents: tuple[BlockExtent, ...] = ()

    @property
    def ok(self) -> bool:
        return self.rejected is None

    def ordered_generators(self, code: StabilizerCode) -> tuple[PauliString, ...]:
        return tuple(code.generators[i] for i in self.order)


def _chain_conditions(order, extents, n) -> tuple[int, ...] | None:
    conds = []
    for a, b in zip(order, order[1:]):
        c = _pair_condition(extents[a].R, extents[b].L, n)
        if c is None:
            return None
        conds.append(c)
    return tuple(conds)


def classify_neighboring_blocks(code: StabilizerCode) -> NeighborClassification:
    """Search generator orderings for a valid neighboring-blocks chain.

    The input ordering is returned when it is already valid (this keeps the
    textbook orderings of the bundled codes).  Otherwise all permutations are
    tried (exhaustive up to 8 generators, greedy chain extension beyond) and
    the valid ordering with the most condition-1 pairs is preferred, since
    adjacent blocks need no CNOT couplings.
    """
    report = validate_generating_set(code)
    if not report.ok:
        return NeighborClassification(rejected="generating set invalid: " + "; ".join(report.failures))
    extents = []
    for g in code.generators:
        ext = block_extent(g)
        if ext is None:
            return NeighborClassification(rejected=f"generator {g.letters} is not one circular block")
        extents.append(ext)
    extents = tuple(extents)
    k = code.k
    if k == 1:
        return NeighborClassification(order=(0,), conditions=(), extents=extents)

    identity_order = tuple(range(k))
    if k <= 8:
        valid = []
        for perm in itertools.permutations(range(k)):
            conds = _chain_conditions(perm, extents, code.n)
            if conds is not None:
                valid.append((perm, conds))
        if not valid:
            return NeighborClassification(rejected="no generator ordering satisfies the block conditions",
                                          extents=extents)
        for perm, conds in valid:
            if perm == identity_order:
                return NeighborClassification(order=perm, conditions=conds,
                                              alternatives=len(valid) - 1, extents=extents)
        best = max(valid, key=lambda pc: (sum(1 for c in pc[1] if c == 1), pc[0] == identity_order))
        return NeighborClassification(order=best[0], conditions=best[1],
                                      alternatives=len(valid) - 1, extents=extents)

    # beyond 8 generators: greedy chain extension, condition-1 first
    for start in range(k):
        order = [start]
        conds = []
        remaining = set(range(k)) - {start}
        while remaining:
            tail = extents[order[-1]].R
            choices = []
            for j in remaining:
                c = _pair_condition(tail, extents[j].L, code.n)
                if c is not None:
                    choices.append((c, j))
            if not choices:
                break
            c, j = min(choices)
            order.append(j)
            conds.append(c)
            remaining.discard(j)
        if not remaining:
            return NeighborClassification(order=tuple(order), conditions=tuple(conds), extents=extents)
    return NeighborClassification(rejected="greedy chain extension failed", extents=extents)


# ---------------------------------------------------------------------------
# Correctability


def is_stabilizer_element(p: PauliString, code: StabilizerCode) -> bool:
    """True iff p (including its phase) is a product of the generators."""
    rows = np.array([g.symplectic() for g in code.generators], dtype=np.uint8)
    coeffs = gf2_solve(rows, p.symplectic())
    if coeffs is None:
        return False
    prod = identity(code.n)
    for c, g in zip(coeffs, code.generators):
        if c:
            prod = prod * g
    return prod == p


def in_normalizer(p: PauliString, code: StabilizerCode) -> bool:
    return all(commutes(p, g) for g in code.generators)


def correctable_set_check(errors: list[PauliString], code: StabilizerCode,
                          max_n: int = 7) -> tuple[bool, tuple[int, int, PauliString] | None]:
    """Check E_j^dag E_k never lands in N(S) - S; returns (ok, witness).

    The witness is (j, k, E_j^dag E_k) for the first failing pair.
    """
    if code.n > max_n:
        raise ValueError(f"exponential check limited to n <= {max_n}")
    for j, ej in enumerate(errors):
        for k, ek in enumerate(errors):
            e = ej.dagger() * ek
            if in_normalizer(e, code) and not is_stabilizer_element(e, code):
                return False, (j, k, e)
    return True, None


# ---------------------------------------------------------------------------
# Symplectic completion (used to pin a codeword for verification)


def _symplectic_product(u: np.ndarray, v: np.ndarray) -> int:
    n = len(u) // 2
    return int(np.dot(u[:n], v[n:]) % 2) ^ int(np.dot(u[n:], v[:n]) % 2)


def _row_to_pauli(row: np.ndarray) -> PauliString:
    n = len(row) // 2
    # x=1,z=0 -> X ; x=0,z=1 -> Z ; x=1,z=1 -> Y
    letters = ["IXZY"[x + 2 * z] for x, z in zip(row[:n], row[n:])]
    return PauliString("".join(letters))


def complete_stabilizer(code: StabilizerCode) -> list[PauliString]:
    """Logical fixing operators extending the generators to n commuting
    independent strings (arbitrary sign choice, phase +1)."""
    n = code.n
    rows = [g.symplectic() for g in code.generators]
    missing = n - code.k
    if missing == 0:
        return []
    # candidates: normalizer elements = nullspace of the symplectic form with rows
    lam_rows = np.array([np.concatenate([r[n:], r[:n]]) for r in rows], dtype=np.uint8)
    # solve lam_rows @ v == 0 for v in GF(2)^{2n}
    basis = _right_nullspace(lam_rows)
    chosen: list[np.ndarray] = []
    span = list(rows)
    for v in basis:
        if not all(_symplectic_product(v, c) == 0 for c in chosen):
            continue
        trial = np.array(span + chosen + [v], dtype=np.uint8)
        if gf2_rank(trial) == len(trial):
            chosen.append(v)
            if len(chosen) == missing:
                break
    if len(chosen) < missing:
        # pair up leftover logicals via symplectic Gram-Schmidt and retry
        chosen = _isotropic_completion(rows, basis, missing)
    if len(chosen) < missing:
        raise ValueError("failed to complete the stabilizer group")
    return [_row_to_pauli(v) for v in chosen]


def _right_nullspace(m: np.ndarray) -> list[np.ndarray]:
    """Basis of {v : m @ v == 0 over GF(2)}."""
    rows, cols = m.shape
    a = np.array(m, dtype=np.uint8, copy=True)
    piv_of_col = {}
    rank = 0
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if a[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] ^= a[rank]
        piv_of_col[col] = rank
        rank += 1
    basis = []
    for fc in [c for c in range(cols) if c not in piv_of_col]:
        v = np.zeros(cols, dtype=np.uint8)
        v[fc] = 1
        for col, r in piv_of_col.items():
            if a[r, fc]:
                v[col] = 1
        basis.append(v)
    return basis


def _isotropic_completion(stab_rows, basis, missing):
    """Greedy isotropic subspace of the normalizer, mod the stabilizer."""
    chosen: list[np.ndarray] = []
    pool = list(basis)
    while len(chosen) < missing and pool:
        progressed = False
        for i, v in enumerate(pool):
            if any(_symplectic_product(v, c) for c in chosen):
                continue
            trial = np.array(list(stab_rows) + chosen + [v], dtype=np.uint8)
            if gf2_rank(trial) == len(trial):
                chosen.append(v)
                pool.pop(i)
                progressed = True
                break
        if not progressed:
            # fold an anticommuting partner into remaining candidates
            v0 = pool.pop(0)
            pool = [p ^ v0 if any(_symplectic_product(p, c) for c in chosen) else p for p in pool]
    return chosen


# ---------------------------------------------------------------------------
# Bundled codes

REP3 = StabilizerCode(3, (PauliString("ZZI"), PauliString("ZIZ")), "rep3")
REP5 = StabilizerCode(5, (PauliString("ZZIII"), PauliString("IZZII"),
                          PauliString("IIZZI"), PauliString("ZIIIZ")), "rep5")
LAFLAMME5 = StabilizerCode(5, (PauliString("ZXXZI"), PauliString("XXZIZ"),
                               PauliString("XZIZX"), PauliString("ZIZXX")), "laflamme5")
SHOR9 = StabilizerCode(9, (PauliString("ZZIIIIIII"), PauliString("IZZIIIIII"),
                           PauliString("IIIZZIIII"), PauliString("IIIIZZIII"),
                           PauliString("IIIIIIZZI"), PauliString("IIIIIIIZZ"),
                           PauliString("XXXXXXIII"), PauliString("IIIXXXXXX")), "shor9")

CODES = {c.name: c for c in (REP3, REP5, LAFLAMME5, SHOR9)}
