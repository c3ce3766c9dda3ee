"""Sequential surface-code syndrome extraction with one walking ancilla.

The bundled layout is a planar patch with 23 data qubits on the even sites
of a 5x9 checkerboard and 22 face generators (X faces on odd rows, Z faces
on odd columns), encoding one logical qubit.  The ancilla walks the lattice
of diagonal near-neighbor couplings: riffle-style CNS walks around a face
when the geometry allows, otherwise routed SWAP hops plus CNOT couplings.
The contract is tableau-verified coverage, not any particular gate tiling.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .circuits import Circuit, CircuitBuilder, Topology, _emit_walk
from .pauli import PauliString, StabilizerCode


@dataclass(frozen=True)
class Face:
    kind: str                  # "X" or "Z"
    center: tuple[int, int]
    qubits: tuple[int, ...]    # data labels in contiguous arc order


@dataclass
class SurfaceLayout:
    name: str
    coords: dict[int, tuple[int, int]]   # data label (1-based) -> site; 0 -> ancilla home
    faces: list[Face]

    @property
    def n_data(self) -> int:
        return len(self.coords) - 1

    def slot_of(self, label: int) -> int:
        return self.n_data if label == 0 else label - 1

    def adjacency_edges(self) -> frozenset[tuple[int, int]]:
        labels = sorted(self.coords)
        edges = set()
        for a in labels:
            ia, ja = self.coords[a]
            for b in labels:
                if b <= a:
                    continue
                ib, jb = self.coords[b]
                if abs(ia - ib) == 1 and abs(ja - jb) == 1:
                    sa, sb = self.slot_of(a), self.slot_of(b)
                    edges.add((min(sa, sb), max(sa, sb)))
        return frozenset(edges)


def paper_layout() -> SurfaceLayout:
    """The 23-data-qubit planar patch (22 generators, one logical qubit)."""
    sites = [(i, j) for j in range(9) for i in range(5) if (i + j) % 2 == 0]
    sites.sort(key=lambda s: (s[1], s[0]))
    label_of = {site: k + 1 for k, site in enumerate(sites)}
    coords = {label: site for site, label in label_of.items()}
    coords[0] = (-1, 1)  # ancilla home, diagonally adjacent to the top edge
    faces = []
    for j in range(9):
        for i in range(5):
            if (i + j) % 2 == 0:
                continue
            cands = [(i - 1, j), (i, j + 1), (i + 1, j), (i, j - 1)]
            present = [c for c in cands if c in label_of]
            if len(present) < 3:
                continue
            if len(present) == 4:
                arc = cands
            else:
                gap = next(k for k, c in enumerate(cands) if c not in label_of)
                arc = cands[gap + 1:] + cands[:gap]
            kind = "X" if i % 2 == 1 else "Z"
            faces.append(Face(kind, (i, j), tuple(label_of[c] for c in arc)))
    faces.sort(key=lambda f: (f.center[1], f.center[0]))
    return SurfaceLayout("surface-23", coords, faces)


def layout_code(layout: SurfaceLayout) -> StabilizerCode:
    n = layout.n_data
    gens = []
    for f in layout.faces:
        letters = ["I"] * n
        for q in f.qubits:
            letters[q - 1] = f.kind
        gens.append(PauliString("".join(letters)))
    return StabilizerCode(n, tuple(gens), layout.name)


def _bfs_route(edges_adj: dict[int, list[int]], start: int, goals: set[int],
               forbidden: set[int] = frozenset()) -> list[int] | None:
    """Shortest slot path from start to any goal, never entering `forbidden`
    slots (deterministic tie-breaks)."""
    if start in goals:
        return [start]
    prev: dict[int, int] = {start: start}
    dq = deque([start])
    while dq:
        u = dq.popleft()
        for v in sorted(edges_adj.get(u, ())):
            if v in prev or v in forbidden:
                continue
            prev[v] = u
            if v in goals:
                path = [v]
                while path[-1] != start:
                    path.append(prev[path[-1]])
                return path[::-1]
            dq.append(v)
    return None


def synthesize_surface_schedule(layout: SurfaceLayout, cycles: int = 1,
                                mode: str = "QND") -> tuple[Circuit, dict]:
    """Compile a sequential schedule measuring every face once per cycle.

    Returns (circuit, coverage report); the report maps each cycle to the
    per-generator measurement count and records how each face was reached.
    """
    n = layout.n_data
    slots = n + 1
    edges = layout.adjacency_edges()
    topo = Topology("custom", slots, edges)
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    init = tuple(list(range(1, n + 1)) + [0])
    b = CircuitBuilder(f"{layout.name}-sequential", topo, init, mode=mode)
    b.meta.update(scheme="surface-sequential", cycles=cycles, code=layout.name)
    code = layout_code(layout)
    styles: dict[str, str] = {}

    def face_generator(face: Face) -> PauliString:
        letters = ["I"] * n
        for q in face.qubits:
            letters[q - 1] = face.kind
        return PauliString("".join(letters))

    for cycle in range(1, cycles + 1):
        for face in layout.faces:
            gen = face_generator(face)
            style = _measure_face(b, adj, face)
            styles[f"c{cycle}:{face.center}"] = style
            b.measure(b.ancilla_slot(), gen, cycle)
    circ = b.finish()
    coverage: dict[int, dict[str, int]] = {}
    for m in circ.schedule:
        d = coverage.setdefault(m.cycle, {g.letters: 0 for g in code.generators})
        d[m.generator.letters] += 1
    report = {"coverage": coverage, "styles": styles,
              "faces": len(layout.faces), "slots": slots}
    return circ, report


def _measure_face(b: CircuitBuilder, adj: dict[int, list[int]], face: Face) -> str:
    """Couple one face into the ancilla; returns the coupling style used."""
    sa = b.ancilla_slot()
    # try a riffle-style CNS walk around the face arc (both orientations);
    # the route must not displace any face qubit
    for arc in (face.qubits, face.qubits[::-1]):
        ws = [b.slot_of(q) for q in arc]
        if any(not b.topology.adjacent(ws[k], ws[k + 1]) for k in range(len(ws) - 1)):
            continue
        route = _bfs_route(adj, sa, set(adj.get(ws[0], ())) - set(ws),
                           forbidden=set(ws))
        if route is None:
            continue
        for u, v in zip(route, route[1:]):
            b.emit("SWAP", (u, v))
        walk = [(s, face.kind, False) for s in ws]
        _emit_walk(b, walk)
        return "walk"
    # fallback: route next to each face qubit in turn and couple in place
    for q in face.qubits:
        sq = b.slot_of(q)
        route = _bfs_route(adj, b.ancilla_slot(), set(adj.get(sq, ())) - {sq},
                           forbidden={sq})
        if route is None:
            raise ValueError(f"ancilla cannot reach qubit {q}")
        for u, v in zip(route, route[1:]):
            b.emit("SWAP", (u, v))
        _emit_walk(b, [(b.slot_of(q), face.kind, True)])
    return "routed"
