"""Decoding of consecutive single-ancilla measurements.

Detection events are XORs of ancilla flip indicators at successive
measurements of the same generator.  Error hypotheses become graph edges
(data or ancilla, with -log p weights, multi-step windows merged as k*p);
single Y errors on the five-qubit code light up 3- or 4-node patterns and
are consumed by a pre-pass before exact minimum-weight perfect matching
pairs the rest.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import networkx as nx

PROB_CAP = 0.5
BOUNDARY = 0  # node key reserved for the virtual boundary (steps start at 1)


def weight_of(p: float) -> float:
    """-log p; strictly decreasing on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie strictly inside (0, 1), got {p}")
    return -math.log(p)


@dataclass(frozen=True)
class SyndromeEntry:
    t: int
    record: int
    generator: str
    stream: int
    cycle: int
    bit: int


@dataclass(frozen=True)
class SyndromeRecord:
    """Ordered measurement outcomes; mode QND (no ancilla reset) or reinit."""

    entries: tuple[SyndromeEntry, ...]
    mode: str = "QND"

    def __post_init__(self):
        ts = [e.t for e in self.entries]
        if ts != sorted(ts) or len(set(ts)) != len(ts):
            raise ValueError("entry steps must be strictly increasing")
        if self.mode not in ("QND", "reinit"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def truncated(self, max_t: int) -> "SyndromeRecord":
        return SyndromeRecord(tuple(e for e in self.entries if e.t <= max_t), self.mode)


def detection_events(record: SyndromeRecord) -> list[int]:
    """Steps whose flip indicator changed relative to the previous
    measurement of the same generator (first occurrences compare against the
    known initial value 0)."""
    lam: dict[int, int] = {}
    prev_bit: dict[int, int] = {}
    for e in record.entries:
        if record.mode == "reinit":
            lam[e.t] = e.bit
        else:
            lam[e.t] = e.bit ^ prev_bit.get(e.stream, 0)
            prev_bit[e.stream] = e.bit
    out = []
    last_lam: dict[str, int] = {}
    for e in record.entries:
        d = lam[e.t] ^ last_lam.get(e.generator, 0)
        last_lam[e.generator] = lam[e.t]
        if d:
            out.append(e.t)
    return out


# ---------------------------------------------------------------------------
# Decoding graphs


@dataclass(frozen=True)
class Edge:
    id: int
    nodes: tuple[int, ...]  # (u, v) or (u, BOUNDARY)
    p: float
    weight: float
    kind: str               # "data" or "ancilla"
    qubit: int | None       # 1-based data qubit
    pauli: str | None       # error letter for data edges
    window: tuple[int, int]  # (first step covered, detection step)


@dataclass(frozen=True)
class Hyperedge:
    id: int
    nodes: tuple[int, ...]  # 3 or 4 detection steps
    p: float
    weight: float
    qubit: int
    window: tuple[int, int]


@dataclass
class DecodingGraph:
    steps: list[tuple[int, str]]          # (t, generator letters), ascending
    n: int
    p: float
    edges: list[Edge] = field(default_factory=list)
    hyperedges: list[Hyperedge] = field(default_factory=list)
    _adj: dict | None = field(default=None, repr=False, compare=False)

    def render(self) -> str:
        lines = [f"decoding graph: {len(self.steps)} steps, n={self.n}, p={self.p}"]
        for e in self.edges:
            tag = f"q{e.qubit}:{e.pauli}" if e.kind == "data" else "ancilla"
            lines.append(f"  edge {e.id}: {e.nodes} w={e.weight:.6f} p={e.p:.6g} [{tag}]")
        for h in self.hyperedges:
            lines.append(f"  hyper {h.id}: {h.nodes} w={h.weight:.6f} p={h.p:.6g} [q{h.qubit}:Y]")
        return "\n".join(lines)


def _anticommutes(err: str, gen_letter: str) -> bool:
    return gen_letter != "I" and err != gen_letter


def _detectors(schedule: list[tuple[int, str]], q: int, err: str, window_end: int) -> list[int]:
    """First later measurement of each generator that anticommutes with
    `err` on qubit q, for an error occurring just before step window_end+1."""
    seen: set[str] = set()
    out = []
    for t, letters in schedule:
        if t <= window_end:
            continue
        if letters in seen:
            continue
        seen.add(letters)
        if _anticommutes(err, letters[q - 1]):
            out.append(t)
    return out


def build_graph(schedule: list[tuple[int, str]], n: int, p: float,
                include_y: bool = False) -> DecodingGraph:
    """Deformed decoding graph for a consecutive-measurement schedule.

    Data hypotheses: an error on qubit q in the window before step w+1 is
    detected at the next measurement of each anticommuting generator;
    windows with identical detector sets merge with probability k*p (capped).
    Ancilla hypotheses: a flip at step t pairs t with the next measurement
    of the same generator (or the boundary at the record end).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"per-step error probability must lie in (0, 1), got {p}")
    schedule = sorted(schedule)
    graph = DecodingGraph(steps=list(schedule), n=n, p=p)
    next_id = 0
    tmax = schedule[-1][0] if schedule else 0

    def add_edge(nodes, k_windows, kind, qubit, pauli, window):
        nonlocal next_id
        prob = min(k_windows * p, PROB_CAP)
        graph.edges.append(Edge(next_id, tuple(nodes), prob, weight_of(prob),
                                kind, qubit, pauli, window))
        next_id += 1

    def add_hyper(nodes, k_windows, qubit, window):
        nonlocal next_id
        prob = min(k_windows * p, PROB_CAP)
        graph.hyperedges.append(Hyperedge(next_id, tuple(nodes), prob,
                                          weight_of(prob), qubit, window))
        next_id += 1

    letters_pool = ("X", "Z", "Y") if include_y else ("X", "Z")
    for q in range(1, n + 1):
        for err in letters_pool:
            groups: list[tuple[tuple[int, ...], int, int]] = []  # (detectors, k, first window)
            for w in range(0, tmax):
                det = tuple(_detectors(schedule, q, err, w))
                if not det:
                    continue
                if groups and groups[-1][0] == det:
                    d, k, w0 = groups[-1]
                    groups[-1] = (d, k + 1, w0)
                else:
                    groups.append((det, 1, w))
            for det, k, w0 in groups:
                window = (w0 + 1, det[-1])
                if err == "Y":
                    if len(det) >= 3:
                        add_hyper(det, k, q, window)
                    # 1-2 detectors: identical to an X or Z hypothesis near the
                    # record end; those edges already exist
                elif len(det) == 2:
                    add_edge(det, k, "data", q, err, window)
                elif len(det) == 1:
                    add_edge((det[0], BOUNDARY), k, "data", q, err, window)
    for idx, (t, letters) in enumerate(schedule):
        partner = None
        for t2, letters2 in schedule[idx + 1:]:
            if letters2 == letters:
                partner = t2
                break
        nodes = (t, partner) if partner is not None else (t, BOUNDARY)
        add_edge(nodes, 1, "ancilla", None, None, (t, t))
    return graph


def build_graph_repetition(n: int, cycles: int, schedule, p: float) -> DecodingGraph:
    """Bit-flip decoding graph for an odd-n repetition code schedule."""
    if n % 2 == 0:
        raise ValueError("repetition decoding expects an odd number of data qubits")
    sched = _as_step_list(schedule)
    for _, letters in sched:
        if set(letters) - {"I", "Z"}:
            raise ValueError("repetition schedules measure Z-type generators only")
    return build_graph(sched, n, p, include_y=False)


def build_graph_5q(cycles: int, schedule, p: float) -> DecodingGraph:
    """Five-qubit-code graph with X/Z edges and Y hyperedge patterns."""
    sched = _as_step_list(schedule)
    n = len(sched[0][1])
    if n != 5:
        raise ValueError("expected a five-qubit schedule")
    return build_graph(sched, n, p, include_y=True)


def _as_step_list(schedule) -> list[tuple[int, str]]:
    if hasattr(schedule, "schedule"):  # a synthesized Circuit
        return [(m.t, m.generator.letters) for m in schedule.schedule]
    out = []
    for item in schedule:
        t, gen = item[0], item[1]
        out.append((int(t), gen.letters if hasattr(gen, "letters") else str(gen)))
    return out


# ---------------------------------------------------------------------------
# Matching


def _adjacency(graph: DecodingGraph) -> dict[int, list[tuple[int, float, Edge]]]:
    if graph._adj is None:
        adj: dict[int, list[tuple[int, float, Edge]]] = {}
        for e in graph.edges:
            u, v = e.nodes
            adj.setdefault(u, []).append((v, e.weight, e))
            adj.setdefault(v, []).append((u, e.weight, e))
        graph._adj = adj
    return graph._adj


def _dijkstra(graph: DecodingGraph, source: int):
    """Deterministic shortest paths; ties resolved toward smaller edge ids."""
    adj = _adjacency(graph)
    dist: dict[int, float] = {source: 0.0}
    parent: dict[int, Edge] = {}
    heap = [(0.0, source)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w, e in adj.get(u, ()):
            nd = d + w
            if v not in dist or nd < dist[v] - 1e-15 or (
                    abs(nd - dist[v]) <= 1e-15 and v in parent and e.id < parent[v].id):
                if v not in done:
                    dist[v] = nd
                    parent[v] = e
                    heapq.heappush(heap, (nd, v))
    return dist, parent


def _path_edges(parent: dict[int, Edge], source: int, target: int) -> list[Edge]:
    out = []
    node = target
    while node != source:
        e = parent[node]
        out.append(e)
        node = e.nodes[0] if e.nodes[1] == node else e.nodes[1]
    return out


@dataclass
class Matching:
    pairs: list[tuple[int, int]]          # matched detection steps (or step, BOUNDARY)
    edges: list[Edge]                     # expanded graph edges along the paths
    total_weight: float


def _perfect_matching_weight(nodes, wdict) -> float | None:
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for (u, v), w in wdict.items():
        g.add_edge(u, v, weight=-w)
    m = nx.max_weight_matching(g, maxcardinality=True)
    if 2 * len(m) != len(nodes):
        return None
    return math.fsum(wdict[(u, v) if (u, v) in wdict else (v, u)] for u, v in m)


def _matching_pairs(nodes, wdict):
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for (u, v), w in wdict.items():
        g.add_edge(u, v, weight=-w)
    m = nx.max_weight_matching(g, maxcardinality=True)
    return [(u, v) if (u, v) in wdict else (v, u) for u, v in m]


def mwpm(graph: DecodingGraph, detections: list[int],
         canonical_ties: bool = True) -> Matching:
    """Exact minimum-weight perfect matching of detection events.

    Each detection gets a private boundary copy (zero-weight edges between
    copies absorb odd parity).  With `canonical_ties` the matching is made
    lexicographically minimal in detection-pair order among all co-optimal
    matchings, at the cost of extra matching calls.
    """
    dets = sorted(set(detections))
    if not dets:
        return Matching([], [], 0.0)
    dist: dict[int, dict[int, float]] = {}
    parent: dict[int, dict[int, Edge]] = {}
    for u in dets:
        dist[u], parent[u] = _dijkstra(graph, u)
    nodes = []
    wdict: dict[tuple, float] = {}
    for i, u in enumerate(dets):
        nodes.append(("d", u))
        nodes.append(("b", u))
        if BOUNDARY not in dist[u]:
            raise ValueError(f"detection at step {u} cannot reach the boundary")
        wdict[(("d", u), ("b", u))] = dist[u][BOUNDARY]
        for v in dets[i + 1:]:
            if v in dist[u]:
                wdict[(("d", u), ("d", v))] = dist[u][v]
            wdict[(("b", u), ("b", v))] = 0.0
    if canonical_ties:
        total = _perfect_matching_weight(nodes, wdict)
        if total is None:
            raise ValueError("no perfect matching exists over the detections")
        pairs = _lexicographic_matching(nodes, wdict, total)
    else:
        pairs = _matching_pairs(nodes, wdict)
        if 2 * len(pairs) != len(nodes):
            raise ValueError("no perfect matching exists over the detections")
        total = math.fsum(wdict[p] for p in pairs)
    out_pairs = []
    out_edges = []
    for a, b in sorted(pairs):
        if a[0] == "b" and b[0] == "b":
            continue
        if a[0] == "d" and b[0] == "d":
            u, v = a[1], b[1]
            out_pairs.append((u, v))
            out_edges.extend(_path_edges(parent[u], u, v))
        else:
            u = a[1] if a[0] == "d" else b[1]
            out_pairs.append((u, BOUNDARY))
            out_edges.extend(_path_edges(parent[u], u, BOUNDARY))
    return Matching(out_pairs, out_edges, float(total))


def _lexicographic_matching(nodes, wdict, total, tol: float = 1e-12):
    """Fix pairs in sorted order whenever a co-optimal matching contains them."""
    nodes = sorted(nodes)
    fixed: list[tuple] = []
    remaining = list(nodes)
    budget = total
    while remaining:
        a = remaining[0]
        for b in remaining[1:]:
            key = (a, b) if (a, b) in wdict else (b, a)
            if key not in wdict:
                continue
            w = wdict[key]
            rest = [x for x in remaining if x not in (a, b)]
            if not rest:
                sub = 0.0 if w <= budget + tol else None
            else:
                subw = {k: v for k, v in wdict.items()
                        if k[0] in rest and k[1] in rest}
                sub = _perfect_matching_weight(rest, subw)
            if sub is not None and abs((w + sub) - budget) <= tol:
                fixed.append(key)
                remaining = rest
                budget -= w
                break
        else:
            raise AssertionError("lexicographic completion failed")
    return fixed


# ---------------------------------------------------------------------------
# Y pre-pass and corrections


def y_prepass(detections: list[int], graph: DecodingGraph):
    """Consume 4-node then 3-node Y patterns greedily (earliest window first,
    then smallest node set); returns (Y events, residual detections)."""
    active = set(detections)
    events = []
    for size in (4, 3):
        candidates = [h for h in graph.hyperedges if len(h.nodes) == size]
        candidates.sort(key=lambda h: (h.window[0], h.nodes, h.qubit))
        for h in candidates:
            if set(h.nodes) <= active:
                active -= set(h.nodes)
                events.append(h)
    return events, sorted(active)


@dataclass
class Correction:
    """Per-qubit Pauli letters plus the decoded event list."""

    letters: dict[int, str] = field(default_factory=dict)
    events: list[tuple[int, int | None, str]] = field(default_factory=list)
    # events: (time step, qubit or None for ancilla, letter or "flip")

    _MUL = {("X", "Z"): "Y", ("Z", "X"): "Y", ("X", "Y"): "Z", ("Y", "X"): "Z",
            ("Z", "Y"): "X", ("Y", "Z"): "X"}

    def accumulate(self, qubit: int, letter: str):
        cur = self.letters.get(qubit)
        if cur is None:
            self.letters[qubit] = letter
        elif cur == letter:
            del self.letters[qubit]
        else:
            self.letters[qubit] = self._MUL[(cur, letter)]

    def pauli_string(self, n: int) -> str:
        return "".join(self.letters.get(q, "I") for q in range(1, n + 1))

    @property
    def empty(self) -> bool:
        return not self.letters


def matching_to_correction(matching: Matching, y_events, n: int) -> Correction:
    """Fold matched edges and Y events into per-qubit Pauli corrections
    (ancilla edges contribute no data correction)."""
    corr = Correction()
    for h in y_events:
        corr.accumulate(h.qubit, "Y")
        corr.events.append((h.window[0], h.qubit, "Y"))
    for e in matching.edges:
        if e.kind == "data":
            corr.accumulate(e.qubit, e.pauli)
            corr.events.append((e.window[0], e.qubit, e.pauli))
        else:
            corr.events.append((e.window[0], None, "flip"))
    corr.events.sort(key=lambda ev: (ev[0], ev[1] is None, ev[1] or 0, ev[2]))
    return corr


def decode(graph: DecodingGraph, record: SyndromeRecord,
           canonical_ties: bool = False) -> Correction:
    """Full pipeline: detections, Y pre-pass, exact matching, correction."""
    dets = detection_events(record)
    y_events, residual = y_prepass(dets, graph) if graph.hyperedges else ([], dets)
    matching = mwpm(graph, residual, canonical_ties=canonical_ties)
    return matching_to_correction(matching, y_events, graph.n)


# ---------------------------------------------------------------------------
# CSV interfaces


def write_syndromes_csv(path, records: list[SyndromeRecord]):
    with open(path, "w") as fh:
        fh.write("shot,t,generator,bit\n")
        for shot, rec in enumerate(records):
            for e in rec.entries:
                fh.write(f"{shot},{e.t},{e.generator},{e.bit}\n")


def read_syndromes_csv(path, mode: str = "QND") -> list[SyndromeRecord]:
    """Single-ancilla syndrome import (one measurement stream)."""
    rows: dict[int, list[SyndromeEntry]] = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "shot,t,generator,bit":
            raise ValueError(f"unexpected syndrome CSV header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            shot_s, t_s, gen, bit_s = line.split(",")
            rows.setdefault(int(shot_s), []).append(SyndromeEntry(
                t=int(t_s), record=int(t_s) - 1, generator=gen,
                stream=0, cycle=0, bit=int(bit_s)))
    return [SyndromeRecord(tuple(sorted(rows[s], key=lambda e: e.t)), mode)
            for s in sorted(rows)]


def write_corrections_csv(path, corrections: list[Correction]):
    with open(path, "w") as fh:
        fh.write("shot,qubit,pauli\n")
        for shot, corr in enumerate(corrections):
            for q in sorted(corr.letters):
                fh.write(f"{shot},{q},{corr.letters[q]}\n")
