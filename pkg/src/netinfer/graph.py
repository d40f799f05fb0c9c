"""Directed graphs over subsystem vertices, stored as per-vertex parent sets.

A ``Dag`` is plain data: it checks self-loops and duplicate parents at
construction but deliberately tolerates cycles so that :func:`is_acyclic`
can be used as a real test. Everything that consumes graphs for scoring or
simulation validates acyclicity explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DataFormatError, ValidationError

MAX_EXHAUSTIVE_VERTICES = 6


@dataclass(frozen=True)
class Dag:
    """Candidate coupling graph: ``parents[v]`` are the sources feeding v."""

    m: int
    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("graph needs at least one vertex")
        if len(self.parents) != self.m:
            raise ValidationError(
                f"parents has {len(self.parents)} entries for {self.m} vertices"
            )
        norm = []
        for v, ps in enumerate(self.parents):
            ps = tuple(sorted(ps))
            for p in ps:
                if p == v:
                    raise ValidationError(f"self-loop on vertex {v}")
                if not 0 <= p < self.m:
                    raise ValidationError(f"parent {p} of vertex {v} out of range")
            if len(set(ps)) != len(ps):
                raise ValidationError(f"duplicate parent in set of vertex {v}")
            norm.append(ps)
        object.__setattr__(self, "parents", tuple(norm))

    @classmethod
    def empty(cls, m: int) -> "Dag":
        return cls(m, tuple(() for _ in range(m)))

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[tuple[int, int]]) -> "Dag":
        parents: list[list[int]] = [[] for _ in range(m)]
        for src, dst in edges:
            if not (0 <= dst < m):
                raise ValidationError(f"edge endpoint {dst} out of range")
            parents[dst].append(src)
        return cls(m, tuple(tuple(ps) for ps in parents))

    def edges(self) -> tuple[tuple[int, int], ...]:
        """Directed edges as (src, dst) pairs in canonical order."""
        out = []
        for dst, ps in enumerate(self.parents):
            out.extend((src, dst) for src in ps)
        return tuple(sorted(out))

    @property
    def n_edges(self) -> int:
        return sum(len(ps) for ps in self.parents)

    def has_edge(self, src: int, dst: int) -> bool:
        return src in self.parents[dst]

    def with_edge(self, src: int, dst: int) -> "Dag":
        if self.has_edge(src, dst):
            raise ValidationError(f"edge {src}->{dst} already present")
        ps = list(self.parents)
        ps[dst] = tuple(sorted(ps[dst] + (src,)))
        return Dag(self.m, tuple(ps))

    def without_edge(self, src: int, dst: int) -> "Dag":
        if not self.has_edge(src, dst):
            raise ValidationError(f"edge {src}->{dst} not present")
        ps = list(self.parents)
        ps[dst] = tuple(p for p in ps[dst] if p != src)
        return Dag(self.m, tuple(ps))

    def with_reversed_edge(self, src: int, dst: int) -> "Dag":
        return self.without_edge(src, dst).with_edge(dst, src)


def is_acyclic(graph: Dag) -> bool:
    """True iff a topological order of the vertices exists (Kahn's algorithm)."""
    indeg = [len(ps) for ps in graph.parents]
    children: list[list[int]] = [[] for _ in range(graph.m)]
    for dst, ps in enumerate(graph.parents):
        for src in ps:
            children[src].append(dst)
    queue = [v for v in range(graph.m) if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen == graph.m


def topological_order(graph: Dag) -> list[int]:
    indeg = [len(ps) for ps in graph.parents]
    children: list[list[int]] = [[] for _ in range(graph.m)]
    for dst, ps in enumerate(graph.parents):
        for src in ps:
            children[src].append(dst)
    queue = sorted(v for v in range(graph.m) if indeg[v] == 0)
    order = []
    while queue:
        v = queue.pop(0)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if len(order) != graph.m:
        raise ValidationError("graph contains a cycle")
    return order


def _reaches(parents: Sequence[tuple[int, ...]], start: int, goal: int) -> bool:
    # walks child links, i.e. follows edge direction start -> ... -> goal
    children: dict[int, list[int]] = {}
    for dst, ps in enumerate(parents):
        for src in ps:
            children.setdefault(src, []).append(dst)
    stack = [start]
    seen = {start}
    while stack:
        v = stack.pop()
        if v == goal:
            return True
        for c in children.get(v, ()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def creates_cycle(graph: Dag, src: int, dst: int) -> bool:
    """Would adding src->dst to an acyclic graph close a cycle?"""
    return src == dst or _reaches(graph.parents, dst, src)


def enumerate_dags(m: int) -> Iterator[Dag]:
    """Yield every labelled DAG on m vertices exactly once.

    Parent sets are assigned vertex by vertex with incremental cycle
    pruning; practical up to the enforced cap of six vertices (3 781 503
    graphs).
    """
    if m < 1:
        raise ValidationError("vertex count must be >= 1")
    if m > MAX_EXHAUSTIVE_VERTICES:
        raise ValidationError(
            f"exhaustive enumeration supports at most {MAX_EXHAUSTIVE_VERTICES} "
            f"vertices, got {m}"
        )
    others = [tuple(u for u in range(m) if u != v) for v in range(m)]
    # candidate parent sets per vertex, in a fixed deterministic order
    choices = []
    for v in range(m):
        sets = []
        for mask in range(1 << (m - 1)):
            sets.append(tuple(others[v][b] for b in range(m - 1) if mask >> b & 1))
        choices.append(sets)

    assigned: list[tuple[int, ...]] = [() for _ in range(m)]

    def vertex_on_cycle(k: int) -> bool:
        # new in-edges all point at k, so any new cycle passes through k:
        # it exists iff some parent of k is reachable from k
        targets = set(assigned[k])
        if not targets:
            return False
        children: list[list[int]] = [[] for _ in range(m)]
        for dst in range(k + 1):
            for src in assigned[dst]:
                children[src].append(dst)
        stack = [k]
        seen = {k}
        while stack:
            v = stack.pop()
            for c in children[v]:
                if c in targets:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def rec(k: int) -> Iterator[Dag]:
        if k == m:
            yield Dag(m, tuple(assigned))
            return
        for ps in choices[k]:
            assigned[k] = ps
            if not vertex_on_cycle(k):
                yield from rec(k + 1)
        assigned[k] = ()

    yield from rec(0)


def random_dag(m: int, rng, max_parents: int | None = None,
               edge_prob: float = 0.3) -> Dag:
    """Random DAG: random topological order, each order-respecting edge kept
    with probability edge_prob, parent sets truncated to max_parents."""
    order = list(rng.permutation(m))
    parents: list[list[int]] = [[] for _ in range(m)]
    for j in range(1, m):
        dst = order[j]
        cand = [order[i] for i in range(j)]
        picked = [u for u in cand if rng.random() < edge_prob]
        if max_parents is not None and len(picked) > max_parents:
            idx = rng.permutation(len(picked))[:max_parents]
            picked = [picked[i] for i in sorted(idx)]
        parents[dst] = picked
    return Dag(m, tuple(tuple(sorted(ps)) for ps in parents))


def compare_graphs(inferred: Dag, truth: Dag) -> dict:
    """Directed-edge precision/recall/F1 plus structural Hamming distance.

    SHD counts one unit per missing edge, per extra edge and per reversed
    edge (a reversal is a single move, not a delete plus an insert).
    """
    if inferred.m != truth.m:
        raise ValidationError(
            f"vertex count mismatch: {inferred.m} vs {truth.m}"
        )
    ei = set(inferred.edges())
    et = set(truth.edges())
    tp = len(ei & et)
    precision = tp / len(ei) if ei else 1.0
    recall = tp / len(et) if et else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    shd = 0
    pairs = {frozenset(e) for e in ei | et}
    for pair in pairs:
        a, b = tuple(pair)
        in_i = (a, b) in ei or (b, a) in ei
        in_t = (a, b) in et or (b, a) in et
        if in_i and in_t:
            if ((a, b) in ei) != ((a, b) in et):
                shd += 1  # reversed
        else:
            shd += 1  # missing or spurious
    return {"precision": precision, "recall": recall, "f1": f1, "shd": shd}


# ---------------------------------------------------------------------------
# DOT interchange (restricted subset: named vertices and plain edges)

_DOT_NODE = re.compile(r'^\s*"([^"]+)"\s*;\s*$')
_DOT_EDGE = re.compile(r'^\s*"([^"]+)"\s*->\s*"([^"]+)"\s*;\s*$')


def write_dot(graph: Dag, names: Sequence[str]) -> str:
    if len(names) != graph.m:
        raise ValidationError("names length does not match vertex count")
    lines = ["digraph G {"]
    for name in names:
        lines.append(f'  "{name}";')
    for src, dst in graph.edges():
        lines.append(f'  "{names[src]}" -> "{names[dst]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_dot(text: str) -> tuple[list[str], list[tuple[str, str]]]:
    """Parse the DOT subset written by :func:`write_dot`.

    Returns vertex names in declaration order and edges as name pairs.
    Vertices first seen inside an edge are appended in encounter order.
    """
    names: list[str] = []
    edges: list[tuple[str, str]] = []
    seen = set()

    def add(name: str):
        if name not in seen:
            seen.add(name)
            names.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//")[0].strip()
        if not line or line.startswith(("digraph", "{", "}")):
            continue
        mnode = _DOT_NODE.match(line)
        if mnode:
            add(mnode.group(1))
            continue
        medge = _DOT_EDGE.match(line)
        if medge:
            add(medge.group(1))
            add(medge.group(2))
            edges.append((medge.group(1), medge.group(2)))
            continue
        raise DataFormatError(f"unrecognised DOT syntax at line {lineno}: {raw!r}")
    if not names:
        raise DataFormatError("DOT file declares no vertices")
    return names, edges


def dag_from_dot(text: str, names: Sequence[str] | None = None) -> tuple[Dag, list[str]]:
    """Build a Dag from DOT text, optionally remapped onto a given name order."""
    dot_names, edges = parse_dot(text)
    if names is None:
        names = dot_names
    else:
        missing = set(dot_names) - set(names)
        extra = set(names) - set(dot_names)
        if missing or extra:
            raise ValidationError(
                "vertex names do not match: "
                f"unknown {sorted(missing)}, undeclared {sorted(extra)}"
            )
    index = {name: i for i, name in enumerate(names)}
    dag = Dag.from_edges(len(names), [(index[a], index[b]) for a, b in edges])
    return dag, list(names)
