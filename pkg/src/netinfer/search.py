"""Finding the best-scoring DAG: exhaustive enumeration or greedy climbing.

Hill climbing starts from the empty graph (penalized scores make it the
natural null model) plus optional random restarts, and repeatedly applies
the single edge addition, deletion or reversal with the largest positive
score delta. Deltas touch only the vertices whose parent sets change, so
each step costs a handful of memoized local scores.

Ties are broken towards the lexicographically smallest edge set, which
makes every search deterministic under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .graph import (
    MAX_EXHAUSTIVE_VERTICES,
    Dag,
    compare_graphs,
    creates_cycle,
    enumerate_dags,
    is_acyclic,
    random_dag,
)
from .scores import ScoreReport, Scorer

__all__ = [
    "SearchConfig", "SearchResult", "exhaustive_search", "greedy_hill_climb",
    "enumerate_dags", "is_acyclic", "compare_graphs",
]

_TIE_EPS = 1e-12

# sentinel: resolve the parent cap from the score kind (3 for the monotone
# te/ml scores, unlimited for the penalized ones)
AUTO_MAX_PARENTS = "auto"


@dataclass(frozen=True)
class SearchConfig:
    method: str = "greedy"
    max_parents: object = AUTO_MAX_PARENTS
    restarts: int = 0
    seed: int = 0
    tie_break: str = "lexicographic-smallest-edge-set"

    def __post_init__(self):
        if self.method not in ("greedy", "exhaustive"):
            raise ValidationError(f"unknown search method {self.method!r}")
        if self.restarts < 0:
            raise ValidationError("restarts must be >= 0")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")
        if self.tie_break != "lexicographic-smallest-edge-set":
            raise ValidationError(f"unknown tie break {self.tie_break!r}")
        mp = self.max_parents
        if mp is not None and mp != AUTO_MAX_PARENTS and (
                not isinstance(mp, int) or mp < 0):
            raise ValidationError("max_parents must be a non-negative int, "
                                  "None (unlimited) or 'auto'")

    def resolved_max_parents(self, score_kind: str) -> Optional[int]:
        if self.max_parents == AUTO_MAX_PARENTS:
            return 3 if score_kind in ("te", "ml") else None
        return self.max_parents


@dataclass
class SearchResult:
    best: Dag
    best_report: ScoreReport
    visited: int
    trace: Optional[list[tuple[str, float]]] = field(default=None)


def _edge_key(graph: Dag):
    return graph.edges()


def _better(total: float, edges, best_total: float, best_edges) -> bool:
    if total > best_total + _TIE_EPS:
        return True
    if total >= best_total - _TIE_EPS and edges < best_edges:
        return True
    return False


def exhaustive_search(scorer: Scorer, cfg: SearchConfig | None = None) -> SearchResult:
    """Score every labelled DAG and return the maximum."""
    m = scorer.view.m_total
    if m > MAX_EXHAUSTIVE_VERTICES:
        raise ValidationError(
            f"exhaustive search supports at most {MAX_EXHAUSTIVE_VERTICES} "
            f"vertices, got {m}; use greedy search instead"
        )
    del cfg  # no knobs apply; signature kept symmetric with greedy
    best = None
    best_total = -np.inf
    best_edges = None
    visited = 0
    for graph in enumerate_dags(m):
        total = sum(scorer.local(v, graph.parents[v]).local for v in range(m))
        visited += 1
        edges = _edge_key(graph)
        if best is None or _better(total, edges, best_total, best_edges):
            best, best_total, best_edges = graph, total, edges
    return SearchResult(best=best, best_report=scorer.score(best),
                        visited=visited, trace=None)


def _candidate_moves(graph: Dag, max_parents: Optional[int]):
    """Legal single-edge moves, in a fixed deterministic order."""
    m = graph.m
    moves = []
    for src in range(m):
        for dst in range(m):
            if src == dst or graph.has_edge(src, dst):
                continue
            if max_parents is not None and len(graph.parents[dst]) >= max_parents:
                continue
            if creates_cycle(graph, src, dst):
                continue
            moves.append(("add", src, dst))
    for src, dst in graph.edges():
        moves.append(("delete", src, dst))
    for src, dst in graph.edges():
        if max_parents is not None and len(graph.parents[src]) >= max_parents:
            continue
        reversed_graph = graph.without_edge(src, dst)
        if creates_cycle(reversed_graph, dst, src):
            continue
        moves.append(("reverse", src, dst))
    return moves


def _apply(graph: Dag, move) -> Dag:
    op, src, dst = move
    if op == "add":
        return graph.with_edge(src, dst)
    if op == "delete":
        return graph.without_edge(src, dst)
    return graph.with_reversed_edge(src, dst)


def move_delta(scorer: Scorer, graph: Dag, move) -> float:
    """Score change of a single-edge move, touching only affected vertices."""
    op, src, dst = move
    if op == "add":
        before = scorer.local(dst, graph.parents[dst]).local
        after = scorer.local(dst, graph.parents[dst] + (src,)).local
        return after - before
    if op == "delete":
        before = scorer.local(dst, graph.parents[dst]).local
        after = scorer.local(dst, tuple(p for p in graph.parents[dst] if p != src)).local
        return after - before
    # reverse src->dst: dst loses src, src gains dst
    before = (scorer.local(dst, graph.parents[dst]).local
              + scorer.local(src, graph.parents[src]).local)
    after = (scorer.local(dst, tuple(p for p in graph.parents[dst] if p != src)).local
             + scorer.local(src, graph.parents[src] + (dst,)).local)
    return after - before


def _climb(scorer: Scorer, start: Dag, max_parents: Optional[int]):
    graph = start
    total = sum(scorer.local(v, graph.parents[v]).local for v in range(graph.m))
    trace: list[tuple[str, float]] = []
    visited = 1
    while True:
        best_move = None
        best_delta = 0.0
        best_edges = None
        for move in _candidate_moves(graph, max_parents):
            delta = move_delta(scorer, graph, move)
            visited += 1
            if delta <= 0.0:
                continue
            edges = _edge_key(_apply(graph, move))
            if best_move is None or _better(delta, edges, best_delta, best_edges):
                best_move, best_delta, best_edges = move, delta, edges
        if best_move is None:
            return graph, total, trace, visited
        graph = _apply(graph, best_move)
        total += best_delta
        op, src, dst = best_move
        trace.append((f"{op} {src}->{dst}", best_delta))


def greedy_hill_climb(scorer: Scorer, cfg: SearchConfig | None = None) -> SearchResult:
    """Greedy single-edge hill climbing with random restarts.

    Deterministic for a fixed cfg.seed; every intermediate graph is acyclic
    by construction and the returned graph is a local optimum.
    """
    if cfg is None:
        cfg = SearchConfig()
    m = scorer.view.m_total
    max_parents = cfg.resolved_max_parents(scorer.score_kind)

    starts = [Dag.empty(m)]
    for r in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, r)))
        starts.append(random_dag(m, rng, max_parents=max_parents))

    best = None
    best_total = -np.inf
    best_edges = None
    best_trace = None
    visited = 0
    for start in starts:
        graph, total, trace, seen = _climb(scorer, start, max_parents)
        visited += seen
        edges = _edge_key(graph)
        if best is None or _better(total, edges, best_total, best_edges):
            best, best_total, best_edges, best_trace = graph, total, edges, trace
    return SearchResult(best=best, best_report=scorer.score(best),
                        visited=visited, trace=best_trace)
