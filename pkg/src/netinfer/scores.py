"""Decomposable graph scores: TE, TEA, TEE and the information criteria.

Every score is a sum over vertices of a local term that depends only on
the vertex and its parent set, which is what makes incremental search
cheap. A ``Scorer`` bundles one dataset view with one score configuration
and memoizes local terms in a ``LocalScoreCache``.

Score kinds
-----------
``te``   raw summed transfer entropy (bits); monotone in edges, so only
         useful with an external parent cap.
``tea``  likelihood-ratio statistic 2*N*ln2*TE minus analytic chi-squared
         quantiles, one per parent, ordered to maximize the penalty.
``tee``  transfer entropy minus the empirical surrogate quantile.
``aic``/``bic``/``ml``  information criteria on discretized data:
         -N * sum_i H(next_i | own past, parent pasts) - f(N) * C(G), with
         f(N) = 1, log2(N)/2 and 0 respectively.
"""

from __future__ import annotations

import json
import math
import threading
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .estimators import (
    EstimatorKind,
    collective_transfer_entropy,
    conditional_entropy,
    history,
    next_value,
)
from .graph import Dag, is_acyclic
from .significance import (
    Chi2Params,
    SurrogateConfig,
    chi2_quantile,
    derive_seed,
    empirical_quantile,
    gaussian_te_degrees_of_freedom,
    surrogate_te_samples,
    te_degrees_of_freedom,
    te_statistic,
)
from .timeseries import EmbeddedView

SCORE_KINDS = ("te", "tea", "tee", "aic", "bic", "ml")
IC_KINDS = ("aic", "bic", "ml")


@dataclass(frozen=True)
class LocalScore:
    te: float
    penalty: float
    local: float


@dataclass
class PerVertexScore:
    vertex: int
    parents: tuple[int, ...]
    te: float
    penalty: float
    local: float


@dataclass
class ScoreReport:
    score_kind: str
    estimator: str
    total: float
    per_vertex: list[PerVertexScore]
    n_effective: int
    names: tuple[str, ...]
    alpha: Optional[float] = None
    seed: Optional[int] = None
    f_of_n: Optional[float] = None
    notes: Optional[str] = None

    def to_dict(self) -> dict:
        doc = {
            "score_kind": self.score_kind,
            "estimator": self.estimator,
            "alpha": self.alpha,
            "seed": self.seed,
            "total": self.total,
            "n_effective": self.n_effective,
            "per_vertex": [
                {
                    "vertex": self.names[pv.vertex],
                    "parents": [self.names[p] for p in pv.parents],
                    "te": pv.te,
                    "penalty": pv.penalty,
                    "local": pv.local,
                }
                for pv in self.per_vertex
            ],
        }
        if self.f_of_n is not None:
            doc["f_of_n"] = self.f_of_n
        if self.notes is not None:
            doc["notes"] = self.notes
        return doc

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs) + "\n"


class LocalScoreCache:
    """Memo of local scores keyed by everything that affects the value.

    Concurrent reads and inserts of distinct keys are safe; duplicated
    computation of the same key is permitted (values are deterministic, so
    last write wins with an identical value).
    """

    def __init__(self):
        self._store: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        with self._lock:
            found = self._store.get(key)
            if found is None:
                self.misses += 1
            else:
                self.hits += 1
            return found

    def put(self, key, value: LocalScore):
        with self._lock:
            self._store[key] = value

    def __len__(self) -> int:
        return len(self._store)


class Scorer:
    """One dataset view plus one score configuration, with memoized locals."""

    def __init__(self, view: EmbeddedView, score_kind: str,
                 estimator: EstimatorKind | None = None, *,
                 alpha: float = 0.95,
                 surrogates: SurrogateConfig | None = None,
                 cache: LocalScoreCache | None = None):
        if score_kind not in SCORE_KINDS:
            raise ValidationError(f"unknown score kind {score_kind!r}")
        if not view.covers_all():
            raise ValidationError("scoring needs a view covering every subsystem")
        if estimator is None:
            estimator = EstimatorKind.discrete_plugin()
        if score_kind == "tea":
            if estimator.method == "box-kernel":
                raise ValidationError(
                    "tea needs an analytic null distribution; the box-kernel "
                    "estimator has none (use tee instead)"
                )
            if not 0.0 < alpha < 1.0:
                raise ValidationError("alpha must lie in (0, 1)")
        if score_kind in IC_KINDS and estimator.method != "discrete-plugin":
            raise ValidationError(
                f"{score_kind} requires discretized data (parameter counts "
                "need finite alphabets)"
            )
        if score_kind == "tee":
            if surrogates is None:
                raise ValidationError("tee requires a SurrogateConfig")
            alpha = surrogates.alpha
        self.view = view
        self.score_kind = score_kind
        self.estimator = estimator
        self.alpha = alpha if score_kind in ("tea", "tee") else None
        self.surrogates = surrogates if score_kind == "tee" else None
        self.cache = cache if cache is not None else LocalScoreCache()
        self._h_self: dict[int, float] = {}
        self._params_token = (
            view.uid,
            score_kind,
            estimator.token(),
            self.alpha,
            (surrogates.count, surrogates.method, surrogates.seed)
            if self.surrogates is not None
            else None,
        )

    # -- pieces ----------------------------------------------------------

    @property
    def n_effective(self) -> int:
        return self.view.rows

    def _own_entropy(self, vertex: int) -> float:
        h = self._h_self.get(vertex)
        if h is None:
            h = conditional_entropy(next_value(vertex), [history(vertex)],
                                    self.view, self.estimator).value
            self._h_self[vertex] = h
        return h

    def _full_entropy(self, vertex: int, parents: tuple[int, ...]) -> float:
        conds = [history(vertex)] + [history(p) for p in parents]
        return conditional_entropy(next_value(vertex), conds,
                                   self.view, self.estimator).value

    def _te(self, vertex: int, parents: tuple[int, ...]) -> float:
        if not parents:
            return 0.0
        return self._own_entropy(vertex) - self._full_entropy(vertex, parents)

    def _tea_penalty(self, vertex: int, parents: tuple[int, ...]) -> float:
        view = self.view
        if self.estimator.method == "discrete-plugin":
            alphabet = [view.alphabet(s) for s in range(view.m_total)]
            kappa = [view.kappa(s) for s in range(view.m_total)]
            # conservative: the ordering that maximizes the total penalty is
            # descending embedded-alphabet size
            order = sorted(parents,
                           key=lambda j: (-(alphabet[j] ** kappa[j]), j))
            _, per_source = te_degrees_of_freedom(vertex, order, kappa, alphabet)
        else:
            kappa = [view.kappa(s) for s in range(view.m_total)]
            _, per_source = gaussian_te_degrees_of_freedom(parents, kappa)
        return sum(chi2_quantile(Chi2Params(l, self.alpha)) for l in per_source)

    def _ic_dimension(self, vertex: int, parents: tuple[int, ...]) -> int:
        view = self.view
        r = view.alphabet(vertex)
        c = (r - 1) * r ** view.kappa(vertex)
        for p in parents:
            c *= view.alphabet(p) ** view.kappa(p)
        return c

    def _f_of_n(self) -> float:
        if self.score_kind == "aic":
            return 1.0
        if self.score_kind == "bic":
            return math.log2(self.n_effective) / 2.0
        return 0.0

    # -- local scores ------------------------------------------------------

    def local(self, vertex: int, parents: Sequence[int]) -> LocalScore:
        parents = tuple(sorted(int(p) for p in parents))
        if vertex in parents:
            raise ValidationError("vertex cannot be its own parent")
        key = (vertex, parents, self._params_token)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        value = self._compute_local(vertex, parents)
        self.cache.put(key, value)
        return value

    def _compute_local(self, vertex: int, parents: tuple[int, ...]) -> LocalScore:
        kind = self.score_kind
        if kind in IC_KINDS:
            h_full = (self._full_entropy(vertex, parents) if parents
                      else self._own_entropy(vertex))
            te = self._own_entropy(vertex) - h_full
            penalty = self._f_of_n() * self._ic_dimension(vertex, parents)
            local = -self.n_effective * h_full - penalty
            return LocalScore(te=te, penalty=penalty, local=local)

        te = self._te(vertex, parents)
        if not parents:
            return LocalScore(te=0.0, penalty=0.0, local=0.0)
        if kind == "te":
            return LocalScore(te=te, penalty=0.0, local=te)
        if kind == "tea":
            penalty = self._tea_penalty(vertex, parents)
            stat = te_statistic(te, self.n_effective)
            return LocalScore(te=te, penalty=penalty, local=stat - penalty)
        # tee: deterministic surrogate population per (vertex, parent set);
        # the user's config was already validated, so silence the repeat
        # low-count warning from the derived copy
        cfg = self.surrogates
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            derived = SurrogateConfig(
                count=cfg.count,
                alpha=cfg.alpha,
                method=cfg.method,
                seed=derive_seed(cfg.seed, "vertex", vertex, parents),
            )
        samples = surrogate_te_samples(vertex, parents, self.view,
                                       self.estimator, derived)
        quantile = empirical_quantile(samples, cfg.alpha)
        return LocalScore(te=te, penalty=quantile, local=te - quantile)

    # -- whole graphs ----------------------------------------------------

    def score(self, graph: Dag) -> ScoreReport:
        if graph.m != self.view.m_total:
            raise ValidationError(
                f"graph has {graph.m} vertices but the data has {self.view.m_total}"
            )
        if not is_acyclic(graph):
            raise ValidationError("scores are defined over acyclic graphs only")
        per_vertex = []
        total = 0.0
        for v in range(graph.m):
            ls = self.local(v, graph.parents[v])
            per_vertex.append(PerVertexScore(
                vertex=v, parents=graph.parents[v],
                te=ls.te, penalty=ls.penalty, local=ls.local,
            ))
            total += ls.local
        notes = None
        f_of_n = None
        if self.score_kind in IC_KINDS:
            f_of_n = self._f_of_n()
            notes = ("log-likelihood reported up to a graph-independent "
                     "constant (latent-state conditioning term omitted)")
        return ScoreReport(
            score_kind=self.score_kind,
            estimator=self.estimator.method,
            total=total,
            per_vertex=per_vertex,
            n_effective=self.n_effective,
            names=self.view.names,
            alpha=self.alpha,
            seed=self.surrogates.seed if self.surrogates is not None else None,
            f_of_n=f_of_n,
            notes=notes,
        )


def local_score(vertex: int, parents: Sequence[int], scorer: Scorer) -> float:
    """Memoized per-vertex term of the scorer's configured score."""
    return scorer.local(vertex, parents).local


def score_te(graph: Dag, view: EmbeddedView, kind: EstimatorKind) -> ScoreReport:
    """Raw summed transfer entropy of each vertex from its parents (bits)."""
    return Scorer(view, "te", kind).score(graph)


def score_tea(graph: Dag, view: EmbeddedView, alpha: float,
              kind: EstimatorKind | None = None) -> ScoreReport:
    """Transfer entropy against analytic chi-squared independence tests."""
    return Scorer(view, "tea", kind, alpha=alpha).score(graph)


def score_tee(graph: Dag, view: EmbeddedView, kind: EstimatorKind,
              cfg: SurrogateConfig) -> ScoreReport:
    """Transfer entropy against empirical surrogate independence tests."""
    return Scorer(view, "tee", kind, surrogates=cfg).score(graph)


def score_ic(graph: Dag, view: EmbeddedView, variant: str) -> ScoreReport:
    """Information-criterion score on discretized data: aic, bic or ml."""
    if variant not in IC_KINDS:
        raise ValidationError(f"unknown information criterion {variant!r}")
    return Scorer(view, variant).score(graph)
