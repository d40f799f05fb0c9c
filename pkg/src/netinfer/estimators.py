"""Conditional-entropy machinery over embedded observations.

Three interchangeable density models back every measure here:

* ``discrete-plugin``: raw relative frequencies over integer symbols, no
  bias correction (downstream penalties account for the bias),
* ``linear-gaussian``: H(Z|W) = 0.5 log2((2 pi e)^d det S_{Z|W}) with the
  conditional covariance from a Schur complement of the sample covariance
  (N-1 normalisation),
* ``box-kernel``: hard-cutoff kernel; the conditional probability at each
  row is the ratio of neighbour counts inside an axis-aligned box
  (max-norm radius = width, self excluded, zero-neighbour rows floored at
  one count).

All values are in bits. Everything is a pure function over immutable
views, so distinct (destination, sources) pairs can be evaluated
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ._threads import worker_count
from .errors import NumericError, ValidationError
from .graph import Dag
from .timeseries import EmbeddedView

_COND_LIMIT = 1e12
_TWO_PI_E = 2.0 * math.pi * math.e


@dataclass(frozen=True)
class EstimatorKind:
    """Density model selector; ``width`` only applies to the box kernel."""

    method: str
    width: float = 0.0

    def __post_init__(self):
        if self.method not in ("discrete-plugin", "linear-gaussian", "box-kernel"):
            raise ValidationError(f"unknown estimator {self.method!r}")
        if self.method == "box-kernel" and not self.width > 0:
            raise ValidationError("box-kernel width must be > 0")

    @classmethod
    def discrete_plugin(cls) -> "EstimatorKind":
        return cls("discrete-plugin")

    @classmethod
    def linear_gaussian(cls) -> "EstimatorKind":
        return cls("linear-gaussian")

    @classmethod
    def box_kernel(cls, width: float) -> "EstimatorKind":
        return cls("box-kernel", float(width))

    def token(self) -> tuple:
        return (self.method, self.width)


@dataclass(frozen=True)
class EntropyResult:
    value: float        # bits
    n_effective: int
    kind: EstimatorKind


@dataclass(frozen=True)
class Selection:
    """Reference to one column block of an EmbeddedView."""

    role: str        # "next" or "history"
    subsystem: int

    def __post_init__(self):
        if self.role not in ("next", "history"):
            raise ValidationError(f"unknown selection role {self.role!r}")


def next_value(subsystem: int) -> Selection:
    """The present-sample value y_{n+1} of a subsystem."""
    return Selection("next", subsystem)


def history(subsystem: int) -> Selection:
    """The embedded past ⟨y_n, y_{n-τ}, ...⟩ of a subsystem."""
    return Selection("history", subsystem)


def _as_selections(sel) -> tuple[Selection, ...]:
    if isinstance(sel, Selection):
        return (sel,)
    return tuple(sel)


def _resolve(view: EmbeddedView, selections: Iterable[Selection],
             want_radices: bool):
    """Concatenate the selected column blocks; return (matrix, radices)."""
    cols = []
    radices: list[int] = []
    for sel in selections:
        if sel.role == "next":
            block = view.target(sel.subsystem)[:, None]
            if want_radices:
                radices.append(view.alphabet(sel.subsystem))
        else:
            block = view.history(sel.subsystem)
            if want_radices:
                radices.extend([view.alphabet(sel.subsystem)] * block.shape[1])
        cols.append(block)
    if cols:
        mat = np.hstack(cols)
    else:
        mat = np.empty((view.rows, 0))
    return mat, radices


# ---------------------------------------------------------------------------
# matrix-level estimators (shared with the surrogate machinery)

def _row_codes(mat: np.ndarray, radices: Sequence[int]) -> np.ndarray:
    """Mixed-radix code per row; falls back to row dictionary encoding when
    the code space would overflow int64."""
    if mat.shape[1] == 0:
        return np.zeros(mat.shape[0], dtype=np.int64)
    total = 1
    for r in radices:
        total *= int(r)
    if total <= 2 ** 62:
        code = np.zeros(mat.shape[0], dtype=np.int64)
        for k in range(mat.shape[1]):
            code = code * int(radices[k]) + mat[:, k]
        return code
    _, inv = np.unique(mat, axis=0, return_inverse=True)
    return inv.astype(np.int64)


def discrete_cond_entropy(z: np.ndarray, z_rad: Sequence[int],
                          w: np.ndarray, w_rad: Sequence[int]) -> float:
    """Plug-in H(Z|W) in bits from integer matrices."""
    n = z.shape[0]
    if n < 1:
        raise ValidationError("empty view")
    if w.shape[1] == 0:
        code = _row_codes(z, z_rad)
        _, inv, cnt = np.unique(code, return_inverse=True, return_counts=True)
        return float(np.mean(np.log2(n) - np.log2(cnt[inv])))
    wcode = _row_codes(w, w_rad)
    zwcode = _row_codes(np.hstack([w, z]), list(w_rad) + list(z_rad))
    _, winv, wcnt = np.unique(wcode, return_inverse=True, return_counts=True)
    _, zwinv, zwcnt = np.unique(zwcode, return_inverse=True, return_counts=True)
    return float(np.mean(np.log2(wcnt[winv]) - np.log2(zwcnt[zwinv])))


def gaussian_cond_entropy(z: np.ndarray, w: np.ndarray) -> float:
    """H(Z|W) under a joint Gaussian model, in bits."""
    n, dz = z.shape
    dw = w.shape[1]
    if n < 2:
        raise NumericError("need at least two rows for a covariance estimate")
    full = np.hstack([z, w])
    cov = np.atleast_2d(np.cov(full, rowvar=False, ddof=1))
    szz = cov[:dz, :dz]
    if dw:
        sww = cov[dz:, dz:]
        szw = cov[:dz, dz:]
        if not np.all(np.isfinite(sww)) or np.linalg.cond(sww) > _COND_LIMIT:
            raise NumericError("degenerate covariance")
        cond_cov = szz - szw @ np.linalg.solve(sww, szw.T)
    else:
        cond_cov = szz
    sign, logabsdet = np.linalg.slogdet(cond_cov)
    if sign <= 0 or not np.isfinite(logabsdet):
        raise NumericError("degenerate covariance")
    return 0.5 * (dz * math.log2(_TWO_PI_E) + logabsdet / math.log(2.0))


def _box_counts(x: np.ndarray, width: float) -> np.ndarray:
    tree = cKDTree(x)
    counts = tree.query_ball_point(x, r=width, p=np.inf,
                                   return_length=True, workers=worker_count())
    return np.asarray(counts, dtype=np.int64) - 1  # drop self


def box_cond_entropy(z: np.ndarray, w: np.ndarray, width: float) -> float:
    """H(Z|W) from hard-cutoff kernel neighbour-count ratios, in bits."""
    n = z.shape[0]
    if n < 1:
        raise ValidationError("empty view")
    if w.shape[1] == 0:
        cw = np.full(n, n - 1, dtype=np.int64)
    else:
        cw = _box_counts(w, width)
    czw = _box_counts(np.hstack([w, z]), width)
    cw = np.maximum(cw, 1)
    czw = np.maximum(czw, 1)
    return float(np.mean(np.log2(cw) - np.log2(czw)))


def _cond_entropy_mats(kind: EstimatorKind, z, z_rad, w, w_rad) -> float:
    if kind.method == "discrete-plugin":
        return discrete_cond_entropy(z, z_rad, w, w_rad)
    if kind.method == "linear-gaussian":
        return gaussian_cond_entropy(np.asarray(z, dtype=float),
                                     np.asarray(w, dtype=float))
    return box_cond_entropy(np.asarray(z, dtype=float),
                            np.asarray(w, dtype=float), kind.width)


def _check_kind(view: EmbeddedView, kind: EstimatorKind):
    if kind.method == "discrete-plugin" and not view.discrete:
        raise ValidationError("discrete-plugin estimator requires discretized data")
    if kind.method != "discrete-plugin" and view.discrete:
        raise ValidationError(f"{kind.method} estimator requires real-valued data")


# ---------------------------------------------------------------------------
# public measures

def conditional_entropy(target, conditioners, view: EmbeddedView,
                        kind: EstimatorKind) -> EntropyResult:
    """H(target | conditioners) over the aligned rows of a view.

    ``target`` and ``conditioners`` are selections built with
    :func:`next_value` and :func:`history`; the target may itself be a list
    of selections (used for the joint next-step vector).
    """
    _check_kind(view, kind)
    want_rad = kind.method == "discrete-plugin"
    z, z_rad = _resolve(view, _as_selections(target), want_rad)
    w, w_rad = _resolve(view, _as_selections(conditioners), want_rad)
    if z.shape[1] == 0:
        raise ValidationError("target selection is empty")
    value = _cond_entropy_mats(kind, z, z_rad, w, w_rad)
    return EntropyResult(value=value, n_effective=view.rows, kind=kind)


def collective_transfer_entropy(dest: int, sources, view: EmbeddedView,
                                kind: EstimatorKind) -> float:
    """Information (bits) the sources' embedded pasts add about the
    destination's next value beyond its own embedded past.

    An empty source set carries no information, so the value is exactly 0.
    """
    sources = tuple(sources)
    if dest in sources:
        raise ValidationError("destination cannot be one of its sources")
    if not sources:
        return 0.0
    h_self = conditional_entropy(next_value(dest), [history(dest)], view, kind)
    conds = [history(dest)] + [history(s) for s in sources]
    h_full = conditional_entropy(next_value(dest), conds, view, kind)
    return h_self.value - h_full.value


def stochastic_interaction(view: EmbeddedView, kind: EstimatorKind) -> float:
    """Excess of summed per-subsystem next-step uncertainty over the joint
    next-step uncertainty, each conditioned on embedded pasts (bits)."""
    if not view.covers_all():
        raise ValidationError("stochastic interaction needs a view of all subsystems")
    subs = view.subsystems
    joint_target = [next_value(s) for s in subs]
    all_hists = [history(s) for s in subs]
    h_joint = conditional_entropy(joint_target, all_hists, view, kind).value
    h_each = sum(
        conditional_entropy(next_value(s), [history(s)], view, kind).value
        for s in subs
    )
    return h_each - h_joint


def kl_divergence(graph: Dag, view: EmbeddedView, kind: EstimatorKind) -> float:
    """Divergence (bits) of the graph-factorised transition model from the
    joint empirical one: stochastic interaction minus the summed collective
    transfer entropies into each vertex from its parents."""
    if graph.m != view.m_total:
        raise ValidationError(
            f"graph has {graph.m} vertices but the data has {view.m_total}"
        )
    s_y = stochastic_interaction(view, kind)
    te_sum = sum(
        collective_transfer_entropy(v, graph.parents[v], view, kind)
        for v in range(graph.m)
    )
    return s_y - te_sum
