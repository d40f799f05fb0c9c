"""Significance machinery for the penalized scores.

Analytic side: chi-squared quantiles and the degrees of freedom of the
conditional-independence test behind each transfer-entropy term. The
likelihood-ratio statistic 2*N*ln(2)*TE_bits is asymptotically
chi-squared under the no-interaction null.

Empirical side: surrogate transfer-entropy populations built by permuting
(or bootstrap-resampling) the joint source-history rows across time while
the destination stays fixed, which preserves every marginal and the
inter-source structure but removes the source-destination association.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammainc, gammaincinv

from ._threads import parallel_map
from .errors import NumericError, ValidationError
from .estimators import (
    EstimatorKind,
    _cond_entropy_mats,
    _check_kind,
    _resolve,
    history,
    next_value,
)
from .timeseries import EmbeddedView, EmbeddingSpec

_DF_LIMIT = 2 ** 63 - 1
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Chi2Params:
    df: int
    alpha: float

    def __post_init__(self):
        if self.df < 1:
            raise ValidationError("degrees of freedom must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class SurrogateConfig:
    """Resampling plan for the empirical independence test."""

    count: int
    alpha: float
    method: str = "permutation"
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError("surrogate count must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        if self.method not in ("permutation", "bootstrap"):
            raise ValidationError(f"unknown surrogate method {self.method!r}")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")
        recommended = math.ceil(self.alpha / (1.0 - self.alpha))
        if self.count < recommended:
            warnings.warn(
                f"surrogate count {self.count} is below the recommended "
                f"minimum ceil(alpha/(1-alpha)) = {recommended} for "
                f"alpha = {self.alpha}",
                stacklevel=2,
            )


def te_statistic(te_bits: float, n_effective: int) -> float:
    """Likelihood-ratio scale of a transfer entropy: 2*N*ln(2)*TE_bits."""
    return 2.0 * n_effective * LN2 * te_bits


def chi2_quantile(p: Chi2Params) -> float:
    """x with CDF_{chi2(df)}(x) = alpha, via the inverse regularized lower
    incomplete gamma function."""
    return float(2.0 * gammaincinv(p.df / 2.0, p.alpha))


def chi2_cdf(df: int, x: float) -> float:
    return float(gammainc(df / 2.0, x / 2.0))


def te_degrees_of_freedom(dest: int, sources: Sequence[int],
                          spec: Union[EmbeddingSpec, Sequence[int]],
                          alphabet: Sequence[int]) -> tuple[int, list[int]]:
    """Degrees of freedom of the discrete transfer-entropy test.

    Total: (r_d - 1) * (prod_j r_j^k_j - 1) * r_d^k_d, the df of a
    conditional mutual-information test where the conditioner is the
    destination's own embedded past. The per-source list follows the given
    source order and telescopes to the total:
    l_j = (r_d - 1) (r_j^k_j - 1) r_d^k_d * prod_{k<j} r_k^k_k.
    """
    kappa = spec.kappa if isinstance(spec, EmbeddingSpec) else tuple(spec)
    if dest in sources:
        raise ValidationError("destination cannot be one of its sources")
    if not sources:
        return 0, []
    r_d = int(alphabet[dest])
    base = (r_d - 1) * r_d ** int(kappa[dest])
    per_source: list[int] = []
    prefix = 1
    for j in sources:
        states_j = int(alphabet[j]) ** int(kappa[j])
        l_j = base * (states_j - 1) * prefix
        prefix *= states_j
        if l_j > _DF_LIMIT or prefix > _DF_LIMIT:
            raise NumericError("df overflow: test is infeasible at this resolution")
        per_source.append(l_j)
    total = sum(per_source)
    if total > _DF_LIMIT:
        raise NumericError("df overflow: test is infeasible at this resolution")
    return total, per_source


def gaussian_te_degrees_of_freedom(sources: Sequence[int],
                                   spec: Union[EmbeddingSpec, Sequence[int]],
                                   ) -> tuple[int, list[int]]:
    """Degrees of freedom for the linearly-coupled Gaussian test: each
    source contributes its embedded block size kappa_j (added regressors)."""
    kappa = spec.kappa if isinstance(spec, EmbeddingSpec) else tuple(spec)
    per_source = [int(kappa[j]) for j in sources]
    return sum(per_source), per_source


def derive_seed(*parts) -> int:
    """Stable seed derivation, identical across platforms and runs."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def surrogate_indices(rows: int, method: str, rng: np.random.Generator) -> np.ndarray:
    """Row indices realizing one surrogate draw."""
    if method == "permutation":
        return rng.permutation(rows)
    return rng.integers(0, rows, size=rows)


def surrogate_te_samples(dest: int, sources, view: EmbeddedView,
                         kind: EstimatorKind, cfg: SurrogateConfig) -> list[float]:
    """Transfer entropies recomputed under the no-association null.

    Each sample permutes (or redraws, for bootstrap) the *joint* source
    history rows as whole rows, so source marginals and cross-source
    correlations survive while the pairing with the destination is
    destroyed. Sample i uses a seed derived from (cfg.seed, i), so results
    are deterministic and independent of evaluation order.
    """
    sources = tuple(sources)
    if not sources:
        raise ValidationError("surrogate test needs a non-empty source set")
    if dest in sources:
        raise ValidationError("destination cannot be one of its sources")
    _check_kind(view, kind)
    want_rad = kind.method == "discrete-plugin"
    z, z_rad = _resolve(view, [next_value(dest)], want_rad)
    wd, wd_rad = _resolve(view, [history(dest)], want_rad)
    ws, ws_rad = _resolve(view, [history(s) for s in sources], want_rad)
    h_self = _cond_entropy_mats(kind, z, z_rad, wd, wd_rad)

    def one(i: int) -> float:
        rng = np.random.default_rng(derive_seed(cfg.seed, i))
        idx = surrogate_indices(view.rows, cfg.method, rng)
        w = np.hstack([wd, ws[idx]])
        h_full = _cond_entropy_mats(kind, z, z_rad, w, list(wd_rad) + list(ws_rad))
        return h_self - h_full

    return parallel_map(one, range(cfg.count))


def empirical_quantile(samples: Sequence[float], alpha: float) -> float:
    """Smallest sample value v with #(samples <= v)/N >= alpha (ceiling-rank
    order statistic, no interpolation)."""
    if len(samples) == 0:
        raise ValidationError("empirical quantile of an empty sample")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    ordered = np.sort(np.asarray(samples, dtype=float))
    # tolerance keeps exact multiples like 0.95*20 from rounding up a rank
    rank = math.ceil(alpha * len(ordered) - 1e-9)
    return float(ordered[min(max(rank, 1), len(ordered)) - 1])
