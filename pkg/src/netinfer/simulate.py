"""Ground-truth generators: coupled logistic maps and linear-Gaussian nets.

Coupled logistic dynamics per vertex (p = number of parents):

    x'_i = (1 - eps) * g(x_i) + (eps / p) * sum_j g(x_parent_j) + noise,
    g(z) = r * z * (1 - z),

with the pure self-map g(x_i) + noise for parentless vertices (the
coupling mixture is undefined at p = 0). Noise excursions are reflected
back into [0, 1]. Observations are the scalar state plus observation
noise.

Linear-Gaussian dynamics:

    x' = A x + N(0, process_std^2),   A = self * I + coupling,
    y  = x + N(0, obs_std^2),

valid only when the spectral radius of A stays below one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .errors import NumericError, ValidationError
from .graph import Dag, is_acyclic
from .timeseries import TimeSeriesSet

DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class CoupledLogisticModel:
    r: float = 4.0
    epsilon: float = 0.4

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError("epsilon must satisfy 0 < epsilon < 1")
        if self.r <= 0:
            raise ValidationError("r must be positive")


@dataclass(frozen=True)
class LinearGaussianModel:
    coupling: tuple[tuple[float, ...], ...]  # coupling[i][j]: weight of j -> i
    self_weight: float = 0.9

    def matrix(self, m: int) -> np.ndarray:
        w = np.asarray(self.coupling, dtype=float)
        if w.shape != (m, m):
            raise ValidationError(f"coupling must be {m}x{m}, got {w.shape}")
        return self.self_weight * np.eye(m) + w


@dataclass(frozen=True)
class GdsConfig:
    """Simulator specification: graph, local map, noise and sampling plan."""

    graph: Dag
    model: Union[CoupledLogisticModel, LinearGaussianModel]
    process_noise_std: float = 0.0
    obs_noise_std: float = 0.0
    n: int = 10000
    burn_in: int = DEFAULT_BURN_IN
    seed: int = 0
    names: Optional[tuple[str, ...]] = None
    initial_states: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("n must be >= 2")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be >= 0")
        if self.process_noise_std < 0:
            raise ValidationError("process_noise_std must be >= 0")
        if self.obs_noise_std < 0:
            raise ValidationError("obs_noise_std must be >= 0")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")
        if not is_acyclic(self.graph):
            raise ValidationError("ground-truth graph must be acyclic")
        if self.names is not None and len(self.names) != self.graph.m:
            raise ValidationError("names length does not match vertex count")
        if (self.initial_states is not None
                and len(self.initial_states) != self.graph.m):
            raise ValidationError("initial_states length does not match vertex count")

    def resolved_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        return tuple(f"V{i + 1}" for i in range(self.graph.m))


@dataclass(frozen=True)
class SimOutput:
    observations: TimeSeriesSet
    states: np.ndarray  # (M, n), diagnostics only
    truth: Dag
    config_echo: GdsConfig


def _reflect_unit(x: np.ndarray) -> np.ndarray:
    """Fold values back into [0, 1] by reflecting at the boundaries."""
    for _ in range(64):
        out_low = x < 0.0
        out_high = x > 1.0
        if not (out_low.any() or out_high.any()):
            return x
        x = np.where(out_low, -x, x)
        x = np.where(out_high, 2.0 - x, x)
    raise NumericError("state reflection did not converge (noise too large?)")


def simulate_coupled_logistic(cfg: GdsConfig) -> SimOutput:
    """Iterate the coupled logistic map and observe it through noise."""
    if not isinstance(cfg.model, CoupledLogisticModel):
        raise ValidationError("config model is not coupled-logistic")
    m = cfg.graph.m
    model = cfg.model
    rng = np.random.default_rng(cfg.seed)
    if cfg.initial_states is not None:
        x = np.asarray(cfg.initial_states, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValidationError("initial_states must lie in [0, 1]")
    else:
        x = rng.uniform(0.0, 1.0, size=m)
    parents = [np.asarray(ps, dtype=int) for ps in cfg.graph.parents]

    total = cfg.burn_in + cfg.n
    states = np.empty((total, m), dtype=float)
    observations = np.empty((total, m), dtype=float)
    eps = model.epsilon
    for step in range(total):
        g = model.r * x * (1.0 - x)
        new = np.empty(m, dtype=float)
        for i in range(m):
            ps = parents[i]
            if ps.size:
                new[i] = (1.0 - eps) * g[i] + (eps / ps.size) * g[ps].sum()
            else:
                new[i] = g[i]
        new = new + rng.normal(0.0, cfg.process_noise_std, size=m)
        if not np.all(np.isfinite(new)):
            raise NumericError(f"non-finite state at step {step}")
        x = _reflect_unit(new)
        states[step] = x
        observations[step] = x + rng.normal(0.0, cfg.obs_noise_std, size=m)

    keep_states = states[cfg.burn_in:].T.copy()
    keep_obs = observations[cfg.burn_in:].T.copy()
    ts = TimeSeriesSet(keep_obs, cfg.resolved_names())
    return SimOutput(observations=ts, states=keep_states,
                     truth=cfg.graph, config_echo=cfg)


def simulate_linear_gaussian(cfg: GdsConfig) -> SimOutput:
    """Iterate the linear-Gaussian network from a zero initial state."""
    if not isinstance(cfg.model, LinearGaussianModel):
        raise ValidationError("config model is not linear-gaussian")
    m = cfg.graph.m
    a = cfg.model.matrix(m)
    w = np.asarray(cfg.model.coupling, dtype=float)
    for i in range(m):
        for j in range(m):
            if w[i, j] != 0.0 and not cfg.graph.has_edge(j, i):
                raise ValidationError(
                    f"coupling[{i}][{j}] is nonzero but the graph has no "
                    f"edge {j} -> {i}"
                )
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    if radius >= 1.0:
        raise ValidationError(
            f"nonstationary system: spectral radius {radius:.4f} >= 1"
        )
    rng = np.random.default_rng(cfg.seed)
    x = (np.asarray(cfg.initial_states, dtype=float)
         if cfg.initial_states is not None else np.zeros(m))

    total = cfg.burn_in + cfg.n
    states = np.empty((total, m), dtype=float)
    observations = np.empty((total, m), dtype=float)
    for step in range(total):
        x = a @ x + rng.normal(0.0, cfg.process_noise_std, size=m)
        if not np.all(np.isfinite(x)):
            raise NumericError(f"non-finite state at step {step}")
        states[step] = x
        observations[step] = x + rng.normal(0.0, cfg.obs_noise_std, size=m)

    keep_states = states[cfg.burn_in:].T.copy()
    keep_obs = observations[cfg.burn_in:].T.copy()
    ts = TimeSeriesSet(keep_obs, cfg.resolved_names())
    return SimOutput(observations=ts, states=keep_states,
                     truth=cfg.graph, config_echo=cfg)


def simulate(cfg: GdsConfig) -> SimOutput:
    """Dispatch on the configured model type."""
    if isinstance(cfg.model, CoupledLogisticModel):
        return simulate_coupled_logistic(cfg)
    return simulate_linear_gaussian(cfg)


def coupling_matrix_for_chain(m: int, weight: float) -> tuple[tuple[float, ...], ...]:
    """Convenience: weight on each edge i -> i+1 of a chain, zero elsewhere."""
    w = np.zeros((m, m))
    for i in range(m - 1):
        w[i + 1, i] = weight
    return tuple(tuple(row) for row in w)


def replace_seed(cfg: GdsConfig, seed: int) -> GdsConfig:
    return replace(cfg, seed=seed)
