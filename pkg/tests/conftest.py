"""Shared fixtures and independent oracle helpers for the test suite.

The oracles here deliberately avoid the library's own code paths: entropy
by dictionary counting, chi-squared CDF by quadrature, DAG counts by the
inclusion-exclusion recurrence, stationary covariance by fixed-point
iteration.
"""

import math

import numpy as np
import pytest

import netinfer as ni


# ---------------------------------------------------------------------------
# independent oracles

def counting_cond_entropy(z_rows, w_rows):
    """Plug-in H(Z|W) in bits via plain dictionaries (no numpy paths)."""
    n = len(z_rows)
    cw: dict = {}
    czw: dict = {}
    for zr, wr in zip(z_rows, w_rows):
        wk = tuple(np.atleast_1d(wr).tolist())
        zk = tuple(np.atleast_1d(zr).tolist())
        cw[wk] = cw.get(wk, 0) + 1
        czw[(zk, wk)] = czw.get((zk, wk), 0) + 1
    h = 0.0
    for (zk, wk), c in czw.items():
        h += (c / n) * (math.log2(cw[wk]) - math.log2(c))
    return h


def chi2_cdf_quadrature(df: int, x: float, panels: int = 4096) -> float:
    """CDF of chi-squared(df) by Simpson quadrature after the substitution
    u = sqrt(t), which removes the integrable singularity at zero."""
    if x <= 0:
        return 0.0
    upper = math.sqrt(x)
    norm = 2.0 / (2.0 ** (df / 2.0) * math.gamma(df / 2.0))
    u = np.linspace(0.0, upper, 2 * panels + 1)
    with np.errstate(divide="ignore"):
        integrand = norm * u ** (df - 1) * np.exp(-u * u / 2.0)
    if df == 1:
        integrand[0] = norm  # u^0 at u=0
    h = upper / (2 * panels)
    weights = np.ones_like(u)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * np.sum(weights * integrand))


def chi2_quantile_quadrature(df: int, alpha: float) -> float:
    lo, hi = 0.0, 1.0
    while chi2_cdf_quadrature(df, hi) < alpha:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf_quadrature(df, mid) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return 0.5 * (lo + hi)


def labelled_dag_count(n: int) -> int:
    """Inclusion-exclusion recurrence over the number of sink-free parts."""
    a = [1]
    for k in range(1, n + 1):
        total = 0
        for j in range(1, k + 1):
            total += (-1) ** (j + 1) * math.comb(k, j) * 2 ** (j * (k - j)) * a[k - j]
        a.append(total)
    return a[n]


def stationary_covariance(a: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Fixed point of P = A P A^T + Q."""
    p = q.copy()
    for _ in range(100000):
        nxt = a @ p @ a.T + q
        if np.max(np.abs(nxt - p)) < 1e-14:
            return nxt
        p = nxt
    raise RuntimeError("covariance iteration did not converge")


def gaussian_cond_var(cov: np.ndarray, zi, wi) -> float:
    czz = cov[np.ix_(zi, zi)]
    cww = cov[np.ix_(wi, wi)]
    czw = cov[np.ix_(zi, wi)]
    return float((czz - czw @ np.linalg.solve(cww, czw.T))[0, 0])


# ---------------------------------------------------------------------------
# dataset builders

def chain_dag(m: int) -> ni.Dag:
    return ni.Dag.from_edges(m, [(i, i + 1) for i in range(m - 1)])


def simulate_chain(m: int, seed: int, n: int = 10000, epsilon: float = 0.4,
                   noise: float = 1e-3) -> ni.SimOutput:
    cfg = ni.GdsConfig(
        graph=chain_dag(m),
        model=ni.CoupledLogisticModel(r=4.0, epsilon=epsilon),
        process_noise_std=noise,
        obs_noise_std=noise,
        n=n,
        burn_in=1000,
        seed=seed,
    )
    return ni.simulate_coupled_logistic(cfg)


def random_discrete_view(m: int, n: int, symbols: int, seed: int,
                         kappa: int = 1) -> ni.EmbeddedView:
    rng = np.random.default_rng(seed)
    sym = rng.integers(0, symbols, size=(m, n))
    disc = ni.DiscretizedSeries.from_symbols(sym, (symbols,) * m)
    return ni.delay_embed(disc, ni.EmbeddingSpec.uniform(m, 1, kappa))


@pytest.fixture(scope="session")
def chain3_discrete_view():
    """One seeded 3-vertex chain dataset, 4 bins, kappa=2 (reused read-only)."""
    out = simulate_chain(3, seed=101)
    disc = ni.discretize(out.observations, 4)
    return ni.delay_embed(disc, ni.EmbeddingSpec.uniform(3, 1, 2))
