"""Normal-Wishart conjugate algebra and samplers.

Parameterization
----------------
The component precision has density proportional to

    |Lambda|^{(s - d - 1)/2} exp(-tr(S Lambda)/2),

i.e. a Wishart with degrees of freedom s and scale matrix S^{-1}, so that
E[Lambda] = s S^{-1}.  Given Lambda, the component mean is
N_d(mu0, psi Lambda^{-1}).  The pair (mean weight kappa = 1/psi, degrees of
freedom s, inverse scale S) is conjugate for multivariate normal data with
unknown mean and precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import multigammaln

__all__ = [
    "NormalWishart",
    "conjugate_posterior",
    "log_marginal_likelihood",
    "mvn_logpdf_prec",
    "sample_normal_wishart",
    "sample_wishart",
]

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class NormalWishart:
    """Parameters (mu0, psi, s, S) of a Normal-Wishart law over (mu, Lambda)."""

    mu0: np.ndarray
    psi: float
    s: float
    S: np.ndarray

    def __post_init__(self):
        mu0 = np.atleast_1d(np.asarray(self.mu0, dtype=float))
        S = np.asarray(self.S, dtype=float)
        d = mu0.size
        if S.shape != (d, d):
            raise ValueError(f"scale matrix shape {S.shape} does not match d={d}")
        if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12):
            raise ValueError("scale matrix must be symmetric")
        if self.psi <= 0:
            raise ValueError("psi must be positive")
        if self.s <= d - 1:
            raise ValueError(f"need degrees of freedom s > d-1 = {d - 1}, got {self.s}")
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            raise ValueError("scale matrix must be positive definite") from None
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "psi", float(self.psi))
        object.__setattr__(self, "s", float(self.s))

    @property
    def d(self) -> int:
        return self.mu0.size


def _obs_stats(obs: np.ndarray, d: int):
    obs = np.asarray(obs, dtype=float).reshape(-1, d)
    m = obs.shape[0]
    if m == 0:
        return 0, np.zeros(d), np.zeros((d, d))
    ybar = obs.mean(axis=0)
    dev = obs - ybar
    return m, ybar, dev.T @ dev


def posterior_from_stats(prior: NormalWishart, m: int, ybar, scatter) -> NormalWishart:
    """Conjugate update from sufficient statistics (count, mean, scatter about
    the mean).  m = 0 reproduces the prior."""
    if m == 0:
        return prior
    kappa0 = 1.0 / prior.psi
    kappam = kappa0 + m
    mum = (kappa0 * prior.mu0 + m * np.asarray(ybar)) / kappam
    dev = np.asarray(ybar) - prior.mu0
    Sm = prior.S + np.asarray(scatter) + (kappa0 * m / kappam) * np.outer(dev, dev)
    Sm = 0.5 * (Sm + Sm.T)
    return NormalWishart(mum, 1.0 / kappam, prior.s + m, Sm)


def conjugate_posterior(prior: NormalWishart, observations) -> NormalWishart:
    """Posterior Normal-Wishart given rows of observations (possibly none)."""
    m, ybar, scatter = _obs_stats(observations, prior.d)
    return posterior_from_stats(prior, m, ybar, scatter)


def log_marginal_from_stats(prior: NormalWishart, m: int, ybar, scatter) -> float:
    """Log of the integrated likelihood of a block of m observations,

        p(block) = pi^{-md/2} (kappa0/kappa_m)^{d/2}
                   Gamma_d(s_m/2)/Gamma_d(s/2) |S|^{s/2} / |S_m|^{s_m/2}.

    The empty block integrates to 1."""
    if m == 0:
        return 0.0
    d = prior.d
    post = posterior_from_stats(prior, m, ybar, scatter)
    kappa0 = 1.0 / prior.psi
    kappam = 1.0 / post.psi
    _, logdet_S = np.linalg.slogdet(prior.S)
    _, logdet_Sm = np.linalg.slogdet(post.S)
    return (
        -0.5 * m * d * np.log(np.pi)
        + 0.5 * d * (np.log(kappa0) - np.log(kappam))
        + multigammaln(post.s / 2.0, d)
        - multigammaln(prior.s / 2.0, d)
        + 0.5 * prior.s * logdet_S
        - 0.5 * post.s * logdet_Sm
    )


def log_marginal_likelihood(prior: NormalWishart, observations) -> float:
    m, ybar, scatter = _obs_stats(observations, prior.d)
    return log_marginal_from_stats(prior, m, ybar, scatter)


def _wishart_factor(rng: np.random.Generator, s: float, S: np.ndarray) -> np.ndarray:
    """Return F with F F^T ~ Wishart(df=s, scale=S^{-1}), via the Bartlett
    construction applied to any square root of S^{-1}."""
    d = S.shape[0]
    try:
        Ls = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ValueError("Wishart inverse-scale matrix is not positive definite") from None
    # S^{-1} = B B^T with B = Ls^{-T}
    B = solve_triangular(Ls, np.eye(d), lower=True).T
    A = np.zeros((d, d))
    dfs = s - np.arange(d)
    np.fill_diagonal(A, np.sqrt(rng.chisquare(dfs)))
    if d > 1:
        idx = np.tril_indices(d, k=-1)
        A[idx] = rng.standard_normal(idx[0].size)
    return B @ A


def sample_wishart(rng: np.random.Generator, s: float, S: np.ndarray) -> np.ndarray:
    """Draw a precision matrix with density |L|^{(s-d-1)/2} exp(-tr(S L)/2)."""
    F = _wishart_factor(rng, s, np.asarray(S, dtype=float))
    W = F @ F.T
    return 0.5 * (W + W.T)


def sample_normal_wishart(rng: np.random.Generator, params: NormalWishart):
    """Draw (mu, Lambda) with Lambda Wishart as above and mu | Lambda normal
    with covariance psi Lambda^{-1}."""
    d = params.d
    F = _wishart_factor(rng, params.s, params.S)
    lam = F @ F.T
    lam = 0.5 * (lam + lam.T)
    z = rng.standard_normal(d)
    # cov(mu) = psi (F F^T)^{-1}, realized through a solve against F^T
    mu = params.mu0 + np.sqrt(params.psi) * np.linalg.solve(F.T, z)
    return mu, lam


def mvn_logpdf_prec(points, mu, lam, logdet_lam: float | None = None) -> np.ndarray:
    """Row-wise log density of N_d(mu, Lambda^{-1}) given the precision Lambda."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    if logdet_lam is None:
        _, logdet_lam = np.linalg.slogdet(lam)
    dev = pts - mu
    quad = np.einsum("ij,jk,ik->i", dev, lam, dev)
    return 0.5 * (logdet_lam - d * _LOG_2PI) - 0.5 * quad
