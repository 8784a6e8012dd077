"""Gibbs sampler for a finite-M Dirichlet process mixture of multivariate
normals.

Model
-----
Each of M component slots carries a parameter theta_j = (mu_j, Lambda_j); the
vector (theta_1, ..., theta_M) is an iid sample from a random distribution G
with a Dirichlet process law, concentration alpha and Normal-Wishart base
measure G0.  Observations pick a slot uniformly (z_i uniform on the M slots)
and then y_i ~ N_d(mu_{z_i}, Lambda_{z_i}^{-1}).  Discreteness of G makes
slots share values: the configuration vector c maps each slot to one of k
distinct values theta*_1..theta*_k, and two units are clustered together
exactly when their slots map to the same distinct value.  Components may be
empty, so the number of occupied clusters is at most k which is at most M.

One sweep resamples, in order: the allocations z, the configuration c (one
urn draw per slot, integrating G out), the distinct values theta* (conjugate
refresh given their allocated data), and alpha (beta augmentation).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, multigammaln

from .clusterings import Clustering
from .normal_wishart import (
    NormalWishart,
    log_marginal_from_stats,
    mvn_logpdf_prec,
    posterior_from_stats,
    sample_normal_wishart,
)
from .trace import ClusteringTrace, TraceEntry, TraceMeta

__all__ = [
    "ModelConfig",
    "SamplerState",
    "allocation_log_probs",
    "init_state",
    "joint_log_density",
    "remix_components",
    "run_chain",
    "update_allocations",
    "update_alpha",
    "update_configuration",
]


@dataclass(frozen=True)
class ModelConfig:
    """Model and prior settings.

    M is the number of component slots; (s, S_mat, mu0, psi) parameterize the
    Normal-Wishart base measure; alpha has a Gamma(alpha_shape, alpha_rate)
    prior (rate parameterization, so the default Gamma(0.1, 0.1) has mean 1
    and variance 10).
    """

    M: int
    s: float
    S_mat: np.ndarray
    mu0: np.ndarray
    psi: float
    alpha_shape: float = 0.1
    alpha_rate: float = 0.1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if self.alpha_shape <= 0 or self.alpha_rate <= 0:
            raise ValueError("alpha prior shape and rate must be positive")
        mu0 = np.atleast_1d(np.asarray(self.mu0, dtype=float))
        S = np.asarray(self.S_mat, dtype=float)
        if self.s < mu0.size:
            raise ValueError(f"need s >= d = {mu0.size} for a proper base measure")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "S_mat", S)
        # delegates symmetry/definiteness checks
        object.__setattr__(self, "_prior", NormalWishart(mu0, self.psi, self.s, S))

    @property
    def prior(self) -> NormalWishart:
        return self._prior

    @property
    def d(self) -> int:
        return self.mu0.size

    @classmethod
    def from_data(cls, data, M: int = 30, s: float | None = None, psi: float = 100.0,
                  alpha_shape: float = 0.1, alpha_rate: float = 0.1) -> "ModelConfig":
        """Data-driven defaults: mu0 and S_mat are the sample mean and
        covariance, s the smallest integer degrees of freedom keeping the base
        measure proper (at least 4).

        psi defaults large so the prior on a component mean is diffuse
        relative to the component's own spread; small psi ties the means to
        mu0 at the within-component scale, which penalizes well-separated
        clusters so heavily that the posterior prefers merging them.
        """
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 1:
            raise ValueError("data must be a non-empty n x d matrix")
        d = data.shape[1]
        mu0 = data.mean(axis=0)
        if data.shape[0] > 1:
            S = np.atleast_2d(np.cov(data, rowvar=False))
        else:
            S = np.eye(d)
        S = 0.5 * (S + S.T)
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            tr = float(np.trace(S))
            ridge = 1e-8 * tr / d if tr > 0 else 1e-8
            S = S + ridge * np.eye(d)
        if s is None:
            s = float(max(d, 4))
        return cls(M=M, s=s, S_mat=S, mu0=mu0, psi=psi,
                   alpha_shape=alpha_shape, alpha_rate=alpha_rate)

    def digest(self) -> str:
        payload = {
            "M": self.M,
            "s": self.s,
            "S_mat": self.S_mat.tolist(),
            "mu0": self.mu0.tolist(),
            "psi": self.psi,
            "alpha_shape": self.alpha_shape,
            "alpha_rate": self.alpha_rate,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class SamplerState:
    """Latent state of one Gibbs iteration.

    z maps units to slots (0..M-1), c maps slots to distinct values (0..k-1,
    contiguous, every value referenced at least once), mus/lams hold the k
    distinct component parameters, alpha the concentration.
    """

    z: np.ndarray
    c: np.ndarray
    mus: list
    lams: list
    k: int
    alpha: float
    _logdets: list = field(default_factory=list, repr=False)

    def logdets(self) -> list:
        if len(self._logdets) != self.k:
            self._logdets = [float(np.linalg.slogdet(l)[1]) for l in self.lams]
        return self._logdets


def _as_generator(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def init_state(config: ModelConfig, data, seed) -> SamplerState:
    """Uniform random allocations, identity configuration (k = M slots each
    their own value drawn from the base measure), alpha from its prior."""
    data = np.asarray(data, dtype=float)
    if not np.isfinite(data).all():
        raise ValueError("data contains non-finite values")
    if data.ndim != 2 or data.shape[1] != config.d:
        raise ValueError(f"data must be n x {config.d}")
    rng = _as_generator(seed)
    n = data.shape[0]
    z = rng.integers(0, config.M, size=n)
    mus, lams = [], []
    for _ in range(config.M):
        mu, lam = sample_normal_wishart(rng, config.prior)
        mus.append(mu)
        lams.append(lam)
    alpha = float(rng.gamma(config.alpha_shape, 1.0 / config.alpha_rate))
    return SamplerState(
        z=z.astype(np.int64),
        c=np.arange(config.M, dtype=np.int64),
        mus=mus,
        lams=lams,
        k=config.M,
        alpha=alpha,
    )


def allocation_log_probs(state: SamplerState, data) -> np.ndarray:
    """Unnormalized log allocation weights, one column per slot; the uniform
    slot prior is constant and omitted."""
    data = np.asarray(data, dtype=float)
    logdets = state.logdets()
    dens = np.empty((data.shape[0], state.k))
    for ell in range(state.k):
        dens[:, ell] = mvn_logpdf_prec(data, state.mus[ell], state.lams[ell], logdets[ell])
    return dens[:, state.c]


def _sample_rows_categorical(rng, logw: np.ndarray) -> np.ndarray:
    logw = logw - logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    cum = np.cumsum(w, axis=1)
    u = rng.random((logw.shape[0], 1)) * cum[:, -1:]
    return np.minimum((cum < u).sum(axis=1), logw.shape[1] - 1).astype(np.int64)


def _sample_categorical(rng, logw: np.ndarray) -> int:
    logw = logw - logw.max()
    w = np.exp(logw)
    cum = np.cumsum(w)
    u = rng.random() * cum[-1]
    return int(min(np.searchsorted(cum, u, side="right"), logw.size - 1))


def update_allocations(state: SamplerState, data, config: ModelConfig, rng) -> SamplerState:
    state.z = _sample_rows_categorical(rng, allocation_log_probs(state, data))
    return state


def _group_stats(data: np.ndarray, groups: np.ndarray, num_groups: int):
    """Per-group count, mean and scatter about the group mean (zeros for
    empty groups)."""
    n, d = data.shape
    counts = np.bincount(groups, minlength=num_groups)
    sums = np.empty((num_groups, d))
    for t in range(d):
        sums[:, t] = np.bincount(groups, weights=data[:, t], minlength=num_groups)
    denom = np.maximum(counts, 1)[:, None]
    means = sums / denom
    m2 = np.empty((num_groups, d, d))
    for t1 in range(d):
        for t2 in range(t1, d):
            v = np.bincount(groups, weights=data[:, t1] * data[:, t2], minlength=num_groups)
            m2[:, t1, t2] = v
            m2[:, t2, t1] = v
    scatters = m2 - counts[:, None, None] * means[:, :, None] * means[:, None, :]
    return counts, means, scatters


def _group_loglik(m: int, ybar, scatter, mu, lam, logdet: float) -> float:
    """Log likelihood of a block of m observations under one component; the
    empty block contributes log 1 = 0."""
    if m == 0:
        return 0.0
    d = mu.size
    dev = ybar - mu
    quad = m * float(dev @ lam @ dev) + float(np.einsum("ij,ji->", lam, scatter))
    return 0.5 * m * (logdet - d * np.log(2.0 * np.pi)) - 0.5 * quad


def update_configuration(state: SamplerState, data, config: ModelConfig, rng) -> SamplerState:
    """One urn sweep over the slots followed by a conjugate refresh of every
    distinct value.

    For slot j the weight of reusing distinct value ell is (occupancy of ell
    among the other slots) times the likelihood of slot j's data under
    theta*_ell; the weight of opening a fresh value is alpha times the
    integrated likelihood under the base measure.  A fresh value is drawn from
    the base-measure posterior given slot j's data.
    """
    data = np.asarray(data, dtype=float)
    M = config.M
    counts, means, scatters = _group_stats(data, state.z, M)
    prior = config.prior
    log_alpha = np.log(state.alpha)

    c = state.c.copy()
    k = state.k
    mus = list(state.mus)
    lams = list(state.lams)
    logdets = list(state.logdets())
    occ = np.bincount(c, minlength=k)

    # integrated likelihood of each slot's block under G0: reused across the
    # sweep since z is fixed here
    slot_marg = np.array(
        [log_marginal_from_stats(prior, int(counts[j]), means[j], scatters[j])
         for j in range(M)]
    )

    for j in range(M):
        old = c[j]
        occ[old] -= 1
        if occ[old] == 0:
            del mus[old], lams[old], logdets[old]
            occ = np.delete(occ, old)
            c = np.where(c > old, c - 1, c)
            k -= 1
        m_j, ybar_j, sc_j = int(counts[j]), means[j], scatters[j]
        logw = np.empty(k + 1)
        for ell in range(k):
            logw[ell] = np.log(occ[ell]) + _group_loglik(
                m_j, ybar_j, sc_j, mus[ell], lams[ell], logdets[ell]
            )
        logw[k] = log_alpha + slot_marg[j]
        choice = _sample_categorical(rng, logw)
        if choice == k:
            post = posterior_from_stats(prior, m_j, ybar_j, sc_j)
            mu_new, lam_new = sample_normal_wishart(rng, post)
            mus.append(mu_new)
            lams.append(lam_new)
            logdets.append(float(np.linalg.slogdet(lam_new)[1]))
            occ = np.append(occ, 1)
            c[j] = k
            k += 1
        else:
            occ[choice] += 1
            c[j] = choice

    state.c, state.k, state.mus, state.lams = c, k, mus, lams
    state._logdets = logdets
    return remix_components(state, data, config, rng)


def remix_components(state: SamplerState, data, config: ModelConfig, rng) -> SamplerState:
    """Redraw every distinct value from its conjugate posterior given the data
    currently allocated to it; cluster memberships are untouched."""
    data = np.asarray(data, dtype=float)
    values = state.c[state.z]
    counts, means, scatters = _group_stats(data, values, state.k)
    for ell in range(state.k):
        post = posterior_from_stats(config.prior, int(counts[ell]), means[ell], scatters[ell])
        state.mus[ell], state.lams[ell] = sample_normal_wishart(rng, post)
    state._logdets = []
    return state


def update_alpha(state: SamplerState, config: ModelConfig, rng) -> SamplerState:
    """Beta-augmentation update: eta ~ Beta(alpha+1, M), then alpha from a
    two-component Gamma mixture with shapes (a+k, a+k-1), rate b - log eta and
    mixing odds (a+k-1) : M (b - log eta)."""
    a, b, M, k = config.alpha_shape, config.alpha_rate, config.M, state.k
    eta = rng.beta(state.alpha + 1.0, M)
    rate = b - np.log(eta)
    odds = (a + k - 1.0) / (M * rate)
    shape = a + k if rng.random() < odds / (1.0 + odds) else a + k - 1.0
    state.alpha = float(rng.gamma(shape, 1.0 / rate))
    return state


def joint_log_density(state: SamplerState, data, config: ModelConfig) -> float:
    """Log of the joint density of data and all latents; a finite value is a
    cheap sanity check on the state."""
    data = np.asarray(data, dtype=float)
    n, d = data.shape
    prior = config.prior
    logdets = state.logdets()
    # data given latents, plus the uniform slot prior
    values = state.c[state.z]
    total = -n * np.log(config.M)
    for ell in range(state.k):
        rows = data[values == ell]
        if rows.size:
            total += mvn_logpdf_prec(rows, state.mus[ell], state.lams[ell], logdets[ell]).sum()
    # configuration: exchangeable urn probability of the value partition
    occ = np.bincount(state.c, minlength=state.k)
    total += (
        state.k * np.log(state.alpha)
        + gammaln(state.alpha)
        - gammaln(state.alpha + config.M)
        + gammaln(occ).sum()
    )
    # distinct values under the base measure
    s, S, psi, mu0 = prior.s, prior.S, prior.psi, prior.mu0
    _, logdet_S = np.linalg.slogdet(S)
    log_wishart_norm = 0.5 * s * d * np.log(2.0) - 0.5 * s * logdet_S + multigammaln(s / 2.0, d)
    for ell in range(state.k):
        lam = state.lams[ell]
        total += 0.5 * (s - d - 1.0) * logdets[ell] - 0.5 * float(np.einsum("ij,ji->", S, lam))
        total -= log_wishart_norm
        dev = state.mus[ell] - mu0
        total += 0.5 * (logdets[ell] - d * np.log(2.0 * np.pi * psi))
        total -= 0.5 / psi * float(dev @ lam @ dev)
    # concentration prior
    a, b = config.alpha_shape, config.alpha_rate
    total += a * np.log(b) - gammaln(a) + (a - 1.0) * np.log(state.alpha) - b * state.alpha
    return float(total)


def run_chain(config: ModelConfig, data, iterations: int, burn_in: int,
              thinning: int, seed) -> ClusteringTrace:
    """Run the Gibbs sweeps and record the induced clustering of every kept
    iteration (those past burn_in, one in every `thinning`)."""
    if not iterations > burn_in >= 0:
        raise ValueError(f"need iterations > burn_in >= 0, got {iterations}, {burn_in}")
    if thinning < 1:
        raise ValueError("thinning must be >= 1")
    data = np.asarray(data, dtype=float)
    rng = _as_generator(seed)
    state = init_state(config, data, rng)
    entries = []
    for t in range(1, iterations + 1):
        try:
            update_allocations(state, data, config, rng)
            update_configuration(state, data, config, rng)
            update_alpha(state, config, rng)
        except (ValueError, np.linalg.LinAlgError) as err:
            raise RuntimeError(f"sampler failed at iteration {t}: {err}") from err
        if t > burn_in and (t - burn_in - 1) % thinning == 0:
            clustering = Clustering(state.c[state.z])
            entries.append(
                TraceEntry(iteration=t, clustering=clustering,
                           k=clustering.k, alpha=state.alpha)
            )
    meta = TraceMeta(
        n=data.shape[0],
        seed=seed if isinstance(seed, int) else None,
        burn_in=burn_in,
        thinning=thinning,
        config_hash=config.digest(),
    )
    return ClusteringTrace(entries, meta)
