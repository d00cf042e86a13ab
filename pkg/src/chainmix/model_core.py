"""Core types, generative sampling, and sufficient statistics for Markov chain mixtures.

A mixture of k finite-state Markov chains over states {0, ..., s-1} is
parameterized by component weights mu, per-component initial distributions
nu_i, and per-component row-stochastic transition matrices P_i.  Each
trajectory is generated by drawing a latent component label Z with
probabilities mu, an initial state from nu_Z, and subsequent states from
the rows of P_Z.

States are 0-based everywhere in memory; file readers/writers can convert
to and from 1-based indexing (see chainmix.dataio).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Tolerance for accepting externally supplied probability vectors.  Values
# produced internally (normalized counts) are exact to a few ulp.
_SUM_TOL = 1e-9


def as_rng(seed) -> np.random.Generator:
    """Coerce an int seed, SeedSequence, Generator, or None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def uniform_simplex(rng: np.random.Generator, *shape) -> np.ndarray:
    """Draw vectors uniformly from the probability simplex.

    The last axis of `shape` indexes simplex coordinates.  Each vector is
    produced by normalizing independent exponential variates, which yields
    the uniform (flat Dirichlet) distribution on the simplex.
    """
    x = rng.standard_exponential(size=shape)
    return x / x.sum(axis=-1, keepdims=True)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TrajectoryDataset:
    """A collection of integer-state trajectories over states {0, ..., s-1}.

    Trajectories may have unequal lengths.  A trajectory of length L has
    L - 1 transitions; length-1 trajectories (no transitions) are permitted
    and reported via `zero_transition_indices`.
    """

    trajectories: tuple
    s: int

    def __post_init__(self):
        trajs = []
        for idx, t in enumerate(self.trajectories):
            arr = np.asarray(t, dtype=np.int64)
            if arr.ndim != 1 or arr.size < 1:
                raise ValidationError(
                    f"trajectory {idx} must be a nonempty 1-D integer sequence"
                )
            trajs.append(_freeze(arr))
        if not trajs:
            raise ValidationError("dataset must contain at least one trajectory")
        if self.s < 1:
            raise ValidationError("state count s must be >= 1")
        lo = min(int(t.min()) for t in trajs)
        hi = max(int(t.max()) for t in trajs)
        if lo < 0 or hi >= self.s:
            raise ValidationError(
                f"state indices must lie in [0, {self.s}); found range [{lo}, {hi}]"
            )
        object.__setattr__(self, "trajectories", tuple(trajs))

    @property
    def n(self) -> int:
        return len(self.trajectories)

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def lengths(self) -> np.ndarray:
        """Per-trajectory transition counts (length minus one)."""
        return np.array([t.size - 1 for t in self.trajectories], dtype=np.int64)

    @property
    def mean_transitions(self) -> float:
        return float(self.lengths.mean())

    @property
    def zero_transition_indices(self) -> tuple:
        """Indices of trajectories that consist of a single state."""
        return tuple(i for i, t in enumerate(self.trajectories) if t.size == 1)


@dataclass(frozen=True)
class MixtureParams:
    """Point parameters (mu, nu_i, P_i) of a k-component chain mixture.

    mu : (k,) component probabilities summing to 1.
    nu : (k, s) rows are initial-state distributions.
    P  : (k, s, s) each P[i] is row-stochastic.
    """

    mu: np.ndarray
    nu: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        nu = np.asarray(self.nu, dtype=np.float64)
        P = np.asarray(self.P, dtype=np.float64)
        if mu.ndim != 1 or nu.ndim != 2 or P.ndim != 3:
            raise ValidationError("expected shapes mu:(k,), nu:(k,s), P:(k,s,s)")
        k = mu.shape[0]
        s = nu.shape[1]
        if nu.shape[0] != k or P.shape != (k, s, s):
            raise ValidationError(
                f"inconsistent shapes: mu {mu.shape}, nu {nu.shape}, P {P.shape}"
            )
        for name, arr in (("mu", mu), ("nu", nu), ("P", P)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite entries")
            if np.any(arr < 0):
                raise ValidationError(f"{name} contains negative entries")
        if abs(mu.sum() - 1.0) > _SUM_TOL:
            raise ValidationError(f"mu must sum to 1 (got {mu.sum()!r})")
        if np.any(np.abs(nu.sum(axis=1) - 1.0) > _SUM_TOL):
            raise ValidationError("each nu_i must sum to 1")
        if np.any(np.abs(P.sum(axis=2) - 1.0) > _SUM_TOL):
            raise ValidationError("each row of each P_i must sum to 1")
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "nu", _freeze(nu))
        object.__setattr__(self, "P", _freeze(P))

    @property
    def k(self) -> int:
        return self.mu.shape[0]

    @property
    def s(self) -> int:
        return self.nu.shape[1]


@dataclass(frozen=True)
class SufficientStats:
    """Per-trajectory initial-state indicators and transition-count matrices.

    U : (N, s) one-hot rows marking each trajectory's initial state.
    V : (N, s, s) V[n, a, b] counts transitions a -> b in trajectory n.
    """

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        if U.ndim != 2 or V.ndim != 3 or V.shape[:1] != U.shape[:1] or V.shape[1:] != (U.shape[1],) * 2:
            raise ValidationError("expected shapes U:(N,s), V:(N,s,s)")
        if not (np.all((U == 0) | (U == 1)) and np.all(U.sum(axis=1) == 1)):
            raise ValidationError("each row of U must be one-hot")
        if np.any(V < 0) or not np.all(V == np.round(V)):
            raise ValidationError("V must contain nonnegative integer counts")
        object.__setattr__(self, "U", _freeze(U))
        object.__setattr__(self, "V", _freeze(V))

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def s(self) -> int:
        return self.U.shape[1]

    @property
    def transition_counts(self) -> np.ndarray:
        """Per-trajectory total transition counts T_n."""
        return self.V.sum(axis=(1, 2))

    @property
    def mean_transitions(self) -> float:
        return float(self.transition_counts.mean())


@dataclass(frozen=True)
class Responsibilities:
    """Per-trajectory posterior probabilities over components: gamma (N, k)."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=np.float64)
        if g.ndim != 2:
            raise ValidationError("gamma must be a 2-D (N, k) array")
        if np.any(g < 0) or np.any(g > 1 + 1e-12):
            raise ValidationError("gamma entries must lie in [0, 1]")
        if np.any(np.abs(g.sum(axis=1) - 1.0) > _SUM_TOL):
            raise ValidationError("each gamma row must sum to 1")
        object.__setattr__(self, "gamma", _freeze(g))

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    @property
    def k(self) -> int:
        return self.gamma.shape[1]


@dataclass(frozen=True)
class FitResult:
    """Converged fit: point parameters, responsibilities, labels, and trace.

    labels[n] = argmax_i gamma[n, i], ties broken by lowest index.
    surviving_components counts components considered alive at convergence
    (for EM: components holding at least one label; variational fits add a
    posterior-mass threshold, see chainmix.vem).
    """

    params: MixtureParams
    responsibilities: Responsibilities
    labels: np.ndarray
    objective_trace: np.ndarray
    converged: bool
    iterations: int
    surviving_components: int

    @property
    def objective(self) -> float:
        """Final objective value (log-likelihood or variational lower bound)."""
        return float(self.objective_trace[-1])


def labels_from_responsibilities(gamma: np.ndarray) -> np.ndarray:
    """Argmax labels per row; ties resolve to the lowest component index."""
    return np.argmax(gamma, axis=1).astype(np.int64)


def _categorical_rows(rng, cum_rows):
    """Draw one index per row from row-wise cumulative distributions."""
    u = rng.random(cum_rows.shape[0])
    idx = (u[:, None] >= cum_rows).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[1] - 1)


def sample_mixture(params: MixtureParams, n: int, t: int, seed=None):
    """Sample `n` trajectories with `t` transitions each from the mixture.

    Returns (TrajectoryDataset, labels) where labels[n] is the true latent
    component of trajectory n.  Deterministic given `seed`.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if t < 0:
        raise ValidationError("t must be >= 0")
    rng = as_rng(seed)
    k, s = params.k, params.s

    cum_mu = np.cumsum(params.mu)[None, :].repeat(n, axis=0)
    z = _categorical_rows(rng, cum_mu)

    cum_nu = np.cumsum(params.nu, axis=1)
    states = np.empty((n, t + 1), dtype=np.int64)
    states[:, 0] = _categorical_rows(rng, cum_nu[z])

    cum_P = np.cumsum(params.P, axis=2)
    for step in range(t):
        states[:, step + 1] = _categorical_rows(rng, cum_P[z, states[:, step]])

    data = TrajectoryDataset(tuple(states[i] for i in range(n)), s=s)
    return data, z.astype(np.int64)


def sufficient_stats(data: TrajectoryDataset) -> SufficientStats:
    """Count initial states and transitions for every trajectory."""
    n, s = data.n, data.s
    U = np.zeros((n, s), dtype=np.float64)
    V = np.zeros((n, s, s), dtype=np.float64)
    lengths = data.lengths
    if n > 1 and np.all(lengths == lengths[0]) and lengths[0] >= 1:
        A = np.stack(data.trajectories)
        U[np.arange(n), A[:, 0]] = 1.0
        flat = (
            np.repeat(np.arange(n), lengths[0]) * s * s
            + A[:, :-1].ravel() * s
            + A[:, 1:].ravel()
        )
        V[:] = np.bincount(flat, minlength=n * s * s).reshape(n, s, s)
        return SufficientStats(U, V)
    for i, traj in enumerate(data.trajectories):
        U[i, traj[0]] = 1.0
        if traj.size > 1:
            flat = traj[:-1] * s + traj[1:]
            V[i] = np.bincount(flat, minlength=s * s).reshape(s, s)
    return SufficientStats(U, V)


def _check_counts(counts) -> np.ndarray:
    c = np.asarray(counts, dtype=np.float64)
    if c.ndim != 1 or c.size < 1:
        raise ValidationError("counts must be a nonempty 1-D vector")
    if np.any(c < 0):
        raise ValidationError("counts must be nonnegative")
    if c.sum() == 0:
        raise ValidationError("counts must not sum to zero")
    return c


def dirichlet_mean(counts) -> np.ndarray:
    """Mean of a Dirichlet distribution with the given parameter vector."""
    c = _check_counts(counts)
    return c / c.sum()


def dirichlet_variance(counts, i: int) -> float:
    """Variance of coordinate i under a Dirichlet with the given parameters."""
    c = _check_counts(counts)
    total = c.sum()
    rest = total - c[i]
    return float(c[i] * rest / (total * total * (total + 1.0)))


def random_mixture_params(k: int, s: int, seed=None) -> MixtureParams:
    """Draw mu, each nu_i, and each row of each P_i uniformly from the simplex."""
    if k < 1 or s < 1:
        raise ValidationError("k and s must be >= 1")
    rng = as_rng(seed)
    return MixtureParams(
        mu=uniform_simplex(rng, k),
        nu=uniform_simplex(rng, k, s),
        P=uniform_simplex(rng, k, s, s),
    )


def log_mixture_weights(log_mu, log_nu, log_P, stats: SufficientStats,
                        check_support: bool = True) -> np.ndarray:
    """Per-trajectory, per-component unnormalized log posterior weights.

    Computes log mu_i + sum_a U[n,a] log nu_i(a) + sum_ab V[n,a,b] log P_i(a,b)
    with the convention 0 * log 0 = 0.  When `check_support` is set, -inf
    log-parameters hit by a positive count force the weight to -inf; callers
    whose log-parameters are always finite can skip the masking.
    """
    U, V = stats.U, stats.V
    if not check_support:
        return log_mu[None, :] + U @ log_nu.T + np.einsum("nab,kab->nk", V, log_P)
    safe_nu = np.where(np.isneginf(log_nu), 0.0, log_nu)
    safe_P = np.where(np.isneginf(log_P), 0.0, log_P)
    w = log_mu[None, :] + U @ safe_nu.T + np.einsum("nab,kab->nk", V, safe_P)
    hit_nu = U @ np.isneginf(log_nu).T.astype(np.float64)
    hit_P = np.einsum("nab,kab->nk", (V > 0).astype(np.float64),
                      np.isneginf(log_P).astype(np.float64))
    w[(hit_nu + hit_P) > 0] = -np.inf
    return w


def log_normalize_rows(logw: np.ndarray):
    """Row-wise log-sum-exp normalization via a max shift.

    Returns (gamma, log_norms) with gamma = exp(logw - log_norms[:, None]).
    Rows that are entirely -inf yield log_norms of -inf and NaN gamma; the
    callers treat that as a support failure.
    """
    m = logw.max(axis=1)
    finite = np.isfinite(m)
    shifted = np.where(finite[:, None], logw - np.where(finite, m, 0.0)[:, None], -np.inf)
    sums = np.exp(shifted).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_norms = np.where(finite, m + np.log(sums), -np.inf)
        gamma = np.where(finite[:, None], np.exp(shifted) / np.where(sums > 0, sums, 1.0)[:, None], np.nan)
    return gamma, log_norms
