"""Exact Gaussian-process regression with incremental conditioning.

A :class:`GPBelief` is an immutable snapshot of what has been learned from
the (molecule, assay outcome) pairs observed so far: the kernel, the noise
model, the observed data and a cached Cholesky factorization of the noisy
Gram matrix.  Conditioning on a new observation returns a *new* belief and
extends the factorization by one row instead of refactorizing, so a
sequential screening run costs O(n^2) per step.

Numerical hygiene, applied uniformly:

* posterior covariances are symmetrized and their diagonals clamped at 0;
* joint sampling adds 1e-9 jitter to the covariance diagonal before
  factorizing;
* a failed incremental extension falls back to a full refactorization and
  only then raises :class:`~gpscreen.errors.NumericalError`.

All randomness enters through caller-supplied ``numpy.random.Generator``
streams; beliefs are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import InputError, NumericalError

SAMPLE_JITTER = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    """RBF covariance settings.

    ``k(x, z) = signal_variance * exp(-||x - z||^2 / (2 * lengthscale^2))``
    """

    kind: str = "rbf"
    lengthscale: float = 1.0
    signal_variance: float = 1.0

    def __post_init__(self) -> None:
        if self.kind != "rbf":
            raise InputError(f"unknown kernel kind {self.kind!r}; only 'rbf' is supported")
        if not self.lengthscale > 0:
            raise InputError(f"lengthscale must be > 0, got {self.lengthscale}")
        if not self.signal_variance > 0:
            raise InputError(f"signal_variance must be > 0, got {self.signal_variance}")


def _as_points(x, what: str = "points") -> np.ndarray:
    """Coerce to a (n, d) float64 matrix; a single vector becomes one row."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InputError(f"{what} must be a vector or a 2-D array, got ndim={arr.ndim}")
    return arr


def kernel_eval(kernel: KernelSpec, x, x2) -> float:
    """Evaluate the kernel on one pair of equal-dimension feature vectors."""
    a = np.asarray(x, dtype=float).ravel()
    b = np.asarray(x2, dtype=float).ravel()
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    d2 = float(np.sum((a - b) ** 2))
    return float(kernel.signal_variance * np.exp(-d2 / (2.0 * kernel.lengthscale**2)))


def kernel_matrix(kernel: KernelSpec, X, X2=None) -> np.ndarray:
    """Gram matrix k(X, X2); X2 defaults to X."""
    A = _as_points(X)
    B = A if X2 is None else _as_points(X2)
    if A.shape[1] != B.shape[1]:
        raise InputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    # ||a-b||^2 = ||a||^2 + ||b||^2 - 2 a.b, clipped against float cancellation
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    expo = sq / (2.0 * kernel.lengthscale**2)
    # exponents past 708 would yield subnormal doubles, which cost ~100x
    # per element on x86; 3e-308 is as good as zero next to the jitter
    np.clip(expo, None, 708.0, out=expo)
    return kernel.signal_variance * np.exp(-expo)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PosteriorGaussian:
    """Joint Gaussian over function values at a set of query points.

    The covariance is symmetrized on construction and its diagonal clamped
    at zero; ``variances`` exposes the clamped diagonal.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = _frozen(np.atleast_1d(np.asarray(self.mean, dtype=float)))
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise InputError(f"covariance shape {cov.shape} does not match mean size {mean.size}")
        cov = 0.5 * (cov + cov.T)
        diag = np.diag(cov).copy()
        np.fill_diagonal(cov, np.maximum(diag, 0.0))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", _frozen(cov))

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance)


@dataclass(frozen=True, eq=False)
class GPBelief:
    """Immutable GP posterior over molecule rewards.

    Attributes
    ----------
    kernel : KernelSpec
    noise_variance : float
        Observation noise variance added to the Gram diagonal.
    inputs : (n, d) ndarray
        Observed feature vectors (read-only).
    targets : (n,) ndarray
        Observed outcomes (read-only).
    chol : (n, n) ndarray
        Lower Cholesky factor of ``K(inputs, inputs) + noise_variance * I``.
    alpha : (n,) ndarray
        Solved weights ``(K + noise * I)^-1 targets``.
    """

    kernel: KernelSpec
    noise_variance: float
    inputs: np.ndarray
    targets: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray

    @staticmethod
    def empty(kernel: KernelSpec, noise_variance: float) -> "GPBelief":
        """The prior: a belief with no observations (any query dim accepted)."""
        if noise_variance < 0:
            raise InputError(f"noise_variance must be >= 0, got {noise_variance}")
        z = np.empty((0, 0))
        return GPBelief(kernel, float(noise_variance), _frozen(z), _frozen(np.empty(0)),
                        _frozen(z), _frozen(np.empty(0)))

    @staticmethod
    def from_data(kernel: KernelSpec, noise_variance: float, X, y) -> "GPBelief":
        """Fit a belief from scratch on all (X, y) pairs at once."""
        if noise_variance < 0:
            raise InputError(f"noise_variance must be >= 0, got {noise_variance}")
        Xm = _as_points(X, "inputs")
        yv = np.asarray(y, dtype=float).ravel()
        if Xm.shape[0] != yv.size:
            raise InputError(f"{Xm.shape[0]} inputs but {yv.size} targets")
        if yv.size == 0:
            return GPBelief.empty(kernel, noise_variance)
        K = kernel_matrix(kernel, Xm) + noise_variance * np.eye(Xm.shape[0])
        try:
            L = np.linalg.cholesky(K)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"Gram matrix of {Xm.shape[0]} points is not positive definite "
                f"(noise_variance={noise_variance}, lengthscale={kernel.lengthscale}); "
                "points may be duplicated with zero noise"
            ) from exc
        alpha = cho_solve((L, True), yv)
        return GPBelief(kernel, float(noise_variance), _frozen(Xm), _frozen(yv),
                        _frozen(L), _frozen(alpha))

    def __len__(self) -> int:
        return self.targets.size

    @property
    def dim(self) -> int | None:
        """Feature dimension, or None while the belief is empty."""
        return self.inputs.shape[1] if len(self) else None

    def _check_queries(self, queries) -> np.ndarray:
        Q = _as_points(queries, "queries")
        if len(self) and Q.shape[1] != self.inputs.shape[1]:
            raise InputError(
                f"query dimension {Q.shape[1]} does not match belief dimension {self.inputs.shape[1]}"
            )
        return Q

    # ------------------------------------------------------------------
    # conditioning
    # ------------------------------------------------------------------

    def condition(self, x, y: float) -> "GPBelief":
        """A new belief with the single observation (x, y) appended.

        Extends the cached Cholesky factor by one row; falls back to a full
        refactorization if the extension loses positive definiteness.
        """
        return self.condition_many(_as_points(x), [float(y)])

    def condition_many(self, X, y) -> "GPBelief":
        """A new belief with a block of observations appended jointly.

        Equivalent to conditioning on the pairs one at a time (exact GP
        conditioning is exchangeable), but extends the factorization with a
        single block step.
        """
        Xb = self._check_queries(X)
        yb = np.asarray(y, dtype=float).ravel()
        if Xb.shape[0] != yb.size:
            raise InputError(f"{Xb.shape[0]} inputs but {yb.size} targets")
        if yb.size == 0:
            return self
        if len(self) == 0:
            return GPBelief.from_data(self.kernel, self.noise_variance, Xb, yb)

        n, m = len(self), yb.size
        K_cross = kernel_matrix(self.kernel, self.inputs, Xb)          # (n, m)
        K_new = kernel_matrix(self.kernel, Xb) + self.noise_variance * np.eye(m)
        L12 = solve_triangular(self.chol, K_cross, lower=True)         # (n, m)
        schur = K_new - L12.T @ L12
        try:
            Ls = np.linalg.cholesky(0.5 * (schur + schur.T))
        except np.linalg.LinAlgError:
            # extension lost definiteness; rebuild from scratch
            return GPBelief.from_data(
                self.kernel, self.noise_variance,
                np.vstack([self.inputs, Xb]), np.concatenate([self.targets, yb]),
            )
        L_ext = np.zeros((n + m, n + m))
        L_ext[:n, :n] = self.chol
        L_ext[n:, :n] = L12.T
        L_ext[n:, n:] = Ls
        inputs = np.vstack([self.inputs, Xb])
        targets = np.concatenate([self.targets, yb])
        alpha = cho_solve((L_ext, True), targets)
        return GPBelief(self.kernel, self.noise_variance, _frozen(inputs),
                        _frozen(targets), _frozen(L_ext), _frozen(alpha))

    # ------------------------------------------------------------------
    # posterior queries
    # ------------------------------------------------------------------

    def posterior(self, queries) -> PosteriorGaussian:
        """Exact predictive mean and covariance of f at the query points."""
        Q = self._check_queries(queries)
        K_qq = kernel_matrix(self.kernel, Q)
        if len(self) == 0:
            return PosteriorGaussian(np.zeros(Q.shape[0]), K_qq)
        K_xq = kernel_matrix(self.kernel, self.inputs, Q)              # (n, q)
        mean = K_xq.T @ self.alpha
        V = solve_triangular(self.chol, K_xq, lower=True)
        return PosteriorGaussian(mean, K_qq - V.T @ V)

    def posterior_marginals(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Predictive mean and (clamped) variance per query point.

        Cheaper than :meth:`posterior` when only the diagonal is needed.
        """
        Q = self._check_queries(queries)
        prior_var = np.full(Q.shape[0], self.kernel.signal_variance)
        if len(self) == 0:
            return np.zeros(Q.shape[0]), prior_var
        K_xq = kernel_matrix(self.kernel, self.inputs, Q)
        mean = K_xq.T @ self.alpha
        V = solve_triangular(self.chol, K_xq, lower=True)
        var = prior_var - np.sum(V * V, axis=0)
        return mean, np.maximum(var, 0.0)

    # ------------------------------------------------------------------
    # sampling
    # ------------------------------------------------------------------

    def sample_function_values(self, candidates, rng: np.random.Generator,
                               size: int | None = None) -> np.ndarray:
        """Joint draw(s) of f over the candidate set.

        Returns a (q,) vector for ``size=None`` or a (size, q) matrix of
        independent joint draws sharing one covariance factorization.
        """
        if np.size(candidates) == 0:
            return np.empty(0) if size is None else np.empty((size, 0))
        Q = self._check_queries(candidates)
        q = Q.shape[0]
        post = self.posterior(Q)
        L = _sampling_chol(post.covariance)
        n_draws = 1 if size is None else int(size)
        z = rng.standard_normal((n_draws, q))
        draws = post.mean[None, :] + z @ L.T
        return draws[0] if size is None else draws

    def sample_outcome(self, x, rng: np.random.Generator) -> float:
        """One draw of the noisy observable y at x (predictive distribution)."""
        P = _as_points(x)
        if P.shape[0] != 1:
            raise InputError("sample_outcome takes a single point")
        mean, var = self.posterior_marginals(P)
        sd = float(np.sqrt(var[0] + self.noise_variance))
        return float(mean[0] + sd * rng.standard_normal())


def _sampling_chol(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky of a sampling covariance with documented 1e-9 jitter."""
    try:
        return np.linalg.cholesky(cov + SAMPLE_JITTER * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"posterior covariance of {cov.shape[0]} candidates is not PSD even after "
            f"{SAMPLE_JITTER} jitter"
        ) from exc
