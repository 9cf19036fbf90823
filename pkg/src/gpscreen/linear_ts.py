"""Thompson sampling for a Bayesian linear reward model over arm features.

The state keeps the precision accumulator B (initialized to the identity so
the first solve is well posed), the response accumulator f = sum(x * y) and
the ridge estimate mu_hat = B^-1 f.  A step samples weights
mu_tilde ~ N(mu_hat, v^2 B^-1) and plays the arm maximizing x^T mu_tilde,
with the exploration scale

    v = R * sqrt(24 / eps * d * ln(1 / delta)),   eps = 1 / ln(T).

States are immutable; updates return new states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .data import ArmSet
from .errors import InputError, NumericalError


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class LinTSState:
    d: int
    B: np.ndarray
    f: np.ndarray
    mu_hat: np.ndarray
    v: float
    R: float
    delta: float
    T: int


def lints_init(d: int, R: float, delta: float, T: int) -> LinTSState:
    """Fresh state: B = I, f = 0, and the exploration scale v from (R, d, delta, T)."""
    if d < 1:
        raise InputError(f"d must be >= 1, got {d}")
    if T < 2:
        raise InputError(f"T must be >= 2 so that ln(T) > 0, got {T}")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    if not R > 0:
        raise InputError(f"R must be > 0, got {R}")
    eps = 1.0 / math.log(T)
    v = R * math.sqrt(24.0 / eps * d * math.log(1.0 / delta))
    return LinTSState(
        d=int(d),
        B=_frozen(np.eye(d)),
        f=_frozen(np.zeros(d)),
        mu_hat=_frozen(np.zeros(d)),
        v=float(v),
        R=float(R),
        delta=float(delta),
        T=int(T),
    )


def sample_weights(state: LinTSState, rng: np.random.Generator) -> np.ndarray:
    """One draw mu_tilde ~ N(mu_hat, v^2 B^-1)."""
    try:
        L = np.linalg.cholesky(state.B)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("precision matrix B is not positive definite") from exc
    # w = L^-T z has covariance B^-1
    z = rng.standard_normal(state.d)
    w = solve_triangular(L.T, z, lower=False)
    return state.mu_hat + state.v * w


def lints_step(state: LinTSState, arms: ArmSet, rng: np.random.Generator) -> int:
    """Sample weights and return the untested arm maximizing x^T mu_tilde.

    Ties break to the lowest arm index.
    """
    if not arms.untested:
        raise InputError("no untested arms")
    if arms.features.shape[1] != state.d:
        raise InputError(f"arm dimension {arms.features.shape[1]} != state dimension {state.d}")
    mu_tilde = sample_weights(state, rng)
    scores = arms.untested_features @ mu_tilde
    return int(arms.untested[int(np.argmax(scores))])


def lints_update(state: LinTSState, x, y: float) -> LinTSState:
    """New state with B += x x^T, f += x y and mu_hat recomputed."""
    xv = np.asarray(x, dtype=float).ravel()
    if xv.size != state.d:
        raise InputError(f"x has dimension {xv.size}, state expects {state.d}")
    B = state.B + np.outer(xv, xv)
    f = state.f + xv * float(y)
    try:
        mu_hat = cho_solve(cho_factor(B, lower=True), f)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("updated precision matrix is not positive definite") from exc
    return LinTSState(state.d, _frozen(B), _frozen(f), _frozen(mu_hat),
                      state.v, state.R, state.delta, state.T)
