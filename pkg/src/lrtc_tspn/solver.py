"""ADMM solver for truncated tensor Schatten-p completion.

Variables follow the augmented Lagrangian

    sum_k alpha_k ||M_k||_{r_k,Sp}^p + <Z_k, X_(k) - M_k> + mu/2 ||X_(k) - M_k||_F^2

subject to ``P * X = P * T``. One sweep updates M_1, M_2, M_3, then X,
then Z_1, Z_2, Z_3, then grows ``mu``.

HaLRTC and LRTC-TNN are the ``(p=1, theta=0)`` and ``(p=1, theta>0)``
parameterizations; see :func:`halrtc_config` and :func:`lrtc_tnn_config`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, NumericalError, ParameterError, UnrecoverableInputError
from .prox_gst import (
    DEFAULT_INNER_ITERS,
    DEFAULT_INNER_TOL,
    GstParams,
    schatten_p,
    truncated_spn_prox,
)
from .tensor_core import MaskTensor, Tensor3, fold, unfold, unfold_shape

THIRD = 1.0 / 3.0


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of one completion run.

    ``theta`` is the truncation rate actually used, i.e. already decayed
    for the missing rate (see :func:`decayed_theta`).
    """

    p: float = 0.5
    theta: float = 0.1
    alpha: Tuple[float, float, float] = (THIRD, THIRD, THIRD)
    mu0: float = 1e-5
    mu_growth: float = 1.05
    mu_cap: float = 1e5
    epsilon: float = 1e-4
    max_iters: int = 200
    inner_iters: int = DEFAULT_INNER_ITERS
    inner_tol: float = DEFAULT_INNER_TOL

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 <= self.theta <= 1.0:
            raise ParameterError(f"theta must lie in [0, 1], got {self.theta}")
        if len(self.alpha) != 3 or any(a < 0 for a in self.alpha):
            raise ParameterError(f"alpha must be three nonnegative weights, got {self.alpha}")
        if abs(sum(self.alpha) - 1.0) > 1e-12:
            raise ParameterError(f"alpha must sum to 1, got {sum(self.alpha)!r}")
        if not self.mu0 > 0 or not self.mu_cap > 0:
            raise ParameterError("mu0 and mu_cap must be positive")
        if self.mu0 > self.mu_cap:
            raise ParameterError(f"mu0={self.mu0} exceeds mu_cap={self.mu_cap}")
        if not self.mu_growth >= 1.0:
            raise ParameterError(f"mu_growth must be >= 1, got {self.mu_growth}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError(f"max_iters must be a positive integer, got {self.max_iters}")
        # surfaces bad inner settings early
        GstParams(self.p, 1.0, self.inner_iters, self.inner_tol)


def halrtc_config(**overrides) -> SolverConfig:
    """Nuclear-norm ADMM: no truncation, ``p = 1``."""
    return SolverConfig(**{**overrides, "p": 1.0, "theta": 0.0})


def lrtc_tnn_config(theta: float, **overrides) -> SolverConfig:
    """Truncated nuclear-norm ADMM: ``p = 1`` with truncation rate ``theta``."""
    return SolverConfig(**{**overrides, "p": 1.0, "theta": theta})


@dataclass
class SolverState:
    X: np.ndarray
    M: List[np.ndarray]
    Z: List[np.ndarray]
    mu: float
    ranks: Tuple[int, int, int]
    iter: int = 0
    residuals: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class CompletionResult:
    X_hat: Tensor3
    iterations: int
    converged: bool
    residual_trace: Tuple[float, ...]
    truncation_ranks: Tuple[int, int, int]
    per_mode_spn: Tuple[float, float, float]


def truncation_ranks(dims: Sequence[int], theta: float) -> Tuple[int, int, int]:
    """``r_k = ceil(theta * min(I_k, prod_{i != k} I_i))`` per mode.

    ``theta`` is taken at its shortest decimal representation so that
    e.g. ``0.1 * 30`` gives 3 and not 4 from binary rounding.
    """
    if not 0.0 <= theta <= 1.0:
        raise ParameterError(f"theta must lie in [0, 1], got {theta}")
    frac = Fraction(repr(float(theta)))
    ranks = []
    for k in range(3):
        n = min(unfold_shape(dims, k))
        ranks.append(min(n, math.ceil(frac * n)))
    return tuple(ranks)


def decayed_theta(theta0: float, beta: float, missing_rate: float) -> float:
    """Truncation rate ``theta0 * exp(-beta * missing_rate)``."""
    if not 0.0 <= theta0 <= 1.0:
        raise ParameterError(f"theta0 must lie in [0, 1], got {theta0}")
    if not beta >= 0.0:
        raise ParameterError(f"beta must be nonnegative, got {beta}")
    if not 0.0 <= missing_rate <= 1.0:
        raise ParameterError(f"missing rate must lie in [0, 1], got {missing_rate}")
    return theta0 * math.exp(-beta * missing_rate)


def missing_rate(P: MaskTensor) -> float:
    """Fraction of unobserved entries."""
    bits = np.asarray(P)
    return float(bits.size - np.count_nonzero(bits)) / bits.size


def _observed(T, P):
    T = np.asarray(T, dtype=np.float64)
    obs = np.asarray(P).astype(bool)
    if T.shape != obs.shape:
        raise DimensionError(f"dimension mismatch: tensor {T.shape} vs mask {obs.shape}")
    return T, obs


def init_state(T, P, cfg: SolverConfig) -> SolverState:
    """Observed entries copied from ``T``, the rest set to their mean.

    Raises
    ------
    UnrecoverableInputError
        No entry is observed, or every observed value is zero (the
        relative residual would divide by zero).
    """
    T, obs = _observed(T, P)
    n_obs = int(np.count_nonzero(obs))
    if n_obs == 0:
        raise UnrecoverableInputError("mask has no observed entry")
    values = T[obs]
    if not np.any(values):
        raise UnrecoverableInputError("all observed values are zero")
    X = np.full(T.shape, values.mean())
    X[obs] = values
    shapes = [unfold_shape(T.shape, k) for k in range(3)]
    return SolverState(
        X=X,
        M=[np.zeros(s) for s in shapes],
        Z=[np.zeros(s) for s in shapes],
        mu=cfg.mu0,
        ranks=truncation_ranks(T.shape, cfg.theta),
    )


def step(state: SolverState, T, P, cfg: SolverConfig) -> SolverState:
    """One ADMM sweep; returns a new state and leaves ``state`` untouched."""
    T, obs = _observed(T, P)
    dims = T.shape
    mu = state.mu
    X_old = state.X

    M = []
    for k in range(3):
        Y = unfold(X_old, k) + state.Z[k] / mu
        lam = cfg.alpha[k] / mu
        if lam == 0.0:
            M.append(Y)
            continue
        try:
            M.append(
                truncated_spn_prox(
                    Y, state.ranks[k], GstParams(cfg.p, lam, cfg.inner_iters, cfg.inner_tol)
                )
            )
        except NumericalError as exc:
            raise NumericalError(f"mode-{k} M update failed: {exc}", state.iter) from exc

    mus = (mu, mu, mu)
    X = sum(mus[k] * fold(M[k] - state.Z[k] / mus[k], k, dims) for k in range(3)) / sum(mus)
    X[obs] = T[obs]

    Z = [state.Z[k] + mu * (unfold(X, k) - M[k]) for k in range(3)]

    residual = float(np.linalg.norm(X - X_old) / np.linalg.norm(X_old))
    return SolverState(
        X=X,
        M=M,
        Z=Z,
        mu=min(cfg.mu_growth * mu, cfg.mu_cap),
        ranks=state.ranks,
        iter=state.iter + 1,
        residuals=state.residuals + [residual],
    )


def tspn_objective(X, ranks: Sequence[int], alpha: Sequence[float], p: float) -> float:
    """Truncated surrogate ``sum_k alpha_k sum_{i > r_k} sigma_i(X_(k))**p``."""
    total = 0.0
    for k in range(3):
        s = np.linalg.svd(unfold(X, k), compute_uv=False)
        total += alpha[k] * schatten_p(s, p, skip=ranks[k])
    return total


def per_mode_schatten(X, p: float) -> Tuple[float, float, float]:
    """Schatten-p norm ``(sum_i sigma_i**p)**(1/p)`` of each unfolding."""
    out = []
    for k in range(3):
        s = np.linalg.svd(unfold(X, k), compute_uv=False)
        out.append(schatten_p(s, p) ** (1.0 / p))
    return tuple(out)


def solve(T, P, cfg: Optional[SolverConfig] = None) -> CompletionResult:
    """Complete ``T`` from the entries flagged in ``P``.

    Iterates until the relative change of ``X`` drops below
    ``cfg.epsilon`` or ``cfg.max_iters`` sweeps ran. Hitting the cap is
    not an error: ``converged`` is then False.
    """
    cfg = cfg or SolverConfig()
    state = init_state(T, P, cfg)
    converged = False
    while state.iter < cfg.max_iters:
        state = step(state, T, P, cfg)
        if state.residuals[-1] < cfg.epsilon:
            converged = True
            break
    return CompletionResult(
        X_hat=Tensor3(state.X),
        iterations=state.iter,
        converged=converged,
        residual_trace=tuple(state.residuals),
        truncation_ranks=state.ranks,
        per_mode_spn=per_mode_schatten(state.X, cfg.p),
    )


def with_theta(cfg: SolverConfig, theta: float) -> SolverConfig:
    return replace(cfg, theta=theta)
