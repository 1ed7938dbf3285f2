"""Generalized soft-thresholding and the truncated Schatten-p proximal operator.

``gst`` returns the global minimizer over ``x >= 0`` of
``0.5 * (x - y)**2 + lam * x**p``. For ``0 < p < 1`` that is zero up to
the threshold ``gst_threshold(p, lam)`` and otherwise the fixed point of
``x = y - lam * p * x**(p - 1)`` reached by iterating from ``x = y``.
For ``p = 1`` it is the ordinary soft threshold ``max(y - lam, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NumericalError, ParameterError

DEFAULT_INNER_ITERS = 10
DEFAULT_INNER_TOL = 1e-12


@dataclass(frozen=True)
class GstParams:
    p: float
    lam: float
    inner_iters: int = DEFAULT_INNER_ITERS
    inner_tol: float = DEFAULT_INNER_TOL

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")
        if not self.lam > 0.0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if int(self.inner_iters) != self.inner_iters or self.inner_iters < 1:
            raise ParameterError(f"inner_iters must be a positive integer, got {self.inner_iters}")
        if not self.inner_tol >= 0.0:
            raise ParameterError(f"inner_tol must be nonnegative, got {self.inner_tol}")


class SvdTriple(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    Vt: np.ndarray


def gst_threshold(p: float, lam: float) -> float:
    """Value of ``y`` below which the GST output is exactly zero.

    Only defined for ``0 < p < 1``; the ``p = 1`` threshold is ``lam``
    itself and is handled by the callers.
    """
    if not 0.0 < p < 1.0:
        raise ParameterError(f"gst_threshold needs 0 < p < 1, got {p}")
    if not lam > 0.0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    base = 2.0 * lam * (1.0 - p)
    return base ** (1.0 / (2.0 - p)) + lam * p * base ** ((p - 1.0) / (2.0 - p))


def gst_array(y, params: GstParams) -> np.ndarray:
    """Vectorized :func:`gst` over a nonnegative array.

    All entries above the threshold share one iteration count, so the
    map stays monotone in ``y`` entry by entry.
    """
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise ParameterError("gst input must be nonnegative")
    p, lam = params.p, params.lam
    if p == 1.0:
        return np.maximum(y - lam, 0.0)

    out = np.zeros_like(y)
    active = y > gst_threshold(p, lam)
    if not np.any(active):
        return out
    ya = y[active]
    x = ya.copy()
    lp = lam * p
    for _ in range(params.inner_iters):
        x_new = ya - lp * x ** (p - 1.0)
        delta = np.max(np.abs(x_new - x))
        x = x_new
        if delta < params.inner_tol:
            break
    out[active] = x
    return out


def gst(y: float, params: GstParams) -> float:
    """Scalar generalized soft-thresholding of a nonnegative ``y``."""
    if y < 0:
        raise ParameterError(f"gst input must be nonnegative, got {y}")
    return float(gst_array(np.array([y], dtype=np.float64), params)[0])


def economy_svd(Y) -> SvdTriple:
    """Economy SVD with singular values sorted non-ascending."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {Y.shape}")
    try:
        U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    if np.any(s[1:] > s[:-1]):
        order = np.argsort(-s, kind="stable")
        U, s, Vt = U[:, order], s[order], Vt[order]
    return SvdTriple(U, s, Vt)


def truncated_spn_prox(Y, r: int, params: GstParams, svd: SvdTriple | None = None) -> np.ndarray:
    """Proximal map of ``lam * sum_{i > r} sigma_i(M)**p``.

    Solves ``min_M lam * ||M||_{r,Sp}^p + 0.5 * ||M - Y||_F^2``: the top
    ``r`` singular values of ``Y`` are kept, the rest go through
    :func:`gst_array`, and the singular vectors are those of ``Y``.

    Parameters
    ----------
    Y : array_like
        Matrix to shrink.
    r : int
        Number of leading singular values exempt from shrinkage,
        ``0 <= r <= min(Y.shape)``.
    params : GstParams
    svd : SvdTriple, optional
        Precomputed decomposition of ``Y``.

    Returns
    -------
    ndarray
        The minimizer, same shape as ``Y``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {Y.shape}")
    kmax = min(Y.shape)
    if int(r) != r or not 0 <= r <= kmax:
        raise ParameterError(f"truncation r must lie in [0, {kmax}], got {r}")
    r = int(r)
    U, s, Vt = svd if svd is not None else economy_svd(Y)
    if r == kmax:
        return (U * s) @ Vt
    delta = s.copy()
    delta[r:] = gst_array(s[r:], params)
    if np.any(delta[1:] > delta[:-1]):
        raise NumericalError("shrunk singular values lost their non-ascending order")
    keep = np.count_nonzero(delta)
    return (U[:, :keep] * delta[:keep]) @ Vt[:keep]


def schatten_p(sigma, p: float, skip: int = 0) -> float:
    """``sum_{i >= skip} sigma_i**p`` (the p-th power of the Schatten norm)."""
    tail = np.asarray(sigma, dtype=np.float64)[skip:]
    return float(np.sum(tail ** p))
