"""Reference implementations used as test oracles.

None of these import the package under test. The ADMM transcription
shares only ``numpy.linalg.svd`` with it.
"""

import math

import numpy as np


def unfold_index(idx, dims, mode):
    """Column of tensor entry ``idx`` (0-based) in the mode-``mode`` unfolding.

    Literal 1-based index map ``j = 1 + sum_{k != n} (i_k - 1) J_k``,
    ``J_k = prod_{m < k, m != n} I_m``, shifted back to 0-based.
    """
    one_based = [i + 1 for i in idx]
    j = 1
    for k in range(len(dims)):
        if k == mode:
            continue
        J = 1
        for m in range(k):
            if m != mode:
                J *= dims[m]
        j += (one_based[k] - 1) * J
    return j - 1


def unfold_loops(t, mode):
    t = np.asarray(t)
    dims = t.shape
    cols = t.size // dims[mode]
    out = np.empty((dims[mode], cols))
    for idx in np.ndindex(*dims):
        out[idx[mode], unfold_index(idx, dims, mode)] = t[idx]
    return out


def fold_loops(m, mode, dims):
    out = np.empty(dims)
    for idx in np.ndindex(*dims):
        out[idx] = m[idx[mode], unfold_index(idx, dims, mode)]
    return out


def lp_objective(x, y, lam, p):
    return 0.5 * (x - y) ** 2 + lam * x ** p


def gst_grid(y, lam, p, step=1e-6, coarse=1e-3, window=3e-3):
    """Argmin of ``0.5 (x - y)^2 + lam x^p`` on the grid ``{k * step} ∩ [0, y]``.

    Two-level search: the coarse grid locates the best basin away from 0,
    then every fine grid point within ``window`` of it (and of 0) is
    evaluated. Returns ``(x_best, f_best)``.
    """
    if y <= 0:
        return 0.0, 0.0
    xs = np.arange(0.0, y + coarse, coarse)
    xs = xs[xs <= y]
    fs = lp_objective(xs, y, lam, p)
    centre = xs[1:][np.argmin(fs[1:])] if xs.size > 1 else 0.0
    candidates = []
    for c in (0.0, centre):
        lo = max(0, int(math.floor((c - window) / step)))
        hi = int(math.floor(min(y, c + window) / step))
        candidates.append(np.arange(lo, hi + 1) * step)
    grid = np.concatenate(candidates)
    grid = grid[grid <= y]
    f = lp_objective(grid, y, lam, p)
    k = int(np.argmin(f))
    return float(grid[k]), float(f[k])


def svt(Y, lam):
    """Singular value soft-thresholding built from ``eigh`` of the Gram matrix.

    Avoids ``numpy.linalg.svd`` so it does not share a kernel with the
    code under test. ``Y = U S V^T`` gives ``svt(Y) = U diag(w) U^T Y``
    with ``w = max(s - lam, 0) / s``.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] > Y.shape[1]:
        return svt(Y.T, lam).T
    evals, U = np.linalg.eigh(Y @ Y.T)
    s = np.sqrt(np.clip(evals, 0.0, None))
    w = np.zeros_like(s)
    keep = s > lam
    w[keep] = (s[keep] - lam) / s[keep]
    return (U * w) @ U.T @ Y


def gst_loop(y, lam, p, J):
    """Threshold test, then exactly J fixed-point steps."""
    if p == 1.0:
        return max(y - lam, 0.0)
    tau = (2 * lam * (1 - p)) ** (1 / (2 - p)) + lam * p * (2 * lam * (1 - p)) ** ((p - 1) / (2 - p))
    if y <= tau:
        return 0.0
    x = y
    for _ in range(J):
        x = y - lam * p * x ** (p - 1)
    return x


def admm_reference(T, P, *, p, theta, alpha, mu0, mu_growth, mu_cap, J, iters):
    """Straight-line transcription of the completion loop.

    Returns a list of per-iteration snapshots ``(X, [M_k], [Z_k], mu, e)``.
    """
    T = np.asarray(T, dtype=float)
    P = np.asarray(P).astype(bool)
    dims = T.shape
    X = np.where(P, T, T[P].mean())
    Zs = [np.zeros((dims[k], T.size // dims[k])) for k in range(3)]
    mu = mu0
    ranks = [math.ceil(theta * min(dims[k], T.size // dims[k])) for k in range(3)]
    history = []
    for _ in range(iters):
        Ms = []
        for k in range(3):
            Y = unfold_loops(X, k) + Zs[k] / mu
            U, s, Vt = np.linalg.svd(Y, full_matrices=False)
            d = np.array(
                [s[i] if i < ranks[k] else gst_loop(s[i], alpha[k] / mu, p, J) for i in range(s.size)]
            )
            Ms.append(U @ np.diag(d) @ Vt)
        X_new = np.zeros(dims)
        for k in range(3):
            X_new += mu * fold_loops(Ms[k] - Zs[k] / mu, k, dims)
        X_new /= 3 * mu
        X_new[P] = T[P]
        Zs = [Zs[k] + mu * (unfold_loops(X_new, k) - Ms[k]) for k in range(3)]
        e = np.linalg.norm(X_new - X) / np.linalg.norm(X)
        X = X_new
        history.append((X.copy(), [m.copy() for m in Ms], [z.copy() for z in Zs], mu, e))
        mu = min(mu_growth * mu, mu_cap)
    return history


def low_rank_tensor(dims, rank=2, seed=0, scale=50.0):
    """Sum of ``rank`` positive outer products, entries around ``scale``."""
    rng = np.random.default_rng(seed)
    factors = [rng.uniform(0.5, 1.5, size=(d, rank)) for d in dims]
    return scale * np.einsum("ir,jr,kr->ijk", *factors) / rank


def masked_relative_error(truth, estimate, missing):
    missing = np.asarray(missing).astype(bool)
    diff = (np.asarray(estimate) - np.asarray(truth))[missing]
    return float(np.linalg.norm(diff) / np.linalg.norm(np.asarray(truth)[missing]))


def truncated_svt(Y, r, lam):
    """Keep the top ``r`` singular values, soft-threshold the rest."""
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    d = s.copy()
    d[r:] = np.maximum(s[r:] - lam, 0.0)
    return U @ np.diag(d) @ Vt


def nuclear_admm_reference(T, P, *, theta, mu0, mu_growth, mu_cap, iters):
    """(Truncated) nuclear-norm ADMM with equal weights, fixed iteration count."""
    T = np.asarray(T, dtype=float)
    P = np.asarray(P).astype(bool)
    dims = T.shape
    X = np.where(P, T, T[P].mean())
    Zs = [np.zeros((dims[k], T.size // dims[k])) for k in range(3)]
    ranks = [math.ceil(theta * min(dims[k], T.size // dims[k])) for k in range(3)]
    mu = mu0
    for _ in range(iters):
        Ms = [truncated_svt(unfold_loops(X, k) + Zs[k] / mu, ranks[k], (1 / 3) / mu) for k in range(3)]
        X = sum(fold_loops(Ms[k] - Zs[k] / mu, k, dims) for k in range(3)) / 3
        X[P] = T[P]
        Zs = [Zs[k] + mu * (unfold_loops(X, k) - Ms[k]) for k in range(3)]
        mu = min(mu_growth * mu, mu_cap)
    return X
