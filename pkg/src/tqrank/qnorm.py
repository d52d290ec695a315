"""Rank and norm functionals of a tensor seen through a mode-3 transform.

All quantities are read off the transformed tensor G = t x_3 Q, whose r
frontal slices are treated as ordinary matrices:

  * q_singular_values  per-slice singular values, one row per slice
  * tensor_q_rank      number of singular values above a relative cutoff
  * q_nuclear_norm     sum of all per-slice singular values (no 1/n3 factor)
  * q_spectral_norm    largest per-slice singular value
  * prox_q_nuclear     proximal map of lam * q_nuclear_norm
  * envelope_gap       rank minus nuclear norm at unit spectral scale

The nuclear/spectral pair is dual, and the nuclear norm lower-bounds the
rank on the spectral unit ball, which is what ``envelope_gap`` certifies
numerically.
"""

import numpy as np

from .orth import pca_q
from .tensor3 import fold3, unfold3

RANK_TOL = 1e-8


def _slice_stack(g3, n1, n2):
    # columns of g3 are flattened slices; stack them as (r, n1, n2)
    return np.moveaxis(np.reshape(g3, (n1, n2, -1), order="F"), 2, 0)


def _stack_to_unfolding(stack, n1, n2):
    return np.reshape(np.moveaxis(stack, 0, 2), (n1 * n2, -1), order="F")


def _check_transform(t, q):
    n3 = t.shape[2]
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != n3:
        raise ValueError(f"transform shape {q.shape} incompatible with n3={n3}")
    return q


def q_singular_values(t, q):
    """Per-slice singular values of t x_3 q as an (r, min(n1, n2)) array.

    Row i holds the descending singular values of the i-th transformed
    slice.
    """
    n1, n2, _ = t.shape
    q = _check_transform(t, q)
    g3 = unfold3(t) @ q
    return np.linalg.svd(_slice_stack(g3, n1, n2), compute_uv=False)


def tensor_q_rank(t, q, tol=RANK_TOL):
    """Total count of singular values above tol * (largest singular value).

    Zero tensors have rank 0.  The cutoff is relative to the largest
    singular value across all transformed slices.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    sv = q_singular_values(t, q)
    top = sv.max()
    if top == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * top))


def q_nuclear_norm(t, q):
    """Sum of singular values over all transformed slices."""
    return float(q_singular_values(t, q).sum())


def q_spectral_norm(t, q):
    """Largest singular value over all transformed slices."""
    return float(q_singular_values(t, q).max())


def _prox_unfolded(t3, q, lam, n1, n2):
    """Prox of lam * q_nuclear_norm on the unfolded tensor t3.

    Shrinks each transformed slice's singular values by lam and passes the
    orthogonal complement t x_3 (I - Q Q^T) through untouched.  Returns the
    unfolded result and the post-shrinkage nuclear norm (the q-nuclear norm
    of the result under this q).
    """
    g3 = t3 @ q
    u, s, vh = np.linalg.svd(_slice_stack(g3, n1, n2), full_matrices=False)
    s = np.maximum(s - lam, 0.0)
    g3_shrunk = _stack_to_unfolding(np.matmul(u * s[:, None, :], vh), n1, n2)
    x3 = g3_shrunk @ q.T + (t3 - g3 @ q.T)
    return x3, float(s.sum())


def prox_q_nuclear(t, q, lam):
    """Proximal map of lam * q_nuclear_norm at t.

    For square q this is the exact minimizer of
    lam * q_nuclear_norm(x, q) + 0.5 * ||x - t||_F^2; for thin q the
    component of t orthogonal to the column span passes through unchanged.
    lam = 0 returns t itself (slice reconstruction is skipped entirely).
    """
    n1, n2, n3 = t.shape
    q = _check_transform(t, q)
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if lam == 0:
        return np.array(t, dtype=float, copy=True)
    x3, _ = _prox_unfolded(unfold3(t), q, lam, n1, n2)
    return fold3(x3, (n1, n2, n3))


def envelope_gap(t, tol=RANK_TOL):
    """tensor_q_rank minus q_nuclear_norm at unit spectral scale.

    The transform is the full right-singular basis of the unfolding and t
    is rescaled so the largest transformed singular value is 1; the result
    is nonnegative up to rounding.
    """
    t = np.asarray(t, dtype=float)
    if not t.any():
        raise ValueError("envelope gap is undefined for the zero tensor")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n1, n2, n3 = t.shape
    q = pca_q(t, min(n1 * n2, n3))
    sv = q_singular_values(t, q)
    sv = sv / sv.max()
    rank = int(np.count_nonzero(sv > tol))
    return float(rank - sv.sum())
