"""Signed-graph clustering baselines and the shared k-means engine.

These are the algorithms run before/after the SDP denoising step: spectral
clustering on the adjacency or one of the signed Laplacians, and the
balanced-normalized-cut relaxation.  Self-loops are ignored throughout
(degrees and Laplacians are built from the off-diagonal part), and isolated
nodes follow the pseudo-inverse convention: their normalized-embedding rows
are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rng
from .linalg import InvalidInputError, check_square, eigh_sorted, symmetrize
from .models import CommunityAssignment

__all__ = [
    "SignedLaplacians",
    "signed_laplacians",
    "kmeans",
    "kmeans_inertia",
    "spectral_cluster",
    "bnc_cluster",
    "bnc_objective",
    "SPECTRAL_VARIANTS",
]

SPECTRAL_VARIANTS = ("adjacency", "lbar", "lbar_rw", "lbar_sym")


@dataclass(frozen=True)
class SignedLaplacians:
    """Signed degree and Laplacian family of a (possibly weighted) signed graph."""

    dbar: np.ndarray        # absolute degrees, self-loops excluded
    lbar: np.ndarray        # combinatorial: diag(dbar) - A_offdiag
    lbar_rw: np.ndarray     # random walk: I - Dbar^{-1} A_offdiag
    lbar_sym: np.ndarray    # symmetric: I - Dbar^{-1/2} A_offdiag Dbar^{-1/2}


def _offdiag(A: np.ndarray) -> np.ndarray:
    out = np.array(A, dtype=float, copy=True)
    np.fill_diagonal(out, 0.0)
    return out


def _pinv_vec(d: np.ndarray, power: float) -> np.ndarray:
    out = np.zeros_like(d)
    pos = d > 0
    out[pos] = d[pos] ** power
    return out


def signed_laplacians(A: np.ndarray) -> SignedLaplacians:
    A = _offdiag(symmetrize(A))
    dbar = np.abs(A).sum(axis=1)
    lbar = np.diag(dbar) - A
    inv = _pinv_vec(dbar, -1.0)
    inv_sqrt = _pinv_vec(dbar, -0.5)
    n = A.shape[0]
    lbar_rw = np.eye(n) - inv[:, None] * A
    lbar_sym = np.eye(n) - (inv_sqrt[:, None] * A) * inv_sqrt[None, :]
    return SignedLaplacians(dbar=dbar, lbar=lbar, lbar_rw=lbar_rw, lbar_sym=lbar_sym)


# ---------------------------------------------------------------------------
# k-means


def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    cross = points @ centers.T
    return (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * cross
        + np.sum(centers**2, axis=1)[None, :]
    )


def _kmeanspp_init(points, K, rng):
    n = points.shape[0]
    centers = np.empty((K, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[k] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[k]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_rounds=300):
    labels = None
    for _ in range(max_rounds):
        d2 = _pairwise_sq(points, centers)
        new_labels = np.argmin(d2, axis=1)
        for k in range(centers.shape[0]):
            members = new_labels == k
            if members.any():
                centers[k] = points[members].mean(axis=0)
            else:
                # re-seed an empty cluster with the farthest point
                far = int(np.argmax(np.min(d2, axis=1)))
                centers[k] = points[far]
                new_labels[far] = k
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
    inertia = float(np.sum(np.min(_pairwise_sq(points, centers), axis=1)))
    return labels, inertia


def kmeans(points: np.ndarray, K: int, restarts: int = 10, seed: int = 0) -> CommunityAssignment:
    """Seeded k-means (k-means++ init, Lloyd rounds, best inertia over restarts)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if K < 1 or K > n:
        raise InvalidInputError("need 1 <= K <= n")
    if K == 1:
        return CommunityAssignment(labels=np.zeros(n, dtype=int), n_clusters=1)
    root = _rng.seed_sequence(seed, _rng.STREAM_SOLVER)
    best = None
    for child in root.spawn(restarts):
        rng = np.random.default_rng(child)
        centers = _kmeanspp_init(points, K, rng)
        labels, inertia = _lloyd(points, centers.copy())
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    labels = _canonical_labels(best[0], K)
    return CommunityAssignment(labels=labels, n_clusters=K)


def _canonical_labels(labels: np.ndarray, K: int) -> np.ndarray:
    """Relabel clusters by first appearance so output is order-stable."""
    mapping = {}
    out = np.empty_like(labels)
    nxt = 0
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = nxt
            nxt += 1
        out[i] = mapping[lab]
    if nxt != K:
        raise InvalidInputError("k-means produced an empty cluster")
    return out


def kmeans_inertia(points: np.ndarray, assignment: CommunityAssignment) -> float:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    total = 0.0
    for k in range(assignment.n_clusters):
        members = points[assignment.labels == k]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


# ---------------------------------------------------------------------------
# spectral baselines


def _embedding(A: np.ndarray, variant: str, K: int) -> np.ndarray:
    A = check_square(np.asarray(A, dtype=float))
    laps = signed_laplacians(A)
    if variant == "adjacency":
        dec = eigh_sorted(symmetrize(A))
        return np.real(dec.vectors[:, :K])
    if variant == "lbar":
        dec = eigh_sorted(laps.lbar)
        return np.real(dec.vectors[:, -K:])
    if variant == "lbar_sym":
        dec = eigh_sorted(laps.lbar_sym)
        emb = np.real(dec.vectors[:, -K:])
        emb[laps.dbar == 0] = 0.0
        return emb
    if variant == "lbar_rw":
        # generalized pair (Lbar, Dbar) via the symmetric form; v = Dbar^{-1/2} w
        dec = eigh_sorted(laps.lbar_sym)
        w = np.real(dec.vectors[:, -K:])
        emb = _pinv_vec(laps.dbar, -0.5)[:, None] * w
        emb[laps.dbar == 0] = 0.0
        return emb
    raise InvalidInputError(f"unknown spectral variant '{variant}'")


def spectral_cluster(A: np.ndarray, variant: str, K: int, seed: int = 0,
                     restarts: int = 10) -> CommunityAssignment:
    """Cluster rows of a K-dimensional spectral embedding of the signed graph.

    ``adjacency`` embeds with the top-K eigenvectors (largest eigenvalues);
    the Laplacian variants use the bottom-K.
    """
    emb = _embedding(A, variant, K)
    return kmeans(emb, K, restarts=restarts, seed=seed)


def _positive_part_laplacian(A: np.ndarray):
    off = _offdiag(A)
    a_plus = np.maximum(off, 0.0)
    d_plus = a_plus.sum(axis=1)
    return np.diag(d_plus) - off  # D+ - A = L+ + A-


def bnc_cluster(A: np.ndarray, K: int, seed: int = 0, restarts: int = 10) -> CommunityAssignment:
    """Balanced-normalized-cut relaxation: K smallest generalized eigenvectors
    of (D+ - A, Dbar), rows normalized, then k-means."""
    A = check_square(np.asarray(A, dtype=float))
    laps = signed_laplacians(A)
    lhs = _positive_part_laplacian(A)
    inv_sqrt = _pinv_vec(laps.dbar, -0.5)
    sym = symmetrize((inv_sqrt[:, None] * lhs) * inv_sqrt[None, :])
    dec = eigh_sorted(sym)
    w = np.real(dec.vectors[:, -K:])
    emb = inv_sqrt[:, None] * w
    emb[laps.dbar == 0] = 0.0
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    emb = emb / norms
    return kmeans(emb, K, restarts=restarts, seed=seed)


def bnc_objective(A: np.ndarray, assignment: CommunityAssignment) -> float:
    """sum_c x_c' (D+ - A) x_c / x_c' Dbar x_c over the cluster indicators."""
    A = check_square(np.asarray(A, dtype=float))
    laps = signed_laplacians(A)
    lhs = _positive_part_laplacian(A)
    total = 0.0
    for k in range(assignment.n_clusters):
        x = (assignment.labels == k).astype(float)
        denom = float(x @ (laps.dbar * x))
        num = float(x @ lhs @ x)
        if denom > 0:
            total += num / denom
    return total
