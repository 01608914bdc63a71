"""Adjacency snapshots and construction of the regularized representation matrix.

A dynamic network is a time sequence of symmetric, nonnegative, weighted
adjacency matrices over a fixed vertex set.  Each snapshot is preprocessed
(log transform, max scaling), regularized by a uniform additive term, and
degree-normalized to yield the representation matrix that downstream
spectral embedding consumes.  All functions here are pure; snapshot arrays
are locked read-only at construction so values can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraph, InvalidWeight, NotSymmetric

SPARSE_DEGREE_CUTOFF = 5.0


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SnapshotMatrix:
    """One weighted adjacency matrix of the dynamic network.

    Attributes:
        W: n x n symmetric matrix of nonnegative edge weights.
        t: 1-based time index of the snapshot.
    """

    W: np.ndarray
    t: int = 1

    def __post_init__(self):
        W = _readonly(self.W)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got shape {W.shape}")
        if W.shape[0] < 2:
            raise ValueError("a snapshot needs at least 2 vertices")
        if not np.all(np.isfinite(W)):
            raise InvalidWeight("edge weights must be finite")
        if np.any(W < 0):
            raise InvalidWeight("edge weights must be nonnegative")
        if not np.array_equal(W, W.T):
            raise NotSymmetric("adjacency matrix must be symmetric")
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class DegreeSummary:
    """Vertex degrees, their mean, and the sparsity classification."""

    degrees: np.ndarray
    avg_degree: float
    is_sparse: bool


@dataclass(frozen=True)
class RepresentationMatrix:
    """Regularized degree-normalized form of one snapshot.

    Attributes:
        M: n x n symmetric representation matrix.
        tau: uniform regularizer added to every entry of the scaled matrix.
        scaled_W: the log-transformed, max-scaled matrix with entries in [0, 1].
    """

    M: np.ndarray
    tau: float
    scaled_W: np.ndarray = field(repr=False)


def log_transform(W: np.ndarray) -> np.ndarray:
    """Apply the elementwise damping x -> log10(x + 1).

    Compresses dominant edge weights so that a handful of heavy edges does
    not swamp the embedding.  Zero stays zero.
    """
    W = np.asarray(W, dtype=float)
    if np.any(W < 0):
        raise InvalidWeight("log transform requires nonnegative entries")
    return np.log10(W + 1.0)


def max_scale(W: np.ndarray) -> np.ndarray:
    """Scale a nonnegative matrix by its maximum entry onto [0, 1]."""
    W = np.asarray(W, dtype=float)
    top = W.max(initial=0.0)
    if top <= 0.0:
        raise EmptyGraph("matrix has no positive entries; nothing to embed")
    return W / top


def regularizer_tau(scaled_W: np.ndarray) -> float:
    """Uniform regularizer: the mean entry of the scaled matrix, divided by 4.

    For entries in [0, 1] the result lies in [0, 1/4].
    """
    scaled_W = np.asarray(scaled_W, dtype=float)
    n = scaled_W.shape[0]
    return float(scaled_W.sum() / (4.0 * n * n))


def representation_matrix(snapshot: SnapshotMatrix) -> RepresentationMatrix:
    """Build the regularized degree-normalized representation matrix.

    Pipeline: log transform, max scaling, uniform regularization by tau,
    then symmetric degree normalization D^(-1/2) W D^(-1/2).  Because tau
    is strictly positive for any nonzero snapshot, every regularized degree
    is at least n * tau and the normalization never divides by zero.
    """
    scaled = max_scale(log_transform(snapshot.W))
    tau = regularizer_tau(scaled)
    W_tau = scaled + tau
    degrees = W_tau.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    M = inv_sqrt[:, None] * W_tau * inv_sqrt[None, :]
    # enforce exact symmetry; the scaling above is symmetric only up to rounding
    M = (M + M.T) / 2.0
    return RepresentationMatrix(M=_readonly(M), tau=tau, scaled_W=_readonly(scaled))


def degree_summary(snapshot: SnapshotMatrix) -> DegreeSummary:
    """Row-sum degrees, their mean, and whether the snapshot counts as sparse."""
    degrees = snapshot.W.sum(axis=1)
    avg = float(degrees.mean())
    return DegreeSummary(
        degrees=_readonly(degrees),
        avg_degree=avg,
        is_sparse=avg < SPARSE_DEGREE_CUTOFF,
    )
