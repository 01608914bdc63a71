"""Shape alignment of embeddings and per-vertex change scores.

Embeddings produced by spectral decomposition are unique only up to scale,
rotation and reflection, so they cannot be averaged or differenced as raw
matrices.  Each matrix is first reduced to its pre-shape (column-centered,
unit Frobenius norm); a generalized Procrustes loop then rotates all
pre-shapes onto a common mean.  Change scores are squared row distances
between the aligned current embedding and the aligned window profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import Embedding
from .errors import DegenerateShape, DimensionError

DEGENERATE_NORM = 1e-14
DEFAULT_GPA_THRESHOLD = 1e-10
DEFAULT_GPA_MAX_ITERATIONS = 100


@dataclass(frozen=True)
class PreShape:
    """A matrix with column means removed and unit Frobenius norm."""

    Xtilde: np.ndarray


@dataclass(frozen=True)
class AlignmentResult:
    """Converged state of the generalized Procrustes loop.

    Attributes:
        mean: elementwise average of the aligned copies.
        aligned: aligned pre-shapes, one per input matrix.
        rotations: orthogonal transform applied to each pre-shape on the
            final pass.
        iterations: number of full alignment passes performed.
        final_D: squared Frobenius distance between the last two means.
        converged: False only if the iteration cap was reached first.
        objective_history: sum of squared distances to the mean after each
            pass; nonincreasing.
    """

    mean: np.ndarray
    aligned: list[np.ndarray]
    rotations: list[np.ndarray]
    iterations: int
    final_D: float
    converged: bool
    objective_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class ScoreVector:
    """Nonnegative per-vertex change scores for one time instant."""

    z: np.ndarray
    t: int = 1

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if not np.all(np.isfinite(z)) or np.any(z < 0):
            raise ValueError("change scores must be finite and nonnegative")
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.shape[0]


def pre_shape(X: np.ndarray) -> PreShape:
    """Remove column means and scale to unit Frobenius norm.

    Raises DegenerateShape when every column is constant, since the centered
    matrix then has no magnitude to normalize.
    """
    X = np.asarray(X, dtype=float)
    centered = X - X.mean(axis=0, keepdims=True)
    norm = np.linalg.norm(centered)
    if norm < DEGENERATE_NORM:
        raise DegenerateShape("matrix is constant per column; no shape remains")
    return PreShape(Xtilde=centered / norm)


def optimal_rotation(mu: np.ndarray, Xtilde: np.ndarray) -> np.ndarray:
    """Orthogonal matrix G minimizing ||Xtilde @ G - mu||_F.

    Computed from the SVD of mu^T Xtilde as V U^T.  Rank deficiency of the
    cross-product (e.g. from zero-padded columns) is benign: any SVD yields
    an optimizer.
    """
    mu = np.asarray(mu, dtype=float)
    Xtilde = np.asarray(Xtilde, dtype=float)
    if mu.shape != Xtilde.shape:
        raise ValueError(f"shape mismatch: {mu.shape} vs {Xtilde.shape}")
    U, _, Vt = np.linalg.svd(mu.T @ Xtilde)
    return Vt.T @ U.T


def gpa_align(
    matrices: list[np.ndarray],
    threshold: float = DEFAULT_GPA_THRESHOLD,
    max_iterations: int = DEFAULT_GPA_MAX_ITERATIONS,
) -> AlignmentResult:
    """Iteratively align matrices to a common mean shape.

    The reference starts as the raw first matrix; every pass rotates each
    pre-shape optimally onto the reference, averages the aligned copies,
    and measures the squared movement D of the mean.  Iteration stops once
    D drops to `threshold` or the pass cap is hit (flagged, not an error).
    Pre-shapes do not change across passes, so they are computed once.
    """
    if len(matrices) < 2:
        raise ValueError("alignment needs at least two matrices")
    shapes = {np.asarray(m).shape for m in matrices}
    if len(shapes) != 1:
        raise ValueError(f"matrices must share one shape, got {sorted(shapes)}")
    tildes = [pre_shape(m).Xtilde for m in matrices]

    mu = np.asarray(matrices[0], dtype=float)
    aligned = tildes
    rotations = [np.eye(mu.shape[1])] * len(tildes)
    iterations = 0
    D = np.inf
    history: list[float] = []
    while D > threshold and iterations < max_iterations:
        rotations = [optimal_rotation(mu, Xt) for Xt in tildes]
        aligned = [Xt @ G for Xt, G in zip(tildes, rotations)]
        new_mu = np.mean(aligned, axis=0)
        D = float(np.sum((mu - new_mu) ** 2))
        mu = new_mu
        iterations += 1
        history.append(float(sum(np.sum((A - mu) ** 2) for A in aligned)))
    return AlignmentResult(
        mean=mu,
        aligned=aligned,
        rotations=rotations,
        iterations=iterations,
        final_D=D,
        converged=D <= threshold,
        objective_history=history,
    )


def pad_to_dim(X: np.ndarray, d_max: int) -> np.ndarray:
    """Append zero columns up to d_max; truncation is deliberately unsupported."""
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    if d > d_max:
        raise DimensionError(f"cannot reduce {d} columns to {d_max}; padding only")
    if d == d_max:
        return X
    return np.hstack([X, np.zeros((X.shape[0], d_max - d))])


def profile_embedding(
    window: list[Embedding],
    threshold: float = DEFAULT_GPA_THRESHOLD,
    max_iterations: int = DEFAULT_GPA_MAX_ITERATIONS,
) -> Embedding:
    """Mean shape of the embeddings in a window.

    Members are zero-padded to the window's largest dimension before
    alignment.  A single-member window needs no alignment: its profile is
    that embedding's pre-shape.
    """
    if not window:
        raise ValueError("window must contain at least one embedding")
    t = window[-1].t
    if len(window) == 1:
        return Embedding(X=pre_shape(window[0].X).Xtilde, t=t)
    d_max = max(e.d for e in window)
    padded = [pad_to_dim(e.X, d_max) for e in window]
    result = gpa_align(padded, threshold=threshold, max_iterations=max_iterations)
    return Embedding(X=result.mean, t=t)


def change_scores(
    current: Embedding,
    profile: Embedding,
    threshold: float = DEFAULT_GPA_THRESHOLD,
    max_iterations: int = DEFAULT_GPA_MAX_ITERATIONS,
) -> ScoreVector:
    """Per-vertex dissimilarity between an embedding and its window profile.

    Both matrices are padded to a common dimension and aligned pairwise;
    the score of vertex i is the squared distance between its aligned rows,
    divided by the Frobenius norm of the pair mean.
    """
    if current.n != profile.n:
        raise ValueError(f"row mismatch: {current.n} vs {profile.n}")
    d_max = max(current.d, profile.d)
    pair = [pad_to_dim(current.X, d_max), pad_to_dim(profile.X, d_max)]
    result = gpa_align(pair, threshold=threshold, max_iterations=max_iterations)
    current_hat, profile_hat = result.aligned
    gaps = np.sum((current_hat - profile_hat) ** 2, axis=1)
    mean_norm = np.linalg.norm(result.mean)
    if mean_norm < DEGENERATE_NORM:
        raise DegenerateShape("aligned pair cancels out; scores are undefined")
    return ScoreVector(z=gaps / mean_norm, t=current.t)
