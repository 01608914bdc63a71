"""Activity-vector change detectors used for comparison.

Both baselines summarize each snapshot by its eigenvector-centrality
vector (the principal eigenvector of the raw adjacency matrix) and score
vertices by entrywise deviation from a window summary.  The first keeps
only the leading left singular vector of the window; the modified variant
projects the current vector onto the full window subspace.  Neither applies
the sparsity/heterogeneity preprocessing of the main pipeline, though a
switch allows running them on the scaled matrix for ablation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraph
from .graph import SnapshotMatrix, log_transform, max_scale
from .pipeline import CdpConfig, ScoreSeries, normalize_and_detect
from .procrustes import ScoreVector

ACTIVITY_TOL = 1e-13
ACTIVITY_MAX_ITER = 100_000
WINDOW_RANK_TOL = 1e-12


@dataclass(frozen=True)
class ActivityVector:
    """Unit-norm eigenvector centrality of one snapshot."""

    u: np.ndarray
    t: int = 1


@dataclass(frozen=True)
class ProfileVector:
    """Window summary an activity vector is compared against."""

    r: np.ndarray
    basis_rank: int


def activity(snapshot: SnapshotMatrix, preprocessed: bool = False) -> ActivityVector:
    """Principal eigenvector of the adjacency matrix, Perron sign-fixed.

    Power iteration runs on W + cI with c the maximum row sum; the shift
    makes the top eigenvalue strictly dominant in magnitude (bipartite
    structure would otherwise stall the iteration) without changing the
    eigenvector.  Starting from a positive vector keeps every iterate
    nonnegative, so the result needs no sign cleanup beyond normalization.
    """
    W = snapshot.W
    if preprocessed:
        W = max_scale(log_transform(W))
    if not np.any(W > 0):
        raise EmptyGraph("zero matrix has no principal eigenvector")
    n = W.shape[0]
    shift = float(np.abs(W).sum(axis=1).max())
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(ACTIVITY_MAX_ITER):
        w = W @ v + shift * v
        w /= np.linalg.norm(w)
        if np.abs(w - v).max() <= ACTIVITY_TOL:
            v = w
            break
        v = w
    if v.sum() < 0:
        v = -v
    return ActivityVector(u=v, t=snapshot.t)


def _window_basis(window: list[ActivityVector]) -> tuple[np.ndarray, int]:
    """Left singular vectors of the stacked window, truncated at numerical rank."""
    A = np.column_stack([a.u for a in window])
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return U[:, :0], 0
    rank = int(np.count_nonzero(s > WINDOW_RANK_TOL * s[0]))
    return U[:, :rank], rank


def act_scores(window: list[ActivityVector], current: ActivityVector) -> ScoreVector:
    """Entrywise gap between the window's leading direction and the current vector.

    For a single-member window the leading direction is that member itself,
    bypassing the SVD so the reduction z = |u_prev - u_now| holds exactly.
    The direction's sign is fixed to point toward the current vector, since
    an absolute difference is meaningless under sign ambiguity.
    """
    if not window:
        raise ValueError("window must contain at least one activity vector")
    if len(window) == 1:
        r = window[0].u
    else:
        basis, rank = _window_basis(window)
        if rank == 0:
            raise ValueError("window of zero vectors has no leading direction")
        r = basis[:, 0]
    if float(r @ current.u) < 0:
        r = -r
    return ScoreVector(z=np.abs(r - current.u), t=current.t)


def actm_scores(window: list[ActivityVector], current: ActivityVector) -> ScoreVector:
    """Entrywise gap between the window-subspace projection and the current vector.

    The projection onto the span of the window is the closest point to the
    current vector in that subspace; only basis vectors above the numerical
    rank cutoff participate.
    """
    if not window:
        raise ValueError("window must contain at least one activity vector")
    basis, _rank = _window_basis(window)
    projected = basis @ (basis.T @ current.u)
    return ScoreVector(z=np.abs(projected - current.u), t=current.t)


def window_profile(window: list[ActivityVector], current: ActivityVector) -> ProfileVector:
    """The summary vector the modified detector compares against."""
    basis, rank = _window_basis(window)
    return ProfileVector(r=basis @ (basis.T @ current.u), basis_rank=rank)


def activity_sequence(
    snapshots: list[SnapshotMatrix], preprocessed: bool = False
) -> tuple[list[ActivityVector], dict[int, float]]:
    """Activity vector of every snapshot, with per-instant seconds."""
    vectors: list[ActivityVector] = []
    seconds: dict[int, float] = {}
    for snap in snapshots:
        start = time.perf_counter()
        try:
            vectors.append(activity(snap, preprocessed=preprocessed))
        except EmptyGraph as exc:
            raise EmptyGraph(f"snapshot t={snap.t} has no edges: {exc}") from exc
        seconds[snap.t] = time.perf_counter() - start
    return vectors, seconds


def score_activity(
    vectors: list[ActivityVector], config: CdpConfig, kind: str
) -> ScoreSeries:
    """Window sweep of an activity-vector detector; `kind` is "act" or "actm"."""
    if kind not in ("act", "actm"):
        raise ValueError(f"unknown baseline {kind!r}")
    w = config.window
    if len(vectors) <= w:
        raise ValueError(f"need more snapshots ({len(vectors)}) than the window ({w})")
    scorer = act_scores if kind == "act" else actm_scores
    series = ScoreSeries()
    for vec in vectors:
        series.dims[vec.t] = 1
    for pos in range(w, len(vectors)):
        t = vectors[pos].t
        start = time.perf_counter()
        score = scorer(vectors[pos - w : pos], vectors[pos])
        zhat, detected, degenerate = normalize_and_detect(
            score, config.zscore_threshold
        )
        series.scores[t] = score
        series.zscores[t] = zhat
        series.detections[t] = detected
        series.degenerate[t] = degenerate
        series.score_seconds[t] = time.perf_counter() - start
    return series


def run_baseline(
    snapshots: list[SnapshotMatrix],
    config: CdpConfig,
    kind: str,
    preprocessed: bool = False,
) -> ScoreSeries:
    """Activity extraction plus window scoring over a snapshot sequence."""
    vectors, embed_seconds = activity_sequence(snapshots, preprocessed=preprocessed)
    series = score_activity(vectors, config, kind)
    series.embed_seconds = embed_seconds
    return series
