"""End-to-end change detection over a snapshot sequence.

Every snapshot is embedded; from instant w+1 onwards the previous w
embeddings are aligned into a window profile, the current embedding is
scored against it, and the scores are normalized into z-scores with a
detection threshold.  Each snapshot's randomized rank selection draws from
a generator seeded by (config seed, time index), so results are
bit-reproducible for a fixed configuration.  Embedding and scoring are
split so one embedded sequence can be scored under several windows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .embedding import DEFAULT_RANK_EPSILON, Embedding, embed
from .errors import EmptyGraph
from .graph import SnapshotMatrix, representation_matrix
from .procrustes import ScoreVector, change_scores, profile_embedding

DEFAULT_ZSCORE_THRESHOLD = 5.0
DEGENERATE_STD = 1e-14


@dataclass(frozen=True)
class CdpConfig:
    """Tunables for a detection run.

    Attributes:
        window: number of past instants profiled (w >= 1).
        epsilon_rank: convergence threshold of the rank-selection residual
            test.
        zscore_threshold: detection cutoff on normalized scores (strict >).
        seed: base seed for the per-snapshot randomized rank selection.
    """

    window: int = 5
    epsilon_rank: float = DEFAULT_RANK_EPSILON
    zscore_threshold: float = DEFAULT_ZSCORE_THRESHOLD
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.epsilon_rank <= 0:
            raise ValueError("epsilon_rank must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass
class ScoreSeries:
    """Scores, z-scores, detections and diagnostics keyed by time index.

    Raw and normalized scores exist exactly for instants after the first
    window (t > w); dimensions and timings cover every embedded instant.
    """

    scores: dict[int, ScoreVector] = field(default_factory=dict)
    zscores: dict[int, np.ndarray] = field(default_factory=dict)
    detections: dict[int, set[int]] = field(default_factory=dict)
    degenerate: dict[int, bool] = field(default_factory=dict)
    dims: dict[int, int] = field(default_factory=dict)
    embed_seconds: dict[int, float] = field(default_factory=dict)
    score_seconds: dict[int, float] = field(default_factory=dict)

    def scored_instants(self) -> list[int]:
        return sorted(self.scores)


def normalize_and_detect(
    score: ScoreVector, threshold: float = DEFAULT_ZSCORE_THRESHOLD
) -> tuple[np.ndarray, set[int], bool]:
    """Convert scores to z-scores and flag vertices strictly above threshold.

    Uses the sample standard deviation (n-1 denominator).  A (near-)constant
    score vector yields zero z-scores, no detections, and a degenerate flag
    rather than an error.
    """
    z = score.z
    if z.shape[0] < 2:
        raise ValueError("need at least two vertices to normalize")
    std = float(z.std(ddof=1))
    if std < DEGENERATE_STD:
        return np.zeros_like(z), set(), True
    zhat = (z - z.mean()) / std
    detected = set(int(i) for i in np.nonzero(zhat > threshold)[0])
    return zhat, detected, False


def snapshot_rng(seed: int, t: int) -> np.random.Generator:
    """Generator for the randomized steps of one snapshot's embedding."""
    return np.random.default_rng(np.random.SeedSequence((seed, t)))


def embed_snapshot(snapshot: SnapshotMatrix, config: CdpConfig) -> Embedding:
    """Representation matrix plus spectral embedding for one snapshot."""
    rep = representation_matrix(snapshot)
    rng = snapshot_rng(config.seed, snapshot.t)
    return embed(rep.M, epsilon=config.epsilon_rank, rng=rng, t=snapshot.t)


def _validate_sequence(snapshots: list[SnapshotMatrix], window: int) -> None:
    if len(snapshots) <= window:
        raise ValueError(
            f"need more snapshots ({len(snapshots)}) than the window ({window})"
        )
    n = snapshots[0].n
    if any(snap.n != n for snap in snapshots):
        raise ValueError("all snapshots must share the same vertex count")
    labels = [snap.t for snap in snapshots]
    if any(b <= a for a, b in zip(labels, labels[1:])):
        raise ValueError("snapshot time indices must be strictly increasing")


def embed_sequence(
    snapshots: list[SnapshotMatrix], config: CdpConfig
) -> tuple[list[Embedding], dict[int, float]]:
    """Embed every snapshot; returns the embeddings and per-instant seconds."""
    embeddings: list[Embedding] = []
    seconds: dict[int, float] = {}
    for snap in snapshots:
        start = time.perf_counter()
        try:
            emb = embed_snapshot(snap, config)
        except EmptyGraph as exc:
            raise EmptyGraph(f"snapshot t={snap.t} has no edges: {exc}") from exc
        embeddings.append(emb)
        seconds[snap.t] = time.perf_counter() - start
    return embeddings, seconds


def score_embeddings(embeddings: list[Embedding], config: CdpConfig) -> ScoreSeries:
    """Window-profile scoring of an already embedded sequence."""
    w = config.window
    if len(embeddings) <= w:
        raise ValueError(
            f"need more embeddings ({len(embeddings)}) than the window ({w})"
        )
    series = ScoreSeries()
    for emb in embeddings:
        series.dims[emb.t] = emb.d
    for pos in range(w, len(embeddings)):
        t = embeddings[pos].t
        start = time.perf_counter()
        profile = profile_embedding(embeddings[pos - w : pos])
        score = change_scores(embeddings[pos], profile)
        zhat, detected, degenerate = normalize_and_detect(
            score, config.zscore_threshold
        )
        series.scores[t] = score
        series.zscores[t] = zhat
        series.detections[t] = detected
        series.degenerate[t] = degenerate
        series.score_seconds[t] = time.perf_counter() - start
    return series


def run_cdp(snapshots: list[SnapshotMatrix], config: CdpConfig) -> ScoreSeries:
    """Score every instant of a snapshot sequence against its window profile."""
    _validate_sequence(snapshots, config.window)
    embeddings, embed_seconds = embed_sequence(snapshots, config)
    series = score_embeddings(embeddings, config)
    series.embed_seconds = embed_seconds
    return series
