"""Degree-corrected block-model sampling and change-scenario sequences.

Edge weights between distinct vertices are independent Poisson draws with
mean theta_i * theta_j * psi(block_i, block_j), where psi scales a block
probability matrix by the block sizes and the theta vector carries
per-vertex degree propensities (power-law or constant, normalized to sum
to one inside each block).  A scenario pairs a baseline model with a
changed model and a switch rule (single instant or sustained interval);
sampling a scenario yields the snapshot sequence plus ground truth about
which vertices changed and when.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidProbability, InvalidShape
from .graph import SnapshotMatrix

# shared catalog constants: block-size vector is per model, everything else fixed
CATALOG_LAMBDA = 0.8
CATALOG_NU = 0.0025
CATALOG_ALPHA = 0.01
CATALOG_BETA = 0.02
CATALOG_GAMMA = 0.03
CATALOG_THETA_MIN = 1.0
CATALOG_THETA_SHAPE = 2.5

DEFAULT_T = 30
DEFAULT_CHANGE_INSTANT = 21
DEFAULT_INTERVAL = (21, 30)


@dataclass(frozen=True)
class PowerLawTheta:
    """Degree propensities drawn from a power law, then block-normalized."""

    theta_min: float = CATALOG_THETA_MIN
    shape: float = CATALOG_THETA_SHAPE


@dataclass(frozen=True)
class ConstantTheta:
    """Equal degree propensities; normalization makes them 1/block size."""


ThetaLaw = PowerLawTheta | ConstantTheta


@dataclass(frozen=True)
class DcsbmModel:
    """Full generative parameter set for one block model.

    Attributes:
        g: block sizes; vertices are assigned contiguously (block 0 first).
        B_planted: k x k planted block probability matrix.
        nu: background (inter-block) probability of the random component.
        lam: mixing weight between planted and random components.
        theta_laws: per-block degree-propensity law.
        name: optional catalog label.
    """

    g: tuple[int, ...]
    B_planted: np.ndarray
    nu: float
    lam: float
    theta_laws: tuple[ThetaLaw, ...]
    name: str = ""

    def __post_init__(self):
        g = tuple(int(x) for x in self.g)
        if any(x < 1 for x in g):
            raise ValueError("every block must contain at least one vertex")
        B = np.array(self.B_planted, dtype=float)
        B.flags.writeable = False
        k = len(g)
        if B.shape != (k, k):
            raise ValueError(f"planted matrix must be {k}x{k}, got {B.shape}")
        if not np.array_equal(B, B.T):
            raise ValueError("planted block matrix must be symmetric")
        if len(self.theta_laws) != k:
            raise ValueError("need one theta law per block")
        if not 0.0 <= self.nu <= 1.0 or not 0.0 <= self.lam <= 1.0:
            raise InvalidProbability("nu and lambda must lie in [0, 1]")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "B_planted", B)
        object.__setattr__(self, "theta_laws", tuple(self.theta_laws))

    @property
    def n(self) -> int:
        return int(sum(self.g))

    @property
    def k(self) -> int:
        return len(self.g)

    @property
    def memberships(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.g)


def sample_power_law(
    theta_min: float, shape: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Raw power-law draws by inverse CDF: theta = theta_min (1-U)^(-1/(shape-1))."""
    if shape <= 1.0:
        raise InvalidShape(f"power-law shape must exceed 1, got {shape}")
    if theta_min <= 0.0:
        raise InvalidShape("theta_min must be positive")
    u = rng.random(size)
    return theta_min * (1.0 - u) ** (-1.0 / (shape - 1.0))


def sample_theta(model: DcsbmModel, rng: np.random.Generator) -> np.ndarray:
    """Draw degree propensities and normalize them to sum to one per block."""
    theta = np.empty(model.n)
    start = 0
    for size, law in zip(model.g, model.theta_laws):
        stop = start + size
        if isinstance(law, PowerLawTheta):
            draws = sample_power_law(law.theta_min, law.shape, size, rng)
            theta[start:stop] = draws / draws.sum()
        else:
            theta[start:stop] = 1.0 / size
        start = stop
    return theta


def block_matrix(model: DcsbmModel) -> np.ndarray:
    """Mix the planted structure with the uniform background component."""
    B = model.lam * model.B_planted + (1.0 - model.lam) * model.nu
    if np.any(B < 0.0) or np.any(B > 1.0):
        raise InvalidProbability("mixed block matrix has entries outside [0, 1]")
    return B


def psi(model: DcsbmModel) -> np.ndarray:
    """Expected edge counts between blocks: B scaled by both block sizes."""
    g = np.asarray(model.g, dtype=float)
    return block_matrix(model) * np.outer(g, g)


def sample_snapshot(
    model: DcsbmModel, theta: np.ndarray, rng: np.random.Generator, t: int = 1
) -> SnapshotMatrix:
    """One symmetric Poisson-weighted adjacency draw; diagonal forced to zero."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.n,):
        raise ValueError(f"theta must have length {model.n}")
    c = model.memberships
    means = np.outer(theta, theta) * psi(model)[np.ix_(c, c)]
    n = model.n
    iu = np.triu_indices(n, k=1)
    W = np.zeros((n, n))
    W[iu] = rng.poisson(means[iu]).astype(float)
    W += W.T
    return SnapshotMatrix(W=W, t=t)


def _planted_diag(*probs: float) -> np.ndarray:
    return np.diag(np.asarray(probs, dtype=float))


def _scaled_sizes(sizes: tuple[int, ...], scale: float | None) -> tuple[int, ...]:
    if scale is None:
        return sizes
    if scale <= 0:
        raise ValueError("scale must be positive")
    scaled = tuple(int(round(s * scale)) for s in sizes)
    if any(s < 1 for s in scaled):
        raise ValueError(f"scale {scale} collapses a block to zero vertices")
    return scaled


def catalog(name: str, scale: float | None = None) -> DcsbmModel:
    """Named model from the simulation catalog (M1..M6).

    All catalog models share lambda, nu, the power-law theta parameters and
    the planted probabilities alpha/beta/gamma; they differ in block count,
    block sizes, planted layout, and (for M5) a constant-theta first block.
    `scale` multiplies every block size uniformly.
    """
    key = name.upper()
    power = PowerLawTheta()
    if key == "M1":
        sizes: tuple[int, ...] = (300, 300, 300)
        planted = _planted_diag(CATALOG_ALPHA, CATALOG_BETA, CATALOG_GAMMA)
        laws: tuple[ThetaLaw, ...] = (power, power, power)
    elif key == "M2":
        sizes = (150, 150, 300, 300)
        planted = _planted_diag(CATALOG_ALPHA, CATALOG_ALPHA, CATALOG_BETA, CATALOG_GAMMA)
        laws = (power, power, power, power)
    elif key == "M3":
        sizes = (300, 300, 300)
        planted = _planted_diag(CATALOG_ALPHA, CATALOG_BETA, 0.1 * CATALOG_GAMMA)
        laws = (power, power, power)
    elif key == "M4":
        sizes = (150, 450, 300)
        planted = _planted_diag(CATALOG_ALPHA, CATALOG_BETA, CATALOG_GAMMA)
        laws = (power, power, power)
    elif key == "M5":
        sizes = (300, 300, 300)
        planted = _planted_diag(CATALOG_ALPHA, CATALOG_BETA, CATALOG_GAMMA)
        laws = (ConstantTheta(), power, power)
    elif key == "M6":
        a, b, g = CATALOG_ALPHA, CATALOG_BETA, CATALOG_GAMMA
        sizes = (300, 300, 300)
        planted = np.array(
            [
                [0.5 * a, 0.5 * a, 0.0],
                [0.5 * a, b - 0.5 * a, 0.0],
                [0.0, 0.0, g],
            ]
        )
        laws = (power, power, power)
    else:
        raise ValueError(f"unknown model {name!r}; expected M1..M6")
    return DcsbmModel(
        g=_scaled_sizes(sizes, scale),
        B_planted=planted,
        nu=CATALOG_NU,
        lam=CATALOG_LAMBDA,
        theta_laws=laws,
        name=key,
    )


@dataclass(frozen=True)
class ChangePoint:
    """The changed model generates exactly one instant."""

    t_star: int

    def active(self, t: int) -> bool:
        return t == self.t_star

    def times(self, T: int) -> list[int]:
        return [self.t_star] if self.t_star <= T else []


@dataclass(frozen=True)
class ChangeInterval:
    """The changed model generates a sustained run of instants."""

    start: int
    end: int

    def active(self, t: int) -> bool:
        return self.start <= t <= self.end

    def times(self, T: int) -> list[int]:
        return list(range(self.start, min(self.end, T) + 1))


SCENARIO_NAMES = (
    "group-change",
    "split",
    "merge",
    "form",
    "fragment",
    "hetero-to-homo",
    "homo-to-hetero",
    "simple-to-complex",
    "complex-to-simple",
)

# scenario -> (baseline model, changed model, blocks of the baseline whose
# vertices are the changed set)
_SCENARIO_TABLE = {
    "group-change": ("M1", "M4", (0, 1)),
    "split": ("M1", "M2", (0,)),
    "merge": ("M2", "M1", (0, 1)),
    "form": ("M3", "M1", (2,)),
    "fragment": ("M1", "M3", (2,)),
    "hetero-to-homo": ("M1", "M5", (0,)),
    "homo-to-hetero": ("M5", "M1", (0,)),
    "simple-to-complex": ("M1", "M6", (0, 1)),
    "complex-to-simple": ("M6", "M1", (0, 1)),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """A change scenario: two models, a switch rule, and the changed set."""

    name: str
    f0: DcsbmModel
    f1: DcsbmModel
    change: ChangePoint | ChangeInterval
    T: int
    changed_vertices: np.ndarray

    def __post_init__(self):
        if self.f0.n != self.f1.n:
            raise ValueError("both models must share the vertex count")
        if isinstance(self.change, ChangePoint):
            if not 1 < self.change.t_star <= self.T:
                raise ValueError(f"change instant {self.change.t_star} outside 2..{self.T}")
        else:
            if not 1 < self.change.start < self.change.end <= self.T:
                raise ValueError(
                    f"interval {self.change.start}..{self.change.end} invalid for T={self.T}"
                )
        cv = np.array(sorted(int(v) for v in np.asarray(self.changed_vertices)))
        if cv.size == 0 or cv.size >= self.f0.n or cv[0] < 0 or cv[-1] >= self.f0.n:
            raise ValueError("changed vertices must be a proper nonempty subset")
        cv.flags.writeable = False
        object.__setattr__(self, "changed_vertices", cv)

    @property
    def n(self) -> int:
        return self.f0.n

    @property
    def unchanged_vertices(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.changed_vertices] = False
        return np.nonzero(mask)[0]

    @property
    def change_instant(self) -> int:
        """First instant generated by the changed model."""
        if isinstance(self.change, ChangePoint):
            return self.change.t_star
        return self.change.start


@dataclass(frozen=True)
class GroundTruth:
    """Sidecar describing what a generated sequence actually did."""

    scenario: str
    n: int
    T: int
    changed_vertices: np.ndarray
    change_times: list[int]


def scenario(
    name: str,
    change_type: str = "point",
    T: int = DEFAULT_T,
    scale: float | None = None,
    t_star: int = DEFAULT_CHANGE_INSTANT,
    interval: tuple[int, int] = DEFAULT_INTERVAL,
) -> ScenarioSpec:
    """Build a catalog scenario, optionally scaled down uniformly."""
    if name not in _SCENARIO_TABLE:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIO_NAMES}")
    f0_name, f1_name, changed_blocks = _SCENARIO_TABLE[name]
    f0 = catalog(f0_name, scale=scale)
    f1 = catalog(f1_name, scale=scale)
    if f0.n != f1.n:
        raise ValueError(
            f"scale {scale} rounds the paired models to different sizes "
            f"({f0.n} vs {f1.n}); choose a scale that keeps every block size integral"
        )
    c = f0.memberships
    changed = np.nonzero(np.isin(c, changed_blocks))[0]
    change: ChangePoint | ChangeInterval
    if change_type == "point":
        change = ChangePoint(t_star=t_star)
    elif change_type == "interval":
        change = ChangeInterval(start=interval[0], end=interval[1])
    else:
        raise ValueError(f"unknown change type {change_type!r}")
    return ScenarioSpec(
        name=name, f0=f0, f1=f1, change=change, T=T, changed_vertices=changed
    )


def generate_sequence(
    spec: ScenarioSpec,
    rng: np.random.Generator,
    freeze_theta: bool = False,
) -> tuple[list[SnapshotMatrix], GroundTruth]:
    """Sample the scenario's snapshot sequence.

    Degree propensities are redrawn independently at every instant, since
    consecutive snapshots are independent samples from the active model.
    `freeze_theta` instead draws one theta per model up front and reuses it,
    for ablation.
    """
    frozen: dict[int, np.ndarray] = {}
    if freeze_theta:
        frozen[0] = sample_theta(spec.f0, rng)
        frozen[1] = sample_theta(spec.f1, rng)
    snapshots = []
    for t in range(1, spec.T + 1):
        active = spec.change.active(t)
        model = spec.f1 if active else spec.f0
        if freeze_theta:
            theta = frozen[1 if active else 0]
        else:
            theta = sample_theta(model, rng)
        snapshots.append(sample_snapshot(model, theta, rng, t=t))
    truth = GroundTruth(
        scenario=spec.name,
        n=spec.n,
        T=spec.T,
        changed_vertices=spec.changed_vertices,
        change_times=spec.change.times(spec.T),
    )
    return snapshots, truth
