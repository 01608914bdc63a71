"""Command-line interface: simulate scenarios, detect changes, run evaluations.

File formats
------------
Snapshot sequences travel as whitespace-separated edge lists, one edge per
line: ``t i j weight`` with a 1-based time index, 0-based vertex indices,
UTF-8 text, LF line endings, and ``#`` comments.  Each undirected edge may
be listed once (it is mirrored) or twice with the same weight; conflicting
duplicates are rejected.  Missing pairs have weight zero.

Every command writes a ``manifest.json`` recording the merged
configuration, input/output paths, seed, per-stage wall-clock timings, and
the tool version.  A flat ``key = value`` config file can pre-set any flag;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import run_baseline
from .dcsbm import (
    DEFAULT_CHANGE_INSTANT,
    DEFAULT_INTERVAL,
    DEFAULT_T,
    SCENARIO_NAMES,
    GroundTruth,
    generate_sequence,
    scenario,
)
from .embedding import DEFAULT_RANK_EPSILON
from .errors import FormatError, NetchangeError
from .evaluation import performance_rows, run_experiment
from .graph import SnapshotMatrix
from .pipeline import DEFAULT_ZSCORE_THRESHOLD, CdpConfig, run_cdp

METHODS = ("cdp", "act", "actm")


# ---------------------------------------------------------------------------
# edge-list format


def ingest_sequence(path: str | Path, n: int | None = None) -> list[SnapshotMatrix]:
    """Parse an edge-list file into one snapshot per distinct time index.

    The vertex count is `n` when given, else one past the largest index
    seen anywhere in the file.  An edge listed once is mirrored; listing
    both orientations (or repeating a line) is accepted only when the
    weights agree.
    """
    path = Path(path)
    edges: dict[int, dict[tuple[int, int], float]] = {}
    max_vertex = -1
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(
                    f"{path.name}:{lineno}: expected 't i j weight', got {len(parts)} fields"
                )
            try:
                t = int(parts[0])
                i = int(parts[1])
                j = int(parts[2])
            except ValueError as exc:
                raise FormatError(f"{path.name}:{lineno}: non-integer index: {exc}") from exc
            try:
                weight = float(parts[3])
            except ValueError as exc:
                raise FormatError(f"{path.name}:{lineno}: non-numeric weight: {exc}") from exc
            if t < 1:
                raise FormatError(f"{path.name}:{lineno}: time index must be >= 1, got {t}")
            if i < 0 or j < 0:
                raise FormatError(f"{path.name}:{lineno}: vertex indices must be >= 0")
            if not np.isfinite(weight):
                raise FormatError(f"{path.name}:{lineno}: weight must be finite")
            key = (min(i, j), max(i, j))
            snapshot = edges.setdefault(t, {})
            if key in snapshot and snapshot[key] != weight:
                raise FormatError(
                    f"{path.name}:{lineno}: conflicting weight for edge {key} at t={t}: "
                    f"{snapshot[key]} vs {weight}"
                )
            snapshot[key] = weight
            max_vertex = max(max_vertex, i, j)
    if not edges:
        raise FormatError(f"{path.name}: no edges found")
    if n is None:
        n = max_vertex + 1
    elif max_vertex >= n:
        raise FormatError(f"{path.name}: vertex index {max_vertex} exceeds n={n}")
    if n < 2:
        raise FormatError(f"{path.name}: need at least 2 vertices, inferred n={n}")

    snapshots = []
    for t in sorted(edges):
        W = np.zeros((n, n))
        for (i, j), weight in edges[t].items():
            W[i, j] = weight
            W[j, i] = weight
        snapshots.append(SnapshotMatrix(W=W, t=t))
    return snapshots


def _format_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def write_sequence(path: str | Path, snapshots: list[SnapshotMatrix]) -> None:
    """Write snapshots as a sorted edge list; zero entries are omitted."""
    lines = []
    for snap in snapshots:
        rows, cols = np.nonzero(np.triu(snap.W))
        for i, j in zip(rows.tolist(), cols.tolist()):
            lines.append(f"{snap.t} {i} {j} {_format_weight(snap.W[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ground_truth(path: str | Path, truth: GroundTruth) -> None:
    payload = {
        "scenario": truth.scenario,
        "n": truth.n,
        "T": truth.T,
        "changed_vertices": [int(v) for v in truth.changed_vertices],
        "change_times": [int(t) for t in truth.change_times],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class StageTimer:
    """Names the running stage and records wall-clock seconds per stage."""

    def __init__(self):
        self.records: list[dict] = []
        self.current: str | None = None

    def __call__(self, name: str):
        return _Stage(self, name)


class _Stage:
    def __init__(self, timer: StageTimer, name: str):
        self.timer = timer
        self.name = name

    def __enter__(self):
        self.timer.current = self.name
        self.start = time.perf_counter()

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.timer.records.append(
                {"stage": self.name, "seconds": time.perf_counter() - self.start}
            )
            self.timer.current = None
        return False


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    inputs: list[str],
    outputs: list[str],
    seed: int | None,
    stages: StageTimer,
) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": inputs,
        "outputs": sorted(outputs),
        "seed": seed,
        "stages": stages.records,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _config_snapshot(args: argparse.Namespace) -> dict:
    skip = {"func", "command", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args, stages: StageTimer) -> int:
    out = _out_dir(args)
    with stages("build-scenario"):
        spec = scenario(
            args.scenario, change_type=args.change_type, T=args.T, scale=args.scale
        )
    with stages("generate"):
        snapshots, truth = generate_sequence(spec, np.random.default_rng(args.seed))
    with stages("write"):
        edges_path = out / "sequence.tsv"
        truth_path = out / "ground_truth.json"
        write_sequence(edges_path, snapshots)
        write_ground_truth(truth_path, truth)
    write_manifest(
        out,
        "simulate",
        _config_snapshot(args),
        inputs=[],
        outputs=[str(edges_path), str(truth_path)],
        seed=args.seed,
        stages=stages,
    )
    print(f"wrote {spec.T} snapshots (n={spec.n}) to {edges_path}")
    return 0


def cmd_detect(args, stages: StageTimer) -> int:
    out = _out_dir(args)
    config = CdpConfig(
        window=args.window,
        epsilon_rank=args.epsilon,
        zscore_threshold=args.threshold,
        seed=args.seed,
    )
    with stages("ingest"):
        snapshots = ingest_sequence(args.input)
    with stages("score"):
        if args.method == "cdp":
            series = run_cdp(snapshots, config)
        else:
            series = run_baseline(snapshots, config, kind=args.method)
    with stages("write"):
        score_rows = []
        for t in series.scored_instants():
            z = series.scores[t].z
            zhat = series.zscores[t]
            detected = series.detections[t]
            for v in range(z.shape[0]):
                score_rows.append(
                    (t, v, float(z[v]), float(zhat[v]), 1 if v in detected else 0)
                )
        scores_path = out / "scores.csv"
        write_csv(scores_path, ["t", "vertex", "z", "zscore", "detected"], score_rows)
        dims_path = out / "dims.csv"
        write_csv(dims_path, ["t", "d"], [(t, series.dims[t]) for t in sorted(series.dims)])
    write_manifest(
        out,
        "detect",
        _config_snapshot(args),
        inputs=[str(args.input)],
        outputs=[str(scores_path), str(dims_path)],
        seed=args.seed,
        stages=stages,
    )
    scored = series.scored_instants()
    n = snapshots[0].n
    flagged = sum(len(series.detections[t]) for t in scored)
    worst = max((len(series.detections[t]) / n for t in scored), default=0.0)
    print(
        f"scored {len(scored)} instants with {args.method}; {flagged} detections, "
        f"max per-instant fraction {worst:.4f}"
    )
    return 0


def cmd_evaluate(args, stages: StageTimer) -> int:
    out = _out_dir(args)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected subset of {METHODS}")
    windows = tuple(int(w) for w in args.windows.split(","))
    with stages("build-scenario"):
        spec = scenario(
            args.scenario, change_type=args.change_type, T=args.T, scale=args.scale
        )
    with stages("experiment"):
        result = run_experiment(
            spec,
            methods=methods,
            windows=windows,
            runs=args.runs,
            seed=args.seed,
            N=args.phi_samples,
            epsilon_rank=args.epsilon,
        )
    with stages("write"):
        perf_path = out / "performance.csv"
        write_csv(
            perf_path,
            ["scenario", "method", "window", "run", "t", "phi", "eta", "eta_bar"],
            [
                (
                    row["scenario"],
                    row["method"],
                    row["window"],
                    row["run"],
                    row["t"],
                    row["phi"],
                    row["eta"],
                    row["eta_bar"],
                )
                for row in performance_rows(result)
            ],
        )
        sign_path = out / "sign_tests.csv"
        write_csv(
            sign_path,
            ["scenario", "window", "comparison", "alternative", "p_value"],
            [
                (result.scenario, r["window"], r["comparison"], r["alternative"], r["p_value"])
                for r in result.sign_tests
            ],
        )
        prop_path = out / "proportions.csv"
        write_csv(
            prop_path,
            ["scenario", "window", "comparison", "relation", "proportion"],
            [
                (result.scenario, r["window"], r["comparison"], r["relation"], r["proportion"])
                for r in result.proportions
            ],
        )
        timing_path = out / "timings.csv"
        write_csv(
            timing_path,
            ["task", "method", "n", "mean_seconds"],
            [(r["task"], r["method"], r["n"], r["mean_seconds"]) for r in result.timings],
        )
    write_manifest(
        out,
        "evaluate",
        _config_snapshot(args),
        inputs=[],
        outputs=[str(perf_path), str(sign_path), str(prop_path), str(timing_path)],
        seed=args.seed,
        stages=stages,
    )
    print(
        f"evaluated {result.scenario} over {result.runs} runs, "
        f"methods={','.join(methods)}, windows={args.windows}"
    )
    return 0


# ---------------------------------------------------------------------------
# argument handling


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat 'key = value' file mirroring the command-line flags."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netchange",
        description="Vertex-level change detection in dynamic weighted networks.",
    )
    parser.add_argument("--version", action="version", version=f"netchange {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value file pre-setting any flag")
        p.add_argument("--out", default="netchange_out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="random seed")

    sim = sub.add_parser("simulate", help="generate a synthetic change scenario")
    common(sim)
    sim.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    sim.add_argument(
        "--change-type",
        default="point",
        choices=("point", "interval"),
        help=f"single instant (t*={DEFAULT_CHANGE_INSTANT}) or sustained "
        f"interval {DEFAULT_INTERVAL[0]}..{DEFAULT_INTERVAL[1]}",
    )
    sim.add_argument("--T", type=int, default=DEFAULT_T, help="sequence length")
    sim.add_argument("--scale", type=float, default=None, help="uniform block-size multiplier")
    sim.set_defaults(func=cmd_simulate)

    det = sub.add_parser("detect", help="score vertices of an ingested sequence")
    common(det)
    det.add_argument("--input", required=True, help="edge-list file (t i j weight)")
    det.add_argument("--method", default="cdp", choices=METHODS)
    det.add_argument("--window", type=int, default=5, help="profile window size")
    det.add_argument(
        "--epsilon", type=float, default=DEFAULT_RANK_EPSILON,
        help="rank-selection residual threshold",
    )
    det.add_argument(
        "--threshold", type=float, default=DEFAULT_ZSCORE_THRESHOLD,
        help="z-score detection cutoff",
    )
    det.set_defaults(func=cmd_detect)

    ev = sub.add_parser("evaluate", help="simulation experiment with performance tables")
    common(ev)
    ev.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    ev.add_argument("--change-type", default="point", choices=("point", "interval"))
    ev.add_argument("--T", type=int, default=DEFAULT_T)
    ev.add_argument("--scale", type=float, default=None)
    ev.add_argument("--methods", default="cdp,act,actm", help="comma-separated methods")
    ev.add_argument("--windows", default="5", help="comma-separated window sizes")
    ev.add_argument("--runs", type=int, default=100)
    ev.add_argument("--epsilon", type=float, default=DEFAULT_RANK_EPSILON)
    ev.add_argument(
        "--phi-samples", type=int, default=100_000,
        help="resampling count for the exceedance probability",
    )
    ev.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        file_args = []
        for key, value in read_config_file(args.config).items():
            file_args.extend([f"--{key.replace('_', '-')}", value])
        # file values act as defaults: explicit flags come later and win
        args = parser.parse_args([argv[0], *file_args, *argv[1:]])
    stages = StageTimer()
    try:
        return args.func(args, stages)
    except (NetchangeError, ValueError, OSError) as exc:
        stage = stages.current or "setup"
        print(f"netchange {args.command}: stage '{stage}' failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
