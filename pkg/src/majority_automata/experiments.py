"""Seeded random generations, Monte-Carlo trials and density sweeps."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import Classification, Generation, RunOutcome, UpdateRule, run_to_cycle
from .rng import MASK64, mix64, outputs, trial_seed
from .topology import NeighborhoodKind, Topology, build_cycle, build_lattice, read_edge_list

TIE_STREAM_SALT = 0x7469655F73747265  # keeps tie draws apart from the coloring stream


def random_generation(t: Topology, p_b: float, seed: int) -> Generation:
    """Vertex ``k`` is blue iff the ``k``-th splitmix64 output maps below ``p_b``.

    Outputs map to [0, 1) through their top 53 bits.
    """
    if not 0.0 <= p_b <= 1.0:
        raise ValueError(f"p_b={p_b} outside [0, 1]")
    words = outputs(seed & MASK64, t.vertex_count)
    u = (words >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    return Generation((u < p_b).astype(np.uint8))


@dataclass(frozen=True)
class TopologySpec:
    kind: str = "torus"  # torus | grid | cycle | graph
    n: int = 0
    neighborhood: str = "neumann"
    graph_file: str | None = None

    def build(self) -> Topology:
        return _build_topology(self.kind, self.n, self.neighborhood, self.graph_file)

    def label(self) -> tuple[str, str]:
        hood = self.neighborhood if self.kind in ("torus", "grid") else ""
        return self.kind, hood


@lru_cache(maxsize=16)
def _build_topology(kind: str, n: int, neighborhood: str, graph_file: str | None) -> Topology:
    if kind == "torus":
        return build_lattice(n, NeighborhoodKind.parse(neighborhood), True)
    if kind == "grid":
        return build_lattice(n, NeighborhoodKind.parse(neighborhood), False)
    if kind == "cycle":
        return build_cycle(n)
    if kind == "graph":
        if not graph_file:
            raise ValueError("topology 'graph' needs graph_file")
        return read_edge_list(graph_file)
    raise ValueError(f"unknown topology kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologySpec
    rule: str
    p_b: tuple[float, ...]
    trials: int
    base_seed: int = 0xC0FFEE
    max_steps: int | str = "auto"

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_b", tuple(float(p) for p in self.p_b))
        if list(self.p_b) != sorted(self.p_b):
            raise ValueError("p_b values must be sorted ascending")
        if not self.p_b:
            raise ValueError("p_b list is empty")
        for p in self.p_b:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p_b={p} outside [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.max_steps != "auto" and int(self.max_steps) < 1:
            raise ValueError("max_steps must be positive or 'auto'")
        UpdateRule.parse(self.rule)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        topo = raw.pop("topology")
        if isinstance(topo, str):
            topo = {"kind": topo}
        for key in ("n", "neighborhood", "graph_file"):
            if key in raw:
                topo = {**topo, key: raw.pop(key)}
        unknown = set(raw) - {"rule", "p_b", "trials", "base_seed", "max_steps"}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(topology=TopologySpec(**topo), **raw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (TypeError, KeyError) as exc:
            raise ValueError(f"{path}: invalid config: {exc}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p_b"] = list(self.p_b)
        return out


def run_trial(cfg: ExperimentConfig, p_b: float, trial_index: int) -> RunOutcome:
    """One seeded trial: a random initial generation run to its cycle."""
    seed = trial_seed(cfg.base_seed, trial_index, p_b)
    t = cfg.topology.build()
    g0 = random_generation(t, p_b, seed)
    rule = UpdateRule.parse(cfg.rule, seed=mix64(seed ^ TIE_STREAM_SALT))
    return run_to_cycle(t, rule, g0, cfg.max_steps)


@dataclass(frozen=True)
class SweepRow:
    p_b: float
    trials: int
    b_mono: int
    r_mono: int
    bichromatic: int
    total_consensus_time: int
    max_consensus_time: int
    total_final_blue: int
    vertex_count: int

    @property
    def frac_b_mono(self) -> Fraction:
        return Fraction(self.b_mono, self.trials)

    @property
    def frac_r_mono(self) -> Fraction:
        return Fraction(self.r_mono, self.trials)

    @property
    def frac_bichromatic(self) -> Fraction:
        return Fraction(self.bichromatic, self.trials)

    @property
    def mean_consensus_time(self) -> float:
        return self.total_consensus_time / self.trials

    @property
    def mean_final_blue_density(self) -> float:
        return self.total_final_blue / (self.trials * self.vertex_count)


@dataclass(frozen=True)
class SweepSummary:
    config: ExperimentConfig
    rows: tuple[SweepRow, ...] = field(default=())

    CSV_HEADER = (
        "n", "topology", "neighborhood", "rule", "p_b", "trials",
        "frac_b_mono", "frac_r_mono", "frac_bichromatic",
        "mean_consensus_time", "max_consensus_time", "mean_final_blue_density",
        "base_seed",
    )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        cfg = self.config
        kind, hood = cfg.topology.label()
        for row in self.rows:
            writer.writerow([
                cfg.topology.n, kind, hood, cfg.rule, repr(row.p_b), row.trials,
                repr(float(row.frac_b_mono)), repr(float(row.frac_r_mono)),
                repr(float(row.frac_bichromatic)), repr(row.mean_consensus_time),
                row.max_consensus_time, repr(row.mean_final_blue_density), cfg.base_seed,
            ])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _trial_record(args: tuple[ExperimentConfig, float, int]) -> tuple[str, int, int]:
    cfg, p_b, index = args
    try:
        out = run_trial(cfg, p_b, index)
    except Exception as exc:
        raise RuntimeError(f"trial {index} at p_b={p_b} failed: {exc}") from exc
    return out.classification.value, out.consensus_time, out.final_blue_count


def _aggregate(p_b: float, trials: int, V: int, records: Sequence[tuple[str, int, int]]) -> SweepRow:
    kinds = [r[0] for r in records]
    times = [r[1] for r in records]
    return SweepRow(
        p_b=p_b,
        trials=trials,
        b_mono=kinds.count(Classification.B_MONO.value),
        r_mono=kinds.count(Classification.R_MONO.value),
        bichromatic=kinds.count(Classification.BICHROMATIC.value),
        total_consensus_time=sum(times),
        max_consensus_time=max(times),
        total_final_blue=sum(r[2] for r in records),
        vertex_count=V,
    )


def sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepSummary:
    """All ``trials x len(p_b)`` trials, aggregated per density.

    Results do not depend on ``workers``: every trial is seeded on its own
    and the aggregates are order-free sums and counts.
    """
    V = cfg.topology.build().vertex_count
    jobs = [(cfg, p, i) for p in cfg.p_b for i in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_record, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_trial_record(job) for job in jobs]
    rows = []
    for k, p in enumerate(cfg.p_b):
        chunk = records[k * cfg.trials : (k + 1) * cfg.trials]
        rows.append(_aggregate(p, cfg.trials, V, chunk))
    return SweepSummary(cfg, tuple(rows))


def outcome_counts(cfg: ExperimentConfig, p_b: float) -> dict[str, list[int]]:
    """Consensus times grouped by classification for one density."""
    out: dict[str, list[int]] = {c.value: [] for c in Classification}
    for i in range(cfg.trials):
        kind, time, _ = _trial_record((cfg, p_b, i))
        out[kind].append(time)
    return out
