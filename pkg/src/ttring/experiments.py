"""Seeded reproductions of the rank experiments.

Each experiment builds a random ring per rank ``R``, forms a product with the
Kronecker core formulas, rounds it as a ring and, after opening the ring into
a train, as a train. Rows use independent generators seeded from
``(seed, R)``, so a row's result does not depend on which other rows run or in
what order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cores import RankVector
from .tr import (
    RingMatrix,
    _tr_round_impl,
    ring_matrix_random,
    tr_hadamard,
    tr_matmul,
    tr_norm,
    tr_random,
    tr_to_tt,
    tr_transpose,
    tt_to_tr,
)
from .tt import tt_hadamard_round, tt_matmul_round, tt_transpose

KINDS = ("matmul", "hadamard", "tt_to_tr_roundtrip")

# 0-based default profile cores: the first core each sweep truncates for matmul,
# the fifth core otherwise
DEFAULT_PROFILE_CORE = {"matmul": 3, "hadamard": 4, "tt_to_tr_roundtrip": 4}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    ``profile_core`` (0-based) asks for the scaled singular profile of that
    core in the ring rounded for ``profile_R``; ``None`` skips it.
    ``roundtrip_R1`` is the ring rank requested when the rounded train is
    turned back into a ring.
    """

    kind: str
    R_values: tuple[int, ...] = (3, 6, 9, 12)
    seed: int = 0
    epsilon: float = 1e-10
    d: int | None = None
    dim: int = 6
    profile_core: int | None = None
    profile_R: int | None = None
    roundtrip_R1: int = 3
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "R_values", tuple(int(r) for r in self.R_values))
        if not self.R_values:
            raise ValueError("R_values must not be empty")
        if any(r < 1 for r in self.R_values):
            raise ValueError(f"all R values must be >= 1, got {self.R_values}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.d is not None and self.d < 2:
            raise ValueError("d must be >= 2")
        if self.profile_R is not None and self.profile_R not in self.R_values:
            raise ValueError(f"profile_R={self.profile_R} is not among R_values {self.R_values}")
        if self.profile_core is not None and not 0 <= self.profile_core < self.cores:
            raise ValueError(f"profile_core must lie in [0, {self.cores - 1}]")

    @property
    def cores(self) -> int:
        if self.d is not None:
            return self.d
        return 4 if self.kind == "matmul" else 6


@dataclass
class ExperimentRow:
    R: int
    pre_ranks: RankVector
    tr_rounded_ranks: RankVector
    tt_rounded_ranks: RankVector
    tr_params: int
    tt_params: int
    kron_tr_params: int | None = None

    @property
    def tr_rounded_max(self) -> int:
        return self.tr_rounded_ranks.max

    @property
    def tt_rounded_max(self) -> int:
        return self.tt_rounded_ranks.max

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.tr_params, self.tt_params)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ExperimentRow]
    profile: np.ndarray | None = None
    profile_R: int | None = None
    profile_core: int | None = None
    extra: dict = field(default_factory=dict)

    def row(self, R: int) -> ExperimentRow:
        for r in self.rows:
            if r.R == R:
                return r
        raise KeyError(R)


def row_rng(seed: int, R: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(R)]))


def scaled_profile(spectra: dict[int, np.ndarray], core: int, norm: float, d: int, r1: int) -> np.ndarray:
    return np.sort(spectra[core])[::-1] * (math.sqrt(d * r1) / norm)


def _tr_round_profiled(ring, cfg: ExperimentConfig, R: int, sink: dict):
    rounded, spectra = _tr_round_impl(ring, cfg.epsilon)
    if cfg.profile_core is not None and R == _profile_R(cfg):
        sink["profile"] = scaled_profile(
            spectra, cfg.profile_core, tr_norm(ring), ring.d, ring.ranks[0]
        )
    return rounded


def _profile_R(cfg: ExperimentConfig) -> int:
    return cfg.profile_R if cfg.profile_R is not None else max(cfg.R_values)


def matmul_inputs(cfg: ExperimentConfig, R: int) -> RingMatrix:
    """``A`` of size ``dim x dim^d``: the row index sits on the first core."""
    d = cfg.cores
    rows = (cfg.dim,) + (1,) * (d - 1)
    cols = (cfg.dim,) * d
    return ring_matrix_random(rows, cols, R, row_rng(cfg.seed, R))


def hadamard_inputs(cfg: ExperimentConfig, R: int):
    return tr_random((cfg.dim,) * cfg.cores, R, row_rng(cfg.seed, R))


def _matmul_row(cfg: ExperimentConfig, R: int, sink: dict) -> ExperimentRow:
    a = matmul_inputs(cfg, R)
    aat = tr_matmul(a, tr_transpose(a))
    expected = a.ranks * a.ranks
    if aat.ranks != expected:
        raise AssertionError(f"product ranks {aat.ranks} differ from {expected}")
    rounded = _tr_round_profiled(aat, cfg, R, sink)
    a_tt = tr_to_tt(a)
    tt = tt_matmul_round(a_tt, tt_transpose(a_tt), cfg.epsilon)
    return ExperimentRow(
        R=R,
        pre_ranks=aat.ranks,
        tr_rounded_ranks=rounded.ranks,
        tt_rounded_ranks=tt.ranks,
        tr_params=rounded.param_count(),
        tt_params=tt.param_count(),
    )


def _hadamard_product(cfg: ExperimentConfig, R: int):
    x = hadamard_inputs(cfg, R)
    prod = tr_hadamard(x, x)
    expected = x.ranks * x.ranks
    if prod.ranks != expected:
        raise AssertionError(f"product ranks {prod.ranks} differ from {expected}")
    x_tt = tr_to_tt(x)
    tt = tt_hadamard_round(x_tt, x_tt, cfg.epsilon)
    return prod, tt


def _hadamard_row(cfg: ExperimentConfig, R: int, sink: dict) -> ExperimentRow:
    prod, tt = _hadamard_product(cfg, R)
    rounded = _tr_round_profiled(prod, cfg, R, sink)
    return ExperimentRow(
        R=R,
        pre_ranks=prod.ranks,
        tr_rounded_ranks=rounded.ranks,
        tt_rounded_ranks=tt.ranks,
        tr_params=rounded.param_count(),
        tt_params=tt.param_count(),
    )


def _roundtrip_row(cfg: ExperimentConfig, R: int, sink: dict) -> ExperimentRow:
    prod, tt = _hadamard_product(cfg, R)
    ring = tt_to_tr(tt, cfg.roundtrip_R1)
    rounded = _tr_round_profiled(ring, cfg, R, sink)
    return ExperimentRow(
        R=R,
        pre_ranks=ring.ranks,
        tr_rounded_ranks=rounded.ranks,
        tt_rounded_ranks=tt.ranks,
        tr_params=rounded.param_count(),
        tt_params=tt.param_count(),
        # rounding keeps the Kronecker ranks, so the unrounded count is the rounded one
        kron_tr_params=prod.param_count(),
    )


_ROW_BUILDERS: dict[str, Callable[[ExperimentConfig, int, dict], ExperimentRow]] = {
    "matmul": _matmul_row,
    "hadamard": _hadamard_row,
    "tt_to_tr_roundtrip": _roundtrip_row,
}


def _run(cfg: ExperimentConfig, kind: str) -> ExperimentReport:
    if cfg.kind != kind:
        raise ValueError(f"config kind is {cfg.kind!r}, expected {kind!r}")
    build = _ROW_BUILDERS[kind]
    sink: dict = {}

    def one(R: int) -> ExperimentRow:
        return build(cfg, R, sink)

    if cfg.jobs > 1 and len(cfg.R_values) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(one, cfg.R_values))
    else:
        rows = [one(R) for R in cfg.R_values]
    report = ExperimentReport(config=cfg, rows=rows)
    if "profile" in sink:
        report.profile = sink["profile"]
        report.profile_R = _profile_R(cfg)
        report.profile_core = cfg.profile_core
    return report


def run_matmul_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Rank of ``A A^T`` for a random ``dim x dim^d`` ring matrix ``A``."""
    return _run(cfg, "matmul")


def run_hadamard_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Rank of ``x * x`` (entrywise) for a random cubical ring ``x``."""
    return _run(cfg, "hadamard")


def run_tt_to_tr_roundtrip(cfg: ExperimentConfig) -> ExperimentReport:
    """Hadamard pipeline continued: rounded train back to a ring, then rounded."""
    return _run(cfg, "tt_to_tr_roundtrip")


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return _run(cfg, cfg.kind)


def experiment_ring(kind: str, R: int, seed: int, dim: int = 6, d: int | None = None):
    """The ring that an experiment row rounds, for inspection and profiles."""
    cfg = ExperimentConfig(kind=kind, R_values=(R,), seed=seed, dim=dim, d=d)
    if kind == "matmul":
        a = matmul_inputs(cfg, R)
        return tr_matmul(a, tr_transpose(a))
    if kind == "hadamard":
        x = hadamard_inputs(cfg, R)
        return tr_hadamard(x, x)
    _, tt = _hadamard_product(cfg, R)
    return tt_to_tr(tt, cfg.roundtrip_R1)


def format_ratio(r: Fraction, digits: int = 2) -> str:
    if r.denominator == 1:
        return str(r.numerator)
    return f"{float(r):.{digits}f}"


def report_records(report: ExperimentReport) -> list[dict]:
    """Rows as plain dicts, in CSV column order."""
    out = []
    for row in report.rows:
        rec = {
            "R": row.R,
            "pre_ranks": " ".join(str(r) for r in row.pre_ranks),
            "tr_rounded_max": row.tr_rounded_max,
            "tt_rounded_max": row.tt_rounded_max,
            "tr_params": row.tr_params,
            "tt_params": row.tt_params,
            "ratio": format_ratio(row.ratio),
        }
        if row.kron_tr_params is not None:
            rec["kron_tr_params"] = row.kron_tr_params
        out.append(rec)
    return out


def seeds_agree(kind: str, R_values: Sequence[int], seeds: Sequence[int], **kw) -> bool:
    """Whether the rounded rank columns are identical across seeds."""
    seen = None
    for s in seeds:
        rep = run_experiment(ExperimentConfig(kind=kind, R_values=tuple(R_values), seed=s, **kw))
        cols = [(r.tr_rounded_ranks, r.tt_rounded_ranks) for r in rep.rows]
        if seen is None:
            seen = cols
        elif cols != seen:
            return False
    return True
