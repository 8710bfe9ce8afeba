"""Monte Carlo protocol for core consistency under compression.

For every (scheme, ratio) cell of a grid, the harness draws independent
compression operators, compresses the input tensor, fits a CP model at a
fixed component count, and records the core consistency value of each
sample.  Negative values are clamped to zero before any statistics are
computed, and each cell is summarized with Tukey boxplot statistics plus
a mean taken after winsorizing outliers to the whisker values.

Reproducibility: the operator for sample ``s`` of cell ``(scheme,
ratio)`` is seeded by ``mix_seed(master_seed, scheme.wire_id,
round(ratio * 10000), s)`` and the CP fit of that sample by
``mix_seed(sample_seed, FIT_TAG)``, so any cell or sample can be
recomputed in isolation and results do not depend on how many workers
executed the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence

import numpy as np

from .corcondia import CorcondiaReport, corcondia
from .compress import (
    RatioSpec,
    Scheme,
    compress,
    gaussian_operator,
    orthonormal_operator,
    ratio_to_dims,
    tucker_operator,
)
from .decomp import FitConfig, cp_als, max_feasible_cp_rank
from .errors import ConfigError
from .seeding import mix_seed
from .tensor import DenseTensor3

__all__ = [
    "ExperimentConfig",
    "SummaryStats",
    "CellResult",
    "ExperimentResult",
    "clamp_negatives",
    "summarize",
    "run_experiment",
]

# Tags mixed with the master seed for work items that are not cell samples.
BASELINE_TAG = 3
FIT_TAG = 4

DEFAULT_RATIOS = (0.5, 0.4, 0.3, 0.2, 0.1, 0.08, 0.04)
DEFAULT_SAMPLES = {Scheme.GAUSSIAN: 1000, Scheme.ORTHONORMAL: 1000, Scheme.TUCKER: 10}


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid definition and sampling budget for one experiment run.

    Defaults mirror the reference protocol: ratios from 50% down to 4%
    over modes 1 and 2, 1000 samples for the random schemes and 10 for
    the Tucker scheme, three CP components.
    """

    rank: int = 3
    schemes: tuple[Scheme, ...] = (Scheme.GAUSSIAN, Scheme.ORTHONORMAL, Scheme.TUCKER)
    ratios: tuple[float, ...] = DEFAULT_RATIOS
    samples_per_cell: Mapping[Scheme, int] = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    compressed_modes: frozenset[int] = field(default_factory=lambda: frozenset({1, 2}))
    master_seed: int = 0
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ConfigError(f"rank must be >= 1, got {self.rank}")
        schemes = tuple(Scheme(s) for s in self.schemes)
        if not schemes:
            raise ConfigError("schemes must be nonempty")
        ratios = tuple(float(r) for r in self.ratios)
        if not ratios:
            raise ConfigError("ratios must be nonempty")
        for r in ratios:
            RatioSpec(r, self.compressed_modes)  # validates range and modes
        samples = {Scheme(k): int(v) for k, v in self.samples_per_cell.items()}
        for s in schemes:
            if samples.get(s, 0) < 1:
                raise ConfigError(f"samples_per_cell[{s.value}] must be >= 1")
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "samples_per_cell", samples)
        object.__setattr__(self, "compressed_modes", frozenset(int(m) for m in self.compressed_modes))


@dataclass(frozen=True)
class SummaryStats:
    """Tukey boxplot statistics of one sample vector.

    Quartiles use linear interpolation between order statistics;
    whiskers sit at the most extreme samples within 1.5 IQR of the
    quartiles; ``outliers`` are the samples beyond the whiskers; and
    ``smoothed_mean`` is the mean after winsorizing outliers to the
    nearest whisker value.
    """

    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    lower_whisker: float
    upper_whisker: float
    outliers: tuple[float, ...]
    smoothed_mean: float


@dataclass(frozen=True)
class CellResult:
    """Samples and statistics for one (scheme, ratio) cell.

    ``clamped_samples[i] == max(raw_samples[i], 0)``; the statistics are
    computed from the clamped samples.
    """

    scheme: Scheme
    ratio: float
    raw_samples: tuple[float, ...]
    clamped_samples: tuple[float, ...]
    stats: SummaryStats


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    cells: dict[tuple[Scheme, float], CellResult]
    baseline: CorcondiaReport


def clamp_negatives(samples: Sequence[float]) -> list[float]:
    """Elementwise max(sample, 0); length preserved."""
    return [max(float(v), 0.0) for v in samples]


def summarize(samples: Sequence[float]) -> SummaryStats:
    """Boxplot statistics with a winsorized mean (see :class:`SummaryStats`)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample list")
    q1, median, q3 = (float(q) for q in np.percentile(arr, [25.0, 50.0, 75.0]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
    lower_whisker = float(inside.min())
    upper_whisker = float(inside.max())
    outliers = arr[(arr < lower_whisker) | (arr > upper_whisker)]
    winsorized = np.clip(arr, lower_whisker, upper_whisker)
    return SummaryStats(
        n=int(arr.size),
        min=float(arr.min()),
        q1=q1,
        median=median,
        q3=q3,
        max=float(arr.max()),
        lower_whisker=lower_whisker,
        upper_whisker=upper_whisker,
        outliers=tuple(float(v) for v in np.sort(outliers)),
        smoothed_mean=float(winsorized.mean()),
    )


def sample_seed(master_seed: int, scheme: Scheme, ratio: float, index: int) -> int:
    """Operator seed for one Monte Carlo sample (ratio in basis points)."""
    return mix_seed(master_seed, scheme.wire_id, int(round(ratio * 10000)), index)


def _run_sample(
    X: DenseTensor3,
    scheme: Scheme,
    target: tuple[int, int, int],
    rank: int,
    fit: FitConfig,
    seed: int,
) -> float:
    if scheme is Scheme.GAUSSIAN:
        op = gaussian_operator(X.dims, target, seed)
    elif scheme is Scheme.ORTHONORMAL:
        op = orthonormal_operator(X.dims, target, seed)
    else:
        op = tucker_operator(X, target, replace(fit, seed=seed))
    compressed = compress(X, op)
    model = cp_als(compressed, rank, replace(fit, seed=mix_seed(seed, FIT_TAG)))
    return corcondia(compressed, model).value


def run_experiment(
    X: DenseTensor3, cfg: ExperimentConfig, workers: int = 1
) -> ExperimentResult:
    """Run the full (scheme, ratio) grid and summarize each cell.

    The grid is validated before any computation: every compressed shape
    in it must support ``cfg.rank`` CP components.  With ``workers > 1``
    samples run on a thread pool; per-sample derived seeds make the
    result identical to the sequential run.
    """
    targets: dict[float, tuple[int, int, int]] = {}
    for ratio in cfg.ratios:
        target = ratio_to_dims(X.dims, RatioSpec(ratio, cfg.compressed_modes))
        feasible = max_feasible_cp_rank(target)
        if cfg.rank > feasible:
            raise ConfigError(
                f"ratio {ratio} compresses {X.dims} to {target}, which supports at "
                f"most {feasible} CP components (rank {cfg.rank} requested)"
            )
        targets[ratio] = target
    if cfg.rank > max_feasible_cp_rank(X.dims):
        raise ConfigError(
            f"rank {cfg.rank} is infeasible for the uncompressed dims {X.dims}"
        )

    baseline_model = cp_als(
        X, cfg.rank, replace(cfg.fit, seed=mix_seed(cfg.master_seed, BASELINE_TAG))
    )
    baseline = corcondia(X, baseline_model)

    tasks = [
        (scheme, ratio, s)
        for scheme in cfg.schemes
        for ratio in cfg.ratios
        for s in range(cfg.samples_per_cell[scheme])
    ]

    def run(task: tuple[Scheme, float, int]) -> float:
        scheme, ratio, s = task
        return _run_sample(
            X,
            scheme,
            targets[ratio],
            cfg.rank,
            cfg.fit,
            sample_seed(cfg.master_seed, scheme, ratio, s),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, tasks))
    else:
        values = [run(t) for t in tasks]

    cells: dict[tuple[Scheme, float], CellResult] = {}
    pos = 0
    for scheme in cfg.schemes:
        for ratio in cfg.ratios:
            n = cfg.samples_per_cell[scheme]
            raw = values[pos : pos + n]
            pos += n
            clamped = clamp_negatives(raw)
            cells[(scheme, ratio)] = CellResult(
                scheme=scheme,
                ratio=ratio,
                raw_samples=tuple(raw),
                clamped_samples=tuple(clamped),
                stats=summarize(clamped),
            )
    return ExperimentResult(config=cfg, cells=cells, baseline=baseline)
