"""Tensor file formats, synthetic tensor generation, and result
serialization.

Three on-disk tensor formats are supported, auto-detected on read by
magic bytes and extension:

* binary (``.tns``/``.bin``): magic ``TNS3``, a version byte (1), three
  little-endian u32 dims, then ``8*I*J*K`` bytes of little-endian f64
  values with the mode-1 index fastest.  Write/read round-trips are
  bitwise exact.
* text (``.txt``, default for unknown extensions): a header line
  ``I J K``, then one value per line in the same flat order.
* CSV triplets (``.csv``): lines ``i,j,k,value`` with 1-based indices,
  unlisted entries zero.  Dims come from a ``# dims: I J K`` comment
  line or the ``dims`` argument.

All writes go through a temporary file in the target directory followed
by an atomic rename.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .decomp import max_feasible_cp_rank
from .errors import FormatError
from .harness import ExperimentResult, SummaryStats
from .tensor import DenseTensor3, frobenius_norm, reconstruct_cp

__all__ = [
    "read_tensor",
    "write_tensor",
    "SynthSpec",
    "synth_tensor",
    "experiment_to_json",
    "stats_csv_lines",
]

MAGIC = b"TNS3"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sBIII")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic low-rank tensor with optional noise.

    The tensor is a rank-``rank`` CP reconstruction from random factors
    plus Gaussian noise scaled so the noise-to-signal Frobenius ratio is
    exactly ``noise_level``.
    """

    dims: tuple[int, int, int]
    rank: int
    noise_level: float = 0.0
    factor_distribution: str = "uniform"
    seed: int = 0

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.rank < 1 or self.rank > max_feasible_cp_rank(dims):
            raise ValueError(
                f"rank {self.rank} is infeasible for dims {dims} "
                f"(must be in [1, {max_feasible_cp_rank(dims)}])"
            )
        if self.noise_level < 0:
            raise ValueError("noise_level must be >= 0")
        if self.factor_distribution not in ("uniform", "gaussian"):
            raise ValueError(
                f"factor_distribution must be 'uniform' or 'gaussian', "
                f"got {self.factor_distribution!r}"
            )


def synth_tensor(spec: SynthSpec) -> DenseTensor3:
    """Generate the tensor described by ``spec``, deterministically in
    ``spec.seed`` (factors A, B, C are drawn first, then the noise)."""
    rng = np.random.default_rng(spec.seed)
    if spec.factor_distribution == "uniform":
        draw = rng.random
    else:
        draw = rng.standard_normal
    A, B, C = (draw((d, spec.rank)) for d in spec.dims)
    clean = reconstruct_cp(A, B, C)
    if spec.noise_level == 0.0:
        return clean
    signal = frobenius_norm(clean)
    if signal == 0.0:
        raise ValueError("degenerate draw: the noiseless tensor is zero")
    noise = rng.standard_normal(spec.dims)
    noise *= spec.noise_level * signal / np.linalg.norm(noise.ravel())
    return DenseTensor3(clean.data + noise)


# ---------------------------------------------------------------------------
# tensor files


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tensor(X: DenseTensor3, path: str | Path, fmt: str | None = None) -> None:
    """Write a tensor; format from ``fmt`` or the file extension
    (``.csv`` triplets, ``.txt`` text, anything else binary)."""
    path = Path(path)
    if fmt is None:
        fmt = {".csv": "csv", ".txt": "text"}.get(path.suffix.lower(), "binary")
    if fmt == "binary":
        header = _HEADER.pack(MAGIC, BINARY_VERSION, *X.dims)
        payload = header + X.to_flat().astype("<f8").tobytes()
    elif fmt == "text":
        lines = ["%d %d %d" % X.dims]
        lines.extend(repr(float(v)) for v in X.to_flat())
        payload = ("\n".join(lines) + "\n").encode()
    elif fmt == "csv":
        i_, j_, k_ = X.dims
        lines = ["# dims: %d %d %d" % X.dims]
        for k in range(k_):
            for j in range(j_):
                for i in range(i_):
                    v = float(X.data[i, j, k])
                    if v != 0.0:
                        lines.append(f"{i + 1},{j + 1},{k + 1},{v!r}")
        payload = ("\n".join(lines) + "\n").encode()
    else:
        raise ValueError(f"unknown tensor format {fmt!r}")
    _atomic_write(path, payload)


def read_tensor(path: str | Path, dims: tuple[int, int, int] | None = None) -> DenseTensor3:
    """Read a tensor file (format auto-detected; see module docstring).

    ``dims`` is only consulted for CSV files lacking a dims header.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC:
        return _read_binary(raw, path)
    if path.suffix.lower() in (".tns", ".bin"):
        raise FormatError(f"{path}: bad magic bytes {raw[:4]!r} (expected {MAGIC!r})")
    if path.suffix.lower() == ".csv":
        return _read_csv(raw.decode(), path, dims)
    return _read_text(raw.decode(), path)


def _read_binary(raw: bytes, path: Path) -> DenseTensor3:
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: header truncated ({len(raw)} bytes)")
    magic, version, i, j, k = _HEADER.unpack_from(raw)
    if version != BINARY_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if min(i, j, k) < 1:
        raise FormatError(f"{path}: dims must be positive, got {(i, j, k)}")
    expected = 8 * i * j * k
    actual = len(raw) - _HEADER.size
    if actual != expected:
        raise FormatError(
            f"{path}: payload length mismatch, expected {expected} bytes, "
            f"found {actual}"
        )
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return DenseTensor3.from_flat(values, (i, j, k))


def _read_text(text: str, path: Path) -> DenseTensor3:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty tensor file")
    head = lines[0].split()
    if len(head) != 3:
        raise FormatError(f"{path}: expected header 'I J K', got {lines[0]!r}")
    try:
        i, j, k = (int(h) for h in head)
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer dims in header {lines[0]!r}") from exc
    if min(i, j, k) < 1:
        raise FormatError(f"{path}: dims must be positive, got {(i, j, k)}")
    body = lines[1:]
    if len(body) != i * j * k:
        raise FormatError(
            f"{path}: expected {i * j * k} values for dims {(i, j, k)}, found {len(body)}"
        )
    try:
        values = np.array([float(v) for v in body])
    except ValueError as exc:
        raise FormatError(f"{path}: unparsable value: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: file contains non-finite values")
    return DenseTensor3.from_flat(values, (i, j, k))


def _read_csv(
    text: str, path: Path, dims: tuple[int, int, int] | None
) -> DenseTensor3:
    header_dims: tuple[int, int, int] | None = None
    entries: list[tuple[int, int, int, float, int]] = []
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            stripped = ln.lstrip("#").strip()
            if stripped.lower().startswith("dims:"):
                parts = stripped[5:].split()
                try:
                    if len(parts) != 3:
                        raise ValueError
                    header_dims = tuple(int(p) for p in parts)  # type: ignore[assignment]
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: malformed dims comment {ln!r}") from None
            continue
        parts = ln.split(",")
        if len(parts) != 4:
            raise FormatError(
                f"{path}:{lineno}: expected 'i,j,k,value', got {ln!r}"
            )
        try:
            i, j, k = (int(p) for p in parts[:3])
            v = float(parts[3])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: unparsable triplet {ln!r}") from exc
        if not np.isfinite(v):
            raise FormatError(f"{path}:{lineno}: non-finite value {parts[3]!r}")
        entries.append((i, j, k, v, lineno))
    use_dims = dims if dims is not None else header_dims
    if use_dims is None:
        raise FormatError(
            f"{path}: CSV input needs dims via a '# dims: I J K' line or the dims argument"
        )
    use_dims = tuple(int(d) for d in use_dims)  # type: ignore[assignment]
    if len(use_dims) != 3 or min(use_dims) < 1:
        raise FormatError(f"{path}: dims must be three positive integers, got {use_dims}")
    arr = np.zeros(use_dims)
    for i, j, k, v, lineno in entries:
        if not (1 <= i <= use_dims[0] and 1 <= j <= use_dims[1] and 1 <= k <= use_dims[2]):
            raise FormatError(
                f"{path}:{lineno}: index ({i},{j},{k}) out of range for dims {use_dims} "
                f"(indices are 1-based)"
            )
        arr[i - 1, j - 1, k - 1] = v
    return DenseTensor3(arr)


# ---------------------------------------------------------------------------
# experiment results


def _stats_dict(stats: SummaryStats) -> dict:
    return {
        "n": stats.n,
        "min": stats.min,
        "q1": stats.q1,
        "median": stats.median,
        "q3": stats.q3,
        "max": stats.max,
        "lower_whisker": stats.lower_whisker,
        "upper_whisker": stats.upper_whisker,
        "outliers": list(stats.outliers),
        "smoothed_mean": stats.smoothed_mean,
    }


def experiment_to_json(result: ExperimentResult) -> str:
    """Deterministic JSON rendering of an experiment result.

    Raw per-sample values are always included so plots and alternative
    summaries never require refitting.
    """
    cfg = result.config
    doc = {
        "config": {
            "rank": cfg.rank,
            "schemes": [s.value for s in cfg.schemes],
            "ratios": list(cfg.ratios),
            "samples_per_cell": {s.value: n for s, n in cfg.samples_per_cell.items()},
            "compressed_modes": sorted(cfg.compressed_modes),
            "master_seed": cfg.master_seed,
            "fit": {
                "max_iterations": cfg.fit.max_iterations,
                "rel_tolerance": cfg.fit.rel_tolerance,
                "restarts": cfg.fit.restarts,
                "seed": cfg.fit.seed,
            },
        },
        "baseline": {
            "rank": result.baseline.rank,
            "value": result.baseline.value,
            "core_flat": [float(v) for v in result.baseline.core.to_flat()],
            "factor_rank_deficient": result.baseline.factor_rank_deficient,
        },
        "cells": [
            {
                "scheme": cell.scheme.value,
                "ratio": cell.ratio,
                "raw_samples": list(cell.raw_samples),
                "clamped_samples": list(cell.clamped_samples),
                "stats": _stats_dict(cell.stats),
            }
            for cell in result.cells.values()
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


STATS_CSV_HEADER = (
    "scheme,ratio,n,min,q1,median,q3,max,lower_whisker,upper_whisker,"
    "n_outliers,smoothed_mean"
)


def stats_csv_lines(result: ExperimentResult) -> list[str]:
    """Per-cell boxplot statistics as CSV rows (floats in repr form, so
    they round-trip exactly)."""
    lines = [STATS_CSV_HEADER]
    for cell in result.cells.values():
        s = cell.stats
        lines.append(
            ",".join(
                [
                    cell.scheme.value,
                    repr(cell.ratio),
                    str(s.n),
                    repr(s.min),
                    repr(s.q1),
                    repr(s.median),
                    repr(s.q3),
                    repr(s.max),
                    repr(s.lower_whisker),
                    repr(s.upper_whisker),
                    str(len(s.outliers)),
                    repr(s.smoothed_mean),
                ]
            )
        )
    return lines
