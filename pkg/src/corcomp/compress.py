"""Randomized modewise tensor compression.

A compression operator is a triple of matrices (U: LxI, V: MxJ, W: NxK)
applied as n-mode products, giving the compressed tensor
``X' = X x1 U x2 V x3 W`` of dims (L, M, N).  Three constructions are
provided:

* ``gaussian``: i.i.d. standard normal entries (rows not orthonormal),
* ``orthonormal``: Q-transpose from the reduced QR of a Gaussian draw's
  transpose, giving orthonormal rows,
* ``tucker``: transposes of fitted Tucker factors, so the compressed
  tensor equals the fitted Tucker core.

For operators with orthonormal rows, ``project_onto_rowspaces`` computes
``X x1 U'U x2 V'V x3 W'W``, the projection of X onto the three rowspaces;
compression is lossless for the core consistency diagnostic exactly when
this projection leaves X unchanged.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .decomp import FitConfig, tucker3
from .errors import ShapeError
from .tensor import DenseTensor3, as_matrix, n_mode_product

__all__ = [
    "Scheme",
    "CompressionOperator",
    "RatioSpec",
    "ratio_to_dims",
    "gaussian_operator",
    "orthonormal_operator",
    "tucker_operator",
    "compress",
    "project_onto_rowspaces",
]

_ORTHO_TOL = 1e-10


class Scheme(str, enum.Enum):
    """Compression operator construction (the string value appears in
    CLI flags and serialized results)."""

    GAUSSIAN = "gaussian"
    ORTHONORMAL = "orthonormal"
    TUCKER = "tucker"

    @property
    def wire_id(self) -> int:
        """Stable integer id used in seed derivation."""
        return {Scheme.GAUSSIAN: 0, Scheme.ORTHONORMAL: 1, Scheme.TUCKER: 2}[self]


@dataclass(frozen=True)
class CompressionOperator:
    """Modewise compression matrices tagged with their construction.

    Orthonormal and Tucker operators must have orthonormal rows in every
    mode; Gaussian operators deliberately do not.  ``seed`` records the
    stream the random schemes were drawn from (None for Tucker, which is
    a deterministic function of the tensor it was fitted to).
    """

    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    scheme: Scheme
    seed: int | None = None

    def __post_init__(self) -> None:
        for name, M in zip("UVW", (self.U, self.V, self.W)):
            arr = as_matrix(M, name)
            if arr.shape[0] > arr.shape[1]:
                raise ShapeError(
                    f"{name} must not expand its mode, got shape {arr.shape}"
                )
            object.__setattr__(self, name, arr)
        if self.scheme in (Scheme.ORTHONORMAL, Scheme.TUCKER):
            for name, M in zip("UVW", (self.U, self.V, self.W)):
                gram = M @ M.T
                if np.max(np.abs(gram - np.eye(M.shape[0]))) > _ORTHO_TOL:
                    raise ValueError(
                        f"{self.scheme.value} operator requires orthonormal rows, "
                        f"{name} fails the check"
                    )

    @property
    def source_dims(self) -> tuple[int, int, int]:
        return (self.U.shape[1], self.V.shape[1], self.W.shape[1])

    @property
    def target_dims(self) -> tuple[int, int, int]:
        return (self.U.shape[0], self.V.shape[0], self.W.shape[0])


@dataclass(frozen=True)
class RatioSpec:
    """Compression ratio and the set of modes it applies to.

    The ratio is the fraction each listed mode is reduced to, e.g. 0.5
    halves a mode.  By convention only modes 1 and 2 are compressed by
    default; mode 3 is typically too small to be worth reducing.
    """

    ratio: float
    compressed_modes: frozenset[int] = field(default_factory=lambda: frozenset({1, 2}))

    def __post_init__(self) -> None:
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must lie in (0, 1], got {self.ratio}")
        modes = frozenset(int(m) for m in self.compressed_modes)
        if not modes <= {1, 2, 3}:
            raise ValueError(f"compressed modes must be a subset of {{1,2,3}}, got {modes}")
        object.__setattr__(self, "compressed_modes", modes)


def ratio_to_dims(dims: tuple[int, int, int], spec: RatioSpec) -> tuple[int, int, int]:
    """Target dims for a ratio: floor(ratio * dim), clamped to >= 1, on
    each compressed mode; other modes are unchanged."""
    out = []
    for mode, d in zip((1, 2, 3), dims):
        if mode in spec.compressed_modes:
            out.append(max(1, math.floor(spec.ratio * d)))
        else:
            out.append(int(d))
    return tuple(out)  # type: ignore[return-value]


def _check_target(dims, target) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    dims = tuple(int(d) for d in dims)
    target = tuple(int(t) for t in target)
    if len(dims) != 3 or len(target) != 3:
        raise ShapeError("dims and target must be triples")
    for mode, (t, d) in enumerate(zip(target, dims), start=1):
        if t < 1:
            raise ShapeError(f"target mode-{mode} size must be >= 1, got {t}")
        if t > d:
            raise ShapeError(f"target mode-{mode} size {t} exceeds source size {d}")
    return dims, target


def gaussian_operator(
    dims: tuple[int, int, int], target: tuple[int, int, int], seed: int
) -> CompressionOperator:
    """Operator with i.i.d. standard normal entries.

    U, V, W are drawn in that order from a single ``default_rng(seed)``
    stream, so identical arguments reproduce the operator bitwise.
    Entries are used as drawn, with no variance normalization; the core
    consistency of an exactly trilinear tensor is insensitive to the
    resulting global scale.
    """
    dims, target = _check_target(dims, target)
    rng = np.random.default_rng(seed)
    U, V, W = (rng.standard_normal((t, d)) for t, d in zip(target, dims))
    return CompressionOperator(U=U, V=V, W=W, scheme=Scheme.GAUSSIAN, seed=int(seed))


def orthonormal_operator(
    dims: tuple[int, int, int], target: tuple[int, int, int], seed: int
) -> CompressionOperator:
    """Operator with orthonormal rows spanning a random subspace.

    For each mode a Gaussian L x I matrix G is drawn (modes in order,
    same stream discipline as :func:`gaussian_operator`) and the factor
    is the transpose of the Q from the reduced QR of G-transpose, so the
    rowspace coincides with G's rowspace.
    """
    dims, target = _check_target(dims, target)
    rng = np.random.default_rng(seed)
    mats = []
    for t, d in zip(target, dims):
        G = rng.standard_normal((t, d))
        Q, _ = np.linalg.qr(G.T)
        mats.append(Q.T)
    return CompressionOperator(
        U=mats[0], V=mats[1], W=mats[2], scheme=Scheme.ORTHONORMAL, seed=int(seed)
    )


def tucker_operator(
    X: DenseTensor3, target: tuple[int, int, int], cfg: FitConfig = FitConfig()
) -> CompressionOperator:
    """Operator from the transposed factors of a Tucker fit of X.

    Compressing X with the returned operator yields exactly the fitted
    core (same arithmetic, applied mode 1 then 2 then 3).
    """
    model = tucker3(X, target, cfg)
    return CompressionOperator(
        U=model.A.T, V=model.B.T, W=model.C.T, scheme=Scheme.TUCKER, seed=None
    )


def compress(X: DenseTensor3, op: CompressionOperator) -> DenseTensor3:
    """Apply the operator: ``X x1 U x2 V x3 W`` (modes in order 1, 2, 3)."""
    if op.source_dims != X.dims:
        raise ShapeError(
            f"operator source dims {op.source_dims} do not match tensor dims {X.dims}"
        )
    out = n_mode_product(X, op.U, 1)
    out = n_mode_product(out, op.V, 2)
    return n_mode_product(out, op.W, 3)


def project_onto_rowspaces(X: DenseTensor3, op: CompressionOperator) -> DenseTensor3:
    """Project X onto the operator rowspaces: ``X x1 U'U x2 V'V x3 W'W``.

    Only valid for operators with orthonormal rows (the formula is the
    orthogonal projector in each mode); the projection is idempotent and
    never increases the Frobenius norm.  The compressed tensor preserves
    the core consistency of an exactly trilinear X whenever the
    projection equals X itself.
    """
    if op.scheme is Scheme.GAUSSIAN:
        raise ValueError(
            "projection requires orthonormal rows; gaussian operators do not have them"
        )
    if op.source_dims != X.dims:
        raise ShapeError(
            f"operator source dims {op.source_dims} do not match tensor dims {X.dims}"
        )
    out = X
    for mode, M in zip((1, 2, 3), (op.U, op.V, op.W)):
        out = n_mode_product(out, M.T @ M, mode)
    return out
