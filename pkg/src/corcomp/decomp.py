"""CP (alternating least squares) and Tucker fitting, plus the SVD-based
pseudoinverse the core consistency diagnostic relies on.

CP models are fit with multi-restart ALS; Tucker models with a truncated
higher-order SVD refined by orthogonal iteration.  Both fitters are pure
functions of ``(input, config)``: all randomness flows from the config
seed through per-restart derived streams, so results are reproducible
and independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensor import (
    DenseTensor3,
    as_matrix,
    frobenius_norm,
    n_mode_product,
    reconstruct_cp,
    reconstruct_tucker,
    unfold,
)

__all__ = [
    "FitConfig",
    "CpModel",
    "TuckerModel",
    "cp_als",
    "tucker3",
    "orthonormalize_tucker",
    "pseudoinverse",
]


@dataclass(frozen=True)
class FitConfig:
    """Stopping rule and restart policy for the iterative fitters.

    ``rel_tolerance`` bounds the change in relative reconstruction error
    between consecutive sweeps; once the change drops below it the fit is
    flagged converged.  ``restarts`` independent random initializations
    are run and the best fit kept; restart ``r`` draws from a stream
    seeded by ``(seed, r)``.
    """

    max_iterations: int = 500
    rel_tolerance: float = 1e-8
    restarts: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class CpModel:
    """Fitted CP model with factors A (IxR), B (JxR), C (KxR).

    ``fit`` is 1 minus the relative reconstruction error.  Column norms
    of A and B are absorbed into C during fitting, so A and B have
    unit-norm columns (up to degenerate zero columns).
    ``error_history`` records the relative reconstruction error after
    each ALS sweep of the winning restart.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    fit: float
    iterations: int
    converged: bool
    error_history: tuple[float, ...] = ()

    @property
    def rank(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class TuckerModel:
    """Fitted Tucker model: core (PxQxR) and orthonormal-column factors.

    ``fit`` is 1 minus the relative reconstruction error, or None for
    models produced by re-orthonormalization rather than fitting.
    """

    core: DenseTensor3
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    fit: float | None
    iterations: int = 0
    converged: bool = True


def _khatri_rao(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product with Q's row index varying fastest."""
    R = P.shape[1]
    return (P[:, None, :] * Q[None, :, :]).reshape(-1, R)


def _solve_factor(unf: np.ndarray, kr: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Least-squares update for one factor given the other two."""
    rhs = unf @ kr
    try:
        return np.linalg.solve(gram, rhs.T).T
    except np.linalg.LinAlgError:
        return (np.linalg.pinv(gram) @ rhs.T).T


def _absorb_norms(F: np.ndarray, C: np.ndarray) -> None:
    """Normalize F's columns in place, absorbing their norms into C."""
    norms = np.linalg.norm(F, axis=0)
    ok = norms > np.finfo(np.float64).tiny
    F[:, ok] /= norms[ok]
    C[:, ok] *= norms[ok]


def max_feasible_cp_rank(dims: tuple[int, int, int]) -> int:
    """Largest R for which the ALS subproblems are not underdetermined."""
    i, j, k = dims
    return min(j * k, i * k, i * j)


def cp_als(X: DenseTensor3, R: int, cfg: FitConfig = FitConfig()) -> CpModel:
    """Fit an R-component CP model by alternating least squares.

    Each sweep solves the three linear least-squares problems over the
    mode unfoldings in turn; the reconstruction error is therefore
    nonincreasing from sweep to sweep.  Factors are initialized with
    uniform(-1, 1) entries, ``cfg.restarts`` times, and the best fit is
    returned.  Non-convergence within ``cfg.max_iterations`` is reported
    through ``converged=False``, not as an error.

    Raises ``ValueError`` for the all-zero tensor (no meaningful model
    exists and the core consistency of the result would be undefined).
    """
    R = int(R)
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    if R > max_feasible_cp_rank(X.dims):
        raise ShapeError(
            f"R={R} exceeds the feasible component count "
            f"{max_feasible_cp_rank(X.dims)} for dims {X.dims}"
        )
    norm_x = frobenius_norm(X)
    if norm_x == 0.0:
        raise ValueError("cannot fit a CP model to the all-zero tensor")

    unfs = [unfold(X, m) for m in (1, 2, 3)]
    best: CpModel | None = None
    for restart in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, restart)))
        factors = [rng.uniform(-1.0, 1.0, (d, R)) for d in X.dims]
        history: list[float] = []
        converged = False
        prev_err = np.inf
        for _ in range(cfg.max_iterations):
            A, B, C = factors
            A = _solve_factor(unfs[0], _khatri_rao(C, B), (C.T @ C) * (B.T @ B))
            _absorb_norms(A, C)
            B = _solve_factor(unfs[1], _khatri_rao(C, A), (C.T @ C) * (A.T @ A))
            _absorb_norms(B, C)
            kr3 = _khatri_rao(B, A)
            C = _solve_factor(unfs[2], kr3, (B.T @ B) * (A.T @ A))
            factors = [A, B, C]
            err = float(np.linalg.norm(unfs[2] - C @ kr3.T)) / norm_x
            history.append(err)
            if abs(prev_err - err) <= cfg.rel_tolerance:
                converged = True
                break
            prev_err = err
        model = CpModel(
            A=factors[0],
            B=factors[1],
            C=factors[2],
            fit=1.0 - history[-1],
            iterations=len(history),
            converged=converged,
            error_history=tuple(history),
        )
        if best is None or model.fit > best.fit:
            best = model
    assert best is not None
    return best


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Flip singular-vector columns so the largest-magnitude entry is positive."""
    pivot = np.abs(U).argmax(axis=0)
    signs = np.sign(U[pivot, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def _leading_singular_vectors(M: np.ndarray, k: int) -> np.ndarray:
    U, _, _ = np.linalg.svd(M, full_matrices=False)
    return _fix_signs(U[:, :k])


def tucker3(
    X: DenseTensor3, target: tuple[int, int, int], cfg: FitConfig = FitConfig()
) -> TuckerModel:
    """Fit a Tucker model with core dims ``target`` = (P, Q, R).

    Initializes each factor with the leading left singular vectors of the
    corresponding unfolding, then refines by orthogonal iteration until
    the relative fit change drops below ``cfg.rel_tolerance``.  The
    procedure is deterministic; ``cfg.seed`` and ``cfg.restarts`` have no
    effect on the result.
    """
    target = tuple(int(t) for t in target)  # type: ignore[assignment]
    if len(target) != 3 or min(target) < 1:
        raise ShapeError(f"target core dims must be three positive ints, got {target}")
    for t, d, m in zip(target, X.dims, (1, 2, 3)):
        if t > d:
            raise ShapeError(f"target mode-{m} size {t} exceeds tensor size {d}")

    norm_x = frobenius_norm(X)
    factors = [_leading_singular_vectors(unfold(X, m), target[m - 1]) for m in (1, 2, 3)]
    iterations = 0
    converged = norm_x == 0.0
    prev_err = np.inf
    while iterations < cfg.max_iterations and not converged:
        iterations += 1
        for m in (1, 2, 3):
            Y = X
            for other in (1, 2, 3):
                if other != m:
                    Y = n_mode_product(Y, factors[other - 1].T, other)
            factors[m - 1] = _leading_singular_vectors(unfold(Y, m), target[m - 1])
        # With orthonormal factors the residual satisfies
        # ||X - rec||^2 = ||X||^2 - ||core||^2; cheap enough per sweep.
        core_norm = frobenius_norm(_tucker_core(X, factors))
        err = float(np.sqrt(max(norm_x**2 - core_norm**2, 0.0))) / norm_x
        if abs(prev_err - err) <= cfg.rel_tolerance:
            converged = True
        prev_err = err

    core = _tucker_core(X, factors)
    # Final fit from the explicit residual; the cancellation-prone norm
    # identity above is only used for the stopping rule.
    rec = reconstruct_tucker(core, *factors)
    fit = 1.0 - float(np.linalg.norm(X.data - rec.data)) / norm_x if norm_x > 0 else 1.0
    return TuckerModel(
        core=core,
        A=factors[0],
        B=factors[1],
        C=factors[2],
        fit=fit,
        iterations=iterations,
        converged=converged,
    )


def _tucker_core(X: DenseTensor3, factors: list[np.ndarray]) -> DenseTensor3:
    out = X
    for m in (1, 2, 3):
        out = n_mode_product(out, factors[m - 1].T, m)
    return out


def orthonormalize_tucker(G: DenseTensor3, A, B, C) -> TuckerModel:
    """Rewrite a Tucker model so the factors have orthonormal columns.

    Each factor is replaced by the Q of its reduced QR factorization and
    the triangular parts are pushed into the core, leaving the
    reconstructed tensor unchanged.  Requires tall, full-column-rank
    factors.
    """
    mats = [as_matrix(A, "A"), as_matrix(B, "B"), as_matrix(C, "C")]
    expected = tuple(m.shape[1] for m in mats)
    if G.dims != expected:
        raise ShapeError(f"core dims {G.dims} do not match factor column counts {expected}")
    qs: list[np.ndarray] = []
    rs: list[np.ndarray] = []
    for mode, F in zip((1, 2, 3), mats):
        rows, cols = F.shape
        if rows < cols:
            raise ShapeError(f"mode-{mode} factor must be tall, got shape {F.shape}")
        Q, Rm = np.linalg.qr(F)
        diag = np.abs(np.diag(Rm))
        if diag.min() <= rows * np.finfo(np.float64).eps * max(diag.max(), 1.0):
            raise ValueError(f"mode-{mode} factor is rank-deficient")
        signs = np.sign(np.diag(Rm))
        signs[signs == 0] = 1.0
        qs.append(Q * signs)
        rs.append(signs[:, None] * Rm)
    core = G
    for m in (1, 2, 3):
        core = n_mode_product(core, rs[m - 1], m)
    return TuckerModel(core=core, A=qs[0], B=qs[1], C=qs[2], fit=None)


def pseudoinverse(M, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values at or below ``tol`` are treated as zero; the default
    is ``max(rows, cols) * eps * largest_singular_value``, so the zero
    matrix maps to the zero matrix of transposed shape.
    """
    Mm = as_matrix(M, "M")
    U, s, Vt = np.linalg.svd(Mm, full_matrices=False)
    if tol is None:
        tol = max(Mm.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    elif tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    inv = np.zeros_like(s)
    keep = s > tol
    inv[keep] = 1.0 / s[keep]
    return Vt.T @ (inv[:, None] * U.T)


def numerical_rank(M, tol: float | None = None) -> int:
    """Number of singular values above the pseudoinverse cutoff."""
    Mm = as_matrix(M, "M")
    s = np.linalg.svd(Mm, compute_uv=False)
    if tol is None:
        tol = max(Mm.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    return int(np.count_nonzero(s > tol))


def cp_fit_of(X: DenseTensor3, model: CpModel) -> float:
    """Recompute 1 - relative reconstruction error of a CP model."""
    rec = reconstruct_cp(model.A, model.B, model.C)
    return 1.0 - float(np.linalg.norm(X.data - rec.data)) / frobenius_norm(X)
