"""Core consistency diagnostic for CP models.

Given CP factors (A, B, C) fitted to a tensor X, the diagnostic asks how
close the unconstrained least-squares core

    G = X x1 A+ x2 B+ x3 C+

is to the superdiagonal identity the CP model implicitly assumes, and
reports

    (1 - ||I - G||^2 / ||I||^2) * 100.

Values near 100 indicate the trilinear model is appropriate; values near
zero or below indicate overfactoring.  The three pseudoinverse mode
products give the minimum-norm solution of
``argmin_G ||X - G x1 A x2 B x3 C||`` without materializing the Kronecker
system.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .decomp import CpModel, FitConfig, cp_als, numerical_rank, pseudoinverse
from .errors import ShapeError
from .seeding import mix_seed
from .tensor import DenseTensor3, as_matrix, n_mode_product, superdiagonal_identity

__all__ = [
    "CorcondiaReport",
    "corcondia_core",
    "corcondia",
    "corcondia_from_factors",
    "corcondia_sweep",
]


@dataclass(frozen=True)
class CorcondiaReport:
    """Diagnostic value, the least-squares core it was derived from, and
    the component count.  ``factor_rank_deficient`` flags models whose
    fitted factors had numerical rank below the component count; the
    pseudoinverse tolerance handles those, and a low diagnostic value is
    exactly the symptom they should produce."""

    value: float
    core: DenseTensor3
    rank: int
    factor_rank_deficient: bool = False


def corcondia_core(X: DenseTensor3, A, B, C) -> DenseTensor3:
    """Minimum-norm least-squares core of X given CP factors."""
    Am, Bm, Cm = as_matrix(A, "A"), as_matrix(B, "B"), as_matrix(C, "C")
    if not (Am.shape[1] == Bm.shape[1] == Cm.shape[1]):
        raise ShapeError(
            "factor matrices must share a column count, got "
            f"{Am.shape[1]}, {Bm.shape[1]}, {Cm.shape[1]}"
        )
    if (Am.shape[0], Bm.shape[0], Cm.shape[0]) != X.dims:
        raise ShapeError(
            f"factor row counts {(Am.shape[0], Bm.shape[0], Cm.shape[0])} "
            f"do not match tensor dims {X.dims}"
        )
    out = n_mode_product(X, pseudoinverse(Am), 1)
    out = n_mode_product(out, pseudoinverse(Bm), 2)
    return n_mode_product(out, pseudoinverse(Cm), 3)


def corcondia_from_factors(X: DenseTensor3, A, B, C) -> CorcondiaReport:
    """Diagnostic for explicit factor matrices (no fitting involved)."""
    core = corcondia_core(X, A, B, C)
    R = core.dims[0]
    ident = superdiagonal_identity(R)
    value = (1.0 - float(np.sum((ident.data - core.data) ** 2)) / R) * 100.0
    deficient = any(numerical_rank(F) < R for F in (A, B, C))
    return CorcondiaReport(value=value, core=core, rank=R, factor_rank_deficient=deficient)


def corcondia(X: DenseTensor3, model: CpModel) -> CorcondiaReport:
    """Diagnostic of a fitted CP model against the tensor it was fit to."""
    return corcondia_from_factors(X, model.A, model.B, model.C)


def corcondia_sweep(
    X: DenseTensor3, ranks: list[int], cfg: FitConfig = FitConfig()
) -> list[CorcondiaReport]:
    """Fit one CP model per entry of ``ranks`` and report each diagnostic.

    Fits are independent, with per-rank seeds derived from ``cfg.seed``,
    so entries could be computed concurrently; output order matches the
    input order.  A failure at any rank aborts the sweep with the rank
    attached to the error.
    """
    if not ranks:
        raise ValueError("ranks must be nonempty")
    reports = []
    for rank in ranks:
        try:
            model = cp_als(X, rank, replace(cfg, seed=mix_seed(cfg.seed, rank)))
            reports.append(corcondia(X, model))
        except Exception as exc:
            raise RuntimeError(f"core consistency sweep failed at rank {rank}: {exc}") from exc
    return reports
