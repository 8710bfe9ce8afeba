"""corcomp: core consistency diagnostics for dense 3-mode tensors under
randomized compression."""

__version__ = "0.1.0"

from .errors import BoundsError, ConfigError, FormatError, ShapeError
from .tensor import (
    DenseTensor3,
    fold,
    frobenius_norm,
    mode_n_fiber,
    n_mode_product,
    reconstruct_cp,
    reconstruct_tucker,
    superdiagonal_identity,
    unfold,
)
from .decomp import (
    CpModel,
    FitConfig,
    TuckerModel,
    cp_als,
    orthonormalize_tucker,
    pseudoinverse,
    tucker3,
)
from .corcondia import (
    CorcondiaReport,
    corcondia,
    corcondia_core,
    corcondia_from_factors,
    corcondia_sweep,
)
from .compress import (
    CompressionOperator,
    RatioSpec,
    Scheme,
    compress,
    gaussian_operator,
    orthonormal_operator,
    project_onto_rowspaces,
    ratio_to_dims,
    tucker_operator,
)
from .harness import (
    CellResult,
    ExperimentConfig,
    ExperimentResult,
    SummaryStats,
    clamp_negatives,
    run_experiment,
    summarize,
)
from .io import (
    SynthSpec,
    experiment_to_json,
    read_tensor,
    stats_csv_lines,
    synth_tensor,
    write_tensor,
)

__all__ = [
    "__version__",
    "BoundsError",
    "ConfigError",
    "FormatError",
    "ShapeError",
    "DenseTensor3",
    "fold",
    "frobenius_norm",
    "mode_n_fiber",
    "n_mode_product",
    "reconstruct_cp",
    "reconstruct_tucker",
    "superdiagonal_identity",
    "unfold",
    "CpModel",
    "FitConfig",
    "TuckerModel",
    "cp_als",
    "orthonormalize_tucker",
    "pseudoinverse",
    "tucker3",
    "CorcondiaReport",
    "corcondia",
    "corcondia_core",
    "corcondia_from_factors",
    "corcondia_sweep",
    "CompressionOperator",
    "RatioSpec",
    "Scheme",
    "compress",
    "gaussian_operator",
    "orthonormal_operator",
    "project_onto_rowspaces",
    "ratio_to_dims",
    "tucker_operator",
    "CellResult",
    "ExperimentConfig",
    "ExperimentResult",
    "SummaryStats",
    "clamp_negatives",
    "run_experiment",
    "summarize",
    "SynthSpec",
    "experiment_to_json",
    "read_tensor",
    "stats_csv_lines",
    "synth_tensor",
    "write_tensor",
]
