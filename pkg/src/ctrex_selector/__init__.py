"""CT-Rex selector - FDR-controlled variable selection for complex-valued linear models."""

from .cnum import (
    ConstantColumnError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    csign,
    hermitian_solve,
    make_rng,
    sample_complex_gaussian,
    standardize_columns,
)
from .complex_csv import (
    ComplexTableError,
    NonNumericCellError,
    RaggedRowsError,
    UnpairedColumnError,
    parse_complex_csv,
    read_result_document,
    write_complex_csv,
    write_result_document,
)
from .ctlars import (
    SingularActiveSetError,
    candidate_set,
    ctlars_init,
    ctlars_run,
    ctlars_step,
    forward_select,
)
from .selector import (
    SelectionResult,
    TRexConfig,
    calibrate_and_select,
    estimate_fdp,
    select,
)
from .simulation import (
    DoaScenario,
    InvalidGridError,
    OffGridSourceError,
    RegressionScenario,
    gen_doa_snapshot,
    gen_sparse_regression,
    run_monte_carlo,
    trial_metrics,
)

__version__ = "0.1.1"

__all__ = [
    "select",
    "calibrate_and_select",
    "estimate_fdp",
    "SelectionResult",
    "TRexConfig",
    "forward_select",
    "ctlars_init",
    "ctlars_step",
    "ctlars_run",
    "candidate_set",
    "csign",
    "hermitian_solve",
    "make_rng",
    "sample_complex_gaussian",
    "standardize_columns",
    "RegressionScenario",
    "DoaScenario",
    "gen_sparse_regression",
    "gen_doa_snapshot",
    "run_monte_carlo",
    "trial_metrics",
    "parse_complex_csv",
    "write_complex_csv",
    "read_result_document",
    "write_result_document",
    "ConstantColumnError",
    "DimensionMismatchError",
    "NotPositiveDefiniteError",
    "SingularActiveSetError",
    "InvalidGridError",
    "OffGridSourceError",
    "ComplexTableError",
    "UnpairedColumnError",
    "NonNumericCellError",
    "RaggedRowsError",
]
