"""Fast least squares for low-rank-updated matrices.

Prepare a tall full-rank base matrix once, then solve
``min ||b - (a + u v.T) x||_2`` for many updates and right-hand sides at a
fraction of the cost of refactoring. See ``lrlsq.woodbury`` for the solver,
``lrlsq.cgls`` for the matrix-free backend, ``lrlsq.bench`` for the timing
harness, and ``lrlsq.cli`` for the command line.
"""

from .bench import BenchConfig, gen_gaussian, run_benchmark, stream_id
from .cgls import IterativeConfig, make_iterative_base, normal_cg_solve
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    LrlsqError,
    MalformedHeader,
    NonFiniteValue,
    RankDeficient,
    SingularCapacitance,
    SingularMatrix,
)
from .kernels import (
    QRFactors,
    lu_solve,
    mat_mul,
    numerical_rank,
    pinv_oracle,
    qr_thin,
    solve_upper_triangular,
)
from .mio import BenchRecord, CSV_HEADER, read_bench_csv, read_matrix, write_bench_csv, write_matrix
from .woodbury import (
    LowRankUpdate,
    PreparedBase,
    SolveOutcome,
    UpdateWorkspace,
    ata_solve,
    baseline_solve,
    build_workspace,
    pinv_update_explicit,
    prepare,
    solve_many,
    solve_updated,
    updated_normal_residual,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "CSV_HEADER",
    "ConvergenceFailure",
    "DimensionMismatch",
    "IterativeConfig",
    "LowRankUpdate",
    "LrlsqError",
    "MalformedHeader",
    "NonFiniteValue",
    "PreparedBase",
    "QRFactors",
    "RankDeficient",
    "SingularCapacitance",
    "SingularMatrix",
    "SolveOutcome",
    "UpdateWorkspace",
    "ata_solve",
    "baseline_solve",
    "build_workspace",
    "gen_gaussian",
    "lu_solve",
    "make_iterative_base",
    "mat_mul",
    "normal_cg_solve",
    "numerical_rank",
    "pinv_oracle",
    "pinv_update_explicit",
    "prepare",
    "qr_thin",
    "read_bench_csv",
    "read_matrix",
    "run_benchmark",
    "solve_many",
    "solve_updated",
    "solve_upper_triangular",
    "stream_id",
    "updated_normal_residual",
    "write_bench_csv",
    "write_matrix",
]
