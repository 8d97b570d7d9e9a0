"""File exchange for matrices and benchmark records.

Matrices travel as MatrixMarket dense arrays: banner
``%%MatrixMarket matrix array real general``, optional ``%`` comment lines,
a ``rows cols`` size line, then rows*cols values in column-major order.
Values are written with 17 significant digits, so write -> read is
value-exact for every finite double.

Benchmark records travel as CSV with the frozen header ``CSV_HEADER``;
column order is an external contract.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionMismatch, MalformedHeader, NonFiniteValue

MM_BANNER = "%%MatrixMarket matrix array real general"

CSV_HEADER = "m,n,r,rep,seed,t_scratch_ns,t_woodbury_ns,speedup,rel_forward_error"


@dataclass(frozen=True)
class BenchRecord:
    """One timed comparison: scratch QR solve vs the update path.

    Timings are nanoseconds from a monotonic clock; speedup is
    t_scratch_ns / t_woodbury_ns; rel_forward_error is
    ``||x_update - x_scratch|| / ||x_scratch||``.
    """

    m: int
    n: int
    r: int
    rep: int
    seed: int
    t_scratch_ns: int
    t_woodbury_ns: int
    speedup: float
    rel_forward_error: float

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.t_woodbury_ns <= 0 or self.t_scratch_ns <= 0:
            raise ValueError("timings must be positive")
        if not self.rel_forward_error >= 0:
            raise ValueError(
                f"rel_forward_error must be >= 0, got {self.rel_forward_error}"
            )
        expected = self.t_scratch_ns / self.t_woodbury_ns
        if abs(self.speedup - expected) > 1e-9 * max(1.0, expected):
            raise ValueError(
                f"speedup {self.speedup!r} inconsistent with timings "
                f"(expected {expected!r})"
            )


def read_matrix(path) -> np.ndarray:
    """Read a MatrixMarket dense array file into an (rows, cols) array.

    Raises MalformedHeader on a bad banner, size line, or value token;
    DimensionMismatch when the value count disagrees with the declared
    shape; NonFiniteValue on NaN or infinity.
    """
    with open(path, "r", encoding="ascii") as fh:
        banner = fh.readline()
        # banner tokens are case-insensitive by convention
        if [t.lower() for t in banner.split()] != [t.lower() for t in MM_BANNER.split()]:
            raise MalformedHeader(
                f"expected banner {MM_BANNER!r}, got {banner.strip()!r}"
            )
        size_line = None
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            raise MalformedHeader("missing size line")
        parts = size_line.split()
        if len(parts) != 2:
            raise MalformedHeader(f"size line must hold two integers, got {size_line!r}")
        try:
            rows, cols = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedHeader(
                f"size line must hold two integers, got {size_line!r}"
            ) from None
        if rows < 1 or cols < 1:
            raise MalformedHeader(f"dimensions must be positive, got {rows} x {cols}")

        values = []
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            for tok in stripped.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise MalformedHeader(f"unparseable value token {tok!r}") from None

    if len(values) != rows * cols:
        raise DimensionMismatch(
            f"file declares {rows} x {cols} = {rows * cols} entries "
            f"but holds {len(values)}"
        )
    data = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue("matrix file contains NaN or infinite entries")
    return data.reshape((rows, cols), order="F")


def write_matrix(path, mat) -> None:
    """Write a matrix (or a vector, stored as one column) as MatrixMarket.

    Values go out column-major with 17 significant digits; reading the file
    back reproduces the input exactly.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[:, None]
    if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
        raise DimensionMismatch(f"cannot write array of shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NonFiniteValue("refusing to write NaN or infinite entries")
    rows, cols = mat.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(MM_BANNER + "\n")
        fh.write(f"{rows} {cols}\n")
        fh.writelines(f"{v:.16e}\n" for v in mat.ravel(order="F"))


def write_bench_csv(path, records) -> None:
    """Write benchmark records as CSV under the frozen header, in order."""
    records = list(records)
    if not records:
        raise ValueError("no benchmark records to write")
    names = [f.name for f in fields(BenchRecord)]
    assert ",".join(names) == CSV_HEADER
    with open(path, "w", encoding="ascii") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            row = [getattr(rec, name) for name in names]
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")


def read_bench_csv(path) -> list[BenchRecord]:
    """Parse a file produced by ``write_bench_csv`` back into records."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise MalformedHeader(
                f"expected CSV header {CSV_HEADER!r}, got {header!r}"
            )
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 9:
                raise MalformedHeader(f"expected 9 CSV fields, got {len(parts)}")
            try:
                records.append(BenchRecord(
                    m=int(parts[0]), n=int(parts[1]), r=int(parts[2]),
                    rep=int(parts[3]), seed=int(parts[4]),
                    t_scratch_ns=int(parts[5]), t_woodbury_ns=int(parts[6]),
                    speedup=float(parts[7]), rel_forward_error=float(parts[8]),
                ))
            except ValueError as err:
                raise MalformedHeader(f"bad CSV row {line!r}: {err}") from None
    return records
