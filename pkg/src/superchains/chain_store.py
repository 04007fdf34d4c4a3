"""Storage layout and moment summaries for superchain draw tensors.

A run is organized as K superchains x M subchains x N kept draws x D
dimensions.  All estimators downstream consume the `ChainDraws` tensor
produced here; keeping validation and moment math in one place means every
diagnostic sees the same finiteness guarantees and the same deterministic
summation order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, IngestionError, InvalidParameterError, ShapeError
from .numerics import compensated_mean, compensated_variance

_INT32_MAX = 2**31 - 1


@dataclass(frozen=True)
class SuperchainLayout:
    """Shape and provenance of a run.

    Attributes:
        num_superchains: K, groups of subchains sharing an initial point.
        num_subchains: M, subchains per superchain.
        num_draws: N, kept (post-warmup) draws per subchain.
        dim: D, target dimension.
        warmup: transitions discarded before the first kept draw.
        seed: root seed all chain streams are keyed from.
    """

    num_superchains: int
    num_subchains: int
    num_draws: int
    dim: int
    warmup: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("num_superchains", "num_subchains", "num_draws", "dim"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise InvalidParameterError(f"{name} must be >= 1, got {value}")
            if value > _INT32_MAX:
                raise InvalidParameterError(f"{name} = {value} exceeds the int32 storage header")
        if not isinstance(self.warmup, (int, np.integer)) or self.warmup < 0:
            raise InvalidParameterError(f"warmup must be a non-negative integer, got {self.warmup!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise InvalidParameterError(f"seed must be an integer, got {self.seed!r}")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.num_superchains, self.num_subchains, self.num_draws, self.dim)

    @property
    def total_chains(self) -> int:
        return self.num_superchains * self.num_subchains


@dataclass(frozen=True)
class ChainDraws:
    """A finite draw tensor bound to its layout.

    values has shape (K, M, N, D) and is read-only; index (k, m, n, d)
    addresses draw n of subchain m in superchain k, dimension d (0-based).
    """

    layout: SuperchainLayout
    values: np.ndarray

    def flat_chains(self) -> np.ndarray:
        """View as (K*M, N, D): the superchain grouping forgotten."""
        k, m, n, d = self.layout.shape
        return self.values.reshape(k * m, n, d)


def build_draws(layout: SuperchainLayout, values: np.ndarray) -> ChainDraws:
    """Validate a raw array against a layout and freeze it.

    Raises:
        ShapeError: element count or axis extents differ from the layout.
        DataError: any NaN/inf entry (reported with its (k,m,n,d) index).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size != np.prod(layout.shape):
        raise ShapeError(f"layout {layout.shape} expects {np.prod(layout.shape)} values, got {arr.size}")
    if arr.ndim != 1 and arr.shape != layout.shape:
        raise ShapeError(f"array shape {arr.shape} does not match layout {layout.shape}")
    arr = arr.reshape(layout.shape).copy()
    bad = ~np.isfinite(arr)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DataError(f"non-finite draw at (k,m,n,d)={idx}")
    arr.flags.writeable = False
    return ChainDraws(layout=layout, values=arr)


@dataclass(frozen=True)
class MomentSummary:
    """Hierarchical means (and within-subchain variances when N > 1).

    subchain_mean: (K, M, D) mean over n.
    superchain_mean: (K, D) mean over (m, n).
    grand_mean: (D,) mean over everything.
    within_variance: (K, M, D) divisor N-1 variance over n, or None at N = 1.
    """

    subchain_mean: np.ndarray
    superchain_mean: np.ndarray
    grand_mean: np.ndarray
    within_variance: np.ndarray | None


def summarize(draws: ChainDraws) -> MomentSummary:
    """Deterministic compensated moments at every level of the hierarchy."""
    x = draws.values
    n = draws.layout.num_draws
    subchain_mean = compensated_mean(x, axis=2)
    superchain_mean = compensated_mean(subchain_mean, axis=1)
    grand_mean = compensated_mean(superchain_mean, axis=0)
    within = compensated_variance(x, axis=2, ddof=1) if n > 1 else None
    return MomentSummary(
        subchain_mean=subchain_mean,
        superchain_mean=superchain_mean,
        grand_mean=grand_mean,
        within_variance=within,
    )


# ---------------------------------------------------------------------------
# serialization


def save_csv(draws: ChainDraws, path) -> None:
    """Write `k,m,n,d,value` rows in row-major (k, m, n, d) order."""
    k, m, n, d = draws.layout.shape
    ks, ms, ns, ds = np.unravel_index(np.arange(k * m * n * d), (k, m, n, d))
    flat = draws.values.reshape(-1)
    with open(path, "w", newline="") as fh:
        fh.write("k,m,n,d,value\n")
        for i in range(flat.size):
            fh.write(f"{ks[i]},{ms[i]},{ns[i]},{ds[i]},{float(flat[i])!r}\n")


def load_csv(path, warmup: int = 0, seed: int = 0) -> ChainDraws:
    """Read a `k,m,n,d,value` file; the layout is inferred from the indices.

    Every (k, m, n, d) cell must appear exactly once.  Errors carry the
    1-based line number of the first offending row.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ["k", "m", "n", "d", "value"]:
            raise IngestionError(f"{path}: line 1: expected header k,m,n,d,value, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise IngestionError(f"{path}: line {lineno}: expected 5 fields, got {len(row)}")
            try:
                rows.append((int(row[0]), int(row[1]), int(row[2]), int(row[3]), float(row[4]), lineno))
            except ValueError as exc:
                raise IngestionError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    arr = np.array([(r[0], r[1], r[2], r[3]) for r in rows], dtype=np.int64)
    if arr.min() < 0:
        bad = rows[int(np.argwhere((arr < 0).any(axis=1))[0][0])]
        raise IngestionError(f"{path}: line {bad[5]}: negative index")
    shape = tuple(int(v) + 1 for v in arr.max(axis=0))
    expected = int(np.prod(shape))
    if len(rows) != expected:
        raise IngestionError(
            f"{path}: {len(rows)} rows but layout (K,M,N,D)={shape} needs {expected}"
        )
    values = np.full(shape, np.nan)
    seen = np.zeros(shape, dtype=bool)
    for k_i, m_i, n_i, d_i, v, lineno in rows:
        if seen[k_i, m_i, n_i, d_i]:
            raise IngestionError(f"{path}: line {lineno}: duplicate cell ({k_i},{m_i},{n_i},{d_i})")
        seen[k_i, m_i, n_i, d_i] = True
        values[k_i, m_i, n_i, d_i] = v
    layout = SuperchainLayout(shape[0], shape[1], shape[2], shape[3], warmup=warmup, seed=seed)
    return build_draws(layout, values)


def save_binary(draws: ChainDraws, path) -> None:
    """Little-endian int32 K,M,N,D header followed by row-major float64 values."""
    header = np.asarray(draws.layout.shape, dtype="<i4")
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(draws.values.astype("<f8", copy=False).tobytes())


def load_binary(path, warmup: int = 0, seed: int = 0) -> ChainDraws:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16:
        raise ShapeError(f"{path}: truncated header ({len(raw)} bytes)")
    shape = tuple(int(v) for v in np.frombuffer(raw[:16], dtype="<i4"))
    if any(v < 1 for v in shape):
        raise ShapeError(f"{path}: invalid layout header {shape}")
    expected = 16 + 8 * int(np.prod(shape))
    if len(raw) != expected:
        raise ShapeError(f"{path}: {len(raw)} bytes but layout {shape} needs {expected}")
    values = np.frombuffer(raw[16:], dtype="<f8").reshape(shape)
    layout = SuperchainLayout(shape[0], shape[1], shape[2], shape[3], warmup=warmup, seed=seed)
    return build_draws(layout, values)
