"""Exact dense rational matrices and the structural operations built on them.

Every structural decision in this package (rank tests, kernels, inverses,
basis completions) is made over exact rationals so that rank conditions are
never at the mercy of floating-point noise.  Rank uses fraction-free
(Bareiss-style) integer elimination after clearing denominators row by row;
kernel, inverse and solve use exact Gauss-Jordan over `fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatchError,
    RankDeficientInputError,
    SingularMatrixError,
)

RationalLike = Fraction | int | str


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce ints, strings like '2/3', and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


@dataclass(frozen=True)
class RationalMatrix:
    """Immutable dense matrix of exact rationals, stored row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatchError("negative matrix dimension")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                f"entry count {len(self.entries)} != {self.rows}x{self.cols}")
        if any(not isinstance(e, Fraction) for e in self.entries):
            object.__setattr__(
                self, "entries", tuple(as_fraction(e) for e in self.entries))

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_rows(rows: Sequence[Sequence[RationalLike]],
                  cols: int | None = None) -> "RationalMatrix":
        """Build from an iterable of rows; `cols` disambiguates empty input."""
        rows = [tuple(as_fraction(e) for e in r) for r in rows]
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise DimensionMismatchError("ragged rows")
            if cols is not None and cols != width:
                raise DimensionMismatchError("cols does not match row width")
            cols = width
        elif cols is None:
            raise DimensionMismatchError("empty matrix needs explicit cols")
        flat = tuple(e for r in rows for e in r)
        return RationalMatrix(len(rows), cols, flat)

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        one, zero = Fraction(1), Fraction(0)
        flat = tuple(one if i == j else zero for i in range(n) for j in range(n))
        return RationalMatrix(n, n, flat)

    @staticmethod
    def zeros(rows: int, cols: int) -> "RationalMatrix":
        return RationalMatrix(rows, cols, (Fraction(0),) * (rows * cols))

    # -- access ------------------------------------------------------------

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(key)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def row_list(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def to_float_rows(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(float(e) for e in self.row(i))
                     for i in range(self.rows))

    # -- algebra -----------------------------------------------------------

    def transpose(self) -> "RationalMatrix":
        flat = tuple(self.entries[i * self.cols + j]
                     for j in range(self.cols) for i in range(self.rows))
        return RationalMatrix(self.cols, self.rows, flat)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out: list[Fraction] = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                s = Fraction(0)
                for k in range(self.cols):
                    a = ri[k]
                    if a:
                        s += a * other.entries[k * other.cols + j]
                out.append(s)
        return RationalMatrix(self.rows, other.cols, tuple(out))

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatchError("shape mismatch in addition")
        return RationalMatrix(
            self.rows, self.cols,
            tuple(a + b for a, b in zip(self.entries, other.entries)))

    def scale(self, factor: RationalLike) -> "RationalMatrix":
        f = as_fraction(factor)
        return RationalMatrix(self.rows, self.cols,
                              tuple(f * e for e in self.entries))

    def submatrix(self, row_indices: Iterable[int],
                  col_indices: Iterable[int]) -> "RationalMatrix":
        ri, ci = list(row_indices), list(col_indices)
        flat = tuple(self[i, j] for i in ri for j in ci)
        return RationalMatrix(len(ri), len(ci), flat)

    def take_rows(self, indices: Iterable[int]) -> "RationalMatrix":
        return self.submatrix(indices, range(self.cols))

    def take_cols(self, indices: Iterable[int]) -> "RationalMatrix":
        return self.submatrix(range(self.rows), indices)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == RationalMatrix.identity(self.rows)

    def __str__(self) -> str:
        body = "; ".join(
            ", ".join(str(e) for e in self.row(i)) for i in range(self.rows))
        return f"[{body}]"


def hstack(left: RationalMatrix, right: RationalMatrix) -> RationalMatrix:
    if left.rows != right.rows:
        raise DimensionMismatchError("hstack row mismatch")
    rows = [left.row(i) + right.row(i) for i in range(left.rows)]
    return RationalMatrix.from_rows(rows, cols=left.cols + right.cols)


def vstack(top: RationalMatrix, bottom: RationalMatrix) -> RationalMatrix:
    if top.cols != bottom.cols:
        raise DimensionMismatchError("vstack column mismatch")
    return RationalMatrix(top.rows + bottom.rows, top.cols,
                          top.entries + bottom.entries)


def column_matrix(vec: Sequence[RationalLike]) -> RationalMatrix:
    return RationalMatrix.from_rows([[v] for v in vec], cols=1)


def mat_vec(mat: RationalMatrix, vec: Sequence[RationalLike]) -> tuple[Fraction, ...]:
    if mat.cols != len(vec):
        raise DimensionMismatchError("matrix-vector size mismatch")
    fv = [as_fraction(v) for v in vec]
    return tuple(sum((a * b for a, b in zip(mat.row(i), fv)), Fraction(0))
                 for i in range(mat.rows))


def vec_mat(vec: Sequence[RationalLike], mat: RationalMatrix) -> tuple[Fraction, ...]:
    if mat.rows != len(vec):
        raise DimensionMismatchError("vector-matrix size mismatch")
    fv = [as_fraction(v) for v in vec]
    return tuple(sum((fv[i] * mat[i, j] for i in range(mat.rows)), Fraction(0))
                 for j in range(mat.cols))


# -- elimination kernels ----------------------------------------------------

def _integer_rows(mat: RationalMatrix) -> list[list[int]]:
    """Row-wise denominator clearing; preserves rank and row kernels."""
    out: list[list[int]] = []
    for i in range(mat.rows):
        r = mat.row(i)
        scale = 1
        for e in r:
            scale = scale * e.denominator // math.gcd(scale, e.denominator)
        out.append([int(e * scale) for e in r])
    return out


def rank(mat: RationalMatrix) -> int:
    """Exact rank via fraction-free (Bareiss) elimination on cleared rows."""
    if mat.rows == 0 or mat.cols == 0:
        return 0
    rows = _integer_rows(mat)
    m, n = mat.rows, mat.cols
    r = 0
    prev = 1
    for c in range(n):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        pivot = rows[r][c]
        for i in range(r + 1, m):
            lead = rows[i][c]
            row_i, row_r = rows[i], rows[r]
            for j in range(c + 1, n):
                num = pivot * row_i[j] - lead * row_r[j]
                q, rem = divmod(num, prev)
                if rem:
                    raise AssertionError("fraction-free elimination lost exactness")
                row_i[j] = q
            row_i[c] = 0
        prev = pivot
        r += 1
        if r == m:
            break
    return r


def _rref(mat: RationalMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Fractions; returns (rows, pivot columns)."""
    rows = mat.row_list()
    m, n = mat.rows, mat.cols
    pivots: list[int] = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [e * inv for e in rows[r]]
        for i in range(m):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return rows, pivots


def kernel_basis(mat: RationalMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel, one vector per non-pivot column.

    Vectors are exact, linearly independent, and normalized so the first
    nonzero entry equals 1.  Returns the empty list at full column rank.
    """
    rows, pivots = _rref(mat)
    free = [c for c in range(mat.cols) if c not in pivots]
    basis: list[tuple[Fraction, ...]] = []
    for f in free:
        v = [Fraction(0)] * mat.cols
        v[f] = Fraction(1)
        for k, p in enumerate(pivots):
            v[p] = -rows[k][f]
        lead = next(e for e in v if e)
        basis.append(tuple(e / lead for e in v))
    return basis


def inverse(mat: RationalMatrix) -> RationalMatrix:
    """Exact inverse by Gauss-Jordan on the augmented matrix."""
    if mat.rows != mat.cols:
        raise DimensionMismatchError("inverse needs a square matrix")
    n = mat.rows
    if n == 0:
        return mat
    aug, pivots = _rref(hstack(mat, RationalMatrix.identity(n)))
    if len(pivots) < n or pivots != list(range(n)):
        raise SingularMatrixError(f"matrix of rank {len(pivots)} < {n}")
    return RationalMatrix.from_rows([r[n:] for r in aug], cols=n)


def solve(mat: RationalMatrix, rhs: RationalMatrix) -> RationalMatrix:
    """Solve mat @ X = rhs exactly for square invertible mat."""
    if mat.rows != mat.cols:
        raise DimensionMismatchError("solve needs a square matrix")
    if rhs.rows != mat.rows:
        raise DimensionMismatchError("right-hand side row mismatch")
    n = mat.rows
    aug, pivots = _rref(hstack(mat, rhs))
    if len(pivots) < n or any(p >= n for p in pivots):
        raise SingularMatrixError("coefficient matrix is singular")
    return RationalMatrix.from_rows([r[n:] for r in aug], cols=rhs.cols)


def select_independent_rows(mat: RationalMatrix,
                            count: int | None = None) -> list[int]:
    """Greedily pick linearly independent row indices in ascending order."""
    target = rank(mat) if count is None else count
    chosen: list[int] = []
    current = RationalMatrix(0, mat.cols, ())
    for i in range(mat.rows):
        if len(chosen) == target:
            break
        candidate = vstack(current, mat.take_rows([i]))
        if rank(candidate) > len(chosen):
            chosen.append(i)
            current = candidate
    if len(chosen) < target:
        raise RankDeficientInputError(
            f"only {len(chosen)} independent rows, needed {target}")
    return chosen


def complete_to_invertible(partial: RationalMatrix,
                           side: str = "below") -> RationalMatrix:
    """Extend a full-rank block to a square invertible matrix.

    The added rows (side 'below'/'above') or columns ('right'/'left') are the
    first standard basis vectors, in index order, that keep the rank growing,
    so the completion is deterministic.  Raises RankDeficientInputError when
    the block is not of full row rank (resp. column rank).
    """
    if side in ("right", "left"):
        flipped = complete_to_invertible(
            partial.transpose(), "below" if side == "right" else "above")
        return flipped.transpose()
    if side not in ("below", "above"):
        raise ValueError(f"unknown side {side!r}")

    n = partial.cols
    if partial.rows > n:
        raise DimensionMismatchError("block is taller than its width")
    if rank(partial) != partial.rows:
        raise RankDeficientInputError("block does not have full row rank")

    added = RationalMatrix(0, n, ())
    stacked = partial
    got = partial.rows
    for k in range(n):
        if got == n:
            break
        basis_row = RationalMatrix.from_rows(
            [[Fraction(1) if j == k else Fraction(0) for j in range(n)]])
        trial = vstack(stacked, basis_row)
        if rank(trial) > got:
            stacked = trial
            added = vstack(added, basis_row)
            got += 1
    if got != n:
        raise RankDeficientInputError("completion failed to reach full rank")
    return vstack(partial, added) if side == "below" else vstack(added, partial)
