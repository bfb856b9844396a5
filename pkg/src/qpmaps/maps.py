"""Quasipolynomial maps and flows: representation and floating-point dynamics.

A QP map updates each positive variable multiplicatively,

    x_i(p+1) = x_i(p) * exp(lam_i + sum_j A[i][j] * prod_k x_k(p)**B[j][k]),

so the positive orthant is invariant.  Coefficients are stored as exact
rationals (structural modules reuse them exactly); they are converted to
floats only at evaluation time.  Quasimonomials are evaluated in log space to
avoid domain errors for non-integer exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .errors import (
    DimensionMismatchError,
    DuplicateQuasimonomialsError,
    FixedPointNotFound,
    NonPositiveStateError,
    NotNonRedundantError,
    OverflowDivergenceError,
)
from .linalg import (
    RationalMatrix,
    as_fraction,
    column_matrix,
    hstack,
    inverse,
    rank,
    solve,
)

# Arguments of exp() beyond this magnitude are treated as divergence; the
# positive side would overflow double precision near 709, the negative side
# would underflow x' to exactly 0 and silently break positivity.
DEFAULT_EXP_BOUND = 700.0

FIXED_POINT_RESIDUAL = 1e-9


@dataclass(frozen=True)
class State:
    """Strictly positive, finite state vector."""

    x: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.x)
        object.__setattr__(self, "x", vals)
        for i, v in enumerate(vals):
            if not (math.isfinite(v) and v > 0.0):
                raise NonPositiveStateError(
                    f"component {i} = {v!r} is not strictly positive and finite")

    def __len__(self) -> int:
        return len(self.x)

    def __iter__(self):
        return iter(self.x)

    def __getitem__(self, i: int) -> float:
        return self.x[i]

    def logs(self) -> tuple[float, ...]:
        return tuple(math.log(v) for v in self.x)


def _validate_qp_shapes(lam: tuple[Fraction, ...], A: RationalMatrix,
                        B: RationalMatrix) -> None:
    n = len(lam)
    if A.rows != n:
        raise DimensionMismatchError(f"A has {A.rows} rows, expected n={n}")
    if B.cols != n:
        raise DimensionMismatchError(f"B has {B.cols} cols, expected n={n}")
    if B.rows != A.cols:
        raise DimensionMismatchError(
            f"A has {A.cols} cols but B has {B.rows} rows; both must equal m")


def _coerce_lam(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_fraction(v) for v in values)


@dataclass(frozen=True)
class QPMap:
    """Discrete-time quasipolynomial mapping with exact rational matrices.

    `lam` has length n, `A` is n x m, `B` is m x n.  Duplicate rows of B are
    rejected because equal exponent rows describe the same quasimonomial;
    build through merge_degenerate_qms when the raw data may contain them.
    """

    lam: tuple[Fraction, ...]
    A: RationalMatrix
    B: RationalMatrix

    def __post_init__(self):
        object.__setattr__(self, "lam", _coerce_lam(self.lam))
        _validate_qp_shapes(self.lam, self.A, self.B)
        seen = {}
        for j in range(self.B.rows):
            r = self.B.row(j)
            if r in seen:
                raise DuplicateQuasimonomialsError(
                    f"rows {seen[r]} and {j} of B are identical; "
                    "merge them with merge_degenerate_qms")
            seen[r] = j

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def m(self) -> int:
        return self.B.rows


@dataclass(frozen=True)
class QPFlow:
    """Continuous-time quasipolynomial system; coefficients are per unit time."""

    lam_star: tuple[Fraction, ...]
    A_star: RationalMatrix
    B: RationalMatrix

    def __post_init__(self):
        object.__setattr__(self, "lam_star", _coerce_lam(self.lam_star))
        _validate_qp_shapes(self.lam_star, self.A_star, self.B)
        seen = set()
        for j in range(self.B.rows):
            r = self.B.row(j)
            if r in seen:
                raise DuplicateQuasimonomialsError(
                    f"duplicate exponent row {j} in flow matrix B")
            seen.add(r)

    @property
    def n(self) -> int:
        return len(self.lam_star)

    @property
    def m(self) -> int:
        return self.B.rows


def mmatrix(obj: QPMap | QPFlow) -> RationalMatrix:
    """The n x (m+1) coefficient matrix (lam | A)."""
    if isinstance(obj, QPFlow):
        return hstack(column_matrix(obj.lam_star), obj.A_star)
    return hstack(column_matrix(obj.lam), obj.A)


@lru_cache(maxsize=1024)
def _float_parts(lam: tuple[Fraction, ...], A: RationalMatrix,
                 B: RationalMatrix):
    return (tuple(float(v) for v in lam), A.to_float_rows(), B.to_float_rows())


def _single_unit_index(row: tuple[float, ...]) -> int | None:
    """Index j when the row is the standard basis vector e_j, else None."""
    idx = None
    for j, b in enumerate(row):
        if b == 0.0:
            continue
        if b != 1.0 or idx is not None:
            return None
        idx = j
    return idx


def _qm_values(B_rows: tuple[tuple[float, ...], ...], s: "State",
               exp_bound: float) -> list[float]:
    logs = s.logs()
    out = []
    for row in B_rows:
        unit = _single_unit_index(row)
        if unit is not None:
            # exponent row e_j: the quasimonomial is x_j itself, exactly
            out.append(s[unit])
            continue
        t = math.fsum(b * lx for b, lx in zip(row, logs) if b)
        if t > exp_bound:
            raise OverflowDivergenceError(
                f"quasimonomial log-value {t:.3g} exceeds bound {exp_bound}",
                argument=t)
        out.append(math.exp(t))
    return out


def quasimonomials(qp: QPMap | QPFlow, s: State) -> tuple[float, ...]:
    """Evaluate all m quasimonomials prod_k x_k**B[j][k] at the state."""
    if len(s) != qp.n:
        raise DimensionMismatchError(f"state length {len(s)} != n={qp.n}")
    _, _, B_rows = _float_parts(*_parts_key(qp))
    return tuple(_qm_values(B_rows, s, DEFAULT_EXP_BOUND))


def _parts_key(qp: QPMap | QPFlow):
    if isinstance(qp, QPFlow):
        return (qp.lam_star, qp.A_star, qp.B)
    return (qp.lam, qp.A, qp.B)


def field_arguments(qp: QPMap, s: State,
                    exp_bound: float = DEFAULT_EXP_BOUND) -> tuple[float, ...]:
    """The n exponent arguments lam_i + sum_j A[i][j] q_j(x)."""
    lam_f, A_rows, B_rows = _float_parts(qp.lam, qp.A, qp.B)
    if len(s) != qp.n:
        raise DimensionMismatchError(f"state length {len(s)} != n={qp.n}")
    q = _qm_values(B_rows, s, exp_bound)
    return tuple(
        math.fsum([lam_f[i]] + [a * qj for a, qj in zip(A_rows[i], q) if a])
        for i in range(qp.n))


def step(qp: QPMap, s: State, exp_bound: float = DEFAULT_EXP_BOUND) -> State:
    """One update of the map; strictly positive output or OverflowDivergenceError."""
    args = field_arguments(qp, s, exp_bound)
    out = []
    for i, arg in enumerate(args):
        if abs(arg) > exp_bound:
            raise OverflowDivergenceError(
                f"exponent argument {arg:.3g} for variable {i} exceeds "
                f"bound {exp_bound}", argument=arg)
        v = s[i] * math.exp(arg)
        if not (math.isfinite(v) and v > 0.0):
            raise OverflowDivergenceError(
                f"variable {i} left the positive float range (value {v!r})",
                argument=arg)
        out.append(v)
    return State(tuple(out))


def iterate(qp: QPMap, s0: State, steps: int,
            exp_bound: float = DEFAULT_EXP_BOUND) -> list[State]:
    """Trajectory [s0, F(s0), ..., F^steps(s0)]; failures carry the step index."""
    traj = [s0]
    cur = s0
    for k in range(steps):
        try:
            cur = step(qp, cur, exp_bound)
        except OverflowDivergenceError as err:
            raise OverflowDivergenceError(
                f"orbit diverged at step {k + 1}: {err}",
                argument=err.argument, step_index=k + 1) from err
        traj.append(cur)
    return traj


def jacobian(qp: QPMap, s: State) -> tuple[tuple[float, ...], ...]:
    """Analytic Jacobian of one map step at the state.

    Entry (i, l) is d x_i' / d x_l =
        delta_il * E_i + x_i * E_i * sum_j A[i][j] B[j][l] q_j / x_l
    with E_i = exp(lam_i + sum_j A[i][j] q_j).
    """
    lam_f, A_rows, B_rows = _float_parts(qp.lam, qp.A, qp.B)
    if len(s) != qp.n:
        raise DimensionMismatchError(f"state length {len(s)} != n={qp.n}")
    q = _qm_values(B_rows, s, DEFAULT_EXP_BOUND)
    n = qp.n
    exps = [math.exp(lam_f[i] + sum(a * qj for a, qj in zip(A_rows[i], q)))
            for i in range(n)]
    rows = []
    for i in range(n):
        row = []
        for l in range(n):
            inner = sum(A_rows[i][j] * B_rows[j][l] * q[j]
                        for j in range(qp.m))
            val = s[i] * exps[i] * inner / s[l]
            if i == l:
                val += exps[i]
            row.append(val)
        rows.append(tuple(row))
    return tuple(rows)


def find_interior_fixed_point(qp: QPMap) -> State:
    """Interior fixed point of a non-redundant map with m = n.

    Solves lam + A q = 0 exactly; when every q_j is positive, recovers x from
    B log x = log q in floating point.  Raises FixedPointNotFound when A is
    singular, some q_j <= 0, or the residual check fails.
    """
    if qp.m != qp.n:
        raise DimensionMismatchError(
            f"fixed-point solving needs m = n, got m={qp.m}, n={qp.n}")
    n = qp.n
    if n == 0:
        return State(())
    try:
        q_col = solve(qp.A, column_matrix([-v for v in qp.lam]))
    except Exception as err:
        raise FixedPointNotFound(
            f"coefficient matrix is singular for the quasimonomial system: {err}"
        ) from err
    q = [q_col[j, 0] for j in range(n)]
    if any(v <= 0 for v in q):
        raise FixedPointNotFound(
            "the quasimonomial system has no strictly positive solution")
    if rank(qp.B) < n:
        raise NotNonRedundantError(
            "B is singular; reduce or embed the map before fixed-point solving")
    b_inv = inverse(qp.B).to_float_rows()
    log_q = [math.log(float(v)) for v in q]
    x = tuple(math.exp(sum(b * lq for b, lq in zip(row, log_q)))
              for row in b_inv)
    fp = State(x)
    nxt = step(qp, fp)
    scale = max(abs(v) for v in fp)
    resid = max(abs(a - b) for a, b in zip(nxt, fp)) / scale
    if resid >= FIXED_POINT_RESIDUAL:
        raise FixedPointNotFound(
            f"candidate fixed point has residual {resid:.3g}")
    return fp
