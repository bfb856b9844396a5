"""Reduction to non-redundant form, embeddings, and Lotka-Volterra canonical forms.

A map is non-redundant when m >= n and both B and (lam | A) have full rank n.
Any map reaches that shape through three kinds of decoupling transforms:

  step 1  (m < n)          decouple variables absent from the quasimonomials,
  step 2  (rank B < n)     same construction driven by the kernel of B,
  step 3  (rank (lam|A) < n) decouple conserved coordinates; these are
                            quasimonomial constants of motion.

Each step applies an exact quasimonomial transform, drops the trailing
decoupled variables, rescales by the decoupled initial values where needed,
and merges quasimonomials that degenerate under the column deletion.  The
non-redundant map can then be conjugated to a Lotka-Volterra map (B = I)
whose coefficient matrix is the class invariant B (lam | A), going through a
dimension-raising embedding when m > n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import (
    DimensionMismatchError,
    IllConditionedBlockError,
    NotApplicableError,
    NotNonRedundantError,
    OverflowDivergenceError,
    RankDeficientInputError,
)
from .linalg import (
    RationalMatrix,
    complete_to_invertible,
    hstack,
    inverse,
    kernel_basis,
    rank,
    select_independent_rows,
    vec_mat,
    vstack,
    _rref,
)
from .maps import QPFlow, QPMap, State, mmatrix
from .transforms import QMTransform, apply_qm, apply_qm_flow, phi


class StepKind(Enum):
    STEP1 = "step1"
    STEP2 = "step2"
    STEP3 = "step3"
    MERGE = "merge"
    EMBED = "embed"


@dataclass(frozen=True)
class StepRecord:
    """One reduction event: the transform used and what it decoupled.

    `q_factors` holds the per-quasimonomial constants contributed by the
    decoupled initial values; it is present only on step-3 records.
    """

    kind: StepKind
    transform: QMTransform | None
    decoupled_indices: tuple[int, ...]
    q_factors: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.kind is not StepKind.STEP3 and self.q_factors is not None:
            raise ValueError("q_factors only belong to step-3 records")


@dataclass(frozen=True)
class ConstantOfMotion:
    """Quasimonomial prod_k x_k**exponents[k] conserved along every orbit."""

    exponents: tuple[Fraction, ...]
    value: float | None = None


@dataclass(frozen=True)
class ReductionReport:
    original: QPMap
    final: QPMap
    steps: tuple[StepRecord, ...]
    constants: tuple[ConstantOfMotion, ...]


# -- quasimonomial bookkeeping ------------------------------------------------


def _clean_parts(lam, a_cols, b_rows, n):
    """Collapse duplicate exponent rows and fold constant quasimonomials.

    Duplicate rows of B denote a single quasimonomial, so their coefficient
    columns are summed onto the first occurrence.  An all-zero exponent row is
    the constant quasimonomial 1; its column is folded into lam.
    """
    kept_rows = []
    kept_cols = []
    first = {}
    for row, col in zip(b_rows, a_cols):
        if row in first:
            k = first[row]
            kept_cols[k] = tuple(a + b for a, b in zip(kept_cols[k], col))
        else:
            first[row] = len(kept_rows)
            kept_rows.append(row)
            kept_cols.append(tuple(col))
    lam = list(lam)
    zero_row = (Fraction(0),) * n
    final_rows, final_cols = [], []
    for row, col in zip(kept_rows, kept_cols):
        if row == zero_row:
            for i in range(n):
                lam[i] += col[i]
        else:
            final_rows.append(row)
            final_cols.append(col)
    m = len(final_rows)
    a = RationalMatrix.from_rows(
        [[final_cols[j][i] for j in range(m)] for i in range(n)], cols=m)
    b = RationalMatrix.from_rows(final_rows, cols=n)
    return QPMap(lam=tuple(lam), A=a, B=b)


def merge_degenerate_qms(lam, A: RationalMatrix, B: RationalMatrix) -> QPMap:
    """Build a QPMap from raw matrices, collapsing duplicate rows of B.

    Columns of A belonging to identical exponent rows are summed onto the
    first occurrence; row order is otherwise preserved.  This is the sanctioned
    way to construct a map from data that may describe a quasimonomial twice.
    """
    lam = tuple(Fraction(v) if not isinstance(v, Fraction) else v for v in lam)
    n = len(lam)
    if A.rows != n or B.cols != n or A.cols != B.rows:
        raise DimensionMismatchError("inconsistent lam/A/B shapes")
    kept_rows, kept_cols, first = [], [], {}
    for j in range(B.rows):
        row = B.row(j)
        col = A.col(j)
        if row in first:
            k = first[row]
            kept_cols[k] = tuple(a + b for a, b in zip(kept_cols[k], col))
        else:
            first[row] = len(kept_rows)
            kept_rows.append(row)
            kept_cols.append(col)
    m = len(kept_rows)
    a = RationalMatrix.from_rows(
        [[kept_cols[j][i] for j in range(m)] for i in range(n)], cols=m)
    b = RationalMatrix.from_rows(kept_rows, cols=n)
    return QPMap(lam=lam, A=a, B=b)


def _truncate(mapped: QPMap, r: int, q: tuple[Fraction, ...] | None) -> QPMap:
    """Drop trailing decoupled variables; scale columns by q; clean up."""
    lam = mapped.lam[:r]
    a_cols = []
    for j in range(mapped.m):
        col = [mapped.A[i, j] for i in range(r)]
        if q is not None:
            col = [v * q[j] for v in col]
        a_cols.append(tuple(col))
    b_rows = [mapped.B.row(j)[:r] for j in range(mapped.m)]
    return _clean_parts(lam, a_cols, b_rows, r)


# -- decoupling steps ---------------------------------------------------------


def _kernel_decouple(qp: QPMap, kind: StepKind) -> tuple[QPMap, StepRecord]:
    """Shared construction for steps 1 and 2.

    Columns r+1..n of the transform are a kernel basis of B, so those
    variables disappear from every quasimonomial; the leading block is the
    identity, after a variable permutation that moves independent columns of
    B to the front.
    """
    n = qp.n
    _, pivots = _rref(qp.B)
    r = len(pivots)
    order = pivots + [c for c in range(n) if c not in pivots]
    perm = RationalMatrix.from_rows(
        [[Fraction(1) if order[j] == i else Fraction(0) for j in range(n)]
         for i in range(n)], cols=n)
    b_perm = qp.B @ perm
    kern = kernel_basis(b_perm)
    lead = RationalMatrix.from_rows(
        [[Fraction(1) if i == j else Fraction(0) for j in range(r)]
         for i in range(n)], cols=r)
    kern_cols = RationalMatrix.from_rows(
        [[v[i] for v in kern] for i in range(n)], cols=n - r)
    c_total = perm @ hstack(lead, kern_cols)
    if rank(c_total) != n:
        raise IllConditionedBlockError(
            "identity block conflicts with the kernel structure")
    t = QMTransform(c_total)
    mapped = apply_qm(qp, t)
    if any(mapped.B[j, k] != 0 for j in range(mapped.m) for k in range(r, n)):
        raise IllConditionedBlockError("kernel columns did not vanish")
    reduced = _truncate(mapped, r, None)
    record = StepRecord(kind=kind, transform=t,
                        decoupled_indices=tuple(range(r, n)))
    return reduced, record


def reduce_step1(qp: QPMap) -> tuple[QPMap, StepRecord] | None:
    """Reduce the m < n case; None when m >= n already holds."""
    if qp.m >= qp.n:
        return None
    return _kernel_decouple(qp, StepKind.STEP1)


def reduce_step2(qp: QPMap) -> tuple[QPMap, StepRecord] | None:
    """Bring B to full column rank; None when rank(B) = n already."""
    if qp.m < qp.n:
        raise DimensionMismatchError("m < n; run reduce_step1 first")
    if rank(qp.B) == qp.n:
        return None
    return _kernel_decouple(qp, StepKind.STEP2)


def reduce_step3(qp: QPMap,
                 initial: State | None = None) -> tuple[QPMap, StepRecord] | None:
    """Decouple conserved coordinates until (lam | A) has full row rank.

    Builds the transform from a basis of the column space of (lam | A):
    complete it to a basis of R^n, conjugate the projector that kills it,
    keep its independent rows as the bottom block of D, complete D to an
    invertible matrix, and change variables by C = D^-1.  The trailing n - r
    variables of the transformed map are constants; each quasimonomial picks
    up the factor q_j contributed by those constant values (1 when no initial
    state is supplied), applied to its coefficient column.
    """
    n, m = qp.n, qp.m
    if m < n:
        raise DimensionMismatchError("m < n; run reduce_step1 first")
    if rank(qp.B) < n:
        raise RankDeficientInputError(
            "B must have full column rank; run reduce_step2 first")
    big_m = mmatrix(qp)
    r = rank(big_m)
    if r == n:
        return None

    _, col_pivots = _rref(big_m)
    basis_cols = big_m.take_cols(col_pivots)
    full_basis = complete_to_invertible(basis_cols, side="right")
    proj_core = RationalMatrix.from_rows(
        [[Fraction(1) if (i == j and i >= r) else Fraction(0)
          for j in range(n)] for i in range(n)], cols=n)
    proj = full_basis @ proj_core @ inverse(full_basis)
    constraint = proj.take_rows(select_independent_rows(proj, n - r))
    d = complete_to_invertible(constraint, side="above")
    t = QMTransform(inverse(d))
    mapped = apply_qm(qp, t)
    new_m = mmatrix(mapped)
    if any(new_m[i, j] != 0 for i in range(r, n) for j in range(new_m.cols)):
        raise IllConditionedBlockError(
            "conserved rows of the coefficient matrix did not vanish")

    if initial is None:
        q = (Fraction(1),) * m
    else:
        y0 = phi(t, initial)
        b_rows = mapped.B.to_float_rows()
        vals = []
        for j in range(m):
            log_q = sum(b_rows[j][k] * math.log(y0[k]) for k in range(r, n))
            qf = math.exp(log_q)
            if not (math.isfinite(qf) and qf > 0.0):
                raise OverflowDivergenceError(
                    f"initial-value factor for quasimonomial {j} left the "
                    f"float range ({qf!r})", argument=log_q)
            vals.append(Fraction(qf))
        q = tuple(vals)

    reduced = _truncate(mapped, r, q)
    record = StepRecord(kind=StepKind.STEP3, transform=t,
                        decoupled_indices=tuple(range(r, n)), q_factors=q)
    return reduced, record


# -- full reduction -----------------------------------------------------------


def push_state(record: StepRecord, s: State) -> State:
    """Image of a state under one reduction step (transform, then drop)."""
    if record.kind is StepKind.MERGE:
        return s
    y = phi(record.transform, s)
    keep = len(s) - len(record.decoupled_indices)
    return State(y.x[:keep])


def push_state_through(steps, s: State) -> State:
    for rec in steps:
        s = push_state(rec, s)
    return s


def apply_step(qp: QPMap, record: StepRecord) -> QPMap:
    """Replay one recorded step on a map; exact."""
    if record.kind is StepKind.MERGE:
        return merge_degenerate_qms(qp.lam, qp.A, qp.B)
    if record.kind is StepKind.EMBED:
        return embed(qp)
    mapped = apply_qm(qp, record.transform)
    r = qp.n - len(record.decoupled_indices)
    return _truncate(mapped, r, record.q_factors)


def replay_steps(qp: QPMap, steps) -> QPMap:
    for rec in steps:
        qp = apply_step(qp, rec)
    return qp


def _pullback_exponents(steps, exponents) -> tuple[Fraction, ...]:
    """Rewrite a quasimonomial of a reduced stage in the original variables."""
    e = list(exponents)
    for rec in reversed(steps):
        if rec.kind is StepKind.MERGE:
            continue
        n_prev = rec.transform.n
        e = e + [Fraction(0)] * (n_prev - len(e))
        e = list(vec_mat(e, rec.transform.c_inv))
    return tuple(e)


def evaluate_constant(c: ConstantOfMotion, s: State) -> float:
    """Value of the quasimonomial prod_k x_k**e_k at a state, in log space."""
    if len(c.exponents) != len(s):
        raise DimensionMismatchError("exponent vector does not match state")
    return math.exp(sum(float(e) * lx
                        for e, lx in zip(c.exponents, s.logs()) if e))


def reduce(qp: QPMap, initial: State | None = None) -> ReductionReport:
    """Full reduction to non-redundant form with an exact audit trail.

    Runs step 1, step 2, then step 3 repeatedly (each pass strictly lowers
    the dimension, so at most n passes are possible).  Constants of motion
    discovered by step-3 passes are pulled back to the original variables;
    their values are filled in when an initial state is supplied.
    """
    if initial is not None and len(initial) != qp.n:
        raise DimensionMismatchError("initial state length does not match map")
    records: list[StepRecord] = []
    constants: list[ConstantOfMotion] = []
    cur = qp
    cur_state = initial

    out = reduce_step1(cur)
    if out is not None:
        cur, rec = out
        records.append(rec)
        if cur_state is not None:
            cur_state = push_state(rec, cur_state)

    out = reduce_step2(cur)
    if out is not None:
        cur, rec = out
        records.append(rec)
        if cur_state is not None:
            cur_state = push_state(rec, cur_state)

    passes = 0
    while True:
        out = reduce_step3(cur, cur_state)
        if out is None:
            break
        passes += 1
        if passes > qp.n + 1:
            raise AssertionError("step-3 loop exceeded its dimension cap")
        nxt, rec = out
        d = rec.transform.c_inv
        r = cur.n - len(rec.decoupled_indices)
        for j in range(r, cur.n):
            exps = _pullback_exponents(records, d.row(j))
            value = (evaluate_constant(ConstantOfMotion(exps), initial)
                     if initial is not None else None)
            constants.append(ConstantOfMotion(exponents=exps, value=value))
        cur = nxt
        records.append(rec)
        if cur_state is not None:
            cur_state = push_state(rec, cur_state)

    final_m = mmatrix(cur)
    if not (cur.m >= cur.n and rank(cur.B) == cur.n and rank(final_m) == cur.n):
        raise AssertionError("reduction terminated on a redundant map")
    return ReductionReport(original=qp, final=cur, steps=tuple(records),
                           constants=tuple(constants))


# -- embedding and the Lotka-Volterra canonical form ---------------------------


def embed(qp: QPMap) -> QPMap:
    """Lift an m > n map to m variables by appending constant-1 coordinates.

    The new coordinates carry zero lam entries and zero coefficient rows, and
    B is extended on the right to an invertible m x m matrix by deterministic
    standard-basis completion.  On the level set where the appended
    coordinates equal 1, the embedded dynamics are the original dynamics.
    """
    n, m = qp.n, qp.m
    if m == n:
        raise NotApplicableError("map already has m = n; nothing to embed")
    if m < n:
        raise NotApplicableError("embedding needs m > n; reduce the map first")
    if rank(qp.B) < n:
        raise RankDeficientInputError("B must have full column rank n")
    b_full = complete_to_invertible(qp.B, side="right")
    lam = qp.lam + (Fraction(0),) * (m - n)
    a_full = vstack(qp.A, RationalMatrix.zeros(m - n, m))
    return QPMap(lam=lam, A=a_full, B=b_full)


def to_lv_canonical(qp: QPMap) -> tuple[QPMap, tuple[ConstantOfMotion, ...]]:
    """Conjugate a non-redundant map to its Lotka-Volterra form (B = I).

    For m = n this is the transform C = B^-1 and the result carries the exact
    coefficient matrix B (lam | A).  For m > n the map is embedded first; the
    resulting m-dimensional LV map has the same coefficient matrix and m - n
    independent quasimonomial constants of motion whose common level set
    {1, ..., 1} carries the original dynamics.
    """
    n, m = qp.n, qp.m
    if m < n:
        raise NotNonRedundantError("m >= n required; run reduce first")
    if rank(qp.B) != n:
        raise NotNonRedundantError(
            "B must have full column rank n; run reduce first")
    if m == n:
        t = QMTransform(inverse(qp.B))
        return apply_qm(qp, t), ()
    lifted = embed(qp)
    t = QMTransform(inverse(lifted.B))
    lv = apply_qm(lifted, t)
    constants = tuple(
        ConstantOfMotion(exponents=t.C.row(j), value=1.0)
        for j in range(n, m))
    return lv, constants


def embed_flow(flow: QPFlow) -> QPFlow:
    """Embedding of a continuous-time system; same completion rule as embed."""
    n, m = flow.n, flow.m
    if m == n:
        raise NotApplicableError("flow already has m = n; nothing to embed")
    if m < n:
        raise NotApplicableError("embedding needs m > n")
    if rank(flow.B) < n:
        raise RankDeficientInputError("B must have full column rank n")
    b_full = complete_to_invertible(flow.B, side="right")
    lam = flow.lam_star + (Fraction(0),) * (m - n)
    a_full = vstack(flow.A_star, RationalMatrix.zeros(m - n, m))
    return QPFlow(lam_star=lam, A_star=a_full, B=b_full)


def lv_canonical_flow(flow: QPFlow) -> QPFlow:
    """Lotka-Volterra canonical form of a flow (B = I, coefficients B (lam*|A*))."""
    n, m = flow.n, flow.m
    if m < n:
        raise NotNonRedundantError("m >= n required")
    if rank(flow.B) != n:
        raise NotNonRedundantError("B must have full column rank n")
    src = flow if m == n else embed_flow(flow)
    t = QMTransform(inverse(src.B))
    return apply_qm_flow(src, t)
