"""Quasimonomial changes of variables, conjugacy checks and class equivalence.

A quasimonomial transform replaces the variables through x_i = prod_j y_j^C[i][j]
with invertible C.  It preserves the quasipolynomial form, acting on the
matrices as A' = C^-1 A, B' = B C, lam' = C^-1 lam, and it is a topological
conjugacy of the dynamics on the positive orthant.  The product B (lam | A)
is unchanged by every such transform, which makes it a complete equivalence
invariant for non-redundant maps of equal size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    DimensionMismatchError,
    NotNonRedundantError,
    NotSameClassError,
)
from .linalg import (
    RationalMatrix,
    inverse,
    mat_vec,
    rank,
    select_independent_rows,
    solve,
)
from .maps import QPFlow, QPMap, State, _single_unit_index, mmatrix, step


@dataclass(frozen=True)
class QMTransform:
    """Invertible exponent matrix C defining a quasimonomial change of variables."""

    C: RationalMatrix
    c_inv: RationalMatrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.C.rows != self.C.cols:
            raise DimensionMismatchError("transform matrix must be square")
        object.__setattr__(self, "c_inv", inverse(self.C))

    @property
    def n(self) -> int:
        return self.C.rows

    def inverse_transform(self) -> "QMTransform":
        return QMTransform(self.c_inv)


def apply_qm(qp: QPMap, t: QMTransform) -> QPMap:
    """Transformed map with A' = C^-1 A, B' = B C, lam' = C^-1 lam, all exact.

    Since C is invertible, B C keeps distinct rows distinct, so the result
    never needs degeneracy merging.
    """
    if t.n != qp.n:
        raise DimensionMismatchError(
            f"transform is {t.n}x{t.n} but the map has n={qp.n}")
    return QPMap(lam=mat_vec(t.c_inv, qp.lam), A=t.c_inv @ qp.A, B=qp.B @ t.C)


def apply_qm_flow(flow: QPFlow, t: QMTransform) -> QPFlow:
    """Same transformation rules applied to a continuous-time system."""
    if t.n != flow.n:
        raise DimensionMismatchError(
            f"transform is {t.n}x{t.n} but the flow has n={flow.n}")
    return QPFlow(lam_star=mat_vec(t.c_inv, flow.lam_star),
                  A_star=t.c_inv @ flow.A_star, B=flow.B @ t.C)


def _power_product(rows: tuple[tuple[float, ...], ...], s: State) -> State:
    logs = s.logs()
    out = []
    for row in rows:
        unit = _single_unit_index(row)
        if unit is not None:
            # row e_j just relabels the coordinate; keep it exact
            out.append(s[unit])
        else:
            out.append(math.exp(
                math.fsum(c * lx for c, lx in zip(row, logs) if c)))
    return State(tuple(out))


def phi(t: QMTransform, s: State) -> State:
    """New coordinates y with y_i = prod_j x_j^(C^-1)[i][j], in log space."""
    if t.n != len(s):
        raise DimensionMismatchError("state length does not match transform")
    return _power_product(t.c_inv.to_float_rows(), s)


def phi_inverse(t: QMTransform, s: State) -> State:
    """Original coordinates x_i = prod_j y_j^C[i][j]."""
    if t.n != len(s):
        raise DimensionMismatchError("state length does not match transform")
    return _power_product(t.C.to_float_rows(), s)


def conjugacy_residual(map_f: QPMap, map_g: QPMap, t: QMTransform,
                       s: State) -> float:
    """Relative sup-norm defect of phi . F = G . phi at one state.

    The exponent structure is checked exactly first (same sizes and
    B_G = B_F C); coefficient differences between the two maps are what the
    residual measures.
    """
    if map_f.n != map_g.n or map_f.m != map_g.m:
        raise DimensionMismatchError("maps have different sizes")
    if t.n != map_f.n:
        raise DimensionMismatchError("transform size does not match the maps")
    if map_f.B @ t.C != map_g.B:
        raise NotSameClassError(
            "exponent matrices are not related by this transform")
    lhs = phi(t, step(map_f, s))
    rhs = step(map_g, phi(t, s))
    scale = max(abs(v) for v in lhs)
    return max(abs(a - b) for a, b in zip(lhs, rhs)) / scale


def class_invariant(qp: QPMap) -> RationalMatrix:
    """The m x (m+1) product B (lam | A), identical across an equivalence class."""
    return qp.B @ mmatrix(qp)


def flow_class_invariant(flow: QPFlow) -> RationalMatrix:
    """Continuous-time analogue B (lam* | A*)."""
    return flow.B @ mmatrix(flow)


def same_class(map1: QPMap, map2: QPMap) -> QMTransform | None:
    """Decide equivalence of two non-redundant maps of equal size.

    Returns the unique transform t with apply_qm(map1, t) == map2 when the
    invariants B M agree exactly, and None otherwise.  Both maps must be in
    non-redundant form (m >= n with B and M of full rank n); full rank of M
    is required for the invariant to be decisive.
    """
    if map1.n != map2.n or map1.m != map2.m:
        raise DimensionMismatchError(
            f"maps have sizes (n={map1.n}, m={map1.m}) and "
            f"(n={map2.n}, m={map2.m}); reduce to equal sizes first")
    n, m = map1.n, map1.m
    if m < n:
        raise NotNonRedundantError("maps must satisfy m >= n")
    for tag, qp in (("first", map1), ("second", map2)):
        if rank(qp.B) != n or rank(mmatrix(qp)) != n:
            raise NotNonRedundantError(
                f"{tag} map is not in non-redundant form "
                "(B and (lam|A) must both have rank n)")
    if class_invariant(map1) != class_invariant(map2):
        return None
    pivot_rows = select_independent_rows(map1.B, n)
    c = solve(map1.B.take_rows(pivot_rows), map2.B.take_rows(pivot_rows))
    if map1.B @ c != map2.B:
        return None
    t = QMTransform(c)
    if apply_qm(map1, t) != map2:
        return None
    return t
