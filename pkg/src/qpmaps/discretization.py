"""Exponential (QP) and Euler discretizations of continuous QP systems.

Both schemes share the per-step field xi_i = eps*lam*_i + sum_j eps*A*_ij q_j:
the QP discretization updates x_i' = x_i exp(xi_i) and stays a QP map, the
Euler scheme updates x_i' = x_i (1 + xi_i) and can leave the positive orthant.
They share interior fixed points and the Jacobians there, and they agree to
first order in eps along orbits.  Only the exponential family commutes with
quasimonomial changes of variables at the matrix level; the harness here
probes other update shapes pointwise and reports discrepancies instead of
assuming any of this.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (
    DimensionMismatchError,
    FixedPointNotFound,
    NonPositiveStateError,
    OrbitEscapedError,
    OverflowDivergenceError,
)
from .linalg import RationalMatrix, as_fraction
from .maps import (
    QPFlow,
    QPMap,
    State,
    _float_parts,
    _qm_values,
    DEFAULT_EXP_BOUND,
    find_interior_fixed_point,
    jacobian,
    step,
)
from .reduction import lv_canonical_flow
from .transforms import QMTransform, apply_qm, apply_qm_flow, phi, phi_inverse

EULER_FIXED_POINT_TOL = 1e-10
JACOBIAN_MATCH_TOL = 1e-12


def _coerce_eps(eps) -> Fraction:
    e = as_fraction(eps) if not isinstance(eps, float) else Fraction(eps)
    if e <= 0:
        raise ValueError(f"time step must be positive, got {eps!r}")
    return e


@dataclass(frozen=True)
class EulerMap:
    """Euler-discretized system; deliberately not a QPMap.

    The additive update rule breaks form invariance and positivity, so this
    type cannot be fed to the transform or reduction machinery.
    """

    lam: tuple[Fraction, ...]
    A: RationalMatrix
    B: RationalMatrix

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(as_fraction(v) for v in self.lam))
        if self.A.rows != len(self.lam) or self.B.cols != len(self.lam) \
                or self.A.cols != self.B.rows:
            raise DimensionMismatchError("inconsistent Euler map shapes")

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def m(self) -> int:
        return self.B.rows


def qp_discretize(flow: QPFlow, eps) -> QPMap:
    """QP map with lam = eps*lam*, A = eps*A*, same B; exact for rational eps."""
    e = _coerce_eps(eps)
    return QPMap(lam=tuple(e * v for v in flow.lam_star),
                 A=flow.A_star.scale(e), B=flow.B)


def euler_discretize(flow: QPFlow, eps) -> EulerMap:
    e = _coerce_eps(eps)
    return EulerMap(lam=tuple(e * v for v in flow.lam_star),
                    A=flow.A_star.scale(e), B=flow.B)


@dataclass(frozen=True)
class EulerStepResult:
    values: tuple[float, ...]
    positive: bool


def euler_step(em: EulerMap, s: State) -> EulerStepResult:
    """One Euler update x_i (1 + lam_i + sum_j A_ij q_j); may be nonpositive."""
    if len(s) != em.n:
        raise DimensionMismatchError(f"state length {len(s)} != n={em.n}")
    lam_f, a_rows, b_rows = _float_parts(em.lam, em.A, em.B)
    q = _qm_values(b_rows, s, DEFAULT_EXP_BOUND)
    vals = []
    for i in range(em.n):
        acc = lam_f[i]
        for a, qj in zip(a_rows[i], q):
            if a:
                acc += a * qj
        vals.append(s[i] * (1.0 + acc))
    values = tuple(vals)
    positive = all(math.isfinite(v) and v > 0.0 for v in values)
    return EulerStepResult(values=values, positive=positive)


def euler_jacobian(em: EulerMap, s: State) -> tuple[tuple[float, ...], ...]:
    """Analytic Jacobian of the Euler update at a positive state."""
    lam_f, a_rows, b_rows = _float_parts(em.lam, em.A, em.B)
    if len(s) != em.n:
        raise DimensionMismatchError(f"state length {len(s)} != n={em.n}")
    q = _qm_values(b_rows, s, DEFAULT_EXP_BOUND)
    n = em.n
    fields = [lam_f[i] + sum(a * qj for a, qj in zip(a_rows[i], q))
              for i in range(n)]
    rows = []
    for i in range(n):
        row = []
        for l in range(n):
            inner = sum(a_rows[i][j] * b_rows[j][l] * q[j] for j in range(em.m))
            val = s[i] * inner / s[l]
            if i == l:
                val += 1.0 + fields[i]
            row.append(val)
        rows.append(tuple(row))
    return tuple(rows)


# -- trajectory comparison ----------------------------------------------------


@dataclass(frozen=True)
class DivergenceSeries:
    """Per-step sup-norm gap between the two discretizations of one flow."""

    eps: Fraction
    times: tuple[float, ...]
    qp_states: tuple[tuple[float, ...], ...]
    euler_states: tuple[tuple[float, ...], ...]
    sup_diffs: tuple[float, ...]

    @property
    def terminal(self) -> float:
        return self.sup_diffs[-1]


def compare_discretizations(flow: QPFlow, eps, s0: State,
                            horizon_time: float) -> DivergenceSeries:
    """Run both schemes with the same eps up to p*eps <= horizon_time.

    Raises OrbitEscapedError naming the scheme and step as soon as either
    orbit leaves the positive orthant or the float range.
    """
    e = _coerce_eps(eps)
    qp = qp_discretize(flow, e)
    em = euler_discretize(flow, e)
    n_steps = int(math.floor(horizon_time / float(e) + 1e-9))
    times = [0.0]
    qp_traj = [tuple(s0.x)]
    euler_traj = [tuple(s0.x)]
    diffs = [0.0]
    x_qp = s0
    x_e = s0
    for p in range(1, n_steps + 1):
        try:
            x_qp = step(qp, x_qp)
        except OverflowDivergenceError as err:
            raise OrbitEscapedError(
                f"exponential-scheme orbit diverged at step {p}: {err}",
                scheme="qp", step_index=p) from err
        res = euler_step(em, x_e)
        if not res.positive:
            raise OrbitEscapedError(
                f"Euler orbit left the positive orthant at step {p}",
                scheme="euler", step_index=p)
        x_e = State(res.values)
        times.append(p * float(e))
        qp_traj.append(tuple(x_qp.x))
        euler_traj.append(tuple(x_e.x))
        diffs.append(max(abs(a - b) for a, b in zip(x_qp, x_e)))
    return DivergenceSeries(eps=e, times=tuple(times),
                            qp_states=tuple(qp_traj),
                            euler_states=tuple(euler_traj),
                            sup_diffs=tuple(diffs))


# -- shared fixed points ------------------------------------------------------


@dataclass(frozen=True)
class FixedPointCoincidence:
    """Outcome of checking that both schemes fix the same interior point."""

    status: str                       # "ok" or "skipped"
    reason: str | None = None
    fixed_point: tuple[float, ...] | None = None
    euler_residual: float | None = None
    jacobian_max_diff: float | None = None

    @property
    def euler_fixes_point(self) -> bool:
        return (self.status == "ok"
                and self.euler_residual < EULER_FIXED_POINT_TOL)

    @property
    def jacobians_match(self) -> bool:
        return (self.status == "ok"
                and self.jacobian_max_diff < JACOBIAN_MATCH_TOL)


def check_fixed_point_coincidence(flow: QPFlow, eps) -> FixedPointCoincidence:
    """Locate the QP discretization's interior fixed point and test the Euler map on it."""
    if flow.m != flow.n:
        return FixedPointCoincidence(
            status="skipped",
            reason=f"fixed-point solving needs m = n (got m={flow.m}, n={flow.n})")
    e = _coerce_eps(eps)
    qp = qp_discretize(flow, e)
    em = euler_discretize(flow, e)
    try:
        fp = find_interior_fixed_point(qp)
    except FixedPointNotFound as err:
        return FixedPointCoincidence(status="skipped", reason=str(err))
    res = euler_step(em, fp)
    scale = max(abs(v) for v in fp)
    e_resid = max(abs(a - b) for a, b in zip(res.values, fp)) / scale
    j_qp = jacobian(qp, fp)
    j_eu = euler_jacobian(em, fp)
    j_diff = max(abs(a - b) for ra, rb in zip(j_qp, j_eu)
                 for a, b in zip(ra, rb))
    return FixedPointCoincidence(status="ok", fixed_point=tuple(fp.x),
                                 euler_residual=e_resid,
                                 jacobian_max_diff=j_diff)


# -- commutation with changes of variables -------------------------------------


class FamilyKind(Enum):
    QP_EXP = "qp-exp"
    EULER_ADD = "euler-add"
    POWER_BASE = "power-base"
    CUSTOM_MULTIPLICATIVE = "custom-multiplicative"
    CUSTOM_ADDITIVE = "custom-additive"


@dataclass(frozen=True)
class DiscretizationFamily:
    """One update shape x' = x*phi(xi) (multiplicative) or x' = x + phi(xi)."""

    kind: FamilyKind
    base: float | None = None
    shape: Callable[[float], float] | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind is FamilyKind.POWER_BASE:
            if self.base is None or not self.base > 0.0:
                raise ValueError("power family needs a positive base")
        if self.kind in (FamilyKind.CUSTOM_MULTIPLICATIVE,
                         FamilyKind.CUSTOM_ADDITIVE) and self.shape is None:
            raise ValueError("custom family needs a shape function")
        if not self.label:
            object.__setattr__(self, "label", self.kind.value)

    @staticmethod
    def qp_exp() -> "DiscretizationFamily":
        return DiscretizationFamily(FamilyKind.QP_EXP)

    @staticmethod
    def euler_add() -> "DiscretizationFamily":
        return DiscretizationFamily(FamilyKind.EULER_ADD)

    @staticmethod
    def power_base(a: float) -> "DiscretizationFamily":
        return DiscretizationFamily(FamilyKind.POWER_BASE, base=a,
                                    label=f"power-base({a:g})")

    @staticmethod
    def custom_multiplicative(label: str, shape) -> "DiscretizationFamily":
        return DiscretizationFamily(FamilyKind.CUSTOM_MULTIPLICATIVE,
                                    shape=shape, label=label)

    @staticmethod
    def custom_additive(label: str, shape) -> "DiscretizationFamily":
        return DiscretizationFamily(FamilyKind.CUSTOM_ADDITIVE,
                                    shape=shape, label=label)


@dataclass(frozen=True)
class CommutativityVerdict:
    family: str
    mode: str                      # "exact-matrix" or "pointwise"
    commutes: bool
    max_discrepancy: float | None = None
    witness: tuple[float, ...] | None = None
    note: str = ""


def _family_update(family: DiscretizationFamily, flow: QPFlow, eps: Fraction,
                   s: State) -> tuple[float, ...]:
    """Apply one step of the family-discretized flow; raw output vector."""
    lam = tuple(eps * v for v in flow.lam_star)
    a = flow.A_star.scale(eps)
    lam_f, a_rows, b_rows = _float_parts(lam, a, flow.B)
    q = _qm_values(b_rows, s, DEFAULT_EXP_BOUND)
    out = []
    for i in range(flow.n):
        xi = lam_f[i] + sum(c * qj for c, qj in zip(a_rows[i], q))
        if family.kind is FamilyKind.QP_EXP:
            out.append(s[i] * math.exp(xi))
        elif family.kind is FamilyKind.POWER_BASE:
            out.append(s[i] * family.base ** xi)
        elif family.kind is FamilyKind.EULER_ADD:
            out.append(s[i] * (1.0 + xi))
        elif family.kind is FamilyKind.CUSTOM_MULTIPLICATIVE:
            out.append(s[i] * family.shape(xi))
        else:
            out.append(s[i] + family.shape(xi))
    return tuple(out)


def _default_probe_states(n: int) -> list[State]:
    grid = itertools.product((0.5, 1.0, 2.0), repeat=n)
    return [State(pt) for pt in grid]


def check_commutativity(flow: QPFlow, t: QMTransform, eps,
                        family: DiscretizationFamily,
                        states: Sequence[State] | None = None
                        ) -> CommutativityVerdict:
    """Compare discretize-then-transform against transform-then-discretize.

    The exponential family (and any fixed power base a > 0, since a**xi =
    exp(xi ln a) with the same ln a factor on both routes) is compared at the
    exact matrix level.  Every other family is compared pointwise on a grid
    of positive states; the verdict reports the largest discrepancy found,
    never a claim beyond the sampled evidence.
    """
    e = _coerce_eps(eps)
    if t.n != flow.n:
        raise DimensionMismatchError("transform size does not match flow")

    if family.kind in (FamilyKind.QP_EXP, FamilyKind.POWER_BASE):
        lhs = apply_qm(qp_discretize(flow, e), t)
        rhs = qp_discretize(apply_qm_flow(flow, t), e)
        note = ""
        if family.kind is FamilyKind.POWER_BASE:
            note = ("common factor ln(base) absorbed into the coefficients "
                    "on both routes")
        return CommutativityVerdict(family=family.label, mode="exact-matrix",
                                    commutes=(lhs == rhs), note=note)

    probes = list(states) if states is not None else _default_probe_states(flow.n)
    flow_t = apply_qm_flow(flow, t)
    worst = 0.0
    witness: tuple[float, ...] | None = None
    compared = 0
    for z in probes:
        try:
            route_a = _family_update(family, flow_t, e, z)
            x = phi_inverse(t, z)
            raw = _family_update(family, flow, e, x)
            route_b = phi(t, State(raw))
        except (NonPositiveStateError, OverflowDivergenceError, ValueError,
                OverflowError):
            continue
        compared += 1
        gap = max(abs(a - b) for a, b in zip(route_a, route_b))
        if gap > worst:
            worst = gap
            witness = tuple(z.x)
    if compared == 0:
        raise ValueError("no probe state was computable on both routes")
    return CommutativityVerdict(family=family.label, mode="pointwise",
                                commutes=(worst == 0.0),
                                max_discrepancy=worst, witness=witness,
                                note=f"{compared} probe states compared")


def canonicalization_commutes(flow: QPFlow, eps) -> bool:
    """Exact check: LV-canonicalizing then discretizing equals the reverse order."""
    from .reduction import to_lv_canonical

    e = _coerce_eps(eps)
    lhs, _ = to_lv_canonical(qp_discretize(flow, e))
    rhs = qp_discretize(lv_canonical_flow(flow), e)
    return lhs == rhs
