"""Shared generators and filters for the property sweeps.

All randomness is seeded through qpmaps.sampling, so QP_SEED reproduces any
run.  Orbit-dependent tests resample until the trajectory stays inside a
comfortable float range; divergence is a documented behavior of these maps,
not a test failure.
"""

from __future__ import annotations

import random
from fractions import Fraction

from qpmaps import QPMap, State, apply_qm, iterate
from qpmaps.errors import OverflowDivergenceError
from qpmaps.linalg import RationalMatrix, hstack, vstack
from qpmaps.sampling import (
    random_fraction,
    random_invertible_transform,
    random_positive_state,
    random_qp_map,
    random_rational_matrix,
)

ORBIT_LO = 1e-6
ORBIT_HI = 1e6


def orbit_in_range(traj, lo: float = ORBIT_LO, hi: float = ORBIT_HI) -> bool:
    return all(lo <= v <= hi for s in traj for v in s)


def bounded_orbit(qp: QPMap, s0: State, steps: int,
                  lo: float = ORBIT_LO, hi: float = ORBIT_HI):
    """Trajectory if it stays within [lo, hi], else None."""
    try:
        traj = iterate(qp, s0, steps)
    except OverflowDivergenceError:
        return None
    return traj if orbit_in_range(traj, lo, hi) else None


def sample_tame_map_and_state(rng: random.Random, n_max: int = 3,
                              m_max: int = 4, steps: int = 50,
                              lo: float = ORBIT_LO, hi: float = ORBIT_HI,
                              damp: int = 2, tries: int = 400):
    """A random map and state whose orbit stays in float-comfortable range."""
    for _ in range(tries):
        n = rng.randint(1, n_max)
        m = rng.randint(1, m_max)
        qp = random_qp_map(rng, n, m, max_num=1, max_den=2)
        # damp the field so orbits have a chance of staying bounded
        qp = QPMap(lam=tuple(v / damp for v in qp.lam),
                   A=qp.A.scale(Fraction(1, damp)), B=qp.B)
        s0 = random_positive_state(rng, n, 0.8, 1.25)
        traj = bounded_orbit(qp, s0, steps, lo, hi)
        if traj is not None:
            return qp, s0, traj
    raise RuntimeError("could not sample a bounded orbit")


def orbit_condition_product(qp: QPMap, traj, cap: float = 1e30) -> float:
    """Product of per-step Jacobian sup-norms: how roundoff compounds."""
    from qpmaps import jacobian

    prod = 1.0
    for s in traj[:-1]:
        j = jacobian(qp, s)
        norm = max(sum(abs(v) for v in row) for row in j)
        prod *= max(1.0, norm)
        if prod > cap:
            break
    return prod


def sample_conjugacy_triple(rng: random.Random, steps: int = 50,
                            tries: int = 600, condition_cap: float = 1e6):
    """(map, transform, state) whose orbits on both sides stay mild.

    Both orbits must stay in a moderate box and have a 50-step Jacobian
    condition product below `condition_cap`; that bounds how far compounded
    roundoff can push the float orbits apart, independent of the conjugacy
    property being tested.
    """
    for _ in range(tries):
        qp, s0, traj = sample_tame_map_and_state(
            rng, steps=steps, lo=0.05, hi=20.0, damp=4)
        if orbit_condition_product(qp, traj, condition_cap) > condition_cap:
            continue
        t = random_invertible_transform(rng, qp.n)
        mapped = apply_qm(qp, t)
        from qpmaps import phi
        img = phi(t, s0)
        other = bounded_orbit(mapped, img, steps, 0.02, 50.0)
        if other is None:
            continue
        if orbit_condition_product(mapped, other, condition_cap) > condition_cap:
            continue
        return qp, t, s0
    raise RuntimeError("could not sample a bounded conjugacy triple")


def inflate_map(rng: random.Random, core: QPMap, n_const: int,
                n_kernel: int) -> QPMap:
    """Blow a non-redundant core up into a redundant map.

    Constant padding appends variables with zero coefficient rows and random
    extra exponent columns (conserved coordinates); kernel padding appends
    variables absent from every quasimonomial but carrying random dynamics.
    A random invertible transform then hides the structure.
    """
    lam = core.lam
    a = core.A
    b = core.B
    m = core.m
    if n_const:
        extra = RationalMatrix.from_rows(
            [[Fraction(rng.randint(-2, 2)) for _ in range(n_const)]
             for _ in range(m)], cols=n_const)
        b = hstack(b, extra)
        lam = lam + (Fraction(0),) * n_const
        a = vstack(a, RationalMatrix.zeros(n_const, m))
    if n_kernel:
        b = hstack(b, RationalMatrix.zeros(m, n_kernel))
        lam = lam + tuple(random_fraction(rng, 2, 2) for _ in range(n_kernel))
        a = vstack(a, random_rational_matrix(rng, n_kernel, m, 2, 2))
    inflated = QPMap(lam=lam, A=a, B=b)
    t = random_invertible_transform(rng, inflated.n)
    return apply_qm(inflated, t)
