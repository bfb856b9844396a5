"""Command-line interface: reduce, canonical, same-class, simulate, discretize.

Reports are JSON documents with a fixed field order (command, inputs,
results, exact_checks, tolerances, timing); everything except the timing
field is byte-deterministic for identical inputs and QP_SEED.  Exit codes:
0 success, 2 input/parse error, 3 mathematical precondition failure,
4 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .discretization import (
    DiscretizationFamily,
    check_commutativity,
    check_fixed_point_coincidence,
    compare_discretizations,
    euler_discretize,
    qp_discretize,
)
from .errors import (
    DimensionMismatchError,
    DuplicateQuasimonomialsError,
    FixedPointNotFound,
    ModelFileError,
    NonPositiveStateError,
    NotApplicableError,
    NotNonRedundantError,
    NotSameClassError,
    OrbitEscapedError,
    OverflowDivergenceError,
    RankDeficientInputError,
    SingularMatrixError,
)
from .linalg import RationalMatrix, rank
from .maps import QPFlow, QPMap, State, iterate, mmatrix
from .modelfile import LoadedModel, load_model
from .reduction import reduce as reduce_map
from .reduction import to_lv_canonical
from .sampling import make_rng, random_invertible_transform, seed_from_env
from .transforms import class_invariant, same_class

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_DIVERGED = 4

_PRECONDITION_ERRORS = (
    DimensionMismatchError, SingularMatrixError, RankDeficientInputError,
    NotNonRedundantError, NotSameClassError, NotApplicableError,
    FixedPointNotFound, DuplicateQuasimonomialsError, NonPositiveStateError,
)
_DIVERGENCE_ERRORS = (OverflowDivergenceError, OrbitEscapedError)


# -- serialization helpers ----------------------------------------------------


def _mat(m: RationalMatrix) -> list[list[str]]:
    return [[str(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def _vec(values) -> list[str]:
    return [str(v) for v in values]


def _map_doc(qp: QPMap | QPFlow) -> dict:
    lam = qp.lam_star if isinstance(qp, QPFlow) else qp.lam
    a = qp.A_star if isinstance(qp, QPFlow) else qp.A
    return {"n": qp.n, "m": qp.m, "lambda": _vec(lam), "A": _mat(a),
            "B": _mat(qp.B)}


def _report(command: str, inputs: dict, results: dict, exact_checks: dict,
            tolerances: dict, started: float) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "results": results,
        "exact_checks": exact_checks,
        "tolerances": tolerances,
        "timing": {"seconds": round(time.perf_counter() - started, 6)},
    }


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")


def _parse_initial(raw: str, n: int) -> State:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if len(parts) != n:
        raise ModelFileError(f"expected {n} comma-separated decimals, "
                             f"got {len(parts)}", field="--initial")
    try:
        return State(tuple(float(p) for p in parts))
    except NonPositiveStateError as err:
        raise ModelFileError(str(err), field="--initial") from err
    except ValueError as err:
        raise ModelFileError(f"invalid decimal: {err}", field="--initial") from err


def _parse_eps(raw: str) -> Fraction:
    try:
        e = Fraction(raw)
    except (ValueError, ZeroDivisionError) as err:
        raise ModelFileError(f"invalid rational {raw!r}", field="--eps") from err
    if e <= 0:
        raise ModelFileError("time step must be positive", field="--eps")
    return e


def _load_kind(path: str, kind: str) -> LoadedModel:
    loaded = load_model(path)
    if loaded.kind != kind:
        raise ModelFileError(f"expected kind {kind!r}, found {loaded.kind!r}",
                             path=path, field="kind")
    return loaded


def _initial_for(loaded: LoadedModel, args) -> State | None:
    if getattr(args, "initial", None):
        return _parse_initial(args.initial, loaded.model.n)
    return loaded.initial


# -- subcommands ---------------------------------------------------------------


def _cmd_reduce(args) -> tuple[dict, int]:
    started = time.perf_counter()
    loaded = _load_kind(args.model, "map")
    qp = loaded.model
    initial = _initial_for(loaded, args)
    report_obj = reduce_map(qp, initial)
    final = report_obj.final
    steps = []
    for rec in report_obj.steps:
        steps.append({
            "kind": rec.kind.value,
            "transform_C": _mat(rec.transform.C) if rec.transform else None,
            "decoupled_indices": list(rec.decoupled_indices),
            "q_factors": _vec(rec.q_factors) if rec.q_factors else None,
        })
    results = {
        "already_nonredundant": not report_obj.steps,
        "final": _map_doc(final),
        "steps": steps,
        "constants_of_motion": [
            {"exponents": _vec(c.exponents), "value": c.value}
            for c in report_obj.constants],
        "rank_certificates": {
            "n": final.n,
            "m": final.m,
            "rank_B": rank(final.B),
            "rank_M": rank(mmatrix(final)),
        },
    }
    inputs = {
        "model": loaded.path,
        "kind": "map",
        "n": qp.n,
        "m": qp.m,
        "initial": list(initial.x) if initial is not None else None,
    }
    exact = {"rank_certificates_exact": True, "transforms_exact": True}
    tolerances = {"float_assertions": args.tolerance}
    return _report("reduce", inputs, results, exact, tolerances, started), EXIT_OK


def _cmd_canonical(args) -> tuple[dict, int]:
    started = time.perf_counter()
    loaded = _load_kind(args.model, "map")
    qp = loaded.model
    try:
        lv, constants = to_lv_canonical(qp)
    except NotNonRedundantError as err:
        raise NotNonRedundantError(f"{err} (hint: run `qpmaps reduce` first)") \
            from err
    results = {
        "embedded": lv.n > qp.n,
        "class_invariant_BM": _mat(class_invariant(qp)),
        "lv_map": _map_doc(lv),
        "constants_of_motion": [
            {"exponents": _vec(c.exponents), "value": c.value}
            for c in constants],
    }
    inputs = {"model": loaded.path, "kind": "map", "n": qp.n, "m": qp.m}
    exact = {"lv_matrix_equals_BM": class_invariant(qp) == mmatrix(lv),
             "B_is_identity": lv.B.is_identity()}
    tolerances = {"float_assertions": args.tolerance}
    return _report("canonical", inputs, results, exact, tolerances,
                   started), EXIT_OK


def _cmd_same_class(args) -> tuple[dict, int]:
    started = time.perf_counter()
    first = _load_kind(args.model1, "map")
    second = _load_kind(args.model2, "map")
    t = same_class(first.model, second.model)
    results = {
        "same_class": t is not None,
        "transform_C": _mat(t.C) if t is not None else None,
    }
    inputs = {
        "models": [first.path, second.path],
        "sizes": [{"n": first.model.n, "m": first.model.m},
                  {"n": second.model.n, "m": second.model.m}],
    }
    exact = {"invariants_compared_exactly": True}
    tolerances = {"float_assertions": args.tolerance}
    return _report("same-class", inputs, results, exact, tolerances,
                   started), EXIT_OK


def _write_csv(path: str, states) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        n = len(states[0]) if states else 0
        writer.writerow(["p"] + [f"x{i + 1}" for i in range(n)])
        for p, s in enumerate(states):
            writer.writerow([p] + [f"{v:.17g}" for v in s])


def _cmd_simulate(args) -> tuple[dict, int]:
    started = time.perf_counter()
    loaded = _load_kind(args.model, "map")
    qp = loaded.model
    initial = _initial_for(loaded, args)
    if initial is None:
        raise ModelFileError("an initial state is required (flag --initial "
                             "or an 'initial' entry in the model file)",
                             path=loaded.path, field="initial")
    diverged_at = None
    divergence_note = None
    try:
        traj = iterate(qp, initial, args.steps)
    except OverflowDivergenceError as err:
        diverged_at = err.step_index
        divergence_note = str(err)
        traj = iterate(qp, initial, err.step_index - 1)
    _write_csv(args.out, traj)
    results = {
        "steps_requested": args.steps,
        "steps_completed": len(traj) - 1,
        "diverged_at_step": diverged_at,
        "divergence_note": divergence_note,
        "csv_path": args.out,
        "final_state": list(traj[-1].x),
    }
    inputs = {"model": loaded.path, "kind": "map", "n": qp.n, "m": qp.m,
              "initial": list(initial.x), "steps": args.steps}
    exact = {"coefficients_exact": True}
    tolerances = {"float_assertions": args.tolerance}
    code = EXIT_OK if diverged_at is None else EXIT_DIVERGED
    return _report("simulate", inputs, results, exact, tolerances,
                   started), code


def _commutativity_table(flow: QPFlow, eps: Fraction) -> list[dict]:
    from .transforms import QMTransform

    rng = make_rng("cli-commutativity")
    dilation = QMTransform(RationalMatrix.from_rows(
        [[Fraction(2) if i == j == 0 else Fraction(int(i == j))
          for j in range(flow.n)] for i in range(flow.n)], cols=flow.n))
    transforms = [dilation, random_invertible_transform(rng, flow.n)]
    families = [
        DiscretizationFamily.qp_exp(),
        DiscretizationFamily.power_base(2.0),
        DiscretizationFamily.euler_add(),
        DiscretizationFamily.custom_additive("additive-identity", lambda x: x),
    ]
    rows = []
    for idx, t in enumerate(transforms):
        for fam in families:
            v = check_commutativity(flow, t, eps, fam)
            rows.append({
                "transform_index": idx,
                "transform_C": _mat(t.C),
                "family": v.family,
                "mode": v.mode,
                "commutes": v.commutes,
                "max_discrepancy": v.max_discrepancy,
                "note": v.note,
            })
    return rows


def _cmd_discretize(args) -> tuple[dict, int]:
    started = time.perf_counter()
    loaded = _load_kind(args.model, "flow")
    flow = loaded.model
    eps = _parse_eps(args.eps)
    analyses = args.analysis or []
    results: dict = {"eps": str(eps)}
    if args.scheme in ("qp", "both"):
        results["qp_map"] = _map_doc(qp_discretize(flow, eps))
    if args.scheme in ("euler", "both"):
        results["euler_map"] = _map_doc(euler_discretize(flow, eps))
    code = EXIT_OK
    if "divergence" in analyses:
        initial = _initial_for(loaded, args)
        if initial is None:
            raise ModelFileError("divergence analysis needs an initial state",
                                 path=loaded.path, field="initial")
        try:
            series = compare_discretizations(flow, eps, initial, args.horizon)
            results["divergence"] = {
                "horizon_time": args.horizon,
                "times": list(series.times),
                "sup_diffs": list(series.sup_diffs),
                "terminal": series.terminal,
            }
        except OrbitEscapedError as err:
            results["divergence"] = {
                "horizon_time": args.horizon,
                "escaped": {"scheme": err.scheme, "step": err.step_index,
                            "note": str(err)},
            }
            code = EXIT_DIVERGED
    if "fixed-point" in analyses:
        rep = check_fixed_point_coincidence(flow, eps)
        results["fixed_point"] = {
            "status": rep.status,
            "reason": rep.reason,
            "fixed_point": list(rep.fixed_point) if rep.fixed_point else None,
            "euler_residual": rep.euler_residual,
            "jacobian_max_diff": rep.jacobian_max_diff,
            "euler_fixes_point": rep.euler_fixes_point
            if rep.status == "ok" else None,
            "jacobians_match": rep.jacobians_match
            if rep.status == "ok" else None,
        }
    if "commutativity" in analyses:
        results["commutativity"] = _commutativity_table(flow, eps)
    inputs = {"model": loaded.path, "kind": "flow", "n": flow.n, "m": flow.m,
              "eps": str(eps), "scheme": args.scheme,
              "analyses": sorted(analyses), "seed": seed_from_env()}
    exact = {"discretized_coefficients_exact": True,
             "commutativity_matrix_checks_exact": "commutativity" in analyses}
    tolerances = {"float_assertions": args.tolerance,
                  "euler_fixed_point": 1e-10, "jacobian_match": 1e-12}
    return _report("discretize", inputs, results, exact, tolerances,
                   started), code


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpmaps",
        description="Quasipolynomial mapping toolkit: reduction, canonical "
                    "forms, class equivalence, simulation and discretization "
                    "analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--tolerance", type=float, default=1e-9,
                       help="tolerance recorded for float assertions "
                            "(default 1e-9)")
        p.add_argument("--out", default=None,
                       help="write the primary output file here")

    p = sub.add_parser("reduce", help="reduce a map to non-redundant form")
    p.add_argument("model")
    p.add_argument("--initial", default=None,
                   help="comma-separated positive decimals")
    add_common(p)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("canonical",
                       help="Lotka-Volterra canonical form of a map")
    p.add_argument("model")
    add_common(p)
    p.set_defaults(func=_cmd_canonical)

    p = sub.add_parser("same-class",
                       help="decide whether two maps are equivalent")
    p.add_argument("model1")
    p.add_argument("model2")
    add_common(p)
    p.set_defaults(func=_cmd_same_class)

    p = sub.add_parser("simulate", help="iterate a map and write a CSV orbit")
    p.add_argument("model")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--initial", default=None)
    add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("discretize",
                       help="discretize a flow and run comparisons")
    p.add_argument("model")
    p.add_argument("--eps", required=True,
                   help="positive rational time step, e.g. 1/50 or 0.02")
    p.add_argument("--scheme", choices=["qp", "euler", "both"], default="both")
    p.add_argument("--analysis", action="append",
                   choices=["divergence", "fixed-point", "commutativity"],
                   help="repeatable analysis selector")
    p.add_argument("--horizon", type=float, default=1.0,
                   help="physical time horizon for divergence analysis")
    p.add_argument("--initial", default=None)
    add_common(p)
    p.set_defaults(func=_cmd_discretize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "simulate" and args.out is None:
        print("qpmaps simulate: --out CSV path is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        report, code = args.func(args)
    except ModelFileError as err:
        print(f"qpmaps: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except _DIVERGENCE_ERRORS as err:
        print(f"qpmaps: divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except _PRECONDITION_ERRORS as err:
        print(f"qpmaps: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    out = args.out if args.command != "simulate" else None
    _emit(report, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
