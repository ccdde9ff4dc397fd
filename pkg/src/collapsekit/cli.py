"""Batch command-line front end.

Subcommands: decompose, joint, equivalence, instruments, chsh, feasible,
chain, brackets.  Exit codes: 0 success, 1 internal error, 2 input
validation, 3 infeasibility verdict.  Numbers print at 12 significant digits
in both table and JSON output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import chain as chain_mod
from .collapse_product import (
    catalan,
    collapse_effect_tree,
    enumerate_bracketings,
    joint_distribution,
    left_fold_tree,
    reverse_fold_tree,
    right_fold_tree,
)
from .config import DEFAULT, Tolerances
from .equivalence import build_commutative_model, verify_equivalence
from .incompatibility import admits_global_joint, chsh_value
from .instruments import (
    InstrumentModel,
    build_instrument,
    interference_comparison,
    luders_duality_check,
    sequential_probabilities,
)
from .io import DocumentError, load_document
from .measurement import AlgebraicState, Observable, VectorState
from .operator_core import spectral_decompose

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
        return
    for key, value in payload.items():
        if isinstance(value, list) and value and isinstance(value[0], dict):
            if value:
                cols = list(value[0])
                print(f"{key}:")
                print("  " + "\t".join(cols))
                for row in value:
                    print("  " + "\t".join(str(row[c]) for c in cols))
        else:
            print(f"{key}: {value}")


def _tolerances(args) -> Tolerances:
    # Precedence: flag > config file > default.
    tol = DEFAULT
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        tol = tol.with_overrides(
            herm=cfg.get("herm"), psd=cfg.get("psd"),
            num=cfg.get("num"), prob=cfg.get("prob"),
        )
    return tol.with_overrides(
        herm=args.tol_herm, psd=args.tol_psd,
        num=args.tol_num, prob=args.tol_prob,
    )


def _tree_for(name: str, n: int):
    if name == "left":
        return left_fold_tree(n)
    if name == "right":
        return right_fold_tree(n)
    if name == "reverse":
        return reverse_fold_tree(n)
    raise DocumentError(f"unknown tree convention {name!r}")


def _joint_from_args(args, tol):
    observables = [load_document(f, tol, expect="observable")
                   for f in args.observables]
    state = load_document(args.state, tol, expect="state")
    tree = _tree_for(args.tree, len(observables))
    table = collapse_effect_tree(observables, tree, tol)
    return observables, state, joint_distribution(table, state, tol)


def _dist_rows(dist) -> list:
    rows = []
    flat = dist.probabilities.ravel()
    for t, p in zip(dist.tuples(), flat):
        rows.append({"outcomes": ",".join(_fmt(v) for v in t),
                     "probability": _fmt(float(p))})
    return rows


def cmd_decompose(args, tol) -> int:
    obs = load_document(args.file, tol, expect="observable")
    decomp = spectral_decompose(obs.matrix(), args.gap, tol) if args.gap else obs.decomposition
    ranks = [int(round(np.trace(p).real)) for p in decomp.projectors]
    _emit({
        "eigenvalues": [_fmt(v) for v in decomp.eigenvalues],
        "ranks": ranks,
    }, args.format)
    return EXIT_OK


def cmd_joint(args, tol) -> int:
    _, _, dist = _joint_from_args(args, tol)
    _emit({"rows": _dist_rows(dist)}, args.format)
    return EXIT_OK


def cmd_equivalence(args, tol) -> int:
    observables, _, dist = _joint_from_args(args, tol)
    model = build_commutative_model(dist, names=[o.name for o in observables])
    if args.perturb:
        probs = dist.probabilities.copy()
        probs.ravel()[0] += args.perturb
        dist = dataclasses.replace(dist, probabilities=probs)
    report = verify_equivalence(model, dist)
    _emit({
        "dim": model.dim,
        "primed_diagonals": [
            {"observable": model.names[k],
             "diagonal": ",".join(_fmt(v) for v in model.primed_values[k])}
            for k in range(len(model.primed_values))
        ],
        "state_diagonal": ",".join(_fmt(v) for v in model.state_diagonal),
        "max_deviation": _fmt(report.max_deviation),
        "min_polynomial_positivity": _fmt(report.min_polynomial_positivity),
    }, args.format)
    return EXIT_OK


def cmd_instruments(args, tol) -> int:
    a = load_document(args.first, tol, expect="observable")
    b = load_document(args.second, tol, expect="observable")
    psi = load_document(args.vector, tol, expect="vector")
    model = InstrumentModel(
        build_instrument(a, a.n_outcomes + 1, tol),
        build_instrument(b, b.n_outcomes + 1, tol),
    )
    dist = sequential_probabilities(model, psi, tol)
    comparison = interference_comparison(model, psi, tol)
    duality = luders_duality_check(a, b, psi)
    _emit({
        "joint": _dist_rows(dist),
        "interference": [
            {"outcome": _fmt(v), "with_first_measured": _fmt(pm),
             "without_first": _fmt(pu)}
            for v, pm, pu in comparison
        ],
        "luders_duality_max_deviation": _fmt(duality.max_deviation),
    }, args.format)
    return EXIT_OK


def cmd_chsh(args, tol) -> int:
    state = load_document(args.state, tol, expect="state")
    obs = [load_document(f, tol, expect="observable") for f in args.settings]
    value = chsh_value(state, *obs, tol=tol)
    _emit({"chsh_value": _fmt(value)}, args.format)
    return EXIT_OK


def cmd_feasible(args, tol) -> int:
    problem = load_document(args.file, tol, expect="marginal-problem")
    verdict = admits_global_joint(problem, tol=tol)
    if verdict.feasible:
        _emit({
            "verdict": "feasible",
            "joint": _dist_rows(verdict.joint),
        }, args.format)
        return EXIT_OK
    _emit({
        "verdict": "infeasible",
        "violation": _fmt(verdict.violation),
        "certificate": [
            {"constraint": str(label), "coefficient": _fmt(c)}
            for label, c in verdict.certificate
        ],
    }, args.format)
    return EXIT_INFEASIBLE


def cmd_chain(args, tol) -> int:
    spec = load_document(args.file, tol, expect="chain-spec")
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    state = load_document(args.state, tol, expect="state")
    if args.mechanism == "step":
        outcomes = chain_mod.sample_chain_leftfold(spec, state, args.runs, tol)
    else:
        outcomes = chain_mod.sample_chain_tree(spec, state, args.runs, tol)
    if args.emit_records:
        for record in chain_mod.records(outcomes):
            print(record.line())
        return EXIT_OK
    empirical = chain_mod.empirical_distribution(outcomes, spec)
    exact = chain_mod.exact_chain_distribution(spec, state, tol)
    rows = []
    for t, pe, pf in zip(exact.tuples(), exact.probabilities.ravel(),
                         empirical.probabilities.ravel()):
        rows.append({
            "convention": str(spec.convention),
            "outcomes": ",".join(_fmt(v) for v in t),
            "exact": _fmt(float(pe)),
            "empirical": _fmt(float(pf)),
        })
    _emit({"rows": rows}, args.format)
    return EXIT_OK


def cmd_brackets(args, tol) -> int:
    rows = []
    for n in range(1, args.n + 1):
        count = len(enumerate_bracketings(n)) if n <= 12 else catalan(n)
        rows.append({"n": n, "bracketings": count})
    _emit({"rows": rows}, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collapsekit",
        description="Joint probability construction for sequential measurements",
    )
    parser.add_argument("--format", choices=("table", "json"), default="table")
    parser.add_argument("--config", help="JSON file with tolerance overrides")
    parser.add_argument("--tol-herm", type=float, default=None)
    parser.add_argument("--tol-psd", type=float, default=None)
    parser.add_argument("--tol-num", type=float, default=None)
    parser.add_argument("--tol-prob", type=float, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="eigenvalues and projector ranks")
    p.add_argument("file")
    p.add_argument("--gap", type=float, default=None,
                   help="override the degeneracy clustering gap")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("joint", help="collapse-product joint distribution")
    p.add_argument("observables", nargs="+")
    p.add_argument("--state", required=True)
    p.add_argument("--tree", choices=("left", "right", "reverse"), default="left")
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("equivalence", help="commutative no-collapse model")
    p.add_argument("observables", nargs="+")
    p.add_argument("--state", required=True)
    p.add_argument("--tree", choices=("left", "right", "reverse"), default="left")
    p.add_argument("--perturb", type=float, default=None,
                   help="inject a probability error before verification")
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("instruments", help="pointer-model statistics")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--vector", required=True)
    p.set_defaults(func=cmd_instruments)

    p = sub.add_parser("chsh", help="CHSH combination for a bipartite state")
    p.add_argument("settings", nargs=4, metavar="OBSERVABLE",
                   help="A1 A2 B1 B2 (factor observables)")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("feasible", help="global-joint feasibility of contexts")
    p.add_argument("file")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("chain", help="sample a measurement chain")
    p.add_argument("file", help="chain-spec document")
    p.add_argument("--state", required=True)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--mechanism", choices=("step", "table"), default="table")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--emit-records", action="store_true")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("brackets", help="bracketing counts per chain length")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_brackets)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and "COLLAPSEKIT_SEED" in os.environ:
        if hasattr(args, "seed"):
            args.seed = int(os.environ["COLLAPSEKIT_SEED"])
    try:
        tol = _tolerances(args)
        return args.func(args, tol)
    except (DocumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:   # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
