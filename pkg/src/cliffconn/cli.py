"""Command-line interface.

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blades import Signature
from .representation import (
    RepKind,
    ScalarAlgebraError,
    build_rep,
    classify,
    pattern,
    verify_relations,
)

EMIT_CHOICES = ("json", "csv", "pretty")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CommandOutput:
    code: int
    text: str
    error: str = ""


def _dump(obj) -> str:
    return json.dumps(obj) + "\n"


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _signature(args) -> Signature:
    try:
        return Signature(args.s, args.t)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _no_csv(args) -> None:
    if args.emit == "csv":
        raise UsageError(f"{args.command} has no csv output")


# ---------------------------------------------------------------------------
# subcommands


def cmd_rep(args) -> tuple[int, str]:
    sig = _signature(args)
    if sig.n == 0:
        raise UsageError("Cl(0,0) is the scalar algebra; nothing to represent")
    rep = build_rep(sig, args.kind)
    if args.emit == "json":
        return 0, _dump(rep.to_json())
    names = rep.blade_names()
    if args.emit == "csv":
        rows = [["blade", "row", "col", "value"]]
        for name, m in zip(names, rep.matrices):
            for i, row in enumerate(m.nonzero_rows()):
                for j, v in row:
                    rows.append([name, i, j, str(v)])
        return 0, _csv(rows)
    out = [f"{sig} {rep.kind.value}, k = {rep.k}"]
    for name, m in zip(names, rep.matrices):
        out.append(f"{name}:")
        out.extend("  " + line for line in pattern(m))
    if rep.tensor_basis is not None:
        out.append("tensor basis (outer factor first):")
        for i, m in enumerate(rep.tensor_basis):
            out.append(f"[{i}]")
            out.extend("  " + line for line in pattern(m))
    return 0, "\n".join(out) + "\n"


def cmd_verify(args) -> tuple[int, str]:
    _no_csv(args)
    sig = _signature(args)
    if sig.n == 0:
        raise UsageError("Cl(0,0) is the scalar algebra; nothing to verify")
    kinds = [RepKind(args.kind)] if args.kind else list(RepKind)
    reports = [verify_relations(build_rep(sig, k)) for k in kinds]
    ok = all(r.ok for r in reports)
    if args.emit == "json":
        text = _dump({"ok": ok, "reports": [r.to_json() for r in reports]})
    else:
        lines = []
        for r in reports:
            lines.append(f"{sig} {r.kind.value}: {'ok' if r.ok else f'{len(r.violations)} violations'}")
            lines.extend(f"  {v.relation} {' '.join(v.blades)} {v.detail}".rstrip() for v in r.violations)
        text = "\n".join(lines) + "\n"
    return (0 if ok else 1), text


def cmd_classify(args) -> tuple[int, str]:
    _no_csv(args)
    recipe = classify(_signature(args))
    if args.emit == "json":
        return 0, _dump(recipe.to_json())
    factors = " (x) ".join(str(f) for f in recipe.factors)
    return 0, f"{recipe.sig} = {factors}  [case {recipe.case}]\n"


def cmd_epsilons(args) -> tuple[int, str]:
    from .prolongation import check_sa_identity, epsilon_signs

    sig = _signature(args)
    kind = RepKind(args.kind or RepKind.RIGHT_REGULAR)
    rep = build_rep(sig, kind) if sig.n else build_rep(sig, RepKind.LEFT_REGULAR)
    eps = epsilon_signs(rep)
    report = check_sa_identity(rep, eps)
    code = 0 if report.exact else 1
    if args.emit == "json":
        return code, _dump({"signs": list(eps.signs), "exact_identity": report.exact})
    names = rep.blade_names()
    if args.emit == "csv":
        return code, _csv([["blade", "sign"]] + [[n, e] for n, e in zip(names, eps.signs)])
    lines = [f"{sig} {rep.kind.value}: exact identity {'holds' if report.exact else 'fails'}"]
    lines.extend(f"  {n:>12} {'+' if e > 0 else '-'}1" for n, e in zip(names, eps.signs))
    return code, "\n".join(lines) + "\n"


def cmd_prolong(args) -> tuple[int, str]:
    from .prolongation import GroupSpec, first_prolongation, lie_algebra_basis

    _no_csv(args)
    spec = GroupSpec(_signature(args), args.m, args.flavor)
    g1 = first_prolongation(spec)
    if args.emit == "json":
        out = {"dim_g1": len(g1)}
        if args.basis:
            out["basis"] = [t.to_json() for t in g1]
        return 0, _dump(out)
    g = lie_algebra_basis(spec)
    lines = [
        f"{spec.sig} m = {spec.m} {spec.flavor.value}: N = {spec.N}, dim g = {g.dim}, dim g1 = {len(g1)}"
    ]
    if args.basis:
        n = spec.N
        for idx, t in enumerate(g1):
            terms = [
                f"{t.coeff(a, b, c)}*e{c + 1}(e{a + 1},e{b + 1})"
                for a in range(n)
                for b in range(a, n)
                for c in range(n)
                if t.coeff(a, b, c)
            ]
            lines.append(f"  t{idx + 1} = " + " + ".join(terms))
    return 0, "\n".join(lines) + "\n"


def cmd_sxi(args) -> tuple[int, str]:
    from .prolongation import GroupSpec, standard_one_form, sxi_injectivity_rank, sxi_membership

    _no_csv(args)
    spec = GroupSpec(_signature(args), args.m, "cliffordian")
    members = [sxi_membership(spec, standard_one_form(a, spec.N)) for a in range(spec.N)]
    rank = sxi_injectivity_rank(spec)
    km = spec.k * spec.m
    ok = all(m.ok for m in members) and rank == km
    if args.emit == "json":
        return (0 if ok else 1), _dump(
            {"members": [m.ok for m in members], "injectivity_rank": rank, "km": km, "ok": ok}
        )
    lines = [f"{spec.sig} m = {spec.m}: injectivity rank {rank} of {km}"]
    lines.extend(
        f"  e{a + 1}*: slots in g {m.slots_in_g}, in g1 {m.in_prolongation}" for a, m in enumerate(members)
    )
    return (0 if ok else 1), "\n".join(lines) + "\n"


def cmd_planar_demo(args) -> tuple[int, str]:
    from .planar import (
        CurveState,
        FlatConnection,
        deform,
        integrate_curve,
        off_hull_forcing,
        planarity_report,
        preserves_structure,
        trajectory_csv,
    )
    from .prolongation import GroupSpec, structure_affinors, structure_signs

    sig = _signature(args)
    if args.step <= 0 or args.horizon <= 0:
        raise UsageError("step and horizon must be positive")
    spec = GroupSpec(sig, args.m)
    affinors = structure_affinors(spec)
    signs = structure_signs(spec)
    n = spec.N
    rng = np.random.default_rng(args.seed)
    upsilon = [int(x) for x in rng.integers(-3, 4, n)]
    trivial = FlatConnection.trivial(n)
    deformed = deform(trivial, upsilon, affinors, signs)
    init = CurveState(rng.normal(size=n), rng.normal(size=n))
    geodesic = integrate_curve(trivial, init, args.horizon, args.step)
    planar = planarity_report(geodesic, deformed, affinors)
    forced = integrate_curve(trivial, init, args.horizon, args.step, forcing=off_hull_forcing(rng.normal(size=n), affinors))
    off = planarity_report(forced, deformed, affinors)
    structure_ok = preserves_structure(trivial, affinors) and preserves_structure(deformed, affinors)
    torsion_ok = deformed.torsion() == trivial.torsion()
    ok = structure_ok and torsion_ok and planar.max_residual <= args.tol
    code = 0 if ok else 1
    if args.emit == "csv":
        return code, trajectory_csv(geodesic, planar.residuals)
    summary = {
        "s": sig.s,
        "t": sig.t,
        "m": spec.m,
        "seed": args.seed,
        "upsilon": upsilon,
        "preserves_structure": structure_ok,
        "torsion_unchanged": torsion_ok,
        "geodesic_max_residual": planar.max_residual,
        "forced_min_residual": float(off.residuals.min()),
        "planar": planar.max_residual <= args.tol,
    }
    if args.emit == "json":
        return code, _dump(summary)
    lines = [f"{k}: {v}" for k, v in summary.items()]
    return code, "\n".join(lines) + "\n"


def cmd_report(args) -> tuple[int, str]:
    if args.epsilon_table:
        from .prolongation import epsilon_identity_table

        rows = epsilon_identity_table(args.epsilon_table)
        if args.emit == "json":
            return 0, json.dumps(rows, indent=1) + "\n"
        if args.emit == "csv":
            keys = list(rows[0])
            return 0, _csv([keys] + [[" ".join(map(str, r[k])) if k == "signs" else r[k] for k in keys] for r in rows])
        return 0, "".join(
            f"({r['s']},{r['t']}) signs {r['signs']}: exact {r['exact_identity']}, hull {r['hull_membership']}; "
            f"all +1: exact {r['all_plus_exact_identity']}, hull {r['all_plus_hull_membership']}\n"
            for r in rows
        )

    from .acceptance import run_all

    results = run_all()
    code = 0 if all(r.passed for r in results) else 1
    if args.emit == "json":
        return code, _dump({"passed": code == 0, "criteria": [r.to_json() for r in results]})
    if args.emit == "csv":
        return code, _csv([["criterion", "name", "passed", "detail"]] + [[r.number, r.name, r.passed, r.detail] for r in results])
    return code, "\n".join(r.line() for r in results) + "\n"


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cliffconn", description="Clifford algebra representations, G-structures and planar connections.")
    common = _Parser(add_help=False)
    common.add_argument("--emit", choices=EMIT_CHOICES, default=None)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    sigp = _Parser(add_help=False)
    sigp.add_argument("--s", type=int, required=True, help="number of generators squaring to +E")
    sigp.add_argument("--t", type=int, required=True, help="number of generators squaring to -E")
    kinds = [k.value for k in RepKind]

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("rep", parents=[common, sigp], help="emit a matrix representation")
    p.add_argument("--kind", choices=kinds, default=RepKind.PERIODICITY.value)
    p.set_defaults(func=cmd_rep)

    p = sub.add_parser("verify", parents=[common, sigp], help="check the defining relations")
    p.add_argument("--kind", choices=kinds, default=None, help="default: all constructions")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", parents=[common, sigp], help="tensor decomposition into base algebras")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("epsilons", parents=[common, sigp], help="sign coefficients of the blades")
    p.add_argument("--kind", choices=kinds, default=None, help="default: right-regular")
    p.set_defaults(func=cmd_epsilons)

    p = sub.add_parser("prolong", parents=[common, sigp], help="dimension of the first prolongation")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--flavor", choices=["clifford", "cliffordian"], default="clifford")
    p.add_argument("--basis", action="store_true", help="also emit a basis")
    p.set_defaults(func=cmd_prolong)

    p = sub.add_parser("sxi", parents=[common, sigp], help="check the S-xi elements against the prolongation")
    p.add_argument("--m", type=int, default=1)
    p.set_defaults(func=cmd_sxi)

    p = sub.add_parser("planar-demo", parents=[common, sigp], help="planarity of geodesics under a random deformation")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_planar_demo)

    p = sub.add_parser("report", parents=[common], help="run the acceptance suite")
    p.add_argument(
        "--epsilon-table",
        type=int,
        metavar="MAX_GENERATORS",
        default=None,
        help="emit the sign/identity table up to this many generators instead",
    )
    p.set_defaults(func=cmd_report)
    return parser


def render(argv: Sequence[str]) -> CommandOutput:
    """Run a command and capture its output without touching the streams."""
    try:
        args = build_parser().parse_args(list(argv))
        if args.emit is None:
            args.emit = "pretty" if args.command == "report" and not args.epsilon_table else "json"
        if getattr(args, "m", 1) < 1:
            raise UsageError("--m must be a positive integer")
        code, text = args.func(args)
        return CommandOutput(code, text)
    except ScalarAlgebraError as exc:
        return CommandOutput(2, "", f"error: scalar algebra: {exc}\n")
    except (UsageError, ValueError) as exc:
        return CommandOutput(2, "", f"error: {exc}\n")


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if any(a in ("-h", "--help") for a in argv):
        try:
            build_parser().parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
    result = render(argv)
    if result.error:
        sys.stderr.write(result.error)
    if result.text:
        out = "-"
        for i, a in enumerate(argv):
            if a == "--out" and i + 1 < len(argv):
                out = argv[i + 1]
            elif a.startswith("--out="):
                out = a.split("=", 1)[1]
        if out == "-":
            try:
                sys.stdout.write(result.text)
                sys.stdout.flush()
            except BrokenPipeError:
                sys.stderr.close()
        else:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(result.text)
    return result.code
