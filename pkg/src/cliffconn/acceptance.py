"""End-to-end acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult` whose ``detail`` is
deterministic (no timings); time budgets only influence ``passed``.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .blades import Signature
from .exact import RationalMatrix
from .planar import (
    CurveState,
    FlatConnection,
    deform,
    deformation_tensor,
    difference_tensor,
    integrate_curve,
    is_symmetric,
    planarity_report,
    preserves_structure,
)
from .prolongation import (
    GroupSpec,
    InconsistentPropagationError,
    epsilon_identity_table,
    epsilon_signs,
    exhaustive_sign_search,
    first_prolongation,
    in_prolongation_span,
    s_xi_element,
    standard_one_form,
    structure_affinors,
    structure_signs,
    sxi_injectivity_rank,
    verify_sxi_membership,
)
from .representation import (
    RepKind,
    build_rep,
    monomial_check,
    periodicity_rep,
    span_witness,
    verify_relations,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  [{self.number}] {self.name}: {self.detail}"

    def to_json(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "detail": self.detail}


def signatures(min_generators: int, max_generators: int) -> list[Signature]:
    return [
        Signature(s, n - s)
        for n in range(min_generators, max_generators + 1)
        for s in range(n, -1, -1)
    ]


def _block(rows: list[list[int]]) -> RationalMatrix:
    return RationalMatrix(rows)


_E4 = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
_I1 = [[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
_I2 = [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
_I3 = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]


def _diag2(b):
    z = [0] * 4
    return [r + z for r in b] + [z + r for r in b]


def _offdiag2(b):
    z = [0] * 4
    return [z + r for r in b] + [[-x for x in r] + z for r in b]


# reference matrices for Cl(3,0) = Cl(0,1) (x) Cl(2,0)
REFERENCE_CL30 = tuple(
    _block(f(b)) for f in (_diag2, _offdiag2) for b in (_E4, _I1, _I2, _I3)
)


def _timed(fn: Callable[[], tuple[bool, str]], budget: float) -> tuple[bool, str]:
    start = time.perf_counter()
    ok, detail = fn()
    within = time.perf_counter() - start < budget
    if not within:
        detail += "; time budget exceeded"
    return ok and within, detail


def relation_suite() -> CriterionResult:
    def run():
        sigs = signatures(1, 5)
        bad = []
        for sig in sigs:
            for kind in RepKind:
                if not verify_relations(build_rep(sig, kind)).ok:
                    bad.append(f"{sig}/{kind.value}")
        detail = f"{len(sigs) * len(RepKind)} representations checked, {len(bad)} with violations"
        if bad:
            detail += ": " + ", ".join(bad)
        return not bad, detail

    ok, detail = _timed(run, 10.0)
    return CriterionResult(1, "relation suite", ok, detail)


def cl30_display() -> CriterionResult:
    rep = periodicity_rep(Signature(3, 0))
    basis = rep.tensor_basis or ()
    mismatched = [i for i, (a, b) in enumerate(zip(basis, REFERENCE_CL30)) if a != b]
    ok = len(basis) == 8 and not mismatched
    detail = f"{8 - len(mismatched) if len(basis) == 8 else 0}/8 matrices match entry-for-entry"
    return CriterionResult(2, "Cl(3,0) bit-exactness", ok, detail)


def span_suite() -> CriterionResult:
    def run():
        sigs = signatures(1, 5)
        bad = []
        for sig in sigs:
            for kind in RepKind:
                rep = build_rep(sig, kind)
                if not monomial_check(rep):
                    bad.append(f"{sig}/{kind.value}: not monomial")
                    continue
                w = span_witness(rep)
                e1 = tuple(Fraction(int(i == 0)) for i in range(rep.k))
                if w.rank != rep.k or w.vector != e1:
                    bad.append(f"{sig}/{kind.value}: rank {w.rank}")
        detail = f"{len(sigs) * len(RepKind)} representations monomial with span rank k at e1" if not bad else "; ".join(bad)
        return not bad, detail

    ok, detail = _timed(run, 5.0)
    return CriterionResult(3, "monomial span suite", ok, detail)


PROLONGATION_CASES = (
    ((2, 0), 1), ((1, 1), 1), ((0, 2), 1), ((3, 0), 1), ((0, 3), 1),
    ((2, 1), 1), ((1, 2), 1), ((0, 4), 1), ((0, 2), 2),
)


def prolongation_vanishing() -> CriterionResult:
    def run():
        dims = {}
        for (s, t), m in PROLONGATION_CASES:
            dims[f"({s},{t}) m={m}"] = len(first_prolongation(GroupSpec(Signature(s, t), m, "clifford")))
        nonzero = {k: v for k, v in dims.items() if v}
        detail = f"dim g1 = 0 in {len(dims) - len(nonzero)}/{len(dims)} cases"
        if nonzero:
            detail += ": nonzero " + json.dumps(nonzero, sort_keys=True)
        return not nonzero, detail

    ok, detail = _timed(run, 60.0)
    return CriterionResult(4, "prolongation vanishing", ok, detail)


def quaternionic_prolongation() -> CriterionResult:
    spec = GroupSpec(Signature(0, 2), 1, "cliffordian")
    g1 = first_prolongation(spec)
    signs = structure_signs(spec)
    elems = [s_xi_element(spec, signs, standard_one_form(a, spec.N)) for a in range(spec.N)]
    inside = all(in_prolongation_span(spec, s) for s in elems)
    rank = sxi_injectivity_rank(spec)
    km = spec.k * spec.m
    ok = len(g1) == km and inside and rank == km
    detail = f"dim g1 = {len(g1)} (km = {km}); S elements in g1: {inside}; their rank = {rank}"
    return CriterionResult(5, "quaternionic prolongation", ok, detail)


SXI_SIGNATURES = ((0, 2), (2, 0), (1, 1), (0, 3))


def sxi_suite() -> CriterionResult:
    parts = []
    ok = True
    for s, t in SXI_SIGNATURES:
        spec = GroupSpec(Signature(s, t), 1, "cliffordian")
        members = all(verify_sxi_membership(spec, standard_one_form(a, spec.N)) for a in range(spec.N))
        rank = sxi_injectivity_rank(spec)
        good = members and rank == spec.k * spec.m
        ok &= good
        parts.append(f"({s},{t}) {'ok' if good else 'FAILED'} rank {rank}")
    return CriterionResult(6, "S-xi membership", ok, "; ".join(parts))


def epsilon_suite() -> CriterionResult:
    failures = []
    sigs = signatures(0, 4)
    for sig in sigs:
        # every construction must propagate consistently; the oracle runs on the structure kind
        kinds = list(RepKind) if sig.n else [RepKind.LEFT_REGULAR]
        for kind in kinds:
            rep = build_rep(sig, kind)
            try:
                eps = epsilon_signs(rep)
            except InconsistentPropagationError as exc:
                failures.append(f"{sig}/{kind.value}: {exc}")
                continue
            if kind is RepKind.RIGHT_REGULAR and eps.signs not in exhaustive_sign_search(rep):
                failures.append(f"{sig}: oracle disagrees")
    expected = {(0, 1): (1, -1), (0, 2): (1, -1, -1, -1)}
    for (s, t), want in expected.items():
        rep = build_rep(Signature(s, t), RepKind.RIGHT_REGULAR)
        found = exhaustive_sign_search(rep)
        if epsilon_signs(rep).signs != want or want not in found:
            failures.append(f"({s},{t}): expected {want}")
    table = epsilon_identity_table(4)
    if not all(row["exact_identity"] for row in table):
        failures.append("identity table has inexact rows")
    detail = f"{len(sigs)} signatures propagated and oracle-confirmed; table of {len(table)} rows"
    if failures:
        detail = "; ".join(failures)
    return CriterionResult(7, "epsilon signs", not failures, detail)


def _random_upsilon(rng: np.random.Generator, n: int) -> list[int]:
    return [int(x) for x in rng.integers(-3, 4, n)]


def connection_class(samples: int = 100, seed: int = 0, step: float = 1e-3, tol: float = 1e-7) -> CriterionResult:
    """Torsion invariance, planarity under deformation and linearity, per signature with m = 2."""
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    sigs = signatures(1, 3)
    for sig in sigs:
        spec = GroupSpec(sig, 2)
        affinors = structure_affinors(spec)
        signs = structure_signs(spec)
        n = spec.N
        trivial = FlatConnection.trivial(n)
        upsilons = [_random_upsilon(rng, n) for _ in range(samples)]

        for ups in upsilons:
            base = FlatConnection(rng.integers(-2, 3, (n, n, n)))
            if deform(base, ups, affinors, signs).torsion() != base.torsion():
                failures.append(f"{sig}: torsion changed")
                break

        deformed = [deform(trivial, ups, affinors, signs) for ups in upsilons]
        if not preserves_structure(trivial, affinors) or not all(
            preserves_structure(c, affinors) for c in deformed
        ):
            failures.append(f"{sig}: connection does not preserve the structure")

        init = CurveState(rng.normal(size=(samples, n)), rng.normal(size=(samples, n)))
        traj = integrate_curve(trivial, init, 1.0, step)
        for i, conn in enumerate(deformed):
            worst = max(worst, planarity_report(traj.curve(i), conn, affinors).max_residual)

        for a, b in zip(upsilons[::2], upsilons[1::2]):
            diff = difference_tensor(deform(trivial, a, affinors, signs), deform(trivial, b, affinors, signs))
            want = deformation_tensor([x - y for x, y in zip(a, b)], affinors, signs)
            if not (diff == want and is_symmetric(diff)):
                failures.append(f"{sig}: linearity fails")
                break
    if worst > tol:
        failures.append(f"planarity residual above {tol:g}")
    detail = (
        f"{len(sigs)} signatures x {samples} deformations: torsion exact, linearity exact, "
        f"max residual {'<=' if worst <= tol else '>'} {tol:g}"
    )
    if failures:
        detail = "; ".join(failures)
    return CriterionResult(8, "connection class", not failures, detail)


def determinism_probe() -> CriterionResult:
    """Cheap stand-in for comparing two full reports: render fixed outputs twice."""
    from .cli import render

    argv_sets = (
        ["rep", "--s", "3", "--t", "0", "--kind", "periodicity", "--emit", "json"],
        ["planar-demo", "--s", "0", "--t", "2", "--seed", "7", "--emit", "csv"],
        ["epsilons", "--s", "0", "--t", "2"],
    )
    same = all(render(argv) == render(argv) for argv in argv_sets)
    detail = f"{len(argv_sets)} commands rendered twice, {'identical' if same else 'different'} output"
    return CriterionResult(9, "determinism", same, detail)


CRITERIA: tuple[Callable[[], CriterionResult], ...] = (
    relation_suite,
    cl30_display,
    span_suite,
    prolongation_vanishing,
    quaternionic_prolongation,
    sxi_suite,
    epsilon_suite,
    connection_class,
    determinism_probe,
)


def run_all() -> list[CriterionResult]:
    return [criterion() for criterion in CRITERIA]
