import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import as_int_array

from cliffconn.blades import Signature, blade_square, canonical_blades
from cliffconn.prolongation import (
    Flavor,
    GroupSpec,
    SignVector,
    SymBilinearMap,
    check_sa_identity,
    epsilon_identity_table,
    epsilon_signs,
    exhaustive_sign_search,
    first_prolongation,
    generator_affinors,
    in_prolongation_span,
    lie_algebra_basis,
    n_unknowns,
    s_xi_element,
    satisfies_prolongation,
    standard_one_form,
    structure_affinors,
    structure_signs,
    sxi_injectivity_rank,
    sxi_membership,
    verify_sxi_membership,
)
from cliffconn.representation import RepKind, build_rep

TABLE_PATH = Path(__file__).resolve().parents[1] / "tables" / "epsilon_identity_table.json"


def sig_id(sig):
    return f"{sig.s}-{sig.t}"


# ---------------------------------------------------------------------------
# independent dense oracle for g and g^(1)


def oracle_lie_algebra(spec):
    """Basis of g as flattened N x N sympy vectors (commutant, plus affinors if Cliffordian)."""
    n = spec.N
    gens = [sympy.Matrix(as_int_array(f)) for f in generator_affinors(spec)]
    symbols = sympy.symbols(f"x0:{n * n}")
    x = sympy.Matrix(n, n, symbols)
    eqs = []
    for f in gens:
        eqs.extend(list(x * f - f * x))
    coeff = sympy.Matrix([[sympy.diff(e, s) for s in symbols] for e in eqs]) if eqs else sympy.zeros(0, n * n)
    basis = coeff.nullspace() if eqs else [sympy.eye(n * n)[:, i] for i in range(n * n)]
    if spec.flavor is Flavor.CLIFFORDIAN:
        basis = basis + [sympy.Matrix(as_int_array(f)).reshape(n * n, 1) for f in structure_affinors(spec)]
        m = sympy.Matrix.hstack(*basis)
        _, pivots = m.rref()
        basis = [basis[i] for i in pivots]
    return basis


def oracle_prolongation_dim(spec):
    """dim g^(1): unknowns t (symmetric) and lambda with each slot map equal to sum lambda_j g_j."""
    n = spec.N
    g = oracle_lie_algebra(spec)
    pairs = [(a, b) for a in range(n) for b in range(a, n)]
    t_index = {}
    for p, (a, b) in enumerate(pairs):
        for c in range(n):
            t_index[(a, b, c)] = t_index[(b, a, c)] = p * n + c
    n_t = len(pairs) * n
    n_unk = n_t + n * len(g)
    rows = []
    for a in range(n):
        # slot map M_a[c][b] = t(e_b, e_a)^c
        for c in range(n):
            for b in range(n):
                row = [0] * n_unk
                row[t_index[(b, a, c)]] += 1
                for j, gj in enumerate(g):
                    row[n_t + a * len(g) + j] -= gj[c * n + b]
                rows.append(row)
    m = sympy.Matrix(rows)
    return n_unk - m.rank()


ORACLE_CASES = [
    (Signature(0, 1), 1, "clifford"),
    (Signature(1, 0), 1, "clifford"),
    (Signature(0, 2), 1, "clifford"),
    (Signature(2, 0), 1, "clifford"),
    (Signature(1, 1), 1, "clifford"),
    (Signature(0, 2), 1, "cliffordian"),
    (Signature(1, 1), 1, "cliffordian"),
    (Signature(0, 1), 2, "clifford"),
    (Signature(0, 0), 2, "clifford"),
]


@pytest.mark.parametrize("sig, m, flavor", ORACLE_CASES, ids=lambda x: str(x))
def test_prolongation_matches_dense_oracle(sig, m, flavor):
    spec = GroupSpec(sig, m, flavor)
    assert lie_algebra_basis(spec).dim == len(oracle_lie_algebra(spec))
    assert len(first_prolongation(spec)) == oracle_prolongation_dim(spec)


@pytest.mark.parametrize(
    "sig, m, flavor, dim_g, dim_g1",
    [
        (Signature(0, 2), 1, "clifford", 4, 0),
        (Signature(1, 1), 1, "clifford", 4, 0),
        (Signature(2, 0), 1, "clifford", 4, 0),
        (Signature(0, 3), 1, "clifford", 8, 0),
        (Signature(2, 1), 1, "clifford", 8, 0),
        (Signature(0, 2), 2, "clifford", 16, 0),
        (Signature(0, 2), 1, "cliffordian", 7, 4),
        (Signature(2, 0), 1, "cliffordian", 7, 4),
        (Signature(1, 1), 1, "cliffordian", 7, 4),
        (Signature(0, 3), 1, "cliffordian", 14, 8),
        (Signature(0, 2), 2, "cliffordian", 19, 8),
        (Signature(0, 0), 2, "clifford", 4, 6),
    ],
    ids=lambda x: str(x),
)
def test_dimensions(sig, m, flavor, dim_g, dim_g1):
    spec = GroupSpec(sig, m, flavor)
    assert lie_algebra_basis(spec).dim == dim_g
    assert len(first_prolongation(spec)) == dim_g1


@pytest.mark.parametrize("sig", [Signature(s, n - s) for n in range(0, 4) for s in range(n, -1, -1)], ids=sig_id)
@pytest.mark.parametrize("m", [1, 2])
def test_lie_algebra_dimension_formula(sig, m):
    # gl(m,O) has dim m^2 k; the Cliffordian extension adds k minus the centre (1 if n even, 2 if odd)
    clifford = GroupSpec(sig, m, "clifford")
    cliffordian = GroupSpec(sig, m, "cliffordian")
    centre = 1 if sig.n % 2 == 0 else 2
    assert lie_algebra_basis(clifford).dim == m * m * sig.k
    assert lie_algebra_basis(cliffordian).dim == m * m * sig.k + sig.k - centre


def test_gl_control_case_is_full_symmetric_space():
    spec = GroupSpec(Signature(0, 0), 3)
    n = spec.N
    assert len(first_prolongation(spec)) == n * n * (n + 1) // 2 == n_unknowns(n)


def test_left_convention_also_vanishes():
    spec = GroupSpec(Signature(0, 2), 1, "clifford", convention="left")
    assert lie_algebra_basis(spec).dim == 4
    assert first_prolongation(spec) == ()
    assert len(first_prolongation(GroupSpec(Signature(0, 2), 1, "cliffordian", convention="left"))) == 4


def test_group_spec_validation():
    with pytest.raises(ValueError):
        GroupSpec(Signature(0, 2), 0)
    with pytest.raises(ValueError):
        GroupSpec(Signature(0, 2), 1, "quaternionic")
    with pytest.raises(ValueError):
        GroupSpec(Signature(0, 2), 1, convention="middle")


def test_prolongation_basis_elements_are_members():
    spec = GroupSpec(Signature(0, 2), 1, "cliffordian")
    basis = first_prolongation(spec)
    for t in basis:
        assert satisfies_prolongation(spec, t)
        assert in_prolongation_span(spec, t)
    assert not in_prolongation_span(spec, SymBilinearMap.from_unknowns({0: Fraction(1)}, spec.N))


def test_non_member_fails_direct_check():
    spec = GroupSpec(Signature(0, 1), 1)
    t = SymBilinearMap.from_unknowns({0: Fraction(1)}, spec.N)
    assert not satisfies_prolongation(spec, t)


# ---------------------------------------------------------------------------
# symmetric bilinear maps


def test_sym_bilinear_map_round_trip():
    n = 3
    t = SymBilinearMap.from_unknowns({0: Fraction(2), 5: Fraction(-1), 11: Fraction(1, 3)}, n)
    assert SymBilinearMap.from_unknowns(t.unknown_vector(), n) == t
    x, y = [1, 2, 0], [0, 1, -1]
    assert t(x, y) == t(y, x)
    blob = t.to_json()
    assert blob["dim"] == 3 and len(blob["entries"]) == 27
    assert (t + t).coefficients == t.scale(2).coefficients
    assert (t - t).is_zero()


def test_sym_bilinear_map_rejects_asymmetric():
    coeffs = [0] * 8
    coeffs[(0 * 2 + 1) * 2 + 0] = 1
    with pytest.raises(ValueError):
        SymBilinearMap(2, coeffs)


def test_slot_matrix_convention():
    n = 2
    coeffs = [Fraction(0)] * 8
    # t(e0, e1) = t(e1, e0) = 3 e1
    coeffs[(0 * n + 1) * n + 1] = Fraction(3)
    coeffs[(1 * n + 0) * n + 1] = Fraction(3)
    t = SymBilinearMap(n, coeffs)
    m = t.slot_matrix(1)
    assert m.col(0) == (0, 3)
    assert m.col(1) == (0, 0)


# ---------------------------------------------------------------------------
# sign coefficients


SIGN_SIGS = [Signature(s, n - s) for n in range(1, 5) for s in range(n, -1, -1)]


def test_reported_sign_values():
    assert epsilon_signs(build_rep(Signature(0, 1), RepKind.RIGHT_REGULAR)).signs == (1, -1)
    assert epsilon_signs(build_rep(Signature(0, 2), RepKind.RIGHT_REGULAR)).signs == (1, -1, -1, -1)
    assert exhaustive_sign_search(build_rep(Signature(0, 1), RepKind.RIGHT_REGULAR)) == [(1, -1), (-1, 1)]


@pytest.mark.parametrize("sig", SIGN_SIGS[:9], ids=sig_id)
@pytest.mark.parametrize("kind", list(RepKind), ids=lambda k: k.value)
def test_signs_agree_with_exhaustive_search(sig, kind):
    rep = build_rep(sig, kind)
    eps = epsilon_signs(rep)
    found = exhaustive_sign_search(rep)
    # unique up to a global sign
    assert sorted(found) == sorted([eps.signs, tuple(-x for x in eps.signs)])


@pytest.mark.parametrize("sig", SIGN_SIGS, ids=sig_id)
def test_signs_are_blade_squares(sig):
    eps = epsilon_signs(build_rep(sig, RepKind.PERIODICITY))
    assert eps.signs == tuple(blade_square(b, sig) for b in canonical_blades(sig))


def _numeric_identity_gap(rep, signs, rng):
    """max |S(GX, Y) - G S(X, Y)| for S(X, Y) = sum eps_i xi(F_i X) F_i Y, dense integer arithmetic."""
    mats = [as_int_array(m) for m in rep.matrices]
    k = len(mats)
    gap = 0
    for g in mats[1 : rep.sig.n + 1]:
        for _ in range(3):
            xi, x, y = (rng.integers(-3, 4, k) for _ in range(3))

            def s(u, v):
                return sum(e * (xi @ (f @ u)) * (f @ v) for e, f in zip(signs, mats))

            gap = max(gap, int(np.abs(s(g @ x, y) - g @ s(x, y)).max()))
    return gap


@pytest.mark.parametrize("sig", SIGN_SIGS, ids=sig_id)
def test_exact_identity_against_dense_oracle(sig):
    rng = np.random.default_rng(5)
    rep = build_rep(sig, RepKind.RIGHT_REGULAR)
    eps = epsilon_signs(rep)
    report = check_sa_identity(rep, eps)
    assert report.exact and report.hull
    assert _numeric_identity_gap(rep, eps.signs, rng) == 0


@pytest.mark.parametrize("sig", [Signature(0, 1), Signature(0, 2), Signature(2, 1)], ids=sig_id)
def test_all_plus_signs_fail_exactly(sig):
    rep = build_rep(sig, RepKind.RIGHT_REGULAR)
    plain = (1,) * rep.k
    report = check_sa_identity(rep, plain)
    assert not report.exact
    assert report.hull
    assert _numeric_identity_gap(rep, plain, np.random.default_rng(0)) > 0


def test_all_plus_defect_count_quaternions():
    report = check_sa_identity(build_rep(Signature(0, 2), RepKind.RIGHT_REGULAR), (1, 1, 1, 1))
    assert [g.defect_terms for g in report.generators] == [2, 2]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SIGN_SIGS[:9]), st.data())
def test_random_wrong_signs_fail(sig, data):
    rep = build_rep(sig, RepKind.RIGHT_REGULAR)
    eps = epsilon_signs(rep).signs
    signs = tuple(data.draw(st.sampled_from([1, -1])) for _ in range(rep.k))
    report = check_sa_identity(rep, signs)
    assert report.exact == (signs in (eps, tuple(-x for x in eps)))


def test_sign_vector_validation():
    with pytest.raises(ValueError):
        SignVector((1, 0))
    with pytest.raises(ValueError):
        SignVector((-1, 1))
    with pytest.raises(ValueError):
        check_sa_identity(build_rep(Signature(0, 1), RepKind.RIGHT_REGULAR), (1,))


def test_identity_table_matches_committed_file():
    rows = epsilon_identity_table(4)
    assert len(rows) == 15
    assert all(r["exact_identity"] and r["hull_membership"] for r in rows)
    assert json.loads(TABLE_PATH.read_text()) == rows


# ---------------------------------------------------------------------------
# the S^xi family


@pytest.mark.parametrize("sig", [Signature(0, 2), Signature(2, 0), Signature(1, 1), Signature(0, 3)], ids=sig_id)
def test_sxi_membership_and_injectivity(sig):
    spec = GroupSpec(sig, 1, "cliffordian")
    for a in range(spec.N):
        result = sxi_membership(spec, standard_one_form(a, spec.N))
        assert result.slots_in_g and result.in_prolongation
    assert sxi_injectivity_rank(spec) == spec.k * spec.m


def test_sxi_with_m_two():
    spec = GroupSpec(Signature(0, 2), 2, "cliffordian")
    assert all(verify_sxi_membership(spec, standard_one_form(a, spec.N)) for a in range(spec.N))
    assert sxi_injectivity_rank(spec) == spec.N == len(first_prolongation(spec))


def test_sxi_spans_quaternionic_prolongation():
    spec = GroupSpec(Signature(0, 2), 1, "cliffordian")
    assert sxi_injectivity_rank(spec) == len(first_prolongation(spec)) == 4


def test_sxi_is_linear_in_the_one_form():
    spec = GroupSpec(Signature(1, 1), 1, "cliffordian")
    signs = structure_signs(spec)
    xi = [1, -2, 0, 3]
    total = s_xi_element(spec, signs, standard_one_form(0, 4)).scale(1)
    total = total - s_xi_element(spec, signs, standard_one_form(1, 4)).scale(2)
    total = total + s_xi_element(spec, signs, standard_one_form(3, 4)).scale(3)
    assert s_xi_element(spec, signs, xi) == total


def test_sxi_wrong_signs_leave_prolongation():
    spec = GroupSpec(Signature(0, 2), 1, "cliffordian")
    t = s_xi_element(spec, (1, 1, 1, 1), standard_one_form(0, 4))
    assert not in_prolongation_span(spec, t)


def test_sxi_requires_cliffordian():
    with pytest.raises(ValueError):
        sxi_membership(GroupSpec(Signature(0, 2), 1, "clifford"), standard_one_form(0, 4))
    with pytest.raises(ValueError):
        s_xi_element(GroupSpec(Signature(0, 2), 1, "cliffordian"), (1, -1, -1, -1), [1, 0])
