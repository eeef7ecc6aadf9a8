"""Lie algebras of almost Clifford(ian) structures and their first prolongations.

The flat model is ``V = O^m`` with ``O = Cl(s, t)``, so ``N = k m``.  The
structure affinors are block-diagonal copies of the right regular
representation; ``gl(m, O)`` is their commutant, and the Cliffordian
algebra adds the span of the affinors themselves (``gl(1, O)`` acting
blockwise from the right).

All computations are exact.  Large linear systems are assembled as sparse
rows and solved with :class:`~cliffconn.exact.RowReducer`.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Mapping, Sequence

from .blades import Signature, canonical_blades
from .exact import RationalMatrix, RowReducer, SparseRow, kron, rank, sparse_nullspace
from .representation import RepSet, left_regular_rep, right_regular_rep


class Flavor(str, Enum):
    CLIFFORD = "clifford"
    CLIFFORDIAN = "cliffordian"


class InconsistentPropagationError(RuntimeError):
    """Two factorizations of a blade forced opposite signs."""


@dataclass(frozen=True)
class GroupSpec:
    sig: Signature
    m: int = 1
    flavor: Flavor = Flavor.CLIFFORD
    # "right": affinors are right multiplications and gl(m, O) acts on the left
    convention: str = "right"

    def __post_init__(self) -> None:
        object.__setattr__(self, "flavor", Flavor(self.flavor))
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.convention not in ("right", "left"):
            raise ValueError("convention must be 'right' or 'left'")

    @property
    def k(self) -> int:
        return self.sig.k

    @property
    def N(self) -> int:
        return self.sig.k * self.m


def affinor_rep(spec: GroupSpec) -> RepSet:
    return right_regular_rep(spec.sig) if spec.convention == "right" else left_regular_rep(spec.sig)


@lru_cache(maxsize=None)
def structure_affinors(spec: GroupSpec) -> tuple[RationalMatrix, ...]:
    """The k affinors F_i on V = O^m, in canonical blade order."""
    ident = RationalMatrix.identity(spec.m)
    return tuple(kron(ident, f) for f in affinor_rep(spec).matrices)


def generator_affinors(spec: GroupSpec) -> tuple[RationalMatrix, ...]:
    return structure_affinors(spec)[1 : spec.sig.n + 1]


def _vec(m: RationalMatrix) -> SparseRow:
    n = m.cols
    return {i * n + j: v for i, row in enumerate(m.nonzero_rows()) for j, v in row}


def _unvec(v: Mapping[int, Fraction], n: int) -> RationalMatrix:
    return RationalMatrix.from_sparse(n, n, {divmod(idx, n): x for idx, x in v.items()})


def _commutant_rows(generators: Sequence[RationalMatrix], n: int) -> list[SparseRow]:
    """Rows of the linear system [B, G] = 0 in the entries of B (row-major)."""
    rows = []
    for g in generators:
        g_cols = g.T.nonzero_rows()
        g_rows = g.nonzero_rows()
        for c in range(n):
            for b in range(n):
                row: dict[int, Fraction] = defaultdict(Fraction)
                for d, v in g_cols[b]:
                    row[c * n + d] += v
                for d, v in g_rows[c]:
                    row[d * n + b] -= v
                row = {i: x for i, x in row.items() if x}
                if row:
                    rows.append(row)
    return rows


@dataclass(frozen=True)
class LieAlgebraBasis:
    spec: GroupSpec
    basis: tuple[RationalMatrix, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reducer(self) -> RowReducer:
        red = RowReducer(self.spec.N ** 2)
        for b in self.basis:
            red.add(_vec(b))
        return red

    def contains(self, m: RationalMatrix) -> bool:
        return _g_reducer(self.spec).contains(_vec(m))


@lru_cache(maxsize=None)
def lie_algebra_basis(spec: GroupSpec) -> LieAlgebraBasis:
    """Exact basis of gl(m, O), or of gl(m, O) + gl(1, O) for the Cliffordian flavor."""
    n = spec.N
    rows = _commutant_rows(generator_affinors(spec), n)
    basis = [_unvec(v, n) for v in sparse_nullspace(rows, n * n)]
    if spec.flavor is Flavor.CLIFFORDIAN:
        red = RowReducer(n * n)
        for b in basis:
            red.add(_vec(b))
        # the overlap with the commutant (the centre of O) is dropped here
        for f in structure_affinors(spec):
            if red.add(_vec(f)):
                basis.append(f)
    return LieAlgebraBasis(spec, tuple(basis))


@lru_cache(maxsize=None)
def _g_reducer(spec: GroupSpec) -> RowReducer:
    return lie_algebra_basis(spec).reducer()


# ---------------------------------------------------------------------------
# symmetric bilinear maps


def _pair_index(a: int, b: int, n: int) -> int:
    if a > b:
        a, b = b, a
    # position of (a, b), a <= b, in row-major upper-triangular order
    return a * n - a * (a - 1) // 2 + (b - a)


def _unknown(a: int, b: int, c: int, n: int) -> int:
    return _pair_index(a, b, n) * n + c


def n_unknowns(n: int) -> int:
    return n * (n + 1) // 2 * n


@dataclass(frozen=True)
class SymBilinearMap:
    """Symmetric bilinear ``t: V x V -> V`` with ``t(e_a, e_b) = sum_c t[a][b][c] e_c``.

    ``coefficients`` is flat with ``t[a][b][c]`` at ``(a*N + b)*N + c``.
    """

    dim: int
    coefficients: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        n = self.dim
        coeffs = tuple(Fraction(x) for x in self.coefficients)
        if len(coeffs) != n ** 3:
            raise ValueError(f"expected {n ** 3} coefficients, got {len(coeffs)}")
        for a in range(n):
            for b in range(a + 1, n):
                if coeffs[(a * n + b) * n : (a * n + b + 1) * n] != coeffs[(b * n + a) * n : (b * n + a + 1) * n]:
                    raise ValueError(f"not symmetric in slots ({a}, {b})")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def zero(cls, n: int) -> "SymBilinearMap":
        return cls(n, (Fraction(0),) * n ** 3)

    @classmethod
    def from_unknowns(cls, vec: Mapping[int, Fraction], n: int) -> "SymBilinearMap":
        coeffs = [Fraction(0)] * n ** 3
        for a in range(n):
            for b in range(a, n):
                base = _pair_index(a, b, n) * n
                for c in range(n):
                    v = vec.get(base + c)
                    if v:
                        coeffs[(a * n + b) * n + c] = v
                        coeffs[(b * n + a) * n + c] = v
        return cls(n, tuple(coeffs))

    def coeff(self, a: int, b: int, c: int) -> Fraction:
        n = self.dim
        return self.coefficients[(a * n + b) * n + c]

    def unknown_vector(self) -> SparseRow:
        n = self.dim
        out = {}
        for a in range(n):
            for b in range(a, n):
                for c in range(n):
                    v = self.coefficients[(a * n + b) * n + c]
                    if v:
                        out[_unknown(a, b, c, n)] = v
        return out

    def __call__(self, x: Sequence, y: Sequence) -> tuple[Fraction, ...]:
        n = self.dim
        out = [Fraction(0)] * n
        for a in range(n):
            if not x[a]:
                continue
            for b in range(n):
                if not y[b]:
                    continue
                w = x[a] * y[b]
                base = (a * n + b) * n
                for c in range(n):
                    out[c] += w * self.coefficients[base + c]
        return tuple(out)

    def slot_matrix(self, a: int) -> RationalMatrix:
        """Matrix of ``v -> t(v, e_a)``."""
        n = self.dim
        return RationalMatrix(
            [[self.coefficients[(b * n + a) * n + c] for b in range(n)] for c in range(n)],
            rows=n,
            cols=n,
        )

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def __add__(self, other: "SymBilinearMap") -> "SymBilinearMap":
        return SymBilinearMap(self.dim, tuple(x + y for x, y in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "SymBilinearMap") -> "SymBilinearMap":
        return SymBilinearMap(self.dim, tuple(x - y for x, y in zip(self.coefficients, other.coefficients)))

    def scale(self, factor) -> "SymBilinearMap":
        f = Fraction(factor)
        return SymBilinearMap(self.dim, tuple(f * x for x in self.coefficients))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "index_legend": "entries[(a*N + b)*N + c] = coefficient of e_c in t(e_a, e_b)",
            "entries": [[str(x.numerator), str(x.denominator)] for x in self.coefficients],
        }


@lru_cache(maxsize=None)
def annihilator(spec: GroupSpec) -> tuple[SparseRow, ...]:
    """Linear functionals on gl(V) whose common kernel is exactly span(g)."""
    n = spec.N
    return tuple(sparse_nullspace((_vec(b) for b in lie_algebra_basis(spec).basis), n * n))


@lru_cache(maxsize=None)
def _prolongation_reducer(spec: GroupSpec) -> RowReducer:
    n = spec.N
    red = RowReducer(n_unknowns(n))
    for a in range(n):
        for w in annihilator(spec):
            row: dict[int, Fraction] = {}
            for idx, val in w.items():
                c, b = divmod(idx, n)
                u = _unknown(a, b, c, n)
                nv = row.get(u, 0) + val
                if nv:
                    row[u] = nv
                else:
                    row.pop(u, None)
            if row:
                red.add(row)
    return red


def first_prolongation(g: LieAlgebraBasis | GroupSpec) -> tuple[SymBilinearMap, ...]:
    """Exact basis of g^(1); empty when the prolongation vanishes.

    ``t`` belongs to g^(1) iff every slot map ``v -> t(v, e_a)`` is killed by
    all functionals of :func:`annihilator`; the unknowns are ``t[a][b][c]``
    with ``a <= b``.
    """
    spec = g.spec if isinstance(g, LieAlgebraBasis) else g
    return _first_prolongation(spec)


@lru_cache(maxsize=None)
def _first_prolongation(spec: GroupSpec) -> tuple[SymBilinearMap, ...]:
    n = spec.N
    return tuple(SymBilinearMap.from_unknowns(v, n) for v in _prolongation_reducer(spec).nullspace())


def in_prolongation_span(spec: GroupSpec, t: SymBilinearMap) -> bool:
    red = RowReducer(n_unknowns(spec.N))
    for b in first_prolongation(spec):
        red.add(b.unknown_vector())
    return red.contains(t.unknown_vector())


def satisfies_prolongation(spec: GroupSpec, t: SymBilinearMap) -> bool:
    """Directly check that every slot map of ``t`` lies in g."""
    return all(lie_algebra_basis(spec).contains(t.slot_matrix(a)) for a in range(spec.N))


# ---------------------------------------------------------------------------
# sign coefficients


@dataclass(frozen=True)
class SignVector:
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        signs = tuple(int(x) for x in self.signs)
        if any(x not in (1, -1) for x in signs):
            raise ValueError("signs must be +1 or -1")
        if signs and signs[0] != 1:
            raise ValueError("the unit blade carries sign +1")
        object.__setattr__(self, "signs", signs)

    def __len__(self) -> int:
        return len(self.signs)

    def __getitem__(self, i: int) -> int:
        return self.signs[i]


class _MatrixOps:
    """Multiplication and +-lookup for a set of rep matrices.

    Monomial matrices are handled as signed permutations.
    """

    def __init__(self, matrices: Sequence[RationalMatrix]):
        from .representation import _perm_mul, _signed_perm

        perms = [_signed_perm(m) for m in matrices]
        if all(p is not None for p in perms):
            self.items = perms
            self.mul = _perm_mul
            self.neg = lambda p: tuple((r, -s) for r, s in p)
        else:
            self.items = list(matrices)
            self.mul = lambda a, b: a @ b
            self.neg = lambda a: -a
        self.lookup = {}
        for i, it in enumerate(self.items):
            self.lookup.setdefault(it, (i, 1))
            self.lookup.setdefault(self.neg(it), (i, -1))

    def signed_index(self, item) -> tuple[int, int] | None:
        return self.lookup.get(item)


def _sandwich_sign(ops: _MatrixOps, g: int, f: int) -> int:
    """``s`` with ``G F G = s F``."""
    gfg = ops.mul(ops.mul(ops.items[g], ops.items[f]), ops.items[g])
    found = ops.signed_index(gfg)
    if found is None or found[0] != f:
        raise InconsistentPropagationError("G F G is not a signed multiple of F")
    return found[1]


def epsilon_signs(rep: RepSet) -> SignVector:
    """Sign coefficients assigned grade by grade.

    ``E`` gets +1.  A blade ``F`` of grade v+1 is reached from each of its
    grade-v factors ``F'`` by one generator ``G``; its sign is that of
    ``F'`` times ``s`` where ``G F G = s F``.  All factorizations must agree.
    """
    sig = rep.sig
    blades = canonical_blades(sig)
    pos = {b: i for i, b in enumerate(blades)}
    ops = _MatrixOps(rep.matrices)
    eps = {0: 1}
    for idx, blade in enumerate(blades[1:], start=1):
        votes = set()
        for g in blade.generators:
            parent = type(blade)(tuple(x for x in blade.generators if x != g))
            votes.add(eps[pos[parent]] * _sandwich_sign(ops, g, idx))
        if len(votes) != 1:
            raise InconsistentPropagationError(f"blade {blade.name(sig)} receives both signs")
        eps[idx] = votes.pop()
    return SignVector(tuple(eps[i] for i in range(len(blades))))


@dataclass(frozen=True)
class GeneratorIdentity:
    generator: str
    exact: bool
    hull: bool
    defect_terms: int


@dataclass(frozen=True)
class IdentityReport:
    sig: Signature
    signs: tuple[int, ...]
    generators: tuple[GeneratorIdentity, ...]

    @property
    def exact(self) -> bool:
        return all(g.exact for g in self.generators)

    @property
    def hull(self) -> bool:
        return all(g.hull for g in self.generators)


def _reindex_terms(ops: _MatrixOps, g: int):
    """Coefficient keys of sum eps_i (F_i G) (x) F_i and sum eps_i F_i (x) (G F_i)."""
    lhs, rhs = [], []
    for i, f in enumerate(ops.items):
        left = ops.signed_index(ops.mul(f, ops.items[g]))
        right = ops.signed_index(ops.mul(ops.items[g], f))
        lhs.append(None if left is None else ((left[0], i), i, left[1]))
        rhs.append(None if right is None else ((i, right[0]), i, right[1]))
    return lhs, rhs


def _defect(lhs, rhs, signs: Sequence[int]) -> dict | None:
    acc: dict[tuple[int, int], int] = defaultdict(int)
    for term in lhs:
        if term is None:
            return None
        key, i, s = term
        acc[key] += signs[i] * s
    for term in rhs:
        if term is None:
            return None
        key, i, s = term
        acc[key] -= signs[i] * s
    return {key: v for key, v in acc.items() if v}


def _probes(k: int) -> list[tuple[list[Fraction], list[Fraction]]]:
    out = []
    for p in range(2):
        x = [Fraction(((3 * i + 5 * p + 1) % 7) - 3) for i in range(k)]
        a = [Fraction(((5 * i + 2 * p + 3) % 11) - 5) for i in range(k)]
        out.append((x, a))
    return out


def _hull_defect_ok(rep: RepSet, g: int, signs: Sequence[int]) -> bool:
    """Whether ``Y -> S^A(G X, Y) - G S^A(X, Y)`` lies in span{F_l} for probe (A, X)."""
    mats = rep.matrices
    k = mats[0].rows
    G = mats[g]
    span = [list(m.flat()) for m in mats]
    base_rank = rank(RationalMatrix(span))
    for x, a in _probes(k):
        gx = [sum((v * x[j] for j, v in row), Fraction(0)) for row in G.nonzero_rows()]
        op = RationalMatrix.zeros(k)
        for e, f in zip(signs, mats):
            fgx = [sum((v * gx[j] for j, v in row), Fraction(0)) for row in f.nonzero_rows()]
            fx = [sum((v * x[j] for j, v in row), Fraction(0)) for row in f.nonzero_rows()]
            c1 = e * sum((ai * yi for ai, yi in zip(a, fgx)), Fraction(0))
            c2 = e * sum((ai * yi for ai, yi in zip(a, fx)), Fraction(0))
            op = op + f.scale(c1) - (G @ f).scale(c2)
        if rank(RationalMatrix(span + [list(op.flat())])) != base_rank:
            return False
    return True


def check_sa_identity(rep: RepSet, eps: SignVector | Sequence[int]) -> IdentityReport:
    """Check ``S^A(G X, Y) = G S^A(X, Y)`` for all A, X, Y and every generator G.

    The exact level compares ``sum eps_i (F_i G) (x) F_i`` with
    ``sum eps_i F_i (x) (G F_i)`` coefficient by coefficient after
    rewriting each product as a signed rep matrix.  The hull level asks
    only that, for fixed A and X, the defect be a combination of the F_l.
    """
    signs = tuple(eps.signs if isinstance(eps, SignVector) else eps)
    if len(signs) != len(rep.matrices) or any(s not in (1, -1) for s in signs):
        raise ValueError("need one +-1 sign per rep matrix")
    sig = rep.sig
    ops = _MatrixOps(rep.matrices)
    results = []
    for g in range(1, sig.n + 1):
        lhs, rhs = _reindex_terms(ops, g)
        defect = _defect(lhs, rhs, signs)
        exact = defect is not None and not defect
        hull = True if exact else _hull_defect_ok(rep, g, signs)
        results.append(
            GeneratorIdentity(sig.generator_name(g), exact, hull, -1 if defect is None else len(defect))
        )
    return IdentityReport(sig, signs, tuple(results))


def exhaustive_sign_search(rep: RepSet) -> list[tuple[int, ...]]:
    """Every vector in {+1,-1}^k for which the exact identity holds.

    Brute force over all 2^k candidates; the oracle for :func:`epsilon_signs`.
    """
    ops = _MatrixOps(rep.matrices)
    tables = [_reindex_terms(ops, g) for g in range(1, rep.sig.n + 1)]
    found = []
    for cand in product((1, -1), repeat=len(rep.matrices)):
        for lhs, rhs in tables:
            defect = _defect(lhs, rhs, cand)
            if defect is None or defect:
                break
        else:
            found.append(cand)
    return found


# ---------------------------------------------------------------------------
# the S^xi elements


def _as_fractions(xi: Sequence, n: int) -> tuple[Fraction, ...]:
    if len(xi) != n:
        raise ValueError(f"one-form must have {n} components, got {len(xi)}")
    return tuple(Fraction(x) for x in xi)


def covector_times(xi: Sequence[Fraction], f: RationalMatrix) -> list[Fraction]:
    """Row vector ``xi . F`` (the one-form ``X -> xi(F X)``)."""
    out = [Fraction(0)] * f.cols
    for d, row in enumerate(f.nonzero_rows()):
        if xi[d]:
            for a, v in row:
                out[a] += xi[d] * v
    return out


def s_xi_element(
    spec: GroupSpec,
    eps: SignVector | Sequence[int],
    xi: Sequence,
    affinors: Sequence[RationalMatrix] | None = None,
) -> SymBilinearMap:
    """``S(X, Y) = sum_i eps_i (xi(F_i X) F_i Y + xi(F_i Y) F_i X)``."""
    n = spec.N
    xi = _as_fractions(xi, n)
    affinors = structure_affinors(spec) if affinors is None else tuple(affinors)
    signs = eps.signs if isinstance(eps, SignVector) else tuple(eps)
    if len(signs) != len(affinors):
        raise ValueError("one sign per affinor required")
    coeffs = [Fraction(0)] * n ** 3
    for e, f in zip(signs, affinors):
        u = covector_times(xi, f)
        f_cols = f.T.nonzero_rows()
        for a in range(n):
            if not u[a]:
                continue
            w = e * u[a]
            for b in range(n):
                for c, v in f_cols[b]:
                    coeffs[(a * n + b) * n + c] += w * v
                    coeffs[(b * n + a) * n + c] += w * v
    return SymBilinearMap(n, tuple(coeffs))


@lru_cache(maxsize=None)
def structure_signs(spec: GroupSpec) -> SignVector:
    return epsilon_signs(affinor_rep(spec))


@dataclass(frozen=True)
class SxiMembership:
    slots_in_g: bool
    in_prolongation: bool

    @property
    def ok(self) -> bool:
        return self.slots_in_g and self.in_prolongation


def sxi_membership(spec: GroupSpec, xi: Sequence) -> SxiMembership:
    if spec.flavor is not Flavor.CLIFFORDIAN:
        raise ValueError("S^xi elements are checked against the Cliffordian algebra")
    s = s_xi_element(spec, structure_signs(spec), xi)
    return SxiMembership(satisfies_prolongation(spec, s), in_prolongation_span(spec, s))


def verify_sxi_membership(spec: GroupSpec, xi: Sequence) -> bool:
    """True iff S^xi lies in span(g^(1)) and each of its slot maps lies in g."""
    return sxi_membership(spec, xi).ok


def standard_one_form(a: int, n: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(i == a)) for i in range(n))


def sxi_injectivity_rank(spec: GroupSpec) -> int:
    """Rank of ``xi -> S^xi`` evaluated on the N standard one-forms."""
    n = spec.N
    red = RowReducer(n_unknowns(n))
    signs = structure_signs(spec)
    for a in range(n):
        red.add(s_xi_element(spec, signs, standard_one_form(a, n)).unknown_vector())
    return red.rank


def epsilon_identity_table(max_generators: int = 4, kind: str = "right-regular") -> list[dict]:
    """Per signature: propagated signs and the exact / hull status of the identity."""
    from .representation import build_rep

    rows = []
    for n in range(0, max_generators + 1):
        for s in range(n, -1, -1):
            sig = Signature(s, n - s)
            rep = build_rep(sig, kind) if n else left_regular_rep(sig)
            eps = epsilon_signs(rep)
            report = check_sa_identity(rep, eps)
            # baseline: every sign +1
            plain = check_sa_identity(rep, (1,) * len(rep.matrices))
            rows.append(
                {
                    "s": sig.s,
                    "t": sig.t,
                    "signs": list(eps.signs),
                    "exact_identity": report.exact,
                    "hull_membership": report.hull,
                    "all_plus_exact_identity": plain.exact,
                    "all_plus_hull_membership": plain.hull,
                }
            )
    return rows
