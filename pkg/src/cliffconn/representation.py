"""Matrix representations of Cl(s, t) on R^k, k = 2^(s+t).

Three constructions are provided:

* the left regular representation: blade ``i`` acts by left multiplication
  on the blade basis (a homomorphism);
* the right regular representation: right multiplication (an
  anti-homomorphism, commuting with every left multiplication);
* the periodicity representation: Kronecker products of the small base
  algebras Cl(1,0), Cl(0,1), Cl(2,0), Cl(0,2), Cl(1,1), following the
  tensor decompositions returned by :func:`classify`.

Every :class:`RepSet` lists one k x k matrix per blade, in canonical blade
order, so ``matrices[0]`` is the identity.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .blades import Signature, canonical_blades, product_table
from .exact import RationalMatrix, kron, rank


class RepKind(str, Enum):
    LEFT_REGULAR = "left-regular"
    RIGHT_REGULAR = "right-regular"
    PERIODICITY = "periodicity"


class ScalarAlgebraError(ValueError):
    """Cl(0,0) is the scalar algebra and has no tensor decomposition."""


class NoWitnessError(RuntimeError):
    """No vector X with a full-rank span {F_i X} was found."""


@dataclass(frozen=True)
class RepSet:
    sig: Signature
    matrices: tuple[RationalMatrix, ...]
    kind: RepKind
    # periodicity only: the Kronecker product of the factor bases, outer factor first
    tensor_basis: tuple[RationalMatrix, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrices", tuple(self.matrices))
        object.__setattr__(self, "kind", RepKind(self.kind))

    @property
    def k(self) -> int:
        return self.sig.k

    def generator_matrices(self) -> tuple[RationalMatrix, ...]:
        return self.matrices[1 : self.sig.n + 1]

    def blade_names(self) -> list[str]:
        return [b.name(self.sig) for b in canonical_blades(self.sig)]

    def to_json(self) -> dict:
        out = {
            "s": self.sig.s,
            "t": self.sig.t,
            "kind": self.kind.value,
            "blades": self.blade_names(),
            "matrices": [m.to_json() for m in self.matrices],
        }
        if self.tensor_basis is not None:
            out["tensor_basis"] = [m.to_json() for m in self.tensor_basis]
        return out


@dataclass(frozen=True)
class DecompositionRecipe:
    sig: Signature
    factors: tuple[Signature, ...]
    case: str

    def __post_init__(self) -> None:
        k = 1
        for f in self.factors:
            k *= f.k
        if k != self.sig.k:
            raise ValueError(f"factor dimensions multiply to {k}, expected {self.sig.k}")

    def to_json(self) -> dict:
        return {
            "s": self.sig.s,
            "t": self.sig.t,
            "case": self.case,
            "factors": [[f.s, f.t] for f in self.factors],
        }


_CL10, _CL01 = Signature(1, 0), Signature(0, 1)
_CL20, _CL02, _CL11 = Signature(2, 0), Signature(0, 2), Signature(1, 1)

_POSITIVE_HEAD = {0: (), 1: (_CL10,), 2: (_CL20,), 3: (_CL01, _CL20)}
_NEGATIVE_HEAD = {0: (), 1: (_CL01,), 2: (_CL02,), 3: (_CL10, _CL02)}


def classify(sig: Signature) -> DecompositionRecipe:
    """Tensor decomposition of Cl(s, t) into base algebras, outermost factor first.

    ``min(s, t)`` copies of Cl(1,1) are split off and placed innermost; the
    remaining Cl(d, 0) or Cl(0, d) is expanded by the residue of ``d`` mod 4.
    """
    if sig.n == 0:
        raise ScalarAlgebraError("Cl(0,0) is the scalar algebra R; nothing to decompose")
    s, t = sig.s, sig.t
    diff = s - t
    if diff > 0:
        case = "a"
        p, q = divmod(diff, 4)
        pure = _POSITIVE_HEAD[q] + (_CL02, _CL20) * p
    elif diff < 0:
        case = "b"
        p, q = divmod(-diff, 4)
        pure = _NEGATIVE_HEAD[q] + (_CL20, _CL02) * p
    else:
        case = "c"
        pure = ()
    return DecompositionRecipe(sig, pure + (_CL11,) * min(s, t), case)


def _regular_matrices(sig: Signature, right: bool) -> tuple[RationalMatrix, ...]:
    table = product_table(sig)
    k = sig.k
    out = []
    for i in range(k):
        entries = {}
        for j in range(k):
            l, sign = table[j][i] if right else table[i][j]
            entries[(l, j)] = Fraction(sign)
        out.append(RationalMatrix.from_sparse(k, k, entries))
    return tuple(out)


@lru_cache(maxsize=None)
def left_regular_rep(sig: Signature) -> RepSet:
    """Column ``j`` of matrix ``i`` is the signed basis vector of ``blade_i * blade_j``."""
    return RepSet(sig, _regular_matrices(sig, right=False), RepKind.LEFT_REGULAR)


@lru_cache(maxsize=None)
def right_regular_rep(sig: Signature) -> RepSet:
    """Column ``j`` of matrix ``i`` is the signed basis vector of ``blade_j * blade_i``."""
    return RepSet(sig, _regular_matrices(sig, right=True), RepKind.RIGHT_REGULAR)


def _m(rows) -> RationalMatrix:
    return RationalMatrix(rows)


# generator matrices of the base algebras, as displayed for Cl(1,0), Cl(0,1), Cl(2,0)
_BASE_GENERATORS: dict[Signature, tuple[RationalMatrix, ...]] = {
    _CL10: (_m([[0, 1], [1, 0]]),),
    _CL01: (_m([[0, 1], [-1, 0]]),),
    _CL20: (
        _m([[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
        _m([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]),
    ),
}


def _base_generators(sig: Signature) -> tuple[RationalMatrix, ...]:
    if sig in _BASE_GENERATORS:
        return _BASE_GENERATORS[sig]
    return left_regular_rep(sig).generator_matrices()


def _blade_images(sig: Signature, generators: Sequence[RationalMatrix]) -> tuple[RationalMatrix, ...]:
    dim = generators[0].rows if generators else 1
    ident = RationalMatrix.identity(dim)
    out = []
    for blade in canonical_blades(sig):
        m = ident
        for g in blade.generators:
            m = m @ generators[g - 1]
        out.append(m)
    return tuple(out)


def _square_sign(m: RationalMatrix) -> int:
    sq = m @ m
    ident = RationalMatrix.identity(m.rows)
    if sq == ident:
        return 1
    if sq == -ident:
        return -1
    raise ValueError("generator image does not square to +-E")


@lru_cache(maxsize=None)
def periodicity_rep(sig: Signature) -> RepSet:
    """Representation assembled from the tensor decomposition of :func:`classify`.

    Splitting Cl(A) (x) Cl(B) with B a two-generator base algebra, the
    generators ``b`` of B act as ``E (x) b`` and the generators ``a`` of
    the outer algebra as ``a (x) b1 b2``.  Generators are then renumbered:
    complex ones (square -E) become I_1.., product ones J_1.., each in the
    order inner factor first.
    """
    recipe = classify(sig)
    first = recipe.factors[0]
    gens = list(_base_generators(first))
    basis = list(_blade_images(first, gens))
    for factor in recipe.factors[1:]:
        b_gens = _base_generators(factor)
        if len(b_gens) != 2:
            raise ValueError(f"inner factor {factor} must have two generators")
        volume = b_gens[0] @ b_gens[1]
        outer_dim = gens[0].rows
        ident = RationalMatrix.identity(outer_dim)
        gens = [kron(ident, b) for b in b_gens] + [kron(a, volume) for a in gens]
        factor_basis = _blade_images(factor, b_gens)
        basis = [kron(a, b) for a in basis for b in factor_basis]
    squares = [_square_sign(g) for g in gens]
    complex_gens = [g for g, sq in zip(gens, squares) if sq == -1]
    product_gens = [g for g, sq in zip(gens, squares) if sq == 1]
    if (len(product_gens), len(complex_gens)) != (sig.s, sig.t):
        raise AssertionError(f"decomposition of {sig} produced the wrong signature")
    images = _blade_images(sig, complex_gens + product_gens)
    return RepSet(sig, images, RepKind.PERIODICITY, tensor_basis=tuple(basis))


def scalar_rep() -> RepSet:
    """The one-dimensional representation of Cl(0,0)."""
    return RepSet(Signature(0, 0), (RationalMatrix.identity(1),), RepKind.LEFT_REGULAR)


def build_rep(sig: Signature, kind: RepKind | str) -> RepSet:
    kind = RepKind(kind)
    if kind is RepKind.LEFT_REGULAR:
        return left_regular_rep(sig)
    if kind is RepKind.RIGHT_REGULAR:
        return right_regular_rep(sig)
    return periodicity_rep(sig)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Violation:
    relation: str
    blades: tuple[str, ...]
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    sig: Signature
    kind: RepKind
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "s": self.sig.s,
            "t": self.sig.t,
            "kind": self.kind.value,
            "ok": self.ok,
            "violations": [
                {"relation": v.relation, "blades": list(v.blades), "detail": v.detail}
                for v in self.violations
            ],
        }


SignedPerm = tuple[tuple[int, int], ...]


def _signed_perm(m: RationalMatrix) -> SignedPerm | None:
    """Column-wise ``(row, sign)`` of a monomial +-1 matrix, else None."""
    if not m.is_monomial():
        return None
    cols = [None] * m.cols
    for i, row in enumerate(m.nonzero_rows()):
        j, v = row[0]
        cols[j] = (i, int(v))
    return tuple(cols)


def _perm_mul(a: SignedPerm, b: SignedPerm) -> SignedPerm:
    return tuple((a[r][0], a[r][1] * s) for r, s in b)


def _perm_neg(a: SignedPerm) -> SignedPerm:
    return tuple((r, -s) for r, s in a)


def verify_relations(rep: RepSet) -> VerificationReport:
    """List every violated defining relation of the representation.

    Checks the identity, generator squares, pairwise anticommutation and
    the whole blade product table (reversed for right regular sets).
    """
    sig = rep.sig
    k = sig.k
    names = [b.name(sig) for b in canonical_blades(sig)]
    violations: list[Violation] = []
    if len(rep.matrices) != k or any(m.shape != (k, k) for m in rep.matrices):
        return VerificationReport(sig, rep.kind, (Violation("shape", (), f"expected {k} matrices of size {k}x{k}"),))

    perms = [_signed_perm(m) for m in rep.matrices]
    if all(p is not None for p in perms):
        mats = perms
        mul, neg = _perm_mul, _perm_neg
        ident = tuple((j, 1) for j in range(k))
    else:
        mats = list(rep.matrices)
        mul, neg = (lambda a, b: a @ b), (lambda a: -a)
        ident = RationalMatrix.identity(k)

    if mats[0] != ident:
        violations.append(Violation("identity", (names[0],), "first matrix is not E"))
    n = sig.n
    for g in range(1, n + 1):
        sq = mul(mats[g], mats[g])
        want = ident if sig.square(g) == 1 else neg(ident)
        if sq != want:
            violations.append(Violation("square", (names[g],), f"expected square {'+' if sig.square(g) == 1 else '-'}E"))
    for g in range(1, n + 1):
        for h in range(g + 1, n + 1):
            if mul(mats[g], mats[h]) != neg(mul(mats[h], mats[g])):
                violations.append(Violation("anticommutation", (names[g], names[h])))
    table = product_table(sig)
    right = rep.kind is RepKind.RIGHT_REGULAR
    for i in range(k):
        for j in range(k):
            l, sign = table[j][i] if right else table[i][j]
            want = mats[l] if sign == 1 else neg(mats[l])
            if mul(mats[i], mats[j]) != want:
                violations.append(Violation("product", (names[i], names[j]), f"expected {'+' if sign == 1 else '-'}{names[l]}"))
    return VerificationReport(sig, rep.kind, tuple(violations))


def generic_element(rep: RepSet, coeffs: Sequence) -> RationalMatrix:
    """The matrix sum_i coeffs[i] F_i."""
    if len(coeffs) != len(rep.matrices):
        raise ValueError(f"expected {len(rep.matrices)} coefficients, got {len(coeffs)}")
    k = rep.matrices[0].rows
    acc = [[Fraction(0)] * k for _ in range(k)]
    for c, m in zip(coeffs, rep.matrices):
        c = Fraction(c)
        if not c:
            continue
        for i, row in enumerate(m.nonzero_rows()):
            for j, v in row:
                acc[i][j] += c * v
    return RationalMatrix(acc, rows=k, cols=k)


def monomial_check(rep: RepSet) -> bool:
    """True iff sum_i a_i F_i has exactly one coefficient per row and column.

    Equivalently: every F_i is monomial and, in each column, the nonzero
    rows of F_1..F_k are pairwise distinct.
    """
    k = rep.matrices[0].rows if rep.matrices else 0
    if len(rep.matrices) != k:
        return False
    perms = [_signed_perm(m) for m in rep.matrices]
    if any(p is None for p in perms):
        return False
    for j in range(k):
        if len({p[j][0] for p in perms}) != k:
            return False
    return True


@dataclass(frozen=True)
class SpanWitness:
    vector: tuple[Fraction, ...]
    rank: int
    attempts: int

    def to_json(self) -> dict:
        return {"vector": [str(x) for x in self.vector], "rank": self.rank, "attempts": self.attempts}


def _span_rank(rep: RepSet, x: Sequence[Fraction]) -> int:
    cols = []
    for m in rep.matrices:
        cols.append([sum((v * x[j] for j, v in row), Fraction(0)) for row in m.nonzero_rows()])
    return rank(RationalMatrix(cols))


def span_witness(rep: RepSet, *, seed: int = 0, random_tries: int = 32) -> SpanWitness:
    """A vector X with dim span{F_i X} = k, starting from X = e_1.

    Standard basis vectors are tried in order, then random small-integer
    vectors from a seeded generator.
    """
    if not monomial_check(rep):
        raise ValueError("span_witness requires a monomial representation")
    k = len(rep.matrices)
    attempts = 0
    for j in range(k):
        x = tuple(Fraction(int(i == j)) for i in range(k))
        attempts += 1
        r = _span_rank(rep, x)
        if r == k:
            return SpanWitness(x, r, attempts)
    rng = random.Random(seed)
    for _ in range(random_tries):
        x = tuple(Fraction(rng.randint(-3, 3)) for _ in range(k))
        attempts += 1
        r = _span_rank(rep, x)
        if r == k:
            return SpanWitness(x, r, attempts)
    raise NoWitnessError(f"no witness found for {rep.sig} ({rep.kind.value}) after {attempts} attempts")


def pattern(m: RationalMatrix) -> list[str]:
    """Human-readable sign pattern, one string per row ('+', '-', '.')."""
    out = []
    for r in m.tolist():
        out.append(" ".join("+" if x == 1 else "-" if x == -1 else "." if x == 0 else str(x) for x in r))
    return out
