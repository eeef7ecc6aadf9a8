"""Exact arithmetic in the real Clifford algebra Cl(s, t).

Generators are numbered from 1.  Indices ``1..t`` are the complex unities
``I_1..I_t`` (square ``-E``), indices ``t+1..t+s`` are the product unities
``J_1..J_s`` (square ``+E``).  A blade is a product of distinct generators
written in ascending index order; the blades of Cl(s, t) are listed by
ascending grade and lexicographically within a grade.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping


@dataclass(frozen=True, order=True)
class Signature:
    """Signature ``(s, t)``: ``s`` generators squaring to +E, ``t`` to -E."""

    s: int
    t: int

    def __post_init__(self) -> None:
        if not (isinstance(self.s, int) and isinstance(self.t, int)):
            raise TypeError("signature entries must be integers")
        if self.s < 0 or self.t < 0:
            raise ValueError(f"signature entries must be non-negative, got ({self.s}, {self.t})")

    @property
    def n(self) -> int:
        return self.s + self.t

    @property
    def k(self) -> int:
        return 1 << self.n

    def square(self, index: int) -> int:
        """Square of generator ``index`` as a scalar multiple of E."""
        self._check_index(index)
        return -1 if index <= self.t else 1

    def is_complex(self, index: int) -> bool:
        self._check_index(index)
        return index <= self.t

    def generator_name(self, index: int) -> str:
        self._check_index(index)
        return f"I{index}" if index <= self.t else f"J{index - self.t}"

    def blades(self) -> tuple["Blade", ...]:
        return canonical_blades(self)

    def index_of(self, blade: "Blade") -> int:
        return _blade_positions(self)[blade]

    def generator_blades(self) -> tuple["Blade", ...]:
        return tuple(Blade((i,)) for i in range(1, self.n + 1))

    def _check_index(self, index: int) -> None:
        if not 1 <= index <= self.n:
            raise ValueError(f"generator index {index} out of range for Cl({self.s},{self.t})")

    def __str__(self) -> str:
        return f"Cl({self.s},{self.t})"


@dataclass(frozen=True, order=True)
class Blade:
    """A basis monomial: strictly increasing tuple of generator indices."""

    generators: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        gens = tuple(self.generators)
        if any(b <= a for a, b in zip(gens, gens[1:])):
            raise ValueError(f"blade generators must be strictly increasing, got {gens}")
        if gens and gens[0] < 1:
            raise ValueError("generator indices start at 1")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_mask(cls, mask: int) -> "Blade":
        gens = []
        i = 1
        while mask:
            if mask & 1:
                gens.append(i)
            mask >>= 1
            i += 1
        return cls(tuple(gens))

    @property
    def grade(self) -> int:
        return len(self.generators)

    @property
    def mask(self) -> int:
        m = 0
        for g in self.generators:
            m |= 1 << (g - 1)
        return m

    def is_valid_for(self, sig: Signature) -> bool:
        return all(1 <= g <= sig.n for g in self.generators)

    def name(self, sig: Signature) -> str:
        if not self.generators:
            return "E"
        return "".join(sig.generator_name(g) for g in self.generators)


UNIT = Blade(())


@dataclass(frozen=True)
class SignedBlade:
    blade: Blade
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


@lru_cache(maxsize=None)
def canonical_blades(sig: Signature) -> tuple[Blade, ...]:
    n = sig.n
    return tuple(
        Blade(combo) for grade in range(n + 1) for combo in combinations(range(1, n + 1), grade)
    )


@lru_cache(maxsize=None)
def _blade_positions(sig: Signature) -> dict[Blade, int]:
    return {b: i for i, b in enumerate(canonical_blades(sig))}


def parse_blade(name: str, sig: Signature) -> Blade:
    """Inverse of :meth:`Blade.name`, e.g. ``"I1J2"`` in Cl(2, 1)."""
    if name == "E":
        return UNIT
    match = re.fullmatch(r"(?:[IJ]\d+)+", name)
    if not match:
        raise ValueError(f"cannot parse blade name {name!r}")
    gens = []
    for kind, num in re.findall(r"([IJ])(\d+)", name):
        num = int(num)
        limit = sig.t if kind == "I" else sig.s
        if not 1 <= num <= limit:
            raise ValueError(f"blade {name!r} is not valid in {sig}")
        gens.append(num if kind == "I" else sig.t + num)
    return Blade(tuple(gens))


def blade_mul(a: Blade, b: Blade, sig: Signature) -> SignedBlade:
    """Product of two blades as a single signed canonical blade."""
    if not (a.is_valid_for(sig) and b.is_valid_for(sig)):
        raise ValueError(f"blades {a}, {b} are not valid in {sig}")
    # sorting a+b: each pair (x in a, y in b) with x > y costs one transposition
    swaps = 0
    for y in b.generators:
        for x in a.generators:
            if x > y:
                swaps += 1
    sign = -1 if swaps & 1 else 1
    common = a.mask & b.mask
    idx = 1
    while common:
        if common & 1:
            sign *= sig.square(idx)
        common >>= 1
        idx += 1
    return SignedBlade(Blade.from_mask(a.mask ^ b.mask), sign)


@lru_cache(maxsize=None)
def product_table(sig: Signature) -> tuple[tuple[tuple[int, int], ...], ...]:
    """``table[i][j] = (l, sign)`` with ``blade_i * blade_j = sign * blade_l``."""
    blades = canonical_blades(sig)
    pos = _blade_positions(sig)
    rows = []
    for a in blades:
        row = []
        for b in blades:
            sb = blade_mul(a, b, sig)
            row.append((pos[sb.blade], sb.sign))
        rows.append(tuple(row))
    return tuple(rows)


def blade_square(blade: Blade, sig: Signature) -> int:
    sb = blade_mul(blade, blade, sig)
    return sb.sign


@dataclass(frozen=True)
class MultiVector:
    """Element of Cl(s, t) with exact rational coefficients on blades."""

    sig: Signature
    coefficients: Mapping[Blade, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for blade, c in dict(self.coefficients).items():
            if not blade.is_valid_for(self.sig):
                raise ValueError(f"blade {blade} not valid in {self.sig}")
            c = Fraction(c)
            if c:
                clean[blade] = c
        object.__setattr__(self, "coefficients", clean)

    @classmethod
    def blade(cls, blade: Blade, sig: Signature, coefficient=1) -> "MultiVector":
        return cls(sig, {blade: Fraction(coefficient)})

    @classmethod
    def scalar(cls, value, sig: Signature) -> "MultiVector":
        return cls(sig, {UNIT: Fraction(value)})

    @classmethod
    def from_vector(cls, values: Iterable, sig: Signature) -> "MultiVector":
        values = list(values)
        if len(values) != sig.k:
            raise ValueError(f"expected {sig.k} coefficients, got {len(values)}")
        return cls(sig, dict(zip(canonical_blades(sig), values)))

    def to_vector(self) -> tuple[Fraction, ...]:
        return tuple(self.coefficients.get(b, Fraction(0)) for b in canonical_blades(self.sig))

    def __getitem__(self, blade: Blade) -> Fraction:
        return self.coefficients.get(blade, Fraction(0))

    def _same_algebra(self, other: "MultiVector") -> None:
        if other.sig != self.sig:
            raise ValueError(f"cannot combine elements of {self.sig} and {other.sig}")

    def __add__(self, other: "MultiVector") -> "MultiVector":
        self._same_algebra(other)
        out = dict(self.coefficients)
        for b, c in other.coefficients.items():
            out[b] = out.get(b, Fraction(0)) + c
        return MultiVector(self.sig, out)

    def __neg__(self) -> "MultiVector":
        return MultiVector(self.sig, {b: -c for b, c in self.coefficients.items()})

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        return self + (-other)

    def scale(self, factor) -> "MultiVector":
        factor = Fraction(factor)
        return MultiVector(self.sig, {b: factor * c for b, c in self.coefficients.items()})

    def __mul__(self, other: "MultiVector") -> "MultiVector":
        return mv_mul(self, other, self.sig)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiVector):
            return NotImplemented
        return self.sig == other.sig and self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash((self.sig, frozenset(self.coefficients.items())))

    def __repr__(self) -> str:
        if not self.coefficients:
            return f"MultiVector({self.sig}, 0)"
        terms = " + ".join(
            f"{c}*{b.name(self.sig)}"
            for b, c in sorted(self.coefficients.items(), key=lambda bc: self.sig.index_of(bc[0]))
        )
        return f"MultiVector({self.sig}, {terms})"


def mv_mul(x: MultiVector, y: MultiVector, sig: Signature) -> MultiVector:
    if x.sig != sig or y.sig != sig:
        raise ValueError("multivectors must belong to the given signature")
    out: dict[Blade, Fraction] = {}
    for a, ca in x.coefficients.items():
        for b, cb in y.coefficients.items():
            sb = blade_mul(a, b, sig)
            out[sb.blade] = out.get(sb.blade, Fraction(0)) + sb.sign * ca * cb
    return MultiVector(sig, out)
