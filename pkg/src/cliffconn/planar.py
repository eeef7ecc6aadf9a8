"""Connections on the flat model sharing A-planar curves.

A connection with constant coefficients is stored as ``christoffel[c, a, b]``
so that ``(nabla_X Y)^c = X(Y^c) + Gamma^c_{ab} X^a Y^b``.  Deformations by a
one-form ``Upsilon`` add

    P(X, Y) = 1/2 sum_i eps_i (Upsilon(F_i X) F_i Y + Upsilon(F_i Y) F_i X),

which is symmetric, so torsion is unchanged, and has ``P(X, X)`` in the
A-hull of ``X``, so A-planar curves are unchanged.

Exact tensors are :class:`RationalTensor` values (integer numerators over
one shared denominator); curve integration is done in float64.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, TextIO

import numpy as np

from .exact import RationalMatrix, RowReducer, column_stack, mat_vec, rank, solve
from .prolongation import SignVector

Forcing = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


class CurveIntegrationError(FloatingPointError):
    """The integrated state became non-finite."""


def _int_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    flat = list(arr.flat)
    if any(isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)) for v in flat):
        raise TypeError("expected integer numerators")
    out = np.empty(arr.shape, dtype=object)
    out.flat[:] = [int(v) for v in flat]
    return out


def _common_denominator(values) -> tuple[np.ndarray, int]:
    """Integer numerators and their shared denominator for rational ``values``."""
    arr = np.asarray(values, dtype=object)
    flat = list(arr.flat)
    nums = np.empty(arr.shape, dtype=object)
    if all(isinstance(v, (int, np.integer)) and not isinstance(v, (bool, np.bool_)) for v in flat):
        nums.flat[:] = [int(v) for v in flat]
        return nums, 1
    if any(isinstance(v, (float, np.floating)) for v in flat):
        raise TypeError("exact tensors take integers or Fractions, not floats")
    fracs = [Fraction(v) for v in flat]
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    nums.flat[:] = [f.numerator * (den // f.denominator) for f in fracs]
    return nums, den


class RationalTensor:
    """Exact array stored as integer numerators over one positive denominator.

    Kept in lowest terms, so equality is entrywise on numerators.
    """

    __slots__ = ("numerators", "denominator")

    def __init__(self, numerators, denominator: int = 1, *, _trusted: bool = False):
        # _trusted: numerators already an object array of Python ints
        nums = numerators if _trusted else _int_array(numerators)
        den = int(denominator)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            nums, den = -nums, -den
        g = math.gcd(den, *nums.flat) if nums.size else den
        if g > 1:
            nums = nums // g
            den //= g
        self.numerators = nums
        self.denominator = den

    @classmethod
    def from_values(cls, values) -> "RationalTensor":
        if isinstance(values, RationalTensor):
            return values
        nums, den = _common_denominator(values)
        return cls(nums, den, _trusted=True)

    @classmethod
    def zeros(cls, shape) -> "RationalTensor":
        nums = np.empty(shape, dtype=object)
        nums.fill(0)
        return cls(nums)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.numerators.shape

    def entry(self, *idx: int) -> Fraction:
        return Fraction(self.numerators[idx], self.denominator)

    def to_fractions(self) -> np.ndarray:
        out = np.empty(self.shape, dtype=object)
        d = self.denominator
        out.flat[:] = [Fraction(x, d) for x in self.numerators.flat]
        return out

    def as_float(self) -> np.ndarray:
        d = self.denominator
        return np.array([x / d for x in self.numerators.flat], dtype=float).reshape(self.shape)

    def _aligned(self, other: "RationalTensor"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        den = math.lcm(self.denominator, other.denominator)
        return self.numerators * (den // self.denominator), other.numerators * (den // other.denominator), den

    def __add__(self, other: "RationalTensor") -> "RationalTensor":
        a, b, den = self._aligned(other)
        return RationalTensor(a + b, den, _trusted=True)

    def __sub__(self, other: "RationalTensor") -> "RationalTensor":
        a, b, den = self._aligned(other)
        return RationalTensor(a - b, den, _trusted=True)

    def __neg__(self) -> "RationalTensor":
        return RationalTensor(-self.numerators, self.denominator, _trusted=True)

    def scale(self, factor) -> "RationalTensor":
        f = Fraction(factor)
        return RationalTensor(self.numerators * f.numerator, self.denominator * f.denominator, _trusted=True)

    def transpose(self, *axes: int) -> "RationalTensor":
        return RationalTensor(self.numerators.transpose(*axes), self.denominator, _trusted=True)

    def is_zero(self) -> bool:
        return not any(self.numerators.flat)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalTensor):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.denominator == other.denominator
            and bool(np.all(self.numerators == other.numerators))
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.denominator, tuple(self.numerators.flat)))

    def __repr__(self) -> str:
        return f"RationalTensor(shape={self.shape}, denominator={self.denominator})"


def _signs(eps) -> tuple[int, ...]:
    return tuple(eps.signs if isinstance(eps, SignVector) else eps)


class FlatConnection:
    """Constant Christoffel symbols ``christoffel[c, a, b]`` on R^N."""

    __slots__ = ("christoffel",)

    def __init__(self, christoffel):
        g = RationalTensor.from_values(christoffel)
        if len(g.shape) != 3 or not (g.shape[0] == g.shape[1] == g.shape[2]):
            raise ValueError(f"christoffel array must have shape (N, N, N), got {g.shape}")
        self.christoffel = g

    @classmethod
    def trivial(cls, n: int) -> "FlatConnection":
        return cls(RationalTensor.zeros((n, n, n)))

    @property
    def dim(self) -> int:
        return self.christoffel.shape[0]

    def torsion(self) -> RationalTensor:
        return self.christoffel - self.christoffel.transpose(0, 2, 1)

    def as_float(self) -> np.ndarray:
        return self.christoffel.as_float()

    def slot_matrix(self, a: int) -> RationalMatrix:
        """Matrix of ``Y -> Gamma(e_a, Y)``."""
        d = self.christoffel.denominator
        block = self.christoffel.numerators[:, a, :]
        return RationalMatrix([[Fraction(x, d) for x in row] for row in block])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlatConnection):
            return NotImplemented
        return self.christoffel == other.christoffel

    def __hash__(self) -> int:
        return hash(self.christoffel)

    def __repr__(self) -> str:
        return f"FlatConnection(dim={self.dim})"


@lru_cache(maxsize=64)
def _affinor_stack(affinors: tuple[RationalMatrix, ...]) -> tuple[np.ndarray, int]:
    return _common_denominator([f.tolist() for f in affinors])


def deformation_tensor(upsilon: Sequence, affinors: Sequence[RationalMatrix], eps) -> RationalTensor:
    """``P[c, a, b]`` of ``P(X, Y) = 1/2 sum_i eps_i (U(F_i X) F_i Y + U(F_i Y) F_i X)``."""
    n = affinors[0].rows
    if len(upsilon) != n:
        raise ValueError(f"one-form has {len(upsilon)} components, expected {n}")
    signs = _signs(eps)
    if len(signs) != len(affinors):
        raise ValueError("one sign per affinor required")
    ups, du = _common_denominator(list(upsilon))
    fs, df = _affinor_stack(tuple(affinors))
    # w[i, a] = eps_i U(F_i e_a)
    w = np.array([e * (ups @ f) for e, f in zip(signs, fs)], dtype=object).reshape(len(signs), n)
    q = np.tensordot(w, fs, axes=([0], [0])).transpose(1, 0, 2)
    return RationalTensor(q + q.transpose(0, 2, 1), 2 * du * df * df, _trusted=True)


def deform(conn: FlatConnection, upsilon: Sequence, affinors: Sequence[RationalMatrix], eps) -> FlatConnection:
    if conn.dim != affinors[0].rows:
        raise ValueError(f"connection has dimension {conn.dim}, affinors act on {affinors[0].rows}")
    return FlatConnection(conn.christoffel + deformation_tensor(upsilon, affinors, eps))


def difference_tensor(conn_a: FlatConnection, conn_b: FlatConnection) -> RationalTensor:
    """``P[c, a, b]`` with ``P(X, Y) = nabla^a_X Y - nabla^b_X Y``."""
    if conn_a.dim != conn_b.dim:
        raise ValueError("connections act on spaces of different dimension")
    return conn_a.christoffel - conn_b.christoffel


def is_symmetric(p: RationalTensor) -> bool:
    return p == p.transpose(0, 2, 1)


def apply_tensor(p: RationalTensor, x: Sequence, y: Sequence) -> tuple[Fraction, ...]:
    """``P(X, Y)^c = P[c, a, b] X^a Y^b``, exactly."""
    xs, dx = _common_denominator(list(x))
    ys, dy = _common_denominator(list(y))
    out = np.tensordot(np.tensordot(p.numerators, ys, axes=([2], [0])), xs, axes=([1], [0]))
    den = p.denominator * dx * dy
    return tuple(Fraction(int(v), den) for v in out)


def _vec(m: RationalMatrix) -> dict:
    n = m.cols
    return {i * n + j: v for i, row in enumerate(m.nonzero_rows()) for j, v in row}


def preserves_structure(conn: FlatConnection, affinors: Sequence[RationalMatrix]) -> bool:
    """Exact check that ``nabla_X F_i`` lies in span{F_j} for all X and i."""
    n = conn.dim
    red = RowReducer(n * n)
    for f in affinors:
        red.add(_vec(f))
    # span membership is scale-invariant, so integer numerators suffice
    fs, _ = _affinor_stack(tuple(affinors))
    gamma = conn.christoffel.numerators
    for a in range(n):
        ga = np.ascontiguousarray(gamma[:, a, :])
        if not any(ga.flat):
            continue
        for f in fs:
            comm = ga.dot(f) - f.dot(ga)
            row = {i: Fraction(v) for i, v in enumerate(comm.flat) if v}
            if row and not red.contains(row):
                return False
    return True


def recover_upsilon(
    p: RationalTensor, affinors: Sequence[RationalMatrix], eps
) -> tuple[tuple[Fraction, ...] | None, bool]:
    """Solve ``P = deformation_tensor(U)`` for ``U`` exactly.

    Returns ``(U, unique)``; ``U`` is None when no one-form produces ``P``.
    """
    n = affinors[0].rows
    columns = []
    for d in range(n):
        basis = [0] * n
        basis[d] = 1
        columns.append(list(deformation_tensor(basis, affinors, eps).to_fractions().flat))
    a = column_stack(columns)
    target = RationalMatrix.column(RationalTensor.from_values(p).to_fractions().flat)
    sol = solve(a, target)
    unique = rank(a) == n
    if sol is None:
        return None, unique
    return tuple(sol.col(0)), unique


@dataclass(frozen=True)
class HullMembership:
    residual: float
    coefficients: tuple
    exact: bool


def _is_exact_input(values) -> bool:
    return all(isinstance(v, (int, Fraction, np.integer)) and not isinstance(v, bool) for v in values)


def hull_membership(v: Sequence, x: Sequence, affinors: Sequence[RationalMatrix]) -> HullMembership:
    """Least-squares decomposition ``v ~ sum_i a_i F_i X``.

    Rational inputs are solved exactly through the normal equations, so the
    residual is zero precisely when ``v`` lies in the A-hull of ``X``.
    """
    x = list(x)
    v = list(v)
    if not any(x):
        raise ValueError("the A-hull is only defined for a nonzero vector")
    if _is_exact_input(x) and _is_exact_input(v):
        xs = [Fraction(int(c)) if isinstance(c, np.integer) else Fraction(c) for c in x]
        vs = [Fraction(int(c)) if isinstance(c, np.integer) else Fraction(c) for c in v]
        h = column_stack([mat_vec(f, xs) for f in affinors])
        ht = h.T
        coeffs = solve(ht @ h, ht @ RationalMatrix.column(vs))
        a = coeffs.col(0)
        fitted = mat_vec(h, a)
        sq = sum(((vi - fi) ** 2 for vi, fi in zip(vs, fitted)), Fraction(0))
        return HullMembership(float(sq) ** 0.5, a, True)
    xf = np.asarray(x, dtype=float)
    vf = np.asarray(v, dtype=float)
    h = np.stack([np.asarray(f.tolist(), dtype=float) @ xf for f in affinors], axis=1)
    a, *_ = np.linalg.lstsq(h, vf, rcond=None)
    return HullMembership(float(np.linalg.norm(vf - h @ a)), tuple(a), False)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveState:
    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        if self.position.shape != self.velocity.shape:
            raise ValueError("position and velocity must have the same shape")


@dataclass(frozen=True)
class Trajectory:
    """Samples of one curve (arrays ``(S, N)``) or a batch (``(S, B, N)``)."""

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray

    def curve(self, i: int) -> "Trajectory":
        return Trajectory(self.times, self.positions[:, i], self.velocities[:, i], self.accelerations[:, i])


def _geodesic_rhs(gamma: np.ndarray, forcing: Forcing | None):
    n = gamma.shape[0]
    g2 = gamma.reshape(n, n * n)

    def accel(t: float, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        # overflow is reported by the finiteness check in the integrator
        with np.errstate(over="ignore", invalid="ignore"):
            vv = (v[..., :, None] * v[..., None, :]).reshape(*v.shape[:-1], n * n)
            acc = -(vv @ g2.T)
        if forcing is not None:
            acc = acc + forcing(t, x, v)
        return acc

    return accel


def integrate_curve(
    conn: FlatConnection,
    init: CurveState,
    horizon: float,
    step: float,
    forcing: Forcing | None = None,
) -> Trajectory:
    """Fixed-step RK4 for ``x'' = -Gamma(x', x') + forcing(t, x, x')``.

    The number of steps is ``round(horizon / step)``, with the step adjusted
    so the last sample lands on ``init.time + horizon``.  A leading batch axis
    on the initial state integrates several curves at once.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if init.position.shape[-1] != conn.dim:
        raise ValueError("initial state does not match the connection dimension")
    nsteps = max(1, int(round(horizon / step))) if horizon > 0 else 0
    h = horizon / nsteps if nsteps else 0.0
    accel = _geodesic_rhs(conn.as_float(), forcing)

    x = init.position.copy()
    v = init.velocity.copy()
    t = float(init.time)
    times = [t]
    xs, vs, acs = [x.copy()], [v.copy()], [accel(t, x, v)]
    for i in range(nsteps):
        a1 = acs[-1]
        k1x, k1v = v, a1
        k2x, k2v = v + 0.5 * h * k1v, accel(t + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = v + 0.5 * h * k2v, accel(t + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = v + h * k3v, accel(t + h, x + h * k3x, v + h * k3v)
        with np.errstate(over="ignore", invalid="ignore"):
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        t = init.time + (i + 1) * h
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise CurveIntegrationError(f"non-finite state at step {i + 1} (t = {t:.6g})")
        times.append(t)
        xs.append(x)
        vs.append(v)
        acs.append(accel(t, x, v))
    return Trajectory(np.asarray(times), np.stack(xs), np.stack(vs), np.stack(acs))


def hull_residuals(vectors: np.ndarray, bases: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Distance of ``vectors[s]`` from the column span of ``bases[s]`` (batched)."""
    u, sv, _ = np.linalg.svd(bases, full_matrices=False)
    keep = sv > rtol * np.maximum(sv[..., :1], np.finfo(float).tiny)
    coeff = np.einsum("sni,sn->si", u, vectors) * keep
    proj = np.einsum("sni,si->sn", u, coeff)
    return np.linalg.norm(vectors - proj, axis=-1)


@dataclass(frozen=True)
class PlanarityReport:
    max_residual: float
    residuals: np.ndarray


def planarity_report(traj: Trajectory, conn: FlatConnection, affinors: Sequence[RationalMatrix]) -> PlanarityReport:
    """Normalized distance of ``nabla_c' c'`` from the A-hull of ``c'`` at every sample.

    The covariant acceleration is measured with ``conn``; the residual at a
    sample is divided by ``|c'|^2``.
    """
    v = traj.velocities
    if v.ndim != 2:
        raise ValueError("planarity is reported for one curve at a time")
    n = v.shape[-1]
    g2 = conn.as_float().reshape(n, n * n)
    cov = traj.accelerations + (v[:, :, None] * v[:, None, :]).reshape(-1, n * n) @ g2.T
    fs = np.stack([np.asarray(f.tolist(), dtype=float) for f in affinors])
    bases = np.einsum("icb,sb->sci", fs, v)
    speed2 = np.einsum("sn,sn->s", v, v)
    if np.any(speed2 == 0):
        raise ValueError("planarity needs a nonzero velocity at every sample")
    res = hull_residuals(cov, bases) / speed2
    return PlanarityReport(float(res.max()), res)


def off_hull_forcing(direction: Sequence[float], affinors: Sequence[RationalMatrix]) -> Forcing:
    """Forcing equal to the component of ``direction`` orthogonal to the A-hull of x'."""
    w = np.asarray(direction, dtype=float)
    fs = np.stack([np.asarray(f.tolist(), dtype=float) for f in affinors])

    def force(t: float, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        flat_v = v.reshape(-1, v.shape[-1])
        bases = np.einsum("icb,sb->sci", fs, flat_v)
        u, sv, _ = np.linalg.svd(bases, full_matrices=False)
        keep = sv > 1e-12 * sv[..., :1]
        ww = np.broadcast_to(w, flat_v.shape)
        coeff = np.einsum("sni,sn->si", u, ww) * keep
        out = ww - np.einsum("sni,si->sn", u, coeff)
        return out.reshape(v.shape)

    return force


def write_trajectory_csv(traj: Trajectory, residuals: np.ndarray, out: TextIO) -> None:
    """Columns ``t, x1..xN, v1..vN, residual``; floats printed with repr precision."""
    n = traj.positions.shape[-1]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["residual"])
    for t, x, v, r in zip(traj.times, traj.positions, traj.velocities, residuals):
        writer.writerow([repr(float(t))] + [repr(float(c)) for c in x] + [repr(float(c)) for c in v] + [repr(float(r))])


def trajectory_csv(traj: Trajectory, residuals: np.ndarray) -> str:
    buf = io.StringIO()
    write_trajectory_csv(traj, residuals, buf)
    return buf.getvalue()
