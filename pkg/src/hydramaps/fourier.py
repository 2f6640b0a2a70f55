"""Haar integration, Schwartz-Bruhat functions, and numen distributions.

The Haar probability measure on the base-p integers gives each ball of
radius p**-n mass p**-n.  Schwartz-Bruhat (SB) functions are finite
complex combinations of ball indicators, stored densely at a common
refinement level; their Fourier transforms live on frequencies k/q**n
mod 1.  The characteristic function of a hydra map's numen satisfies a
self-similarity equation that can either be solved level by level
(charfn_solve) or estimated by exhaustive Riemann sums over truncations
(charfn_estimate); residue distributions come from Fourier inversion of
the solved table (prob_inversion) or from the same exhaustive
enumeration (prob_empirical).  The two routes are kept independent so
each can check the other.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    NotPIntegralError,
    PreconditionError,
    ResourceLimitError,
)
from .exact import (
    Frequency,
    PAdicTrunc,
    Place,
    RationalLike,
    character_eval,
    fractional_part,
    frequencies_through_level,
    is_prime,
    residue_mod,
    unit_root,
    valuation,
)
from .hydra import HydraMap
from .numen import base_value, convergence_report

ENUMERATION_CAP = 2 ** 24


def _guard_enumeration(p: int, depth: int, allow_large: bool) -> None:
    if depth < 0:
        raise ValueError(f"need depth >= 0, got {depth}")
    if not allow_large and p ** depth > ENUMERATION_CAP:
        raise ResourceLimitError(
            f"{p}**{depth} truncations exceed the {ENUMERATION_CAP} cap; "
            "pass allow_large to override")


# ---------------------------------------------------------------------------
# Schwartz-Bruhat functions

@dataclass(frozen=True)
class SBFunction:
    """A locally constant function with compact level: a complex
    coefficient per residue class mod base**level.

    coeffs[k] is the value on the ball k + base**level * Z_base.  Sums,
    differences, and pointwise products refine both operands to a common
    level first, so the representation is always canonical (one term per
    residue at a single level).
    """

    base: int
    level: int
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"need base >= 2, got {self.base}")
        if self.level < 0:
            raise ValueError(f"need level >= 0, got {self.level}")
        if len(self.coeffs) != self.base ** self.level:
            raise ValueError(
                f"need {self.base ** self.level} coefficients, "
                f"got {len(self.coeffs)}")

    @classmethod
    def constant(cls, value: complex, base: int) -> "SBFunction":
        return cls(base, 0, (complex(value),))

    @classmethod
    def indicator(cls, k: int, n: int, base: int) -> "SBFunction":
        """The indicator of the ball k + base**n * Z_base."""
        size = base ** n
        k %= size
        return cls(base, n,
                   tuple(1.0 + 0j if i == k else 0j for i in range(size)))

    @classmethod
    def from_terms(
        cls, base: int, terms: Iterable[tuple[int, int, complex]],
    ) -> "SBFunction":
        """Sum of coeff * indicator(k mod base**n) over (k, n, coeff)."""
        terms = list(terms)
        level = max((n for _, n, _ in terms), default=0)
        size = base ** level
        coeffs = [0j] * size
        for k, n, coeff in terms:
            if n < 0:
                raise ValueError(f"need n >= 0, got {n}")
            step = base ** n
            for i in range(k % step, size, step):
                coeffs[i] += complex(coeff)
        return cls(base, level, tuple(coeffs))

    def refine(self, level: int) -> "SBFunction":
        if level < self.level:
            raise ValueError(f"cannot coarsen level {self.level} to {level}")
        if level == self.level:
            return self
        step = self.base ** self.level
        size = self.base ** level
        return SBFunction(self.base, level,
                          tuple(self.coeffs[i % step] for i in range(size)))

    def _common(self, other: "SBFunction") -> tuple["SBFunction", "SBFunction"]:
        if other.base != self.base:
            raise ValueError(f"bases differ: {self.base} != {other.base}")
        level = max(self.level, other.level)
        return self.refine(level), other.refine(level)

    def __add__(self, other: "SBFunction") -> "SBFunction":
        a, b = self._common(other)
        return SBFunction(a.base, a.level,
                          tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    def __sub__(self, other: "SBFunction") -> "SBFunction":
        a, b = self._common(other)
        return SBFunction(a.base, a.level,
                          tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __mul__(self, other):
        if isinstance(other, SBFunction):
            a, b = self._common(other)
            return SBFunction(a.base, a.level,
                              tuple(x * y for x, y in zip(a.coeffs, b.coeffs)))
        if isinstance(other, numbers.Number):
            return SBFunction(self.base, self.level,
                              tuple(complex(other) * x for x in self.coeffs))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self) -> "SBFunction":
        return self * (-1)

    def value_at(self, z: PAdicTrunc | RationalLike) -> complex:
        """Evaluate at a base-integral rational or a truncation of
        depth >= level."""
        size = self.base ** self.level
        if isinstance(z, PAdicTrunc):
            if z.base != self.base:
                raise ValueError(
                    f"truncation base {z.base} != function base {self.base}")
            if z.depth < self.level:
                raise ValueError(
                    f"depth {z.depth} below function level {self.level}")
            return self.coeffs[z.value % size]
        return self.coeffs[residue_mod(z, self.base, self.level)]

    def isclose(self, other: "SBFunction", tol: float = 1e-12) -> bool:
        a, b = self._common(other)
        return all(abs(x - y) <= tol for x, y in zip(a.coeffs, b.coeffs))


# ---------------------------------------------------------------------------
# Haar integration

def haar_integral_sb(f: SBFunction) -> complex:
    """Exact integral against the Haar probability measure: each ball at
    the function's level has mass base**-level."""
    return sum(f.coeffs) / f.base ** f.level


def haar_integral_riemann(
    g: Callable[[PAdicTrunc], complex],
    base: int,
    depth: int,
    allow_large: bool = False,
) -> complex:
    """Depth-N Riemann sum: the average of g over all base**N
    truncations.  Exact for functions that only depend on the residue
    mod base**N (in particular any SB function of level <= N)."""
    _guard_enumeration(base, depth, allow_large)
    total = 0j
    size = base ** depth
    for i in range(size):
        total += g(PAdicTrunc.from_int(i, base, depth))
    return total / size


# ---------------------------------------------------------------------------
# Fourier transforms on SB functions

def fourier_sb(f: SBFunction) -> dict[Frequency, complex]:
    """Transform f-hat(t) = integral of f(z) * e(-t z): supported on the
    frequencies of level <= the function's level, where it equals a
    scaled discrete Fourier transform of the coefficient vector."""
    if not is_prime(f.base):
        raise PreconditionError(
            f"Fourier transform needs a prime base, got {f.base}; "
            "split composite bases with crt_split first")
    N = f.base ** f.level
    table: dict[Frequency, complex] = {}
    for j in range(N):
        t = Frequency.from_fraction(Fraction(j, N), f.base)
        total = 0j
        for k, coeff in enumerate(f.coeffs):
            if coeff:
                total += coeff * unit_root(Fraction(-j * k, N))
        table[t] = total / N
    return table


def inverse_fourier_sb(
    table: Mapping[Frequency, complex],
    base: int,
    level: int | None = None,
) -> SBFunction:
    """Fourier series sum_t table[t] * e(t z) as an SB function at the
    table's maximal level (or an explicit finer one)."""
    if not is_prime(base):
        raise PreconditionError(f"need a prime base, got {base}")
    if level is None:
        level = max((t.level for t in table), default=0)
    for t in table:
        if t.base != base:
            raise ValueError(f"frequency base {t.base} != {base}")
        if t.level > level:
            raise ValueError(
                f"frequency {t} has level above the target {level}")
    N = base ** level
    coeffs = []
    for k in range(N):
        total = 0j
        for t, val in table.items():
            if val:
                total += val * unit_root(t.value * k)
        coeffs.append(total)
    return SBFunction(base, level, tuple(coeffs))


def orthogonality_sum(q: int, n: int, x: RationalLike, y: RationalLike) -> complex:
    """sum over |t| <= q**n of e(t (y - x)): equals q**n when x = y mod
    q**n and 0 otherwise (up to roundoff in the root-of-unity sums)."""
    z = Fraction(y) - Fraction(x)
    return sum(character_eval(t, z) for t in frequencies_through_level(q, n))


# ---------------------------------------------------------------------------
# additive characters at places

def additive_character(place: Place, x: RationalLike) -> complex:
    """e_l(x): exp(2 pi i {x}_q) at a finite place, exp(2 pi i x) at the
    archimedean place.  The angle is reduced mod 1 exactly before any
    float enters."""
    x = Fraction(x)
    if place.is_finite:
        return unit_root(fractional_part(x, place.prime))
    return unit_root(x % 1)


# ---------------------------------------------------------------------------
# characteristic function of the numen

@dataclass
class CharFnTable:
    """Tabulated characteristic-function values.

    Finite-place tables map every Frequency of level <= level; an
    archimedean table maps the sample grid points (exact rationals)
    that were requested.  residual records the worst self-similarity
    defect the producer measured, when it measured one.
    """

    place: Place
    level: int | None
    values: dict
    method: str = ""
    residual: float | None = None

    def __post_init__(self):
        zero = Frequency(self.place.prime, Fraction(0)) \
            if self.place.is_finite else Fraction(0)
        if zero in self.values and abs(self.values[zero] - 1) > 1e-9:
            raise ValueError("characteristic function must be 1 at t = 0")
        for t, val in self.values.items():
            if abs(val) > 1 + 1e-9:
                raise ValueError(f"|table[{t}]| = {abs(val)} exceeds 1")


def b_constant(H: HydraMap, q: int) -> int:
    """max_j log_q |c_j|_q over nonzero branch offsets (0 when every
    offset vanishes): the numen's values lie in q**-B * Z_q."""
    exps = [-valuation(b.shift, q) for b in H.branches if b.shift != 0]
    return max(exps) if exps else 0


def _series_values(H: HydraMap, depth: int) -> Iterable[Fraction]:
    """Exact numen values of all modulus**depth truncations."""
    anchor = base_value(H)
    stack = [(depth, Fraction(1), Fraction(0))]
    while stack:
        remaining, prod, partial = stack.pop()
        if remaining == 0:
            yield partial + prod * anchor
            continue
        for b in H.branches:
            stack.append((remaining - 1, prod * b.scale,
                          partial + prod * b.shift))


def _scaled_residue_histogram(
    H: HydraMap, q: int, exponent: int, scale_power: int, depth: int,
) -> dict[int, int]:
    """Counts of [q**scale_power * X]_{q**exponent} over all
    modulus**depth truncations.

    When the (scaled) branch data is q-integral the enumeration is
    regrouped as a dynamic program over (product, partial-sum) residue
    pairs; this is an exact reorganization of the same sum, not an
    approximation.  Otherwise every truncation is evaluated exactly.
    """
    M = q ** exponent
    scale = Fraction(q) ** scale_power
    try:
        pairs = [(residue_mod(b.scale, q, exponent),
                  residue_mod(b.shift * scale, q, exponent))
                 for b in H.branches]
        anchor = residue_mod(base_value(H) * scale, q, exponent)
    except NotPIntegralError:
        hist: dict[int, int] = {}
        for x in _series_values(H, depth):
            k = residue_mod(x * scale, q, exponent)
            hist[k] = hist.get(k, 0) + 1
        return hist

    states: dict[tuple[int, int], int] = {(1 % M, 0): 1}
    for _ in range(depth):
        nxt: dict[tuple[int, int], int] = {}
        for (prod, partial), count in states.items():
            for R, C in pairs:
                key = (prod * R % M, (partial + prod * C) % M)
                nxt[key] = nxt.get(key, 0) + count
        states = nxt
    hist = {}
    for (prod, partial), count in states.items():
        k = (partial + prod * anchor) % M
        hist[k] = hist.get(k, 0) + count
    return hist


def _require_contracting(H: HydraMap, place: Place, force: bool) -> None:
    report = convergence_report(H, place)
    if not report.rho < 1 and not force:
        raise PreconditionError(
            f"requires rho < 1 at {place} for the numen to converge "
            f"almost everywhere; got rho = {report.rho} (force to override)")


def charfn_estimate(
    H: HydraMap,
    place: Place,
    t: Frequency | RationalLike,
    depth: int,
    force: bool = False,
    allow_large: bool = False,
) -> complex:
    """Depth-N Riemann estimate of the characteristic function

        mu-hat(t) = integral of e_l(-t X(z)) dz

    as the exact average of e_l(-t X) over all modulus**N truncations.
    Requires rho < 1 at the place unless force is set.
    """
    _require_contracting(H, place, force)
    _guard_enumeration(H.modulus, depth, allow_large)
    size = H.modulus ** depth

    if place.is_finite:
        q = place.prime
        if not isinstance(t, Frequency) or t.base != q:
            raise ValueError(f"need a base-{q} Frequency at the finite place")
        B = max(b_constant(H, q), 0)
        hist = _scaled_residue_histogram(H, q, t.level + B, B, depth)
        scale = Fraction(q) ** B
        total = 0j
        for k, count in hist.items():
            total += count * unit_root((-t.value * k / scale) % 1)
        return total / size

    if isinstance(t, Frequency):
        raise ValueError("archimedean estimates take a real t, not a Frequency")
    tf = Fraction(t)
    total = 0j
    for x in _series_values(H, depth):
        total += unit_root((-tf * x) % 1)
    return total / size


def charfn_table_estimate(
    H: HydraMap,
    place: Place,
    depth: int,
    level: int | None = None,
    grid: Sequence[RationalLike] | None = None,
    force: bool = False,
    allow_large: bool = False,
) -> CharFnTable:
    """Estimator table: all frequencies of level <= level at a finite
    place (one shared enumeration), or an explicit sample grid at the
    archimedean place."""
    _require_contracting(H, place, force)
    if place.is_finite:
        if level is None:
            raise ValueError("finite-place tables need a level")
        q = place.prime
        _guard_enumeration(H.modulus, depth, allow_large)
        size = H.modulus ** depth
        B = max(b_constant(H, q), 0)
        hist = _scaled_residue_histogram(H, q, level + B, B, depth)
        scale = Fraction(q) ** B
        values = {}
        for t in frequencies_through_level(q, level):
            total = 0j
            for k, count in hist.items():
                total += count * unit_root((-t.value * k / scale) % 1)
            values[t] = total / size
        return CharFnTable(place, level, values, method="estimate")
    if grid is None:
        raise ValueError("archimedean tables need an explicit grid")
    values = {Fraction(t): charfn_estimate(H, place, Fraction(t), depth,
                                           force=True, allow_large=allow_large)
              for t in grid}
    values.setdefault(Fraction(0), 1 + 0j)
    return CharFnTable(place, None, values, method="estimate")


def _solve_levels(
    p: int,
    branch_data: Sequence[tuple[Fraction, Fraction]],
    q: int,
    level: int,
) -> dict[Frequency, complex]:
    """Solve mu-hat(t) = (1/p) sum_j e_q(-c_j t) mu-hat({r_j t}) level by
    level.

    Unit-norm scales permute the frequencies of a fixed level, so each
    level couples only to itself and to already-solved lower levels; the
    resulting dense systems are strictly diagonally dominant whenever
    some branch scale has norm < 1.
    """
    values: dict[Frequency, complex] = {
        Frequency(q, Fraction(0)): 1 + 0j}
    for m in range(1, level + 1):
        unknowns = [Frequency(q, Fraction(k, q ** m))
                    for k in range(1, q ** m) if k % q]
        index = {t: i for i, t in enumerate(unknowns)}
        size = len(unknowns)
        A = np.eye(size, dtype=complex)
        rhs = np.zeros(size, dtype=complex)
        for i, t in enumerate(unknowns):
            for r, c in branch_data:
                s = Frequency(q, fractional_part(r * t.value, q))
                w = unit_root(fractional_part(-c * t.value, q)) / p
                if s.level == m:
                    A[i, index[s]] -= w
                else:
                    rhs[i] += w * values[s]
        solution = np.linalg.solve(A, rhs)
        for t, val in zip(unknowns, solution):
            values[t] = complex(val)
    return values


def _selfsim_defect(
    p: int,
    branch_data: Sequence[tuple[Fraction, Fraction]],
    q: int,
    values: Mapping[Frequency, complex],
) -> float:
    worst = 0.0
    for t, val in values.items():
        rhs = 0j
        ok = True
        for r, c in branch_data:
            s = Frequency(q, fractional_part(r * t.value, q))
            if s not in values:
                ok = False
                break
            rhs += unit_root(fractional_part(-c * t.value, q)) * values[s]
        if ok:
            worst = max(worst, abs(val - rhs / p))
    return worst


def charfn_solve(H: HydraMap, q: int, level: int) -> CharFnTable:
    """Solve the self-similarity equation for all |t| <= q**level.

    Requires q prime, the map proper, and at the place q both
    max_j |r_j| <= 1 (so scales never raise a frequency's level) and
    rho < 1 (so each level's system is nonsingular).  Residuals of all
    fixed-point equations are verified below 1e-12 before returning.
    """
    if not is_prime(q):
        raise PreconditionError(f"need a prime place, got {q}")
    if level < 0:
        raise ValueError(f"need level >= 0, got {level}")
    if H.branches[0].scale == 1:
        raise PreconditionError(
            "requires a proper map (r_0 != 1): the normalization "
            "mu-hat(0) = 1 anchors the recursion only then")
    report = convergence_report(H, Place.finite(q))
    if not report.max_branch_norm <= 1:
        raise PreconditionError(
            f"requires max_j |r_j|_{q} <= 1, got {report.max_branch_norm}")
    if not report.rho < 1:
        raise PreconditionError(
            f"requires rho < 1 at the place {q}, got rho = {report.rho}")

    branch_data = [(b.scale, b.shift) for b in H.branches]
    values = _solve_levels(H.modulus, branch_data, q, level)
    residual = _selfsim_defect(H.modulus, branch_data, q, values)
    if residual > 1e-12:
        raise RuntimeError(
            f"solver residual {residual} exceeds 1e-12; the level systems "
            "are ill-conditioned for this map")
    return CharFnTable(Place.finite(q), level, values,
                       method="solve", residual=residual)


def selfsim_residual(H: HydraMap, place: Place, table: CharFnTable) -> float:
    """Worst defect of the self-similarity equation over the table.

    Frequencies whose image points {r_j t} (or r_j t at the archimedean
    place) are missing from the table are skipped; at least one entry
    must be evaluable.
    """
    p = H.modulus
    branch_data = [(b.scale, b.shift) for b in H.branches]
    if place.is_finite:
        q = place.prime
        evaluable = any(
            all(Frequency(q, fractional_part(r * t.value, q)) in table.values
                for r, _ in branch_data)
            for t in table.values)
        if not evaluable:
            raise ValueError("no table entry has all its images tabulated")
        return _selfsim_defect(p, branch_data, q, table.values)
    worst = None
    for t, val in table.values.items():
        rhs = 0j
        ok = True
        for r, c in branch_data:
            s = r * t
            if s not in table.values:
                ok = False
                break
            rhs += unit_root((-c * t) % 1) * table.values[s]
        if ok:
            defect = abs(val - rhs / p)
            worst = defect if worst is None else max(worst, defect)
    if worst is None:
        raise ValueError("no table entry has all its images tabulated")
    return worst


# ---------------------------------------------------------------------------
# residue distributions of the numen

@dataclass
class Distribution:
    """P(X = w mod q**exponent) for w over the lattice q**-b * Z_q.

    Residues are rationals k / q**b for 0 <= k < q**(exponent + b).
    Probabilities are real, within 1e-12 of [0, 1], and sum to 1 within
    1e-12.
    """

    base: int
    exponent: int
    b: int
    probabilities: dict[Fraction, float]
    method: str = ""

    def __post_init__(self):
        total = 0.0
        for w, prob in self.probabilities.items():
            if not -1e-12 <= prob <= 1 + 1e-12:
                raise ValueError(f"probability {prob} at {w} out of range")
            total += prob
        if abs(total - 1) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def sorted_items(self) -> list[tuple[Fraction, float]]:
        return sorted(self.probabilities.items())


def prob_inversion(H: HydraMap, q: int, n: int) -> Distribution:
    """Residue distribution by Fourier inversion of the solved table:

        P(X = w mod q**n) = q**-(n+B) sum over |s| <= q**(n+B) of
                            mu-hat_scaled(s) e_q(s k),   w = k / q**B,

    where the solve runs on the rescaled offsets q**B c_j so that the
    rescaled numen q**B X is q-integral (B = 0 leaves the map alone and
    reduces to the plain inversion sum over |t| <= q**n).
    """
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    if not is_prime(q):
        raise PreconditionError(f"need a prime place, got {q}")
    B = max(b_constant(H, q), 0)
    report = convergence_report(H, Place.finite(q))
    if not report.max_branch_norm <= 1:
        raise PreconditionError(
            f"requires max_j |r_j|_{q} <= 1, got {report.max_branch_norm}")
    if not report.rho < 1:
        raise PreconditionError(
            f"requires rho < 1 at the place {q}, got rho = {report.rho}")
    if H.branches[0].scale == 1:
        raise PreconditionError("requires a proper map (r_0 != 1)")

    scale = Fraction(q) ** B
    scaled = [(b.scale, b.shift * scale) for b in H.branches]
    values = _solve_levels(H.modulus, scaled, q, n + B)
    residual = _selfsim_defect(H.modulus, scaled, q, values)
    if residual > 1e-12:
        raise RuntimeError(f"solver residual {residual} exceeds 1e-12")

    size = q ** (n + B)
    probs: dict[Fraction, float] = {}
    for k in range(size):
        total = 0j
        for t, val in values.items():
            total += val * unit_root(t.value * k)
        prob = total / size
        if abs(prob.imag) > 1e-12:
            raise RuntimeError(
                f"inversion produced imaginary mass {prob.imag} at k = {k}")
        probs[Fraction(k) / scale] = prob.real
    return Distribution(q, n, B, probs, method="inversion")


def prob_empirical(
    H: HydraMap,
    q: int,
    n: int,
    depth: int,
    allow_large: bool = False,
) -> Distribution:
    """Exhaustive residue histogram of the numen over all
    modulus**depth truncations, weighted uniformly."""
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    if not is_prime(q):
        raise PreconditionError(f"need a prime place, got {q}")
    _guard_enumeration(H.modulus, depth, allow_large)
    B = max(b_constant(H, q), 0)
    scale = Fraction(q) ** B
    hist = _scaled_residue_histogram(H, q, n + B, B, depth)
    size = H.modulus ** depth
    probs = {Fraction(k) / scale: count / size for k, count in hist.items()}
    return Distribution(q, n, B, probs, method="empirical")


def total_variation(a: Distribution, b: Distribution) -> float:
    """Total-variation distance (half the l1 difference over all
    residues of the common lattice)."""
    if (a.base, a.exponent) != (b.base, b.exponent):
        raise ValueError("distributions live on different residue systems")
    keys = set(a.probabilities) | set(b.probabilities)
    return 0.5 * sum(abs(a.probabilities.get(w, 0.0)
                         - b.probabilities.get(w, 0.0)) for w in keys)
