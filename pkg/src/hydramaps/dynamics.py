"""Integer orbits of hydra maps and the cycle/periodic-point correspondence.

Orbit iteration uses a visited-set to detect cycles; unresolved orbits
are reported as 'escaped' past a magnitude bound or step budget, never
as divergent.  Each integer cycle corresponds to the rational
n / (1 - p**len) built from its branch word, at which the numen takes a
value inside the cycle; correspondence_roundtrip certifies that both
ways and reverse_scan enumerates all short words to recover every
integer periodic point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NotPIntegralError, PreconditionError
from .exact import Place, abs_at_place, as_fraction
from .hydra import DigitString, HydraMap, classify, compose_branches, digit_value
from .numen import find_contracting_place, numen_of_rational, periodic_word_value

STATUS_PERIODIC = "periodic"
STATUS_PREPERIODIC = "preperiodic"
STATUS_ESCAPED = "escaped"

DEFAULT_MAX_STEPS = 10_000
DEFAULT_ESCAPE_BOUND = 10 ** 18


def _canonical_rotation(cycle: tuple[int, ...]) -> tuple[int, ...]:
    i = cycle.index(min(cycle))
    return cycle[i:] + cycle[:i]


@dataclass(frozen=True)
class OrbitReport:
    """Forward orbit of one integer start.

    tail holds the strictly pre-cycle iterates in visit order; cycle is
    rotated to start at its minimum element (the map sends each cycle
    entry to the next, wrapping around).  Escaped orbits carry the full
    bounded prefix in tail and an empty cycle.
    """

    start: int
    status: str
    tail: tuple[int, ...]
    cycle: tuple[int, ...]
    steps: int
    escape_bound: int

    @property
    def elements(self) -> tuple[int, ...]:
        return self.tail + self.cycle


def orbit(
    H: HydraMap,
    start: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    escape_bound: int = DEFAULT_ESCAPE_BOUND,
) -> OrbitReport:
    """Iterate until a repeat, the magnitude bound, or the step budget.

    'escaped' is a bounded-resources statement about this run, not a
    divergence claim.
    """
    seen = {start: 0}
    seq = [start]
    v = start
    for step in range(1, max_steps + 1):
        v = H.apply(v)
        if v in seen:
            idx = seen[v]
            status = STATUS_PERIODIC if idx == 0 else STATUS_PREPERIODIC
            return OrbitReport(
                start=start,
                status=status,
                tail=tuple(seq[:idx]),
                cycle=_canonical_rotation(tuple(seq[idx:])),
                steps=step,
                escape_bound=escape_bound,
            )
        if abs(v) > escape_bound:
            return OrbitReport(start, STATUS_ESCAPED, tuple(seq), (),
                               step, escape_bound)
        seen[v] = len(seq)
        seq.append(v)
    return OrbitReport(start, STATUS_ESCAPED, tuple(seq), (),
                       max_steps, escape_bound)


def find_cycles(
    H: HydraMap,
    lo: int,
    hi: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    escape_bound: int = DEFAULT_ESCAPE_BOUND,
) -> set[tuple[int, ...]]:
    """All cycles reached from starts in [lo, hi], canonically rotated.

    Each cycle is re-verified by applying the map around it once.
    """
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    cycles: set[tuple[int, ...]] = set()
    for start in range(lo, hi + 1):
        report = orbit(H, start, max_steps, escape_bound)
        if report.cycle and report.cycle not in cycles:
            _verify_cycle(H, report.cycle)
            cycles.add(report.cycle)
    return cycles


def _verify_cycle(H: HydraMap, cycle: tuple[int, ...]) -> None:
    for i, v in enumerate(cycle):
        if H.apply(v) != cycle[(i + 1) % len(cycle)]:
            raise AssertionError(f"not a cycle of the map: {cycle}")


def cycle_string(H: HydraMap, cycle: tuple[int, ...]) -> DigitString:
    """Branch word fixing cycle[0]: residues along the cycle, reversed,
    so the innermost (index-0) entry is the start element's residue.

    Applying the branches innermost-first replays the cycle from
    cycle[0] back to itself.
    """
    _verify_cycle(H, cycle)
    entries = tuple(reversed([v % H.modulus for v in cycle]))
    string = DigitString(H.modulus, entries)
    if compose_branches(H, string)(cycle[0]) != cycle[0]:
        raise AssertionError(f"cycle word does not fix {cycle[0]}")
    return string


@dataclass(frozen=True)
class CorrespondenceCertificate:
    """One cycle's periodic-point witness.

    z = n / (1 - p**len(word)) repeats the cycle's branch word, and the
    numen at z equals the cycle's start element.  verified also demands
    that z be a p-integral rational outside the nonnegative integers.
    The fixed point {0} is reported with a note and exempted from that
    exclusion.
    """

    cycle: tuple[int, ...]
    string: DigitString
    n: int
    z: Fraction
    x_value: Fraction | None
    verified: bool
    place: Place | None
    note: str = ""


@dataclass(frozen=True)
class ScanReport:
    """Result of enumerating all branch words up to a length.

    integer_values are the integer fixed points found, each the numen
    value at the word's repeating rational; words whose composite scale
    is 1 have no unique fixed point and are skipped (skipped counts
    them).
    """

    max_length: int
    words_scanned: int
    skipped: int
    integer_values: tuple[int, ...]
    witness_words: dict[int, DigitString] = field(compare=False, hash=False,
                                                  default_factory=dict)


def reverse_scan(H: HydraMap, max_length: int) -> ScanReport:
    """Fixed points of every branch word of length <= max_length.

    Depth-first over the word tree, extending the affine composite
    incrementally: appending digit j on the inside sends (scale, shift)
    to (scale*r_j, scale*c_j + shift).
    """
    if max_length < 1:
        raise ValueError(f"need max_length >= 1, got {max_length}")
    p = H.modulus
    branches = H.branches
    integers: dict[int, DigitString] = {}
    scanned = 0
    skipped = 0

    stack = [(Fraction(1), Fraction(0), ())]
    while stack:
        scale, shift, word = stack.pop()
        if word:
            scanned += 1
            if scale == 1:
                skipped += 1
            else:
                value = shift / (1 - scale)
                if value.denominator == 1:
                    v = int(value)
                    if v not in integers or len(word) < len(integers[v].entries):
                        integers[v] = DigitString(p, word)
        if len(word) < max_length:
            for j in range(p):
                b = branches[j]
                stack.append((scale * b.scale, scale * b.shift + shift,
                              word + (j,)))
    return ScanReport(
        max_length=max_length,
        words_scanned=scanned,
        skipped=skipped,
        integer_values=tuple(sorted(integers)),
        witness_words=integers,
    )


@dataclass(frozen=True)
class CorrespondenceResult:
    certificates: tuple[CorrespondenceCertificate, ...]
    scan: ScanReport
    scan_consistent: bool
    stray_values: tuple[int, ...]


def correspondence_roundtrip(
    H: HydraMap,
    place: Place | None,
    lo: int,
    hi: int,
    scan_length: int = 12,
    max_steps: int = DEFAULT_MAX_STEPS,
    escape_bound: int = DEFAULT_ESCAPE_BOUND,
) -> CorrespondenceResult:
    """Certify every cycle found in [lo, hi] and cross-check by scan.

    Requires an integral, proper, centered map.  Each cycle (except the
    fixed point 0, which is its own special case) is certified through
    its branch word as described on CorrespondenceCertificate; the given
    place is tried first for the contraction hypothesis and a suitable
    one is searched when it fails.  The reverse scan then enumerates all
    words up to scan_length; every integer fixed point it finds must lie
    on a discovered cycle, and stray values (integer periodic points
    whose cycles were not reached from [lo, hi]) are reported.
    """
    props = classify(H)
    if not (props.integral and props.proper and props.centered):
        raise PreconditionError(
            "correspondence requires an integral, proper, centered map; "
            f"got integral={props.integral}, proper={props.proper}, "
            f"centered={props.centered}")

    cycles = sorted(find_cycles(H, lo, hi, max_steps, escape_bound))
    certificates = []
    covered: set[int] = set()
    for cycle in cycles:
        covered.update(cycle)
        certificates.append(_certify(H, cycle, place))

    scan = reverse_scan(H, scan_length)
    stray = tuple(v for v in scan.integer_values if v not in covered)
    return CorrespondenceResult(
        certificates=tuple(certificates),
        scan=scan,
        scan_consistent=not stray,
        stray_values=stray,
    )


def _certify(
    H: HydraMap, cycle: tuple[int, ...], place: Place | None,
) -> CorrespondenceCertificate:
    p = H.modulus
    if cycle == (0,):
        return CorrespondenceCertificate(
            cycle=cycle,
            string=DigitString(p, (0,)),
            n=0,
            z=Fraction(0),
            x_value=Fraction(0),
            verified=True,
            place=None,
            note="fixed point 0: z = 0 lies in the nonnegative integers "
                 "and is exempt from the exclusion",
        )
    string = cycle_string(H, cycle)
    n = digit_value(string)
    z = Fraction(n, 1 - p ** len(string.entries))

    scale = compose_branches(H, string).scale
    chosen = place
    if chosen is None or not as_fraction(abs_at_place(scale, chosen)) < 1:
        chosen = find_contracting_place(scale)
    if chosen is None:
        return CorrespondenceCertificate(
            cycle=cycle, string=string, n=n, z=z, x_value=None,
            verified=False, place=None,
            note=f"no place contracts the cycle word (scale {scale})")

    try:
        x = numen_of_rational(H, z, place=chosen)
    except (PreconditionError, NotPIntegralError) as exc:
        return CorrespondenceCertificate(
            cycle=cycle, string=string, n=n, z=z, x_value=None,
            verified=False, place=chosen,
            note=f"numen evaluation failed: {exc}")
    ok = (
        x == periodic_word_value(H, string)
        and x in cycle
        and not (z.denominator == 1 and z >= 0)
        and math.gcd(z.denominator, p) == 1
    )
    return CorrespondenceCertificate(
        cycle=cycle, string=string, n=n, z=z, x_value=x,
        verified=ok, place=chosen)


@dataclass(frozen=True)
class OrbitClass:
    """One block of the orbit-intersection partition.

    label is the canonical cycle the block's orbits reach, or the
    string 'escaped' when they all left the budget unresolved.
    """

    label: tuple[int, ...] | str
    members: tuple[int, ...]


def orbit_class_partition(
    H: HydraMap,
    lo: int,
    hi: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    escape_bound: int = DEFAULT_ESCAPE_BOUND,
) -> list[OrbitClass]:
    """Partition [lo, hi] by 'bounded forward orbits intersect'.

    Two starts land in one block exactly when their iterate sets (up to
    the step/magnitude budget) share an element; intersecting orbits
    merge tails, so each block carries a single consistent label.
    Blocks are sorted by minimum member.
    """
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    window = range(lo, hi + 1)
    parent = {x: x for x in window}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    claim: dict[int, int] = {}
    outcome: dict[int, tuple] = {}
    for x in window:
        v = x
        seen = {x: 0}
        seq = [x]
        claimant = claim.setdefault(x, x)
        if claimant != x:
            union(x, claimant)
            outcome[x] = outcome[claimant]
            continue
        result = None
        for _ in range(max_steps):
            v = H.apply(v)
            if v in claim and claim[v] != x:
                # shares an iterate with an earlier start: same fate
                union(x, claim[v])
                result = outcome[claim[v]]
                break
            claim[v] = x
            if v in seen:
                result = ("cycle", _canonical_rotation(tuple(seq[seen[v]:])))
                break
            if abs(v) > escape_bound:
                result = ("escaped",)
                break
            seen[v] = len(seq)
            seq.append(v)
        outcome[x] = result if result is not None else ("escaped",)

    blocks: dict[int, list[int]] = {}
    for x in window:
        blocks.setdefault(find(x), []).append(x)
    classes = []
    for members in blocks.values():
        fates = {outcome[m] for m in members}
        if len(fates) != 1:
            raise AssertionError(f"inconsistent fates in one block: {fates}")
        fate = fates.pop()
        label = fate[1] if fate[0] == "cycle" else STATUS_ESCAPED
        classes.append(OrbitClass(label, tuple(sorted(members))))
    classes.sort(key=lambda c: c.members[0])
    return classes
