"""Explicit circle-cylinder arrangements realizing balanced-tree digraphs.

Layout (all circles share one radius R):

* coordinate 2 carries the main pair, two inside circles centered at
  ``((t_first + t_last)/2, +-h)`` whose lens corners sit exactly at the first
  and last level;
* every tree depth gets its own coordinate with a bounding pair of inside
  circles centered ``(mid, +-4R/5)`` (half x1-span 3R/5) and ``n - 1``
  outside "blocking" circles whose vertical tangency sits exactly at the
  branching level.  A blocking band born inside the bounding band splits
  the coordinate slice, so ``n - 1`` blockers give ``n`` components;
* complement-only mode drops the bounding pairs (slices then contain two
  unbounded rays).

For the two-tree construction the depth-1 families of both trees share one
coordinate, so the merge into the root and the branch out of it happen at
distinct points of the same plane.  The first tree's depth-1 coordinate
keeps its bounding pair only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arrangement import Arrangement, CircleConstraint, Side
from .digraph import BalancedTreeSpec, LevelCountMismatch, LeveledDigraph, target_theorem1, target_theorem2
from .numeric import ExactValue, as_fraction, compare, sqrt_exact, sqrt_value, value_to_json

BOUNDING_SPAN = Fraction(3, 5)  # half x1-span of a bounding lens, in units of R
BOUNDING_OFFSET = Fraction(4, 5)  # center offset, sqrt(1 - (3/5)^2)
SPACING_SLACK = Fraction(21, 20)
SPACING_BITS = 20
MAX_DOUBLINGS = 16

BOUNDED = "bounded"
COMPLEMENT_ONLY = "complement-only"


class SynthesisError(ValueError):
    pass


class InvalidInstance(SynthesisError):
    pass


class SynthesisFailed(SynthesisError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


@dataclass(frozen=True)
class TheoremInstance:
    theorem: int
    specs: tuple
    levels: tuple
    radius: Fraction | None = None  # None = automatic search
    mode: str = BOUNDED

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(s if isinstance(s, BalancedTreeSpec) else BalancedTreeSpec(tuple(s)) for s in self.specs))
        object.__setattr__(self, "levels", tuple(as_fraction(t) for t in self.levels))
        if self.radius is not None:
            object.__setattr__(self, "radius", as_fraction(self.radius))
            if self.radius <= 0:
                raise InvalidInstance("radius must be positive")
        if self.theorem not in (1, 2):
            raise InvalidInstance("theorem must be 1 or 2")
        if self.mode not in (BOUNDED, COMPLEMENT_ONLY):
            raise InvalidInstance(f"unknown mode {self.mode!r}")
        want = 1 if self.theorem == 1 else 2
        if len(self.specs) != want:
            raise InvalidInstance(f"theorem {self.theorem} takes {want} tree spec(s)")
        if len(self.levels) != self.level_count():
            raise LevelCountMismatch(f"expected {self.level_count()} levels, got {len(self.levels)}")
        if any(a >= b for a, b in zip(self.levels, self.levels[1:])):
            raise InvalidInstance("levels must be strictly increasing")

    def level_count(self) -> int:
        if self.theorem == 1:
            return self.specs[0].depth + 2
        return self.specs[0].depth + self.specs[1].depth + 1

    @property
    def ambient_dim(self) -> int:
        return 2 + sum(s.depth for s in self.specs)

    def expected_circle_count(self) -> int:
        per_depth = sum(n + 1 for s in self.specs for n in s.children)
        if self.mode == COMPLEMENT_ONLY:
            per_depth -= 2 * sum(s.depth for s in self.specs)
        return per_depth + 2

    def target(self) -> LeveledDigraph:
        if self.theorem == 1:
            return target_theorem1(self.specs[0], self.levels)
        return target_theorem2(self.specs[0], self.specs[1], self.levels)

    def to_json(self) -> dict:
        out = {
            "theorem": self.theorem,
            "children": list(self.specs[0].children),
            "levels": [str(t) for t in self.levels],
            "radius": "auto" if self.radius is None else str(self.radius),
            "mode": self.mode,
        }
        if self.theorem == 2:
            out["children2"] = list(self.specs[1].children)
        return out

    @classmethod
    def from_json(cls, obj) -> "TheoremInstance":
        try:
            theorem = int(obj["theorem"])
            specs = [BalancedTreeSpec(tuple(obj["children"]))]
            if theorem == 2:
                specs.append(BalancedTreeSpec(tuple(obj["children2"])))
            radius = obj.get("radius", "auto")
            return cls(
                theorem,
                tuple(specs),
                tuple(Fraction(str(t)) for t in obj["levels"]),
                None if radius in (None, "auto") else Fraction(str(radius)),
                obj.get("mode", BOUNDED),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInstance):
                raise
            raise InvalidInstance(f"malformed instance: {exc}") from None


@dataclass(frozen=True)
class Family:
    """Blocking circles of one tree depth."""

    tree: int
    depth: int
    children: int
    coord: int
    level_index: int
    direction: int  # +1: band grows to the right of the tangency, -1: to the left

    def reach(self, levels) -> Fraction:
        """x1-distance from the tangency to the far end of the extent."""
        t = levels[self.level_index]
        return levels[-1] - t if self.direction > 0 else t - levels[0]


def families(inst: TheoremInstance) -> tuple[list[Family], list[int]]:
    """Blocking families plus the coordinates that get a bounding pair."""
    fams, bounding = [], []
    if inst.theorem == 1:
        for i, n in enumerate(inst.specs[0].children, start=1):
            fams.append(Family(1, i, n, 2 + i, i, +1))
            bounding.append(2 + i)
        return fams, bounding
    d1 = inst.specs[0].depth
    for i, n in enumerate(inst.specs[0].children, start=1):
        bounding.append(2 + i)
    for i, n in enumerate(inst.specs[1].children, start=1):
        bounding.append(2 + d1 + i)
    shared = 2 + d1 + 1
    for i, n in enumerate(inst.specs[0].children, start=1):
        fams.append(Family(1, i, n, shared if i == 1 else 2 + i, d1 + 1 - i, -1))
    for i, n in enumerate(inst.specs[1].children, start=1):
        fams.append(Family(2, i, n, 2 + d1 + i, d1 + i - 1, +1))
    return fams, bounding


def _band_reach(delta: Fraction, radius: Fraction) -> Fraction:
    """Square of the largest blocking half-width over a reach ``delta``."""
    return delta * (2 * radius - delta)


def _spacing(omega_sq: Fraction) -> Fraction:
    """Dyadic spacing just above ``2 * SPACING_SLACK * omega``."""
    target = (2 * SPACING_SLACK) ** 2 * omega_sq
    scale = 1 << SPACING_BITS
    n = math.isqrt(math.ceil(target * scale * scale))
    while Fraction(n * n, scale * scale) <= target:
        n += 1
    return Fraction(n, scale)


def _offsets(count: int, spacing: Fraction, shift: Fraction = Fraction(0)) -> list[Fraction]:
    return [(j - Fraction(count - 1, 2)) * spacing + shift for j in range(count)]


@dataclass
class Layout:
    radius: Fraction
    h: ExactValue
    spacing: dict = field(default_factory=dict)  # family index -> spacing
    offsets: dict = field(default_factory=dict)  # family index -> centers' second coordinate
    feasible: bool = True
    reasons: list = field(default_factory=list)


def layout(inst: TheoremInstance, radius, spacing_scale: dict | None = None) -> Layout:
    """Derive every parameter for radius ``radius`` and check the placement bounds exactly."""
    radius = as_fraction(radius)
    t = inst.levels
    half = (t[-1] - t[0]) / 2
    reasons = []
    if radius <= half:
        raise SynthesisFailed(f"radius {radius} does not exceed the half-extent {half}")
    h = sqrt_exact(radius * radius - half * half)
    fams, _ = families(inst)
    lay = Layout(radius, h)
    if radius < 2 * half:
        reasons.append(f"radius {radius} below the extent length {2 * half}")
    for k, fam in enumerate(fams):
        reach = fam.reach(t)
        omega_sq = _band_reach(reach, radius)
        gap = _spacing(omega_sq) * (spacing_scale or {}).get(k, 1)
        lay.spacing[k] = gap
        lay.offsets[k] = _offsets(fam.children - 1, gap)
    # depth-1 families sharing a plane must not put two tangency points together
    shared = [k for k, f in enumerate(fams) if f.depth == 1]
    if inst.theorem == 2 and len(shared) == 2:
        k1, k2 = shared
        taken = set(lay.offsets[k2])
        for denom in range(3, 200, 2):
            shift = lay.spacing[k2] / denom
            cand = _offsets(fams[k1].children - 1, lay.spacing[k1], shift)
            if not taken.intersection(cand):
                lay.offsets[k1] = cand
                break
    if inst.mode == BOUNDED:
        # usable half-height of every bounding lens over the extent
        height = sqrt_value(radius * radius - half * half) - BOUNDING_OFFSET * radius
        if compare(height, 0) <= 0 or BOUNDING_SPAN * radius <= half:
            reasons.append("bounding lenses do not cover the extent")
        else:
            for k, fam in enumerate(fams):
                if not lay.offsets[k]:
                    continue
                top = max(abs(b) for b in lay.offsets[k])
                omega = sqrt_value(_band_reach(fam.reach(t), radius))
                if compare(top + omega, height) >= 0:
                    reasons.append(f"tree {fam.tree} depth {fam.depth}: blocking bands leave the bounding lens")
    lay.reasons = reasons
    lay.feasible = not reasons
    return lay


def build_arrangement(inst: TheoremInstance, radius, spacing_scale: dict | None = None) -> tuple[Arrangement, Layout]:
    lay = layout(inst, radius, spacing_scale)
    R = lay.radius
    t = inst.levels
    mid = (t[0] + t[-1]) / 2
    fams, bounding = families(inst)
    cons: list[CircleConstraint] = []

    def add(coord, a, b, side):
        cons.append(CircleConstraint(f"S{len(cons) + 1}", coord, a, b, R, side))

    add(2, mid, lay.h, Side.INSIDE)
    add(2, mid, -lay.h, Side.INSIDE)
    by_coord = {}
    for k, fam in enumerate(fams):
        by_coord.setdefault(fam.coord, []).append(k)
    for coord in range(3, inst.ambient_dim + 1):
        if inst.mode == BOUNDED and coord in bounding:
            add(coord, mid, BOUNDING_OFFSET * R, Side.INSIDE)
            add(coord, mid, -BOUNDING_OFFSET * R, Side.INSIDE)
        for k in by_coord.get(coord, []):
            fam = fams[k]
            tb = t[fam.level_index]
            for b in lay.offsets[k]:
                add(coord, tb + fam.direction * R, b, Side.OUTSIDE)
    return Arrangement(inst.ambient_dim, tuple(cons)), lay


def lower_bound_radius(inst: TheoremInstance) -> Fraction:
    """Closed-form radius above which every placement bound holds.

    Uses ``R >= L`` (extent length), the blocking half-width bound
    ``omega <= sqrt(2 L R)`` and the bounding half-height bound
    ``H >= R/5 - L/4``; stacking ``c`` blockers needs
    ``kappa * sqrt(2 L R) <= R/5 - L/4`` with ``kappa = 1.05 (c - 1) + 2``.
    """
    t = inst.levels
    length = t[-1] - t[0]
    fams, _ = families(inst)
    blockers = [f.children - 1 for f in fams if f.children > 1]
    if not blockers or inst.mode == COMPLEMENT_ONLY:
        return length
    kappa = max(SPACING_SLACK * (c - 1) + 2 for c in blockers)
    # u = sqrt(R) solves u^2/5 - kappa sqrt(2L) u - L/4 = 0
    b = float(kappa) * math.sqrt(2 * float(length))
    u = 2.5 * (b + math.sqrt(b * b + float(length) / 5))
    bound = Fraction(math.ceil(u * u * 1.0001))
    return max(length, bound)


def report_json(inst: TheoremInstance, arr: Arrangement, lay: Layout, attempts: list) -> dict:
    fams, _ = families(inst)
    return {
        "instance": inst.to_json(),
        "radius": str(lay.radius),
        "h": value_to_json(lay.h),
        "ambient_dim": arr.ambient_dim,
        "circle_count": len(arr.constraints),
        "lower_bound_radius": str(lower_bound_radius(inst)),
        "families": [
            {
                "tree": f.tree,
                "depth": f.depth,
                "children": f.children,
                "coord": f.coord,
                "level": str(inst.levels[f.level_index]),
                "direction": f.direction,
                "spacing": str(lay.spacing[k]),
                "offsets": [str(b) for b in lay.offsets[k]],
            }
            for k, f in enumerate(fams)
        ],
        "attempts": attempts,
    }


@dataclass
class Synthesis:
    arrangement: Arrangement
    layout: Layout
    report: dict


def synthesize(inst: TheoremInstance, verify: bool = True) -> Synthesis:
    """Build an arrangement for ``inst``; with automatic radius, verify and double on failure."""
    from .validate import verify_theorem

    if inst.radius is not None:
        arr, lay = build_arrangement(inst, inst.radius)
        if not lay.feasible:
            raise SynthesisFailed("; ".join(lay.reasons), {"radius": str(inst.radius)})
        attempts = [{"radius": str(inst.radius), "verified": None}]
        if verify:
            rep = verify_theorem(inst, arr)
            attempts[0]["verified"] = rep.overall
            if not rep.overall:
                raise SynthesisFailed(f"radius {inst.radius} fails verification: {rep.first_failure()}", rep.to_json())
        return Synthesis(arr, lay, report_json(inst, arr, lay, attempts))

    radius = lower_bound_radius(inst)
    attempts = []
    last_failure = None
    for _ in range(MAX_DOUBLINGS + 1):
        arr, lay = build_arrangement(inst, radius)
        rec = {"radius": str(radius), "feasible": lay.feasible}
        attempts.append(rec)
        if lay.feasible:
            if not verify:
                return Synthesis(arr, lay, report_json(inst, arr, lay, attempts))
            rep = verify_theorem(inst, arr)
            rec["verified"] = rep.overall
            if rep.overall:
                return Synthesis(arr, lay, report_json(inst, arr, lay, attempts))
            last_failure = rep.first_failure()
        else:
            last_failure = "; ".join(lay.reasons)
        radius *= 2
    raise SynthesisFailed(f"no radius up to {radius / 2} verifies: {last_failure}", {"attempts": attempts})
