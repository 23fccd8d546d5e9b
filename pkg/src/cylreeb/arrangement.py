"""Circle-cylinder constraints in R^k, coordinate slices and sweep events.

A constraint couples the sweep coordinate x1 with one other coordinate
x_m through the circle ``(x1 - a)^2 + (x_m - b)^2 = R^2``.  ``inside``
keeps the disk side, ``outside`` the complement.  All sets here are
closed (non-strict inequalities).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .numeric import (
    Certified,
    ExactValue,
    PrecisionExhausted,
    abs_value,
    as_fraction,
    coerce,
    compare,
    sign,
    solve_quadratic_values,
    sqrt_value,
    value_from_json,
    value_to_json,
)

MAX_DIM = 64
MAX_CONSTRAINTS = 512
MAX_COMPONENTS = 4096


class ArrangementError(ValueError):
    pass


class IdenticalCircles(ArrangementError):
    pass


class NonGenericEvent(ArrangementError):
    """Two events could not be told apart although they are not known equal."""


class Side(str, Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class CircleConstraint:
    id: str
    coord: int
    a: Fraction
    b: ExactValue
    radius: Fraction
    side: Side

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", coerce(self.b))
        object.__setattr__(self, "radius", as_fraction(self.radius))
        object.__setattr__(self, "side", Side(self.side))
        if self.radius <= 0:
            raise ArrangementError(f"constraint {self.id}: radius must be positive")

    @property
    def inside(self) -> bool:
        return self.side is Side.INSIDE

    def value(self, t, y) -> ExactValue:
        """The defining polynomial ``(t-a)^2 + (y-b)^2 - R^2``."""
        dt = coerce(t) - self.a
        dy = coerce(y) - self.b
        return dt * dt + dy * dy - self.radius * self.radius

    def tangencies(self) -> tuple[Fraction, Fraction]:
        return self.a - self.radius, self.a + self.radius


@dataclass(frozen=True)
class Arrangement:
    ambient_dim: int
    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        k = self.ambient_dim
        if not 2 <= k <= MAX_DIM:
            raise ArrangementError(f"ambient dimension {k} outside [2, {MAX_DIM}]")
        if len(self.constraints) > MAX_CONSTRAINTS:
            raise ArrangementError(f"more than {MAX_CONSTRAINTS} constraints")
        ids = [c.id for c in self.constraints]
        if len(set(ids)) != len(ids):
            raise ArrangementError("constraint ids must be unique")
        for c in self.constraints:
            if not 2 <= c.coord <= k:
                raise ArrangementError(f"constraint {c.id}: coordinate {c.coord} outside [2, {k}]")

    def coords(self) -> range:
        return range(2, self.ambient_dim + 1)

    def on(self, m: int) -> list[CircleConstraint]:
        return [c for c in self.constraints if c.coord == m]

    def get(self, cid: str) -> CircleConstraint:
        for c in self.constraints:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def has_inside(self) -> bool:
        return any(c.inside for c in self.constraints)

    def without(self, cid: str) -> "Arrangement":
        return Arrangement(self.ambient_dim, tuple(c for c in self.constraints if c.id != cid))


# ---------------------------------------------------------------------------
# bands and slices


@dataclass(frozen=True)
class Band:
    """One circle's cut of coordinate ``coord`` at sweep value ``t``.

    ``active`` is false when ``|t - a| > R``.  Otherwise ``lo = b - w`` and
    ``hi = b + w``; inside constraints allow ``[lo, hi]``, outside ones
    forbid the open ``(lo, hi)``.
    """

    constraint: CircleConstraint
    t: ExactValue
    active: bool
    lo: ExactValue | None = None
    hi: ExactValue | None = None

    def allowed(self) -> list[tuple]:
        """Allowed set as closed intervals, ``None`` standing for infinity."""
        if self.constraint.inside:
            return [(self.lo, self.hi)] if self.active else []
        if not self.active or compare(self.lo, self.hi) == 0:
            return [(None, None)]
        return [(None, self.lo), (self.hi, None)]


def half_width(c: CircleConstraint, t, known: ExactValue | None = None) -> ExactValue | None:
    """``sqrt(R^2 - (t-a)^2)`` or None when the circle does not reach ``t``."""
    t = coerce(t)
    if known is not None:
        return known
    lo, hi = c.tangencies()
    if compare(t, lo) < 0 or compare(t, hi) > 0:
        return None
    if compare(t, lo) == 0 or compare(t, hi) == 0:
        return Fraction(0)
    dt = t - c.a
    return sqrt_value(c.radius * c.radius - dt * dt)


def band(c: CircleConstraint, t, known_width: ExactValue | None = None) -> Band:
    w = half_width(c, t, known_width)
    if w is None:
        return Band(c, coerce(t), False)
    return Band(c, coerce(t), True, c.b - w, c.b + w)


@dataclass(frozen=True)
class Interval:
    """Closed interval; ``None`` endpoints are infinite.

    ``lo_src``/``hi_src`` name the boundary that supplies each endpoint as
    ``(constraint id, -1 | +1)`` meaning ``b - w`` or ``b + w``.
    """

    lo: ExactValue | None
    hi: ExactValue | None
    lo_src: tuple | None = None
    hi_src: tuple | None = None

    def contains(self, y) -> bool:
        if self.lo is not None and compare(self.lo, y) > 0:
            return False
        if self.hi is not None and compare(y, self.hi) > 0:
            return False
        return True

    def is_point(self) -> bool:
        return self.lo is not None and self.hi is not None and compare(self.lo, self.hi) == 0


@dataclass(frozen=True)
class CoordinateSlice:
    coord: int
    t: ExactValue
    components: tuple

    def __len__(self):
        return len(self.components)

    def locate(self, y) -> int | None:
        for i, comp in enumerate(self.components):
            if comp.contains(y):
                return i
        return None


def _le(x, y) -> bool:
    """``x <= y`` with None as -inf on the left and +inf on the right."""
    if x is None or y is None:
        return True
    return compare(x, y) <= 0


def slice_coord(arr: Arrangement, m: int, t, known_widths: Mapping | None = None) -> CoordinateSlice:
    """Allowed subset of coordinate ``m`` at sweep value ``t``."""
    if m not in arr.coords():
        raise ArrangementError(f"coordinate {m} not in 2..{arr.ambient_dim}")
    t = coerce(t)
    known_widths = known_widths or {}
    comps = [Interval(None, None)]
    bands = [band(c, t, known_widths.get(c.id)) for c in arr.on(m)]
    for bd in bands:
        c = bd.constraint
        if not c.inside:
            continue
        if not bd.active:
            return CoordinateSlice(m, t, ())
        nxt = []
        for comp in comps:
            lo, lo_src = comp.lo, comp.lo_src
            if lo is None or compare(bd.lo, lo) > 0:
                lo, lo_src = bd.lo, (c.id, -1)
            hi, hi_src = comp.hi, comp.hi_src
            if hi is None or compare(bd.hi, hi) < 0:
                hi, hi_src = bd.hi, (c.id, 1)
            if compare(lo, hi) <= 0:
                nxt.append(Interval(lo, hi, lo_src, hi_src))
        comps = nxt
        if not comps:
            return CoordinateSlice(m, t, ())
    for bd in bands:
        c = bd.constraint
        if c.inside or not bd.active:
            continue
        flo, fhi = bd.lo, bd.hi
        if compare(flo, fhi) == 0:
            continue
        nxt = []
        for comp in comps:
            if comp.lo is not None and compare(fhi, comp.lo) <= 0:
                nxt.append(comp)
            elif comp.hi is not None and compare(comp.hi, flo) <= 0:
                nxt.append(comp)
            else:
                if _le(comp.lo, flo):
                    nxt.append(Interval(comp.lo, flo, comp.lo_src, (c.id, -1)))
                if _le(fhi, comp.hi):
                    nxt.append(Interval(fhi, comp.hi, (c.id, 1), comp.hi_src))
        comps = nxt
        if len(comps) > MAX_COMPONENTS:
            raise ArrangementError(f"coordinate {m}: more than {MAX_COMPONENTS} slice components")
        if not comps:
            break
    return CoordinateSlice(m, t, tuple(comps))


def endpoint_value(arr: Arrangement, src: tuple | None, t, known_widths: Mapping | None = None):
    """Evaluate a boundary ``(cid, +-1)`` at sweep value ``t`` (None stays infinite)."""
    if src is None:
        return None
    cid, sgn = src
    c = arr.get(cid)
    w = half_width(c, t, (known_widths or {}).get(cid))
    if w is None:
        raise ArrangementError(f"boundary of {cid} does not reach t={t}")
    return c.b + w if sgn > 0 else c.b - w


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class Tangency:
    cid: str
    which: str  # "left" or "right"


@dataclass(frozen=True)
class PairCrossing:
    cid1: str
    cid2: str
    y: ExactValue
    root: int
    tangent: bool = False


@dataclass(frozen=True)
class Synthetic:
    label: str


@dataclass(frozen=True)
class SweepEvent:
    t: ExactValue
    provenance: tuple = field(default_factory=tuple)

    def known_widths(self, arr: Arrangement) -> dict:
        """Half-widths fixed exactly by the event's own identity."""
        out = {}
        for p in self.provenance:
            if isinstance(p, Tangency):
                out.setdefault(p.cid, Fraction(0))
            elif isinstance(p, PairCrossing):
                for cid in (p.cid1, p.cid2):
                    out.setdefault(cid, abs_value(p.y - arr.get(cid).b))
        return out

    def constraint_ids(self) -> set:
        ids = set()
        for p in self.provenance:
            if isinstance(p, Tangency):
                ids.add(p.cid)
            elif isinstance(p, PairCrossing):
                ids.update((p.cid1, p.cid2))
        return ids


def circle_crossings(c1: CircleConstraint, c2: CircleConstraint) -> list[tuple]:
    """Intersection points ``(x1, y)`` of two circles in the same plane."""
    if c1.coord != c2.coord:
        raise ArrangementError("circles live in different coordinate planes")
    alpha = 2 * (c2.a - c1.a)
    beta = 2 * (c2.b - c1.b)
    k = c2.a * c2.a - c1.a * c1.a + c2.b * c2.b - c1.b * c1.b - c2.radius**2 + c1.radius**2
    sb = sign(beta)
    if alpha == 0 and sb == 0:
        if c1.radius == c2.radius:
            raise IdenticalCircles(f"{c1.id} and {c2.id} are the same circle")
        return []
    if sb == 0:
        x = k / alpha
        d = c1.radius**2 - (x - c1.a) ** 2
        if d < 0:
            return []
        if d == 0:
            return [(x, c1.b)]
        r = sqrt_value(d)
        return [(x, c1.b - r), (x, c1.b + r)]
    y0 = k / beta
    lam = -alpha / beta
    off = y0 - c1.b
    qa = 1 + lam * lam
    qb = -2 * c1.a + 2 * lam * off
    qc = c1.a * c1.a + off * off - c1.radius**2
    return [(x, y0 + lam * x) for x in solve_quadratic_values(qa, qb, qc)]


def _raw_events(arr: Arrangement) -> list[SweepEvent]:
    out = []
    for c in arr.constraints:
        lo, hi = c.tangencies()
        out.append(SweepEvent(lo, (Tangency(c.id, "left"),)))
        out.append(SweepEvent(hi, (Tangency(c.id, "right"),)))
    for m in arr.coords():
        cs = arr.on(m)
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                pts = circle_crossings(cs[i], cs[j])
                tangent = len(pts) == 1
                for r, (x, y) in enumerate(pts):
                    out.append(SweepEvent(x, (PairCrossing(cs[i].id, cs[j].id, y, r, tangent),)))
    return out


def merge_events(evs: Iterable[SweepEvent]) -> list[SweepEvent]:
    from functools import cmp_to_key

    def cmp(e1, e2):
        try:
            return compare(e1.t, e2.t)
        except PrecisionExhausted:
            raise NonGenericEvent(f"events {e1.provenance} and {e2.provenance} cannot be separated") from None

    merged: list[SweepEvent] = []
    for e in sorted(evs, key=cmp_to_key(cmp)):
        if merged and cmp(merged[-1], e) == 0:
            last = merged[-1]
            t = last.t if not isinstance(last.t, Certified) else e.t
            merged[-1] = SweepEvent(t, last.provenance + e.provenance)
        else:
            merged.append(e)
    return merged


def events(arr: Arrangement) -> list[SweepEvent]:
    """Sorted, merged sweep events (tangencies and same-plane crossings)."""
    return merge_events(_raw_events(arr))


# ---------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class Containment:
    inside: bool
    on_boundary: tuple
    violated: tuple

    @property
    def interior(self) -> bool:
        return self.inside and not self.on_boundary


def contains(arr: Arrangement, point: Sequence) -> Containment:
    """Closure membership of ``point = (x1, ..., xk)`` with per-constraint detail."""
    if len(point) != arr.ambient_dim:
        raise ArrangementError(f"point needs {arr.ambient_dim} coordinates")
    pt = [coerce(x) for x in point]
    on, bad = [], []
    for c in arr.constraints:
        s = sign(c.value(pt[0], pt[c.coord - 1]))
        if s == 0:
            on.append(c.id)
        elif (s > 0) == c.inside:
            bad.append(c.id)
    return Containment(not bad, tuple(on), tuple(bad))


def meets_closure(arr: Arrangement, t, fixed: Mapping[int, ExactValue], known_widths: Mapping | None = None) -> bool:
    """Is there a closure point with ``x1 = t`` and the given fixed coordinates?"""
    t = coerce(t)
    for m in arr.coords():
        if m in fixed:
            y = fixed[m]
            for c in arr.on(m):
                s = sign(c.value(t, y))
                if s != 0 and (s > 0) == c.inside:
                    return False
        elif not slice_coord(arr, m, t, known_widths).components:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON


def constraint_to_json(c: CircleConstraint) -> dict:
    return {
        "id": c.id,
        "coord": c.coord,
        "center": [value_to_json(c.a), value_to_json(c.b)],
        "radius": value_to_json(c.radius),
        "side": c.side.value,
    }


def arrangement_to_json(arr: Arrangement) -> dict:
    return {"ambient_dim": arr.ambient_dim, "constraints": [constraint_to_json(c) for c in arr.constraints]}


def arrangement_from_json(obj: Mapping) -> Arrangement:
    try:
        cons = []
        for rec in obj["constraints"]:
            a, b = rec["center"]
            a = value_from_json(a)
            if not isinstance(a, Fraction):
                raise ArrangementError(f"constraint {rec['id']}: first center coordinate must be rational")
            cons.append(
                CircleConstraint(
                    id=str(rec["id"]),
                    coord=int(rec["coord"]),
                    a=a,
                    b=value_from_json(b),
                    radius=value_from_json(rec["radius"]),
                    side=Side(rec["side"]),
                )
            )
        return Arrangement(int(obj["ambient_dim"]), tuple(cons))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ArrangementError):
            raise
        raise ArrangementError(f"malformed arrangement JSON: {exc!r}") from None
