"""Poincare-Reeb V-digraph of a circle-cylinder region by an exact x1 sweep.

Every constraint couples x1 with a single other coordinate, so the level
set at ``x1 = t`` is the product of one closed slice per coordinate.  Its
components are therefore index vectors, one slice component per
coordinate.  Between consecutive events the slice combinatorics are fixed;
across an event, a gap component is matched to the level-set component
containing its closed limit, computed by evaluating the gap's endpoint
boundaries at the event value.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from .arrangement import (
    Arrangement,
    ArrangementError,
    CoordinateSlice,
    PairCrossing,
    SweepEvent,
    Tangency,
    endpoint_value,
    events,
    meets_closure,
    slice_coord,
)
from .digraph import Digraph, LeveledDigraph
from .numeric import ExactValue, compare, enclose, rational_between


class SweepError(ArrangementError):
    pass


class EmptyRegion(SweepError):
    pass


class DisconnectedRegion(SweepError):
    def __init__(self, message: str, components: list):
        super().__init__(message)
        self.components = components


class UnboundedRegion(SweepError):
    pass


BIRTH = "Birth"
DEATH = "Death"
BRANCH = "Branch"
MERGE = "Merge"
MERGE_BRANCH = "MergeBranch"
SINGULAR_FLAT = "SingularFlat"
END = "End"


@dataclass(frozen=True)
class SingularPoint:
    t: ExactValue
    coord: int
    value: ExactValue
    constraints: tuple
    kind: str  # "tangency" or "corner"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "coord": self.coord,
            "value": _json_value(self.value),
            "constraints": list(self.constraints),
        }


def _json_value(x):
    from .digraph import level_to_json

    return level_to_json(x)


def _candidate_singular(arr: Arrangement, ev: SweepEvent) -> list[SingularPoint]:
    out, seen = [], set()
    for p in ev.provenance:
        if isinstance(p, Tangency):
            c = arr.get(p.cid)
            key = ("t", c.id)
            if key not in seen:
                seen.add(key)
                out.append(SingularPoint(ev.t, c.coord, c.b, (c.id,), "tangency"))
        elif isinstance(p, PairCrossing):
            c = arr.get(p.cid1)
            key = ("c", p.cid1, p.cid2, p.root)
            if key not in seen:
                seen.add(key)
                out.append(SingularPoint(ev.t, c.coord, p.y, (p.cid1, p.cid2), "corner"))
    return out


def singular_points_at(arr: Arrangement, ev: SweepEvent) -> list[SingularPoint]:
    """Tangency points and same-plane corners at ``ev`` that lie in the closure."""
    known = ev.known_widths(arr)
    return [sp for sp in _candidate_singular(arr, ev) if meets_closure(arr, ev.t, {sp.coord: sp.value}, known)]


@dataclass
class _Cell:
    """An event (``event`` set) or an open gap (``sample`` set)."""

    t: ExactValue
    event: SweepEvent | None = None
    slices: dict | None = None  # coord -> CoordinateSlice, None when empty

    @property
    def nonempty(self) -> bool:
        return self.slices is not None

    def counts(self, coords) -> tuple:
        if self.slices is None:
            return tuple(0 for _ in coords)
        return tuple(len(self.slices[m]) for m in coords)


@dataclass(frozen=True)
class GapRecord:
    left: ExactValue | None
    right: ExactValue | None
    sample: Fraction
    counts: tuple

    @property
    def components(self) -> int:
        return prod(self.counts)


@dataclass(frozen=True)
class Extent:
    lo: ExactValue | None
    hi: ExactValue | None

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None


@dataclass
class PRGraph:
    graph: LeveledDigraph
    kinds: dict
    witnesses: dict
    gaps: list = field(default_factory=list)
    coords: tuple = ()
    degrees: dict = field(default_factory=dict)

    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def edges(self):
        return self.graph.edges

    def to_json(self) -> dict:
        from .digraph import graph_to_json

        wit = {v: [sp.to_json() for sp in self.witnesses.get(v, [])] for v in self.vertices}
        return graph_to_json(self.graph, self.kinds, wit)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gap", "t_left", "t_right", "sample"] + [f"x{m}" for m in self.coords] + ["components"])
        for i, g in enumerate(self.gaps):
            w.writerow([i, _fmt(g.left), _fmt(g.right), str(g.sample)] + list(g.counts) + [g.components])
        return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    v = _json_value(x)
    return v if isinstance(v, str) else str(x)


def _outer_sample(t: ExactValue, direction: int) -> Fraction:
    lo, hi = enclose(t, 64)
    return Fraction(math.floor(lo) - 1) if direction < 0 else Fraction(math.ceil(hi) + 1)


def _level_slices(arr: Arrangement, t, known=None) -> dict | None:
    out = {}
    for m in arr.coords():
        s = slice_coord(arr, m, t, known)
        if not s.components:
            return None
        out[m] = s
    return out


def component_count(arr: Arrangement, t) -> int:
    """Number of level-set components at ``t`` by the product law."""
    s = _level_slices(arr, t)
    if s is None:
        return 0
    return prod(len(x) for x in s.values())


class _Sweep:
    def __init__(self, arr: Arrangement):
        self.arr = arr
        self.coords = tuple(arr.coords())
        self.events = events(arr)
        evs = self.events
        self.cells: list[_Cell] = []
        if not evs:
            self.cells.append(_Cell(Fraction(0)))
        else:
            self.cells.append(_Cell(_outer_sample(evs[0].t, -1)))
            for i, ev in enumerate(evs):
                self.cells.append(_Cell(ev.t, ev))
                if i + 1 < len(evs):
                    self.cells.append(_Cell(rational_between(ev.t, evs[i + 1].t)))
            self.cells.append(_Cell(_outer_sample(evs[-1].t, 1)))
        for cell in self.cells:
            known = cell.event.known_widths(arr) if cell.event else None
            cell.slices = _level_slices(arr, cell.t, known)

    def gap_records(self) -> list[GapRecord]:
        recs = []
        for i in range(0, len(self.cells), 2):
            cell = self.cells[i]
            left = self.cells[i - 1].t if i > 0 else None
            right = self.cells[i + 1].t if i + 1 < len(self.cells) else None
            recs.append(GapRecord(left, right, cell.t, cell.counts(self.coords)))
        return recs

    def extent(self) -> Extent:
        live = [i for i, c in enumerate(self.cells) if c.nonempty]
        if not live:
            raise EmptyRegion("the region is empty")
        lo_i, hi_i = live[0], live[-1]
        lo = None if lo_i == 0 else self.cells[lo_i].t
        hi = None if hi_i == len(self.cells) - 1 else self.cells[hi_i].t
        return Extent(lo, hi)

    # matching ----------------------------------------------------------
    def limit_map(self, gap: _Cell, ev: _Cell, m: int) -> list[int]:
        """For each slice component of ``gap`` in coordinate m, the event component holding its limit."""
        known = ev.event.known_widths(self.arr)
        target: CoordinateSlice = ev.slices[m]
        out = []
        for comp in gap.slices[m].components:
            lo = endpoint_value(self.arr, comp.lo_src, ev.t, known)
            hi = endpoint_value(self.arr, comp.hi_src, ev.t, known)
            out.append(_locate_interval(target, lo, hi, m, ev.t))
        return out


def _lower_le(a, b) -> bool:
    # lower endpoints, None = -inf
    if a is None:
        return True
    if b is None:
        return False
    return compare(a, b) <= 0


def _upper_le(a, b) -> bool:
    # upper endpoints, None = +inf
    if b is None:
        return True
    if a is None:
        return False
    return compare(a, b) <= 0


def _locate_interval(target: CoordinateSlice, lo, hi, m, t) -> int:
    for j, comp in enumerate(target.components):
        if _lower_le(comp.lo, lo) and _upper_le(hi, comp.hi):
            return j
    raise SweepError(f"limit interval of coordinate {m} at t={t} lies in no slice component")


def region_extent(arr: Arrangement) -> Extent:
    """x1-interval where the region is nonempty (None marks an unbounded side)."""
    return _Sweep(arr).extent()


def reeb(arr: Arrangement, allow_unbounded: bool = False) -> PRGraph:
    """Compute the Poincare-Reeb V-digraph of the closed region of ``arr``."""
    sw = _Sweep(arr)
    ext = sw.extent()
    if not ext.bounded and not allow_unbounded:
        raise UnboundedRegion("the region is unbounded in x1 (pass allow_unbounded to sweep it anyway)")
    coords = sw.coords
    cells = sw.cells
    last = len(cells) - 1

    def vectors(cell: _Cell):
        return list(itertools.product(*(range(len(cell.slices[m])) for m in coords)))

    # per event: left/right coordinate maps
    left_maps, right_maps = {}, {}
    for i in range(1, last, 2):
        ev = cells[i]
        if not ev.nonempty:
            continue
        if cells[i - 1].nonempty:
            left_maps[i] = {m: sw.limit_map(cells[i - 1], ev, m) for m in coords}
        if cells[i + 1].nonempty:
            right_maps[i] = {m: sw.limit_map(cells[i + 1], ev, m) for m in coords}

    def image(maps, vec):
        return tuple(maps[m][j] for m, j in zip(coords, vec))

    # singular components per event
    vertex_of: dict = {}
    kinds, witnesses, levels, degrees = {}, {}, {}, {}
    order = []
    for i in range(1, last, 2):
        ev = cells[i]
        if not ev.nonempty:
            continue
        sing = singular_points_at(arr, ev.event)
        sing_loc = []
        for sp in sing:
            j = ev.slices[sp.coord].locate(sp.value)
            if j is not None:
                sing_loc.append((sp, coords.index(sp.coord), j))
        left_count, right_count = {}, {}
        if i in left_maps:
            for g in vectors(cells[i - 1]):
                v = image(left_maps[i], g)
                left_count[v] = left_count.get(v, 0) + 1
        if i in right_maps:
            for g in vectors(cells[i + 1]):
                v = image(right_maps[i], g)
                right_count[v] = right_count.get(v, 0) + 1
        for vec in vectors(ev):
            wit = [sp for sp, k, j in sing_loc if vec[k] == j]
            lc, rc = left_count.get(vec, 0), right_count.get(vec, 0)
            if not wit and (lc, rc) == (1, 1):
                continue
            order.append((i, vec, wit, lc, rc))

    for n, (i, vec, wit, lc, rc) in enumerate(order):
        vid = f"v{n}"
        vertex_of[(i, vec)] = vid
        levels[vid] = cells[i].t
        kinds[vid] = _kind(lc, rc)
        witnesses[vid] = wit
        degrees[vid] = (lc, rc)

    # synthetic ends for unbounded sides
    ends = {}
    for gi in (0, last):
        if cells[gi].nonempty:
            for g in vectors(cells[gi]):
                vid = f"v{len(levels)}"
                levels[vid] = cells[gi].t
                kinds[vid] = END
                witnesses[vid] = []
                ends[(gi, g)] = vid

    edges = []
    for (i, vec), vid in vertex_of.items():
        if i not in right_maps:
            continue
        for g in vectors(cells[i + 1]):
            if image(right_maps[i], g) == vec:
                edges.append((vid, _follow(cells, i + 1, g, vertex_of, left_maps, right_maps, image, vectors, ends)))
    for (gi, g), vid in ends.items():
        if gi == 0:
            edges.append((vid, _follow(cells, 0, g, vertex_of, left_maps, right_maps, image, vectors, ends)))

    vids = list(levels)
    graph = LeveledDigraph(Digraph.build(vids, edges), levels)
    if not vids:
        raise EmptyRegion("the region has no vertices")
    comps = graph.digraph.components()
    if len(comps) > 1:
        listing = "; ".join(
            f"[{', '.join(sorted(c, key=lambda v: int(v[1:])))}]" for c in sorted(comps, key=lambda c: min(int(v[1:]) for v in c))
        )
        raise DisconnectedRegion(f"the region has {len(comps)} components: {listing}", comps)
    return PRGraph(graph, kinds, witnesses, sw.gap_records(), coords, degrees)


def _follow(cells, gi, g, vertex_of, left_maps, right_maps, image, vectors, ends):
    """Walk right from gap ``gi`` component ``g`` to the next vertex."""
    last = len(cells) - 1
    while True:
        if gi == last:
            return ends[(gi, g)]
        ev_i = gi + 1
        vec = image(left_maps[ev_i], g)
        vid = vertex_of.get((ev_i, vec))
        if vid is not None:
            return vid
        # regular: exactly one right continuation
        nxt = [h for h in vectors(cells[ev_i + 1]) if image(right_maps[ev_i], h) == vec]
        if len(nxt) != 1:
            raise SweepError(f"regular level component at t={cells[ev_i].t} does not continue uniquely")
        gi, g = ev_i + 1, nxt[0]


def _kind(lc: int, rc: int) -> str:
    if lc == 0:
        return BIRTH
    if rc == 0:
        return DEATH
    if lc == 1 and rc == 1:
        return SINGULAR_FLAT
    if lc == 1:
        return BRANCH
    if rc == 1:
        return MERGE
    return MERGE_BRANCH
