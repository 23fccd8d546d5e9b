"""Region checks: non-emptiness, connectivity, used hypersurfaces, transversality,
and the end-to-end comparison of a computed Reeb digraph with its target.

All normals of a circle-cylinder live in span(e1, e_m).  A closure point on
several hypersurfaces has dependent normals exactly when two circles of one
plane are tangent there, three circles of one plane pass through it, or two
coordinate planes both need e1 at it (a vertical tangency needs e1 alone, a
corner of two circles spans the whole plane).  Those are the checks below;
together they also bound the number of hypersurfaces through a point by k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arrangement import (
    Arrangement,
    ArrangementError,
    contains,
    events,
    meets_closure,
    slice_coord,
)
from .digraph import LeveledDigraph, leveled_isomorphic, level_to_json
from .numeric import compare, enclose, rational_between
from .sweep import (
    DisconnectedRegion,
    EmptyRegion,
    SINGULAR_FLAT,
    SweepError,
    _Sweep,
    reeb,
    singular_points_at,
)


@dataclass
class Check:
    id: str
    passed: bool
    witness: object = None
    required: bool = True

    def to_json(self) -> dict:
        return {"id": self.id, "passed": self.passed, "required": self.required, "witness": _plain(self.witness)}


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    graph: object = None  # PRGraph when a sweep ran

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def add(self, cid, passed, witness=None, required=True) -> Check:
        c = Check(cid, bool(passed), witness, required)
        self.checks.append(c)
        return c

    def extend(self, other: "ValidationReport"):
        self.checks.extend(other.checks)
        if other.graph is not None:
            self.graph = other.graph

    def get(self, cid) -> list:
        return [c for c in self.checks if c.id == cid]

    def failures(self) -> list:
        return [c for c in self.checks if c.required and not c.passed]

    def first_failure(self) -> str | None:
        bad = self.failures()
        if not bad:
            return None
        return f"{bad[0].id}: {_plain(bad[0].witness)}"

    def to_json(self) -> dict:
        return {"overall": self.overall, "checks": [c.to_json() for c in self.checks]}


def _plain(x):
    """JSON-ready copy of a witness (exact values become strings / surd records)."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None or isinstance(x, (bool, int, str, float)):
        return x
    return level_to_json(x)


# ---------------------------------------------------------------------------
# points


def _event_at(evs, t):
    for ev in evs:
        if compare(ev.t, t) == 0:
            return ev
    return None


def representative_point(arr: Arrangement, t, fixed: dict, known=None) -> list:
    """A closure point with ``x1 = t`` and the ``fixed`` coordinates (caller checks existence)."""
    pt = [t]
    for m in arr.coords():
        if m in fixed:
            pt.append(fixed[m])
            continue
        c = slice_coord(arr, m, t, known).components[0]
        # prefer a rational interior value so membership stays exactly decidable
        if c.lo is None and c.hi is None:
            pt.append(Fraction(0))
        elif c.lo is None:
            pt.append(Fraction(math.floor(enclose(c.hi, 64)[0]) - 1))
        elif c.hi is None:
            pt.append(Fraction(math.ceil(enclose(c.lo, 64)[1]) + 1))
        elif c.is_point():
            pt.append(c.lo)
        else:
            pt.append(rational_between(c.lo, c.hi))
    return pt


# ---------------------------------------------------------------------------
# transversality


def _tangent_pairs(arr: Arrangement, evs, rep: ValidationReport):
    found = False
    for m in arr.coords():
        cs = arr.on(m)
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                c1, c2 = cs[i], cs[j]
                da = c2.a - c1.a
                db = c2.b - c1.b
                d2 = da * da + db * db
                for sgn in (1, -1):
                    rr = c1.radius + sgn * c2.radius
                    if rr == 0 or compare(d2, rr * rr) != 0:
                        continue
                    k = c1.radius / rr
                    t = c1.a + k * da
                    y = c1.b + k * db
                    ev = _event_at(evs, t)
                    known = ev.known_widths(arr) if ev else None
                    if meets_closure(arr, t, {m: y}, known):
                        found = True
                        rep.add(
                            "transversal.tangent_pair",
                            False,
                            {
                                "constraints": [c1.id, c2.id],
                                "contact": "external" if sgn > 0 else "internal",
                                "point": representative_point(arr, t, {m: y}, known),
                            },
                        )
    if not found:
        rep.add("transversal.tangent_pair", True)


def _groups_at(arr: Arrangement, ev):
    """Closure singular points at ``ev`` merged per (coordinate, value)."""
    groups = []  # [coord, value, set(ids)]
    for sp in singular_points_at(arr, ev):
        for g in groups:
            if g[0] == sp.coord and compare(g[1], sp.value) == 0:
                g[2].update(sp.constraints)
                break
        else:
            groups.append([sp.coord, sp.value, set(sp.constraints)])
    return groups


def _e1_conflicts(arr: Arrangement, evs, rep: ValidationReport):
    triple = shared = False
    for ev in evs:
        groups = _groups_at(arr, ev)
        if not groups:
            continue
        known = ev.known_widths(arr)
        for m, y, ids in groups:
            if len(ids) >= 3:
                triple = True
                rep.add(
                    "transversal.plane_triple",
                    False,
                    {"constraints": sorted(ids), "point": representative_point(arr, ev.t, {m: y}, known)},
                )
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                m1, y1, ids1 = groups[i]
                m2, y2, ids2 = groups[j]
                if m1 == m2:
                    continue
                fixed = {m1: y1, m2: y2}
                if meets_closure(arr, ev.t, fixed, known):
                    shared = True
                    rep.add(
                        "transversal.shared_e1",
                        False,
                        {
                            "constraints": sorted(ids1) + sorted(ids2),
                            "level": ev.t,
                            "point": representative_point(arr, ev.t, fixed, known),
                        },
                    )
    if not triple:
        rep.add("transversal.plane_triple", True)
    if not shared:
        rep.add("transversal.shared_e1", True)


def transversality(arr: Arrangement, evs=None) -> ValidationReport:
    """Independence of normals at every closure point on two or more hypersurfaces."""
    rep = ValidationReport()
    evs = events(arr) if evs is None else evs
    _tangent_pairs(arr, evs, rep)
    _e1_conflicts(arr, evs, rep)
    return rep


# ---------------------------------------------------------------------------
# region


def _used_constraints(arr: Arrangement, sw: _Sweep) -> set:
    used = set()
    for cell in sw.cells:
        if not cell.nonempty:
            continue
        for s in cell.slices.values():
            for comp in s.components:
                for src in (comp.lo_src, comp.hi_src):
                    if src is not None:
                        used.add(src[0])
        if cell.event is not None:
            for sp in singular_points_at(arr, cell.event):
                used.update(sp.constraints)
    return used


def _extent_witness(c, sw: _Sweep) -> dict:
    ext = sw.extent()
    return {"constraint": c.id, "x1_range": list(c.tangencies()), "extent": [ext.lo, ext.hi]}


def ra_region(arr: Arrangement) -> ValidationReport:
    """Nonempty, connected, every hypersurface meets the closure, transversal."""
    rep = ValidationReport()
    try:
        sw = _Sweep(arr)
    except ArrangementError as exc:
        rep.add("generic", False, {"error": type(exc).__name__, "message": str(exc)})
        return rep
    rep.add("generic", True)
    live = [c for c in sw.cells if c.nonempty]
    if not live:
        rep.add("nonempty", False, {"error": "EmptyRegion", "message": "no level set meets the region"})
        return rep
    rep.add("nonempty", True)
    try:
        g = reeb(arr, allow_unbounded=True)
        rep.graph = g
        rep.add("connected", True)
    except DisconnectedRegion as exc:
        rep.add("connected", False, {"components": [sorted(c) for c in exc.components], "message": str(exc)})
    except EmptyRegion as exc:
        rep.add("nonempty", False, {"error": "EmptyRegion", "message": str(exc)})
        return rep
    except SweepError as exc:
        rep.add("connected", False, {"error": type(exc).__name__, "message": str(exc)})
    used = _used_constraints(arr, sw)
    unused = [c for c in arr.constraints if c.id not in used]
    for c in unused:
        rep.add("hypersurface_used", False, _extent_witness(c, sw))
    if not unused:
        rep.add("hypersurface_used", True)
    rep.extend(transversality(arr, sw.events))
    rep.add("neighborhood", True, "full intersection of closed constraints")
    bounded_x1 = sw.cells[0].nonempty is False and sw.cells[-1].nonempty is False
    rays = any(
        comp.lo is None or comp.hi is None
        for cell in live
        for s in cell.slices.values()
        for comp in s.components
    )
    rep.add("compact", bounded_x1 and not rays, None if bounded_x1 and not rays else "closure is unbounded", required=False)
    return rep


# ---------------------------------------------------------------------------
# theorem


def _level_set_check(g: LeveledDigraph, levels, kinds, rep: ValidationReport):
    extra, missing = [], []
    vals = g.level_values()
    for v, x in sorted(g.level.items(), key=lambda kv: enclose(kv[1], 64)[0]):
        if not any(compare(x, t) == 0 for t in levels):
            extra.append({"vertex": v, "level": x, "kind": kinds.get(v)})
    for t in levels:
        if not any(compare(x, t) == 0 for x in vals):
            missing.append(t)
    ok = not extra and not missing
    rep.add("vertex_levels", ok, None if ok else {"extra": extra, "missing": missing, "levels": list(levels)})


def verify_target(arr: Arrangement, target: LeveledDigraph, levels=None, base: ValidationReport | None = None) -> ValidationReport:
    """Compare the Reeb digraph of ``arr`` with ``target`` (structure, then level set)."""
    rep = base or ra_region(arr)
    g = rep.graph
    if g is None:
        rep.add("reeb", False, rep.first_failure())
        return rep
    v, e = len(g.vertices), len(g.edges)
    rep.add("tree", v - e == 1 and g.graph.digraph.is_connected(), {"vertices": v, "edges": e})
    ok, mapping = leveled_isomorphic(g.graph, target)
    rep.add(
        "isomorphic",
        ok,
        {"mapping": dict(sorted(mapping.items()))} if ok else {"vertices": [v, len(target.vertices)], "edges": [e, len(target.edges)]},
    )
    if levels is None:
        levels = sorted(set(target.level_values()), key=lambda x: enclose(x, 64)[0])
    _level_set_check(g.graph, levels, g.kinds, rep)
    flats = [u for u, k in g.kinds.items() if k == SINGULAR_FLAT]
    rep.add("singular_flat", not flats, {"vertices": flats} if flats else None, required=False)
    return rep


def verify_theorem(inst, arr: Arrangement, target: LeveledDigraph | None = None) -> ValidationReport:
    """Full check of a synthesized (or supplied) arrangement against its theorem instance."""
    rep = ra_region(arr)
    if inst is not None:
        want = inst.expected_circle_count()
        rep.add("circle_count", len(arr.constraints) == want, {"count": len(arr.constraints), "expected": want}, required=False)
    if target is None:
        target = inst.target()
    levels = list(inst.levels) if inst is not None else None
    return verify_target(arr, target, levels, rep)


def witness_holds(arr: Arrangement, check: Check) -> bool:
    """Re-derive a failed check's violation from its witness with contains/compare only."""
    w = check.witness
    if check.id in ("transversal.tangent_pair", "transversal.shared_e1", "transversal.plane_triple"):
        res = contains(arr, w["point"])
        if not res.inside or not set(w["constraints"]) <= set(res.on_boundary):
            return False
        if check.id == "transversal.tangent_pair":
            c1, c2 = (arr.get(c) for c in w["constraints"])
            da, db = c2.a - c1.a, c2.b - c1.b
            rr = c1.radius + (c2.radius if w["contact"] == "external" else -c2.radius)
            return compare(da * da + db * db, rr * rr) == 0
        if check.id == "transversal.shared_e1":
            # at least two planes need e1 at the point
            t = w["point"][0]
            planes = {}
            for cid in w["constraints"]:
                c = arr.get(cid)
                planes.setdefault(c.coord, []).append(c)
            need = 0
            for cs in planes.values():
                if len(cs) >= 2 or any(compare(t, x) == 0 for x in cs[0].tangencies()):
                    need += 1
            return need >= 2
        return True
    if check.id == "hypersurface_used":
        lo, hi = w["x1_range"]
        ext = w.get("extent")
        if not ext:
            return True
        a, b = ext
        return (b is not None and compare(lo, b) > 0) or (a is not None and compare(hi, a) < 0)
    if check.id == "vertex_levels":
        levels = w["levels"]
        bad = [x["level"] for x in w["extra"]]
        return bool(bad or w["missing"]) and all(all(compare(x, t) != 0 for t in levels) for x in bad)
    return False
