import random
from fractions import Fraction

import pytest

from cylreeb.arrangement import Arrangement, ArrangementError, CircleConstraint, Side, events
from cylreeb.numeric import compare, sqrt_exact
from cylreeb.sweep import (
    BIRTH,
    BRANCH,
    DEATH,
    DisconnectedRegion,
    EmptyRegion,
    UnboundedRegion,
    component_count,
    reeb,
    region_extent,
    singular_points_at,
)
from cylreeb.synthesis import TheoremInstance, synthesize
from oracles import grid_components, grid_margin, random_arrangement

F = Fraction
IN, OUT = Side.INSIDE, Side.OUTSIDE
LENS = (
    CircleConstraint("S1", 2, 0, F(3, 5), 1, IN),
    CircleConstraint("S2", 2, 0, F(-3, 5), 1, IN),
)


def test_lens_path():
    g = reeb(Arrangement(2, LENS))
    assert len(g.vertices) == 2 and len(g.edges) == 1
    assert sorted(g.kinds.values()) == [BIRTH, DEATH]
    assert sorted(g.graph.level.values()) == [F(-4, 5), F(4, 5)]


def test_lens_singular_points():
    arr = Arrangement(2, LENS)
    ev = next(e for e in events(arr) if e.t == F(4, 5))
    sps = singular_points_at(arr, ev)
    assert [(sp.value, set(sp.constraints)) for sp in sps] == [(0, {"S1", "S2"})]
    ev = next(e for e in events(arr) if e.t == 1)
    assert singular_points_at(arr, ev) == []  # tangency outside the lens


def test_blocking_crossing_outside_extent_is_filtered():
    # blockers in coordinate 3 born at t=1 cross far to the right of the lens
    R = F(5)
    arr = Arrangement(3, (
        CircleConstraint("S1", 2, 1, F(4899, 1000), R, IN),
        CircleConstraint("S2", 2, 1, -F(4899, 1000), R, IN),
        CircleConstraint("B1", 3, 1 + R, F(-1, 2), R, OUT),
        CircleConstraint("B2", 3, 1 + R, F(1, 2), R, OUT),
    ))
    ext = region_extent(arr)
    lo, hi = ext.lo, ext.hi
    for ev in events(arr):
        for sp in singular_points_at(arr, ev):
            if sp.kind == "corner" and sp.coord == 3:
                assert compare(lo, ev.t) <= 0 and compare(ev.t, hi) <= 0


def test_branch_example():
    # lens spanning [0, 2]: centres (1, +-h) with h^2 = R^2 - 1
    R = F(3)
    hh = sqrt_exact(R * R - 1)
    arr = Arrangement(3, (
        CircleConstraint("S1", 2, 1, hh, R, IN),
        CircleConstraint("S2", 2, 1, -hh, R, IN),
        CircleConstraint("B", 3, 1 + R, 0, R, OUT),
    ))
    g = reeb(arr)
    levels = sorted(set(g.graph.level.values()))
    assert levels == [0, 1, 2]
    kinds = sorted(g.kinds.values())
    assert kinds == sorted([BIRTH, BRANCH, DEATH, DEATH])
    assert component_count(arr, F(1, 2)) == 1 and component_count(arr, F(3, 2)) == 2
    assert [r.components for r in g.gaps if r.left is not None and r.right is not None and r.left == 0] == [1]


def test_region_extent():
    assert (region_extent(Arrangement(2, LENS)).lo, region_extent(Arrangement(2, LENS)).hi) == (F(-4, 5), F(4, 5))
    far = Arrangement(2, LENS + (CircleConstraint("X", 2, 40, 0, 1, OUT),))
    assert region_extent(far).lo == F(-4, 5) and region_extent(far).hi == F(4, 5)
    ext = region_extent(Arrangement(2, (CircleConstraint("X", 2, 0, 0, 1, OUT),)))
    assert not ext.bounded


def test_sweep_errors():
    with pytest.raises(EmptyRegion):
        reeb(Arrangement(2, (CircleConstraint("a", 2, 0, 0, 1, IN), CircleConstraint("b", 2, 5, 0, 1, IN))))
    # coordinate 3: a wide disk split by an outside band covering the whole lens extent
    split = Arrangement(3, LENS + (
        CircleConstraint("c", 3, 0, 0, 4, IN),
        CircleConstraint("d", 3, 0, 0, 2, OUT),
    ))
    with pytest.raises(DisconnectedRegion) as exc:
        reeb(split)
    assert len(exc.value.components) == 2
    with pytest.raises(UnboundedRegion):
        reeb(Arrangement(2, (CircleConstraint("X", 2, 0, 0, 1, OUT),)))
    g = reeb(Arrangement(2, (CircleConstraint("X", 2, 0, 0, 1, OUT),)), allow_unbounded=True)
    assert "End" in g.kinds.values()


def _synth(th, specs, levels):
    return synthesize(TheoremInstance(th, specs, levels)).arrangement


def test_theorem_instance_graph():
    g = reeb(_synth(1, ((2,),), (0, 1, 2)))
    assert len(g.vertices) == 4 and len(g.edges) == 3
    assert sorted(set(g.graph.level.values())) == [0, 1, 2]
    assert sorted(g.kinds.values()) == sorted([BIRTH, BRANCH, DEATH, DEATH])


def test_sweep_properties_on_random_arrangements():
    rng = random.Random(21)
    done = 0
    while done < 40:
        arr = random_arrangement(rng)
        try:
            g = reeb(arr)
        except (ArrangementError, ValueError):
            continue
        done += 1
        evs = [e.t for e in events(arr)]
        # vertex levels are event values
        assert all(any(compare(x, t) == 0 for t in evs) for x in g.graph.level.values())
        # Euler characteristic vs independent cycle count
        assert len(g.vertices) - len(g.edges) == 1 - g.graph.digraph.first_betti()
        # degrees agree with the matched component multiplicities
        for v, (lc, rc) in g.degrees.items():
            assert (g.graph.digraph.in_degree(v), g.graph.digraph.out_degree(v)) == (lc, rc)
        # product law vs grid oracle at gap samples
        for rec in g.gaps:
            if grid_margin(arr, float(rec.sample)) > 1e-6:
                assert rec.components == grid_components(arr, float(rec.sample))


def test_trace_csv():
    g = reeb(Arrangement(2, LENS))
    rows = g.trace_csv().splitlines()
    assert rows[0] == "gap,t_left,t_right,sample,x2,components"
    assert any(r.startswith("2,-4/5,4/5,") and r.endswith(",1,1") for r in rows)
