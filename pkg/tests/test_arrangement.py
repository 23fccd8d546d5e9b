import math
import random
from fractions import Fraction

import pytest

from cylreeb.arrangement import (
    Arrangement,
    ArrangementError,
    CircleConstraint,
    IdenticalCircles,
    PairCrossing,
    Side,
    Tangency,
    arrangement_from_json,
    arrangement_to_json,
    band,
    circle_crossings,
    contains,
    events,
    slice_coord,
)
from cylreeb.numeric import Surd, compare, to_float
from oracles import float_endpoints, random_arrangement, slice_oracle

F = Fraction
IN, OUT = Side.INSIDE, Side.OUTSIDE


def lens(k=2):
    return Arrangement(k, (
        CircleConstraint("S1", 2, 0, F(3, 5), 1, IN),
        CircleConstraint("S2", 2, 0, F(-3, 5), 1, IN),
    ))


def test_band_examples():
    b = band(CircleConstraint("c", 2, 0, 0, 1, IN), 0)
    assert b.allowed() == [(-1, 1)]
    b = band(CircleConstraint("c", 2, 0, 0, 1, OUT), 0)
    assert b.allowed() == [(None, -1), (1, None)]
    b = band(CircleConstraint("c", 2, 0, F(3, 5), 1, IN), F(4, 5))
    assert b.allowed() == [(0, F(6, 5))]
    assert band(CircleConstraint("c", 2, 0, 0, 1, IN), 2).allowed() == []
    assert band(CircleConstraint("c", 2, 0, 0, 1, OUT), 2).allowed() == [(None, None)]


def _ivals(s):
    return [(c.lo, c.hi) for c in s.components]


def test_slice_examples():
    arr = lens()
    assert _ivals(slice_coord(arr, 2, 0)) == [(F(-2, 5), F(2, 5))]
    assert _ivals(slice_coord(arr, 2, F(4, 5))) == [(0, 0)]
    far = Arrangement(2, arr.constraints + (CircleConstraint("S3", 2, F(9, 5), 0, 1, OUT),))
    assert _ivals(slice_coord(far, 2, 0)) == [(F(-2, 5), F(2, 5))]
    free = Arrangement(3, arr.constraints)
    assert _ivals(slice_coord(free, 3, 0)) == [(None, None)]


def test_event_examples():
    one = Arrangement(2, (CircleConstraint("S1", 2, 2, 0, 1, OUT),))
    assert [e.t for e in events(one)] == [1, 3]
    evs = events(lens())
    assert [e.t for e in evs] == [-1, F(-4, 5), F(4, 5), 1]
    corner = evs[1]
    assert any(isinstance(p, PairCrossing) for p in corner.provenance)
    assert any(isinstance(p, Tangency) for p in evs[0].provenance)


def test_blocking_crossings():
    R, a, d = F(1), F(3), F(1)
    c1 = CircleConstraint("b1", 3, a, 0, R, OUT)
    c2 = CircleConstraint("b2", 3, a, d, R, OUT)
    xs = [x for x, _ in circle_crossings(c1, c2)]
    w = Surd.make(0, 1, 3) / 2  # sqrt(R^2 - d^2/4)
    assert xs == [a - w, a + w]
    assert all(y == d / 2 for _, y in circle_crossings(c1, c2))


def test_identical_circles_rejected():
    c = CircleConstraint("a", 2, 0, 0, 1, IN)
    with pytest.raises(IdenticalCircles):
        events(Arrangement(2, (c, CircleConstraint("b", 2, 0, 0, 1, OUT))))


def test_contains_examples():
    arr = lens(3)
    res = contains(arr, (F(4, 5), 0, 7))
    assert res.inside and set(res.on_boundary) == {"S1", "S2"}
    assert contains(arr, (0, 0, 0)).interior
    res = contains(arr, (2, 0, 0))
    assert not res.inside and set(res.violated) == {"S1", "S2"}
    with pytest.raises(ArrangementError):
        contains(arr, (0, 0))


def test_validation_and_json():
    with pytest.raises(ArrangementError):
        Arrangement(2, (CircleConstraint("a", 3, 0, 0, 1, IN),))
    with pytest.raises(ArrangementError):
        CircleConstraint("a", 2, 0, 0, 0, IN)
    arr = Arrangement(3, lens().constraints + (CircleConstraint("h", 3, 1, Surd.make(0, 1, 2), F(3, 2), OUT),))
    back = arrangement_from_json(arrangement_to_json(arr))
    assert back == arr
    with pytest.raises(ArrangementError):
        arrangement_from_json({"ambient_dim": 2, "constraints": [{"id": "x"}]})


def _random_t(rng, evs):
    lo = min(to_float(e.t) for e in evs) - 1
    hi = max(to_float(e.t) for e in evs) + 1
    return F(rng.uniform(lo, hi)).limit_denominator(10**5)


def test_slice_matches_float_oracle():
    rng = random.Random(11)
    checked = 0
    for _ in range(60):
        arr = random_arrangement(rng)
        try:
            evs = events(arr)
        except ArrangementError:
            continue
        for _ in range(10):
            t = _random_t(rng, evs)
            if any(compare(t, e.t) == 0 for e in evs):
                continue
            for m in arr.coords():
                pts = float_endpoints(arr, m, float(t))
                if any(y - x < 1e-9 for x, y in zip(pts, pts[1:])):
                    continue
                got = [(to_float(c.lo) if c.lo is not None else -math.inf, to_float(c.hi) if c.hi is not None else math.inf)
                       for c in slice_coord(arr, m, t).components]
                want = slice_oracle(arr, m, float(t))
                assert len(got) == len(want), (arr, t, m)
                for (a, b), (c, d) in zip(got, want):
                    assert a == pytest.approx(c, abs=1e-9) and b == pytest.approx(d, abs=1e-9)
                checked += 1
    assert checked > 300


def test_slice_components_disjoint_and_monotone():
    rng = random.Random(12)
    for _ in range(40):
        arr = random_arrangement(rng)
        t = F(rng.randint(-30, 30), 7)
        for m in arr.coords():
            comps = slice_coord(arr, m, t).components
            for x, y in zip(comps, comps[1:]):
                assert compare(x.hi, y.lo) < 0
            # dropping a constraint can only grow the allowed set
            for c in arr.on(m):
                bigger = slice_coord(arr.without(c.id), m, t)
                for comp in comps:
                    probe = comp.lo if comp.lo is not None else (comp.hi if comp.hi is not None else 0)
                    assert bigger.locate(probe) is not None


def test_counts_constant_between_events():
    rng = random.Random(13)
    for _ in range(40):
        arr = random_arrangement(rng)
        try:
            evs = events(arr)
        except ArrangementError:
            continue
        ts = [e.t for e in evs]
        for lo, hi in zip(ts, ts[1:]):
            flo, fhi = to_float(lo), to_float(hi)
            samples = [F(flo + (fhi - flo) * f).limit_denominator(10**9) for f in (0.25, 0.5, 0.75)]
            samples = [s for s in samples if compare(lo, s) < 0 and compare(s, hi) < 0]
            for m in arr.coords():
                counts = {len(slice_coord(arr, m, s)) for s in samples}
                assert len(counts) <= 1, (arr, lo, hi, m)
