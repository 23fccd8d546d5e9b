import json
from fractions import Fraction

from cylreeb.arrangement import Arrangement, CircleConstraint, Side
from cylreeb.numeric import sqrt_exact
from cylreeb.synthesis import TheoremInstance, build_arrangement, synthesize
from cylreeb.validate import ra_region, transversality, verify_target, verify_theorem, witness_holds

F = Fraction
IN, OUT = Side.INSIDE, Side.OUTSIDE
LENS = (
    CircleConstraint("S1", 2, 0, F(3, 5), 1, IN),
    CircleConstraint("S2", 2, 0, F(-3, 5), 1, IN),
)


def _failed(rep, cid):
    return [c for c in rep.failures() if c.id == cid]


def test_tangent_pair_fails():
    arr = Arrangement(2, (CircleConstraint("a", 2, 0, 0, 1, IN), CircleConstraint("b", 2, 2, 0, 1, OUT)))
    rep = transversality(arr)
    bad = _failed(rep, "transversal.tangent_pair")
    assert bad and set(bad[0].witness["constraints"]) == {"a", "b"}
    assert bad[0].witness["point"] == [1, 0]
    assert witness_holds(arr, bad[0])


def test_tangent_pair_outside_closure_passes():
    arr = Arrangement(2, LENS + (CircleConstraint("x", 2, 10, 0, 1, OUT), CircleConstraint("y", 2, 12, 0, 1, OUT)))
    assert not _failed(transversality(arr), "transversal.tangent_pair")


def test_lens_transversal():
    assert transversality(Arrangement(2, LENS)).overall


def _wide(k):
    h = sqrt_exact(F(9 * 9 - 1))
    return (CircleConstraint("S1", 2, 1, h, 9, IN), CircleConstraint("S2", 2, 1, -h, 9, IN))


def test_shared_vertical_tangency_fails():
    arr = Arrangement(4, _wide(4) + (
        CircleConstraint("p", 3, 1 + 9, 0, 9, OUT),
        CircleConstraint("q", 4, 1 + 9, 5, 9, OUT),
    ))
    rep = transversality(arr)
    bad = _failed(rep, "transversal.shared_e1")
    assert bad and set(bad[0].witness["constraints"]) == {"p", "q"}
    assert witness_holds(arr, bad[0])
    # the same tangencies at different levels are fine
    ok = Arrangement(4, _wide(4) + (
        CircleConstraint("p", 3, F(1, 2) + 9, 0, 9, OUT),
        CircleConstraint("q", 4, F(3, 2) + 9, 5, 9, OUT),
    ))
    assert transversality(ok).overall


def test_plane_triple_fails():
    # three inside circles through the origin's right corner (4/5, 0)
    arr = Arrangement(2, LENS + (CircleConstraint("c", 2, F(4, 5) - 1, 0, 1, IN),))
    rep = transversality(arr)
    bad = _failed(rep, "transversal.plane_triple")
    assert bad and set(bad[0].witness["constraints"]) == {"S1", "S2", "c"}
    assert witness_holds(arr, bad[0])


def test_ra_region_examples():
    inst = TheoremInstance(1, ((2,),), (0, 1, 2))
    assert ra_region(synthesize(inst).arrangement).overall
    far = Arrangement(2, LENS + (CircleConstraint("far", 2, 50, 0, 1, OUT),))
    rep = ra_region(far)
    bad = _failed(rep, "hypersurface_used")
    assert [c.witness["constraint"] for c in bad] == ["far"]
    assert witness_holds(far, bad[0])
    empty = Arrangement(2, (CircleConstraint("a", 2, 0, 0, 1, IN), CircleConstraint("b", 2, 0, 5, 1, IN)))
    rep = ra_region(empty)
    assert _failed(rep, "nonempty") and not rep.overall


def test_disconnected_region_reported():
    split = Arrangement(3, LENS + (CircleConstraint("c", 3, 0, 0, 4, IN), CircleConstraint("d", 3, 0, 0, 2, OUT)))
    rep = ra_region(split)
    bad = _failed(rep, "connected")
    assert bad and len(bad[0].witness["components"]) == 2


def test_verify_theorem_examples():
    inst = TheoremInstance(1, ((2,),), (0, 1, 2))
    arr = synthesize(inst).arrangement
    rep = verify_theorem(inst, arr)
    assert rep.overall
    assert rep.get("isomorphic")[0].passed and rep.get("vertex_levels")[0].passed
    # shifted target levels: same order, different values
    moved = TheoremInstance(1, ((2,),), (0, F(3, 2), 2))
    rep = verify_theorem(moved, arr)
    assert rep.get("isomorphic")[0].passed
    bad = _failed(rep, "vertex_levels")
    assert bad and witness_holds(arr, bad[0])


def test_halved_spacing_fails_levels():
    inst = TheoremInstance(1, ((3,),), (0, 1, 2))
    r = synthesize(inst).layout.radius
    arr, _ = build_arrangement(inst, r, {0: F(1, 2)})
    rep = verify_theorem(inst, arr)
    bad = _failed(rep, "vertex_levels")
    assert bad and bad[0].witness["extra"]
    assert witness_holds(arr, bad[0])


def test_verify_target_only():
    inst = TheoremInstance(2, ((2,), (2,)), (0, 1, 2))
    arr = synthesize(inst).arrangement
    assert verify_target(arr, inst.target()).overall


def test_report_json():
    inst = TheoremInstance(1, ((3, 2),), (0, 1, 2, 3))
    arr, _ = build_arrangement(inst, synthesize(inst).layout.radius, {0: F(1, 2)})
    obj = verify_theorem(inst, arr).to_json()
    text = json.dumps(obj, sort_keys=True)
    assert obj["overall"] is False and "vertex_levels" in text
    for c in obj["checks"]:
        assert not (c["required"] and not c["passed"] and c["witness"] is None)
