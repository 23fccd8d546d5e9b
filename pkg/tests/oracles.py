"""Independent float oracles.  Nothing here calls into the package's exact code
paths; constraints are read as plain numbers and re-evaluated from scratch."""
from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import numpy as np
from scipy import ndimage

from cylreeb.arrangement import Arrangement, CircleConstraint, Side
from cylreeb.numeric import Surd


# ---------------------------------------------------------------------------
# surds at 256 bits


def mp_value(x, ctx):
    if isinstance(x, Surd):
        return ctx.mpf(x.p.numerator) / x.p.denominator + ctx.mpf(x.q.numerator) / x.q.denominator * ctx.sqrt(x.s)
    x = Fraction(x)
    return ctx.mpf(x.numerator) / x.denominator


def mp_compare(a, b, bits=256):
    """(ordering, confident) with confidence meaning |a - b| > 2^-128."""
    ctx = mpmath.mp.clone()
    ctx.prec = bits
    d = mp_value(a, ctx) - mp_value(b, ctx)
    confident = abs(d) > ctx.mpf(2) ** -128
    return (d > 0) - (d < 0), confident


# ---------------------------------------------------------------------------
# circles as floats


def _floats(c: CircleConstraint):
    return float(c.a), float(c.b), float(c.radius), c.side is Side.INSIDE


def float_events(arr: Arrangement) -> list[float]:
    out = []
    cs = [_floats(c) for c in arr.constraints]
    for a, b, r, _ in cs:
        out += [a - r, a + r]
    for m in arr.coords():
        plane = [_floats(c) for c in arr.on(m)]
        for i in range(len(plane)):
            for j in range(i + 1, len(plane)):
                (a1, b1, r1, _), (a2, b2, r2, _) = plane[i], plane[j]
                d = math.hypot(a2 - a1, b2 - b1)
                if d == 0 or d > r1 + r2 or d < abs(r1 - r2):
                    continue
                # chord midpoint along the centre line, then +- along the normal
                l = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
                hh = math.sqrt(max(r1 * r1 - l * l, 0.0))
                ux, uy = (a2 - a1) / d, (b2 - b1) / d
                px = a1 + l * ux
                out += [px - hh * uy, px + hh * uy]
    return sorted(out)


def float_endpoints(arr: Arrangement, m: int, t: float) -> list[float]:
    pts = []
    for c in arr.on(m):
        a, b, r, _ = _floats(c)
        if abs(t - a) <= r:
            w = math.sqrt(r * r - (t - a) ** 2)
            pts += [b - w, b + w]
    return sorted(pts)


def _allowed(arr: Arrangement, m: int, t: float, ys: np.ndarray) -> np.ndarray:
    ok = np.ones(ys.shape, dtype=bool)
    for c in arr.on(m):
        a, b, r, inside = _floats(c)
        v = (t - a) ** 2 + (ys - b) ** 2 - r * r
        ok &= (v <= 0) if inside else (v >= 0)
    return ok


def slice_oracle(arr: Arrangement, m: int, t: float):
    """Allowed intervals of coordinate m at t by midpoint tests between sorted endpoints."""
    pts = float_endpoints(arr, m, t)
    if not pts:
        return [(-math.inf, math.inf)] if all(not c.inside for c in arr.on(m)) else []
    cuts = [-math.inf] + pts + [math.inf]
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        if lo == hi:
            continue
        mid = (lo + hi) / 2 if math.isfinite(lo) and math.isfinite(hi) else (hi - 1 if math.isfinite(hi) else lo + 1)
        if _allowed(arr, m, t, np.array([mid]))[0]:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return out


def _axis(arr: Arrangement, m: int, t: float, n: int, span: float) -> np.ndarray:
    pts = float_endpoints(arr, m, t)
    grid = list(np.linspace(-span, span, n))
    srt = sorted(set(pts))
    grid += [(x + y) / 2 for x, y in zip(srt, srt[1:])]
    return np.array(sorted(set(grid)))


def grid_components(arr: Arrangement, t: float, n: int = 48) -> int:
    """Component count of the level set at x1 = t by union-find labelling of a grid.

    Each axis gets ``n`` uniform samples over a box enclosing every band
    endpoint plus the midpoints between consecutive endpoints, so
    every allowed or forbidden interval holds a sample.  Membership is tested
    point by point against all constraints.
    """
    coords = list(arr.coords())
    span = 1.0
    for c in arr.constraints:
        span = max(span, abs(float(c.b)) + float(c.radius) + 1)
    axes = [_axis(arr, m, t, n, span) for m in coords]
    mesh = np.meshgrid(*axes, indexing="ij")
    mask = np.ones(mesh[0].shape, dtype=bool)
    for m, ys in zip(coords, mesh):
        mask &= _allowed(arr, m, t, ys)
    if not mask.any():
        return 0
    _, count = ndimage.label(mask)  # face connectivity
    return int(count)


def grid_margin(arr: Arrangement, t: float) -> float:
    """Distance of t from any float event, and the closest pair of distinct band endpoints."""
    ev = float_events(arr)
    margin = min((abs(t - e) for e in ev), default=math.inf)
    for m in arr.coords():
        pts = float_endpoints(arr, m, t)
        for x, y in zip(pts, pts[1:]):
            margin = min(margin, y - x)
    return margin


# ---------------------------------------------------------------------------
# random inputs


def rand_rational(rng: random.Random, lo=-3, hi=3, den=4) -> Fraction:
    d = rng.randint(1, den)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_levels(rng: random.Random, count: int) -> tuple:
    t = rand_rational(rng, -3, 3, 6)
    out = [t]
    for _ in range(count - 1):
        t += Fraction(rng.randint(1, 12), rng.randint(1, 4))
        out.append(t)
    return tuple(out)


def random_arrangement(rng: random.Random, max_circles=6, max_coords=3) -> Arrangement:
    """Up to ``max_circles`` circles over ``2..k`` with k <= max_coords; a lens in
    coordinate 2 keeps the x1-extent bounded."""
    k = rng.randint(2, max_coords)
    r0 = Fraction(rng.randint(2, 4))
    off = rand_rational(rng, 1, 2, 4)
    cons = [
        CircleConstraint("S1", 2, 0, off, r0, Side.INSIDE),
        CircleConstraint("S2", 2, 0, -off, r0, Side.INSIDE),
    ]
    for i in range(rng.randint(0, max_circles - 2)):
        cons.append(
            CircleConstraint(
                f"S{i + 3}",
                rng.randint(2, k),
                rand_rational(rng, -3, 3),
                rand_rational(rng, -3, 3),
                Fraction(rng.randint(1, 4), rng.choice((1, 2))),
                rng.choice((Side.INSIDE, Side.OUTSIDE, Side.OUTSIDE)),
            )
        )
    return Arrangement(k, tuple(cons))
