"""Rooted trees, balanced trees, V-digraphs and leveled isomorphism."""
from __future__ import annotations

import warnings
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Mapping

from .numeric import coerce, compare, sort_values, value_to_json


class DigraphError(ValueError):
    pass


class NotATree(DigraphError):
    pass


class InvalidSpec(DigraphError):
    pass


class LevelCountMismatch(DigraphError):
    pass


@dataclass(frozen=True)
class Digraph:
    """Finite digraph; ``edges`` is a multiset (parallel edges allowed)."""

    vertices: tuple
    edges: tuple

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable) -> "Digraph":
        vs = tuple(vertices)
        es = tuple((u, v) for u, v in edges)
        known = set(vs)
        if len(known) != len(vs):
            raise DigraphError("duplicate vertex ids")
        for u, v in es:
            if u == v:
                raise DigraphError(f"self-loop at {u!r}")
            if u not in known or v not in known:
                raise DigraphError(f"edge ({u!r}, {v!r}) uses an unknown vertex")
        return cls(vs, es)

    def in_degree(self, v) -> int:
        return sum(1 for _, w in self.edges if w == v)

    def out_degree(self, v) -> int:
        return sum(1 for u, _ in self.edges if u == v)

    def degrees(self) -> dict:
        deg = {v: [0, 0] for v in self.vertices}
        for u, v in self.edges:
            deg[u][1] += 1
            deg[v][0] += 1
        return {v: tuple(d) for v, d in deg.items()}

    def sources(self) -> list:
        return [v for v, (i, _) in self.degrees().items() if i == 0]

    def sinks(self) -> list:
        return [v for v, (_, o) in self.degrees().items() if o == 0]

    def components(self) -> list[list]:
        adj = defaultdict(set)
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen, comps = set(), []
        for v in self.vertices:
            if v in seen:
                continue
            comp, todo = [], [v]
            seen.add(v)
            while todo:
                x = todo.pop()
                comp.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.vertices) > 0 and len(self.components()) == 1

    def first_betti(self) -> int:
        return len(self.edges) - len(self.vertices) + len(self.components())


@dataclass(frozen=True)
class RootedTree:
    digraph: Digraph
    root: object
    leaves: tuple

    def depth_of(self) -> dict:
        children = defaultdict(list)
        for u, v in self.digraph.edges:
            children[u].append(v)
        depth = {self.root: 0}
        todo = deque([self.root])
        while todo:
            u = todo.popleft()
            for v in children[u]:
                depth[v] = depth[u] + 1
                todo.append(v)
        return depth


def check_rooted_tree(tree: RootedTree) -> None:
    """Raise NotATree if any rooted-tree invariant fails."""
    g = tree.digraph
    if len(g.edges) != len(g.vertices) - 1 or not g.is_connected():
        raise NotATree("not a connected graph with |E| = |V| - 1")
    deg = g.degrees()
    if deg[tree.root][0] != 0:
        raise NotATree("root has an incoming edge")
    for v, (i, o) in deg.items():
        if v != tree.root and i != 1:
            raise NotATree(f"vertex {v!r} has in-degree {i}")
    if g.sources() != [tree.root]:
        raise NotATree("root is not the unique source")
    if sorted(map(str, g.sinks())) != sorted(map(str, tree.leaves)):
        raise NotATree("leaf list does not match the sinks")


def orient_from_root(vertices: Iterable, edges: Iterable, root) -> RootedTree:
    """Orient an undirected tree away from ``root``."""
    vs = list(vertices)
    es = [tuple(e) for e in edges]
    if root not in vs:
        raise NotATree(f"root {root!r} is not a vertex")
    if len(es) != len(vs) - 1:
        raise NotATree("a tree on n vertices has n - 1 edges")
    adj = defaultdict(list)
    for u, v in es:
        if u == v:
            raise NotATree("self-loop")
        adj[u].append(v)
        adj[v].append(u)
    oriented, seen = [], {root}
    todo = deque([root])
    while todo:
        u = todo.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                oriented.append((u, v))
                todo.append(v)
    if len(seen) != len(vs):
        raise NotATree("graph is disconnected")
    g = Digraph.build(vs, oriented)
    leaves = tuple(v for v in vs if g.out_degree(v) == 0 and v != root)
    return RootedTree(g, root, leaves)


@dataclass(frozen=True)
class BalancedTreeSpec:
    """Balanced tree type: ``children[i]`` children at every depth-``i`` vertex."""

    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(int(n) for n in self.children))
        if not self.children:
            raise InvalidSpec("depth must be at least 1")
        if any(n < 1 for n in self.children):
            raise InvalidSpec("every children count must be >= 1")

    @property
    def depth(self) -> int:
        return len(self.children)

    def vertex_count(self) -> int:
        return 1 + sum(prod(self.children[: i + 1]) for i in range(self.depth))

    def leaf_count(self) -> int:
        return prod(self.children)


def _tree_ids(spec: BalancedTreeSpec, prefix: str):
    """Yield (vertex id, depth, parent id) breadth-first."""
    layer = [prefix]
    yield prefix, 0, None
    for depth, n in enumerate(spec.children, start=1):
        nxt = []
        for parent in layer:
            for j in range(n):
                vid = f"{parent}.{j}"
                nxt.append(vid)
                yield vid, depth, parent
        layer = nxt


def balanced_tree(spec: BalancedTreeSpec, prefix: str = "r") -> RootedTree:
    verts, edges = [], []
    for vid, _, parent in _tree_ids(spec, prefix):
        verts.append(vid)
        if parent is not None:
            edges.append((parent, vid))
    g = Digraph.build(verts, edges)
    leaves = tuple(v for v in verts if g.out_degree(v) == 0)
    return RootedTree(g, prefix, leaves)


@dataclass(frozen=True)
class LeveledDigraph:
    """A V-digraph: every edge runs from a lower to a strictly higher level."""

    digraph: Digraph
    level: Mapping = field(default_factory=dict)

    def __post_init__(self):
        missing = [v for v in self.digraph.vertices if v not in self.level]
        if missing:
            raise DigraphError(f"vertices without level: {missing[:5]}")
        for u, v in self.digraph.edges:
            if compare(self.level[u], self.level[v]) >= 0:
                raise DigraphError(f"edge ({u!r}, {v!r}) does not increase the level")

    @property
    def vertices(self):
        return self.digraph.vertices

    @property
    def edges(self):
        return self.digraph.edges

    def level_values(self) -> list:
        """Distinct levels, increasing."""
        out = []
        for x in sort_values(self.level.values()):
            if not out or compare(out[-1], x) != 0:
                out.append(x)
        return out

    def ranks(self) -> dict:
        distinct = self.level_values()
        rank = {}
        for v, x in self.level.items():
            for r, y in enumerate(distinct):
                if compare(x, y) == 0:
                    rank[v] = r
                    break
        return rank


def _warn_small(children, what):
    if any(n < 2 for n in children):
        warnings.warn(
            f"{what}: children counts below 2 are outside the realization hypothesis",
            stacklevel=3,
        )


def _levels(levels, count: int) -> list:
    vals = [coerce(t) for t in levels]
    if len(vals) != count:
        raise LevelCountMismatch(f"expected {count} levels, got {len(vals)}")
    for a, b in zip(vals, vals[1:]):
        if compare(a, b) >= 0:
            raise InvalidSpec("levels must be strictly increasing")
    return vals


def target_theorem1(spec: BalancedTreeSpec, levels) -> LeveledDigraph:
    """Balanced tree with an extra stem edge entering the root."""
    t = _levels(levels, spec.depth + 2)
    _warn_small(spec.children, "target_theorem1")
    tree = balanced_tree(spec)
    depth = tree.depth_of()
    level = {v: t[depth[v] + 1] for v in tree.digraph.vertices}
    level["s"] = t[0]
    g = Digraph.build(("s",) + tree.digraph.vertices, (("s", tree.root),) + tree.digraph.edges)
    return LeveledDigraph(g, level)


def target_theorem2(spec1: BalancedTreeSpec, spec2: BalancedTreeSpec, levels) -> LeveledDigraph:
    """First tree reversed (leaves become sources), glued root to root with the second."""
    d1, d2 = spec1.depth, spec2.depth
    t = _levels(levels, d1 + d2 + 1)
    if spec1.children[0] < 2 and not (d1 == 1):
        _warn_small(spec1.children, "target_theorem2")
    elif any(n < 2 for n in spec1.children[1:]):
        _warn_small(spec1.children[1:], "target_theorem2")
    _warn_small(spec2.children, "target_theorem2")
    t1 = balanced_tree(spec1, prefix="r")
    t2 = balanced_tree(spec2, prefix="r")
    dep1, dep2 = t1.depth_of(), t2.depth_of()

    def rename(v, tag):
        return v if v == "r" else tag + v[1:]

    level, verts, edges = {}, [], []
    for v in t1.digraph.vertices:
        w = rename(v, "a")
        verts.append(w)
        level[w] = t[d1 - dep1[v]]
    for u, v in t1.digraph.edges:
        edges.append((rename(v, "a"), rename(u, "a")))
    for v in t2.digraph.vertices:
        if v == "r":
            continue
        w = rename(v, "b")
        verts.append(w)
        level[w] = t[d1 + dep2[v]]
    for u, v in t2.digraph.edges:
        edges.append((rename(u, "b"), rename(v, "b")))
    return LeveledDigraph(Digraph.build(verts, edges), level)


# ---------------------------------------------------------------------------
# isomorphism


def _adjacency(g: Digraph):
    out_n, in_n = defaultdict(Counter), defaultdict(Counter)
    for u, v in g.edges:
        out_n[u][v] += 1
        in_n[v][u] += 1
    return out_n, in_n


def _refine(graphs) -> list[dict]:
    """Joint colour refinement; colours are comparable across ``graphs``."""
    infos = []
    for lg in graphs:
        out_n, in_n = _adjacency(lg.digraph)
        infos.append((lg, out_n, in_n, lg.ranks()))
    colours = []
    for lg, out_n, in_n, rank in infos:
        colours.append({v: (rank[v], sum(in_n[v].values()), sum(out_n[v].values())) for v in lg.vertices})
    colours = _compress(colours)
    while True:
        sigs = []
        for (lg, out_n, in_n, _), col in zip(infos, colours):
            sigs.append(
                {
                    v: (
                        col[v],
                        tuple(sorted((col[u], m) for u, m in in_n[v].items())),
                        tuple(sorted((col[u], m) for u, m in out_n[v].items())),
                    )
                    for v in lg.vertices
                }
            )
        new = _compress(sigs)
        if len({c for m in new for c in m.values()}) == len({c for m in colours for c in m.values()}):
            return new
        colours = new


def _compress(maps: list[dict]) -> list[dict]:
    palette = {sig: i for i, sig in enumerate(sorted({s for m in maps for s in m.values()}))}
    return [{v: palette[s] for v, s in m.items()} for m in maps]


def canonical_form(g: LeveledDigraph) -> tuple:
    """Isomorphism invariant: sorted refined-colour signature histogram.

    Equal forms are necessary (not sufficient) for leveled isomorphism.
    """
    (col,) = _refine([g])
    out_n, in_n = _adjacency(g.digraph)
    rank = g.ranks()
    return tuple(
        sorted(
            (
                rank[v],
                tuple(sorted((col[u], m) for u, m in in_n[v].items())),
                tuple(sorted((col[u], m) for u, m in out_n[v].items())),
            )
            for v in g.vertices
        )
    )


def leveled_isomorphic(a: LeveledDigraph, b: LeveledDigraph) -> tuple[bool, dict | None]:
    """Digraph isomorphism preserving level ranks; returns ``(found, a->b map)``."""
    if len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        return False, None
    if len(a.level_values()) != len(b.level_values()):
        return False, None
    ca, cb = _refine([a, b])
    if Counter(ca.values()) != Counter(cb.values()):
        return False, None
    a_out, a_in = _adjacency(a.digraph)
    b_out, b_in = _adjacency(b.digraph)
    by_colour = defaultdict(list)
    for v in b.vertices:
        by_colour[cb[v]].append(v)

    # visit in BFS order so each new vertex usually has a mapped neighbour
    order, seen = [], set()
    start_order = sorted(a.vertices, key=lambda v: (len(by_colour[ca[v]]), str(v)))
    for s in start_order:
        if s in seen:
            continue
        seen.add(s)
        todo = deque([s])
        while todo:
            x = todo.popleft()
            order.append(x)
            for y in sorted(set(a_out[x]) | set(a_in[x]), key=str):
                if y not in seen:
                    seen.add(y)
                    todo.append(y)

    mapping, used = {}, set()

    def consistent(x, y) -> bool:
        for nbrs_a, nbrs_b in ((a_out, b_out), (a_in, b_in)):
            for u, m in nbrs_a[x].items():
                if u in mapping and nbrs_b[y].get(mapping[u], 0) != m:
                    return False
            mapped_b = sum(1 for u in nbrs_a[x] if u in mapping)
            mapped_here = sum(1 for w in nbrs_b[y] if w in used)
            if mapped_b != mapped_here:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        x = order[i]
        for y in by_colour[ca[x]]:
            if y in used or not consistent(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if search(i + 1):
                return True
            del mapping[x]
            used.discard(y)
        return False

    import sys

    limit = sys.getrecursionlimit()
    if len(order) + 100 > limit:
        sys.setrecursionlimit(len(order) + 100)
    if search(0):
        return True, dict(mapping)
    return False, None


# ---------------------------------------------------------------------------
# export


def graph_to_json(g: LeveledDigraph, kinds: Mapping | None = None, witnesses: Mapping | None = None) -> dict:
    verts = []
    for v in g.vertices:
        rec = {"id": str(v), "level": level_to_json(g.level[v])}
        if kinds is not None:
            rec["kind"] = kinds[v]
        if witnesses is not None and witnesses.get(v):
            rec["singular"] = witnesses[v]
        verts.append(rec)
    edges = sorted([str(u), str(v)] for u, v in g.edges)
    return {"vertices": verts, "edges": edges}


def level_to_json(x):
    try:
        return value_to_json(x)
    except TypeError:
        # certified levels are reported for reading only
        return {"certified": str(x), "approx": repr(float(x))}


def graph_from_json(obj: Mapping) -> tuple[LeveledDigraph, dict]:
    """Parse the graph schema; returns the leveled digraph and the kinds map."""
    from .numeric import value_from_json

    try:
        verts = obj["vertices"]
        edges = obj["edges"]
        level = {str(v["id"]): value_from_json(v["level"]) for v in verts}
        kinds = {str(v["id"]): v.get("kind") for v in verts}
        g = Digraph.build([str(v["id"]) for v in verts], [(str(u), str(v)) for u, v in edges])
    except (KeyError, TypeError) as exc:
        raise DigraphError(f"malformed graph JSON: {exc}") from None
    return LeveledDigraph(g, level), kinds


def to_dot(g: LeveledDigraph, kinds: Mapping | None = None, name: str = "G") -> str:
    ranks = g.ranks()
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    by_rank = defaultdict(list)
    for v in g.vertices:
        by_rank[ranks[v]].append(v)
    for r in sorted(by_rank):
        members = by_rank[r]
        lvl = level_to_json(g.level[members[0]])
        lvl = lvl if isinstance(lvl, str) else str(g.level[members[0]])
        lines.append(f'  subgraph rank{r} {{ rank=same; label="{lvl}";')
        for v in members:
            label = f"{v}\\n{kinds[v]}" if kinds else str(v)
            lines.append(f'    "{v}" [label="{label}"];')
        lines.append("  }")
    for u, v in sorted(g.edges, key=lambda e: (str(e[0]), str(e[1]))):
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
