"""Decorated multigraphs describing degenerations of curves with a differential.

A graph has vertices carrying a genus, an ambient component index and
optionally a level; edges are ordered pairs of vertices (the two sides of an
edge are individually addressable, which is needed for twists and for
cotangent-class decorations at half-edges); legs are labelled marked points
pinned to vertices.  Leg labels are pairs ``(j, i)`` where ``j`` is the
ambient component and ``i`` the marked-point index: indices below ``n_j``
are zeros (with prescribed vanishing order ``Z[j][i]``), the remaining
``m_j`` indices are poles (with prescribed order ``P[j][i - n_j]``).

Two-level graphs ("bi-colored": all vertices at level 0 or -1, every edge
joining the two levels with a positive twist on its level-0 side) index the
boundary terms of the zero-order induction implemented in
:mod:`strataclass.strata`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import factorial, gcd, prod

Label = tuple[int, int]


# ---------------------------------------------------------------------------
# ambient signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Component:
    """One connected component of the ambient space: genus, zero orders, pole orders."""

    g: int
    Z: tuple[int, ...] = ()
    P: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "Z", tuple(int(z) for z in self.Z))
        object.__setattr__(self, "P", tuple(int(p) for p in self.P))
        if self.g < 0:
            raise ValueError("negative genus")
        if any(z < 0 for z in self.Z):
            raise ValueError("zero orders must be non-negative")
        if any(p < 1 for p in self.P):
            raise ValueError("pole orders must be positive")

    @property
    def n(self) -> int:
        return len(self.Z)

    @property
    def m(self) -> int:
        return len(self.P)


@dataclass(frozen=True)
class Signature:
    """Tuple of ambient components; provides the leg-label bookkeeping."""

    components: tuple[Component, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def q(self) -> int:
        return len(self.components)

    def zero_legs(self) -> list[Label]:
        return [(j, i) for j, c in enumerate(self.components) for i in range(c.n)]

    def pole_legs(self) -> list[Label]:
        return [
            (j, c.n + t) for j, c in enumerate(self.components) for t in range(c.m)
        ]

    def all_legs(self) -> list[Label]:
        return [
            (j, i)
            for j, c in enumerate(self.components)
            for i in range(c.n + c.m)
        ]

    def is_pole_leg(self, lbl: Label) -> bool:
        j, i = lbl
        return i >= self.components[j].n

    def leg_order(self, lbl: Label) -> int:
        """Zero order for a zero leg, pole order for a pole leg."""
        j, i = lbl
        c = self.components[j]
        return c.Z[i] if i < c.n else c.P[i - c.n]

    def pole_blocks(self) -> tuple[int, ...]:
        return tuple(c.m for c in self.components)


def single(g: int, Z=(), P=()) -> Signature:
    return Signature((Component(g, tuple(Z), tuple(P)),))


def is_semistable_triple(g: int, n: int, P: tuple[int, ...]) -> bool:
    """Whether (genus, #zero-marked-points, pole orders) supports a differential.

    Either the pointed curve is stable, or it is a rational vertex carrying a
    single higher-order pole: (0, 1, (p)) with p > 1, or (0, 0, (1, p)) with
    p > 1.
    """
    P = tuple(sorted(P))
    if 2 * g - 2 + n + len(P) > 0:
        return True
    if g == 0 and n == 1 and len(P) == 1 and P[0] > 1:
        return True
    if g == 0 and n == 0 and len(P) == 2 and P[0] == 1 and P[1] > 1:
        return True
    return False


def is_stable_triple(g: int, npts: int) -> bool:
    return 2 * g - 2 + npts > 0


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemiStableGraph:
    """A connected-per-component multigraph with genus-labelled vertices.

    ``edges[e] = (a, b)`` records the two sides of edge ``e``; side 0 is at
    vertex ``a``.  ``legs`` maps each ambient leg label to its vertex.
    """

    genus: tuple[int, ...]
    component: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    legs: tuple[tuple[Label, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "genus", tuple(self.genus))
        object.__setattr__(self, "component", tuple(self.component))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(
            self, "legs", tuple(sorted((tuple(l), v) for l, v in self.legs))
        )

    @property
    def num_vertices(self) -> int:
        return len(self.genus)

    def legs_at(self, v: int) -> list[Label]:
        return [l for l, w in self.legs if w == v]

    def leg_vertex(self, lbl: Label) -> int:
        for l, w in self.legs:
            if l == tuple(lbl):
                return w
        raise KeyError(lbl)

    def edges_at(self, v: int) -> list[tuple[int, int]]:
        """Half-edges at ``v`` as (edge index, side) pairs; loops give both sides."""
        out = []
        for e, (a, b) in enumerate(self.edges):
            if a == v:
                out.append((e, 0))
            if b == v:
                out.append((e, 1))
        return out

    def degree(self, v: int) -> int:
        return len(self.legs_at(v)) + len(self.edges_at(v))

    def vertices_of_component(self, j: int) -> list[int]:
        return [v for v in range(self.num_vertices) if self.component[v] == j]


@dataclass(frozen=True)
class TwistedGraph:
    """A graph with a level on each vertex and a twist on each edge.

    The twist of edge ``e`` is stored as the (signed) value on side 0; the
    value on side 1 is its negative.  A positive twist on side 0 means side 0
    is attached to the vertex of higher level.
    """

    graph: SemiStableGraph
    twist: tuple[int, ...]
    level: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "twist", tuple(self.twist))
        object.__setattr__(self, "level", tuple(self.level))

    def twist_at(self, e: int, side: int) -> int:
        return self.twist[e] if side == 0 else -self.twist[e]

    def depth(self) -> int:
        return -min(self.level) if self.level else 0


def trivial_graph(sig: Signature) -> SemiStableGraph:
    """One vertex per ambient component, no edges."""
    return SemiStableGraph(
        genus=tuple(c.g for c in sig.components),
        component=tuple(range(sig.q)),
        edges=(),
        legs=tuple(
            ((j, i), j)
            for j, c in enumerate(sig.components)
            for i in range(c.n + c.m)
        ),
    )


def _connected(num_vertices: int, adjacency: list[tuple[int, int]]) -> bool:
    if num_vertices == 0:
        return True
    seen = {0}
    frontier = [0]
    neigh: dict[int, set[int]] = {v: set() for v in range(num_vertices)}
    for a, b in adjacency:
        neigh[a].add(b)
        neigh[b].add(a)
    while frontier:
        v = frontier.pop()
        for w in neigh[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == num_vertices


def vertex_profile(
    graph: SemiStableGraph, sig: Signature, v: int
) -> tuple[int, int, tuple[int, ...]]:
    """The semi-stable triple (g, n, P) of a vertex.

    Marked zeros at the vertex count towards ``n``; marked poles contribute
    their order to ``P`` and every half-edge contributes a 1 to ``P``.
    """
    g = graph.genus[v]
    n = 0
    P: list[int] = []
    for lbl in graph.legs_at(v):
        if sig.is_pole_leg(lbl):
            P.append(sig.leg_order(lbl))
        else:
            n += 1
    P.extend(1 for _ in graph.edges_at(v))
    return g, n, tuple(sorted(P))


def validate(graph: SemiStableGraph, sig: Signature) -> list[str]:
    """Structural checks; returns a list of human-readable violations."""
    errs: list[str] = []
    nv = graph.num_vertices
    if len(graph.component) != nv:
        errs.append("component vector length mismatch")
        return errs
    expected = set(map(tuple, sig.all_legs()))
    got = [l for l, _ in graph.legs]
    if len(got) != len(set(got)) or set(got) != expected:
        errs.append("legs do not biject with the ambient marked points")
    for _, v in graph.legs:
        if not 0 <= v < nv:
            errs.append("leg attached to missing vertex")
    for a, b in graph.edges:
        if not (0 <= a < nv and 0 <= b < nv):
            errs.append("edge attached to missing vertex")
    if errs:
        return errs
    for j in range(sig.q):
        verts = graph.vertices_of_component(j)
        if not verts:
            errs.append(f"component {j} has no vertex")
            continue
        local = {v: k for k, v in enumerate(verts)}
        local_edges = [
            (local[a], local[b])
            for a, b in graph.edges
            if graph.component[a] == j and graph.component[b] == j
        ]
        cross = [
            e
            for e, (a, b) in enumerate(graph.edges)
            if (graph.component[a] == j) != (graph.component[b] == j)
        ]
        if cross:
            errs.append("edge joins distinct ambient components")
        if not _connected(len(verts), local_edges):
            errs.append(f"component {j} is disconnected")
        gsum = sum(graph.genus[v] for v in verts)
        h1 = len(local_edges) - len(verts) + 1
        if gsum + h1 != sig.components[j].g:
            errs.append(f"component {j} has wrong total genus")
    for v in range(nv):
        g, n, P = vertex_profile(graph, sig, v)
        if not is_semistable_triple(g, n, P):
            errs.append(f"vertex {v} carries no differential: {(g, n, P)}")
    return errs


def validate_twisted(tg: TwistedGraph, sig: Signature) -> list[str]:
    """Checks for the twist/level structure on top of :func:`validate`."""
    errs = validate(tg.graph, sig)
    graph = tg.graph
    if len(tg.twist) != len(graph.edges):
        errs.append("twist vector length mismatch")
        return errs
    if len(tg.level) != graph.num_vertices:
        errs.append("level vector length mismatch")
        return errs
    if any(l > 0 for l in tg.level):
        errs.append("levels must be non-positive")
    levels_used = sorted(set(tg.level))
    if levels_used and (
        levels_used[-1] != 0
        or levels_used != list(range(levels_used[0], 1))
    ):
        errs.append("levels must form an integer interval ending at 0")
    # pairwise consistency of twists with levels
    for e, (a, b) in enumerate(graph.edges):
        t = tg.twist[e]
        la, lb = tg.level[a], tg.level[b]
        if t == 0 and la != lb:
            errs.append(f"edge {e}: zero twist across distinct levels")
        if t > 0 and not la > lb:
            errs.append(f"edge {e}: positive twist must point down in level")
        if t < 0 and not la < lb:
            errs.append(f"edge {e}: negative twist must point up in level")
    # twists between a fixed pair of vertices must order the pair uniformly
    pair_sign: dict[tuple[int, int], int] = {}
    for e, (a, b) in enumerate(graph.edges):
        key = (min(a, b), max(a, b))
        t = tg.twist[e] if a <= b else -tg.twist[e]
        s = (t > 0) - (t < 0)
        if key in pair_sign and s != pair_sign[key]:
            errs.append("inconsistent twist direction across a multi-edge")
        pair_sign[key] = s
    return errs


def is_admissible(tg: TwistedGraph, sig: Signature) -> bool:
    """All marked poles of order at least 2 lie on level-0 vertices."""
    for lbl, v in tg.graph.legs:
        if sig.is_pole_leg(lbl) and sig.leg_order(lbl) >= 2 and tg.level[v] < 0:
            return False
    return True


def is_realizable(tg: TwistedGraph, sig: Signature) -> bool:
    """Per-vertex degree bound for the twisted differential.

    At each vertex the marked zero orders, minus the marked pole orders, plus
    ``I(h) - 1`` over its half-edges (signed twists) must not exceed 2g(v)-2.
    """
    graph = tg.graph
    for v in range(graph.num_vertices):
        total = 0
        for lbl in graph.legs_at(v):
            o = sig.leg_order(lbl)
            total += -o if sig.is_pole_leg(lbl) else o
        for e, side in graph.edges_at(v):
            total += tg.twist_at(e, side) - 1
        if total > 2 * graph.genus[v] - 2:
            return False
    return True


# ---------------------------------------------------------------------------
# canonical forms and automorphisms
# ---------------------------------------------------------------------------


def _vertex_colors(graph, twist, level, vdec, leg_psi):
    colors = []
    for v in range(graph.num_vertices):
        legs = tuple(
            sorted(
                (tuple(l), 0 if leg_psi is None else leg_psi.get(tuple(l), 0))
                for l in graph.legs_at(v)
            )
        )
        colors.append(
            (
                graph.genus[v],
                graph.component[v],
                0 if level is None else level[v],
                legs,
                () if vdec is None else tuple(vdec.get(v, ())),
            )
        )
    return colors


def _side_data(e, side, twist, hdec):
    t = 0
    if twist is not None:
        t = twist[e] if side == 0 else -twist[e]
    d = () if hdec is None else tuple(hdec.get((e, side), ()))
    return (t, d)


def _orderings(colors):
    """All vertex orderings compatible with sorting by color."""
    order = sorted(range(len(colors)), key=lambda v: (repr(colors[v]), 0))
    groups: list[list[int]] = []
    for v in order:
        if groups and colors[groups[-1][0]] == colors[v]:
            groups[-1].append(v)
        else:
            groups.append([v])
    for perm_parts in itertools.product(
        *(itertools.permutations(grp) for grp in groups)
    ):
        yield [v for part in perm_parts for v in part]


def canonical_key(
    graph: SemiStableGraph,
    *,
    twist=None,
    level=None,
    vdec=None,
    hdec=None,
    leg_psi=None,
    extra=None,
) -> bytes:
    """Deterministic byte encoding, invariant under isomorphism.

    ``vdec`` maps vertices to hashable decoration tuples, ``hdec`` maps
    half-edges ``(e, side)`` to decoration tuples, ``leg_psi`` maps leg labels
    to cotangent powers; ``extra`` is appended verbatim (e.g. a global
    exponent).
    """
    colors = _vertex_colors(graph, twist, level, vdec, leg_psi)
    best = None
    for order in _orderings(colors):
        rank = {v: k for k, v in enumerate(order)}
        enc_edges = []
        for e, (a, b) in enumerate(graph.edges):
            s0 = (rank[a], _side_data(e, 0, twist, hdec))
            s1 = (rank[b], _side_data(e, 1, twist, hdec))
            enc_edges.append((s0, s1) if repr(s0) <= repr(s1) else (s1, s0))
        enc = (
            [colors[v] for v in order],
            sorted(enc_edges, key=repr),
        )
        r = repr(enc)
        if best is None or r < best:
            best = r
    payload = best if extra is None else best + "|" + repr(extra)
    return payload.encode()


def automorphism_count(
    graph: SemiStableGraph,
    *,
    twist=None,
    level=None,
    vdec=None,
    hdec=None,
    leg_psi=None,
) -> int:
    """Order of the automorphism group fixing every leg pointwise."""
    colors = _vertex_colors(graph, twist, level, vdec, leg_psi)
    nv = graph.num_vertices

    def pair_data(a, b):
        """Multiset describing the edges between a and b (a <= b)."""
        items = []
        for e, (x, y) in enumerate(graph.edges):
            if {x, y} == {a, b} if a != b else (x == a and y == a):
                d0 = _side_data(e, 0, twist, hdec)
                d1 = _side_data(e, 1, twist, hdec)
                if a == b:
                    items.append(tuple(sorted((repr(d0), repr(d1)))))
                else:
                    # orient the record from a to b
                    if x == a:
                        items.append((repr(d0), repr(d1)))
                    else:
                        items.append((repr(d1), repr(d0)))
        return sorted(items)

    def pair_count(a, b):
        """Number of ways the edges between a and b map onto those of (a', b')
        once the vertex images are fixed to the same pair; assumes multiset
        equality was already checked."""
        items = pair_data(a, b)
        total = 1
        for key, grp in itertools.groupby(items):
            c = len(list(grp))
            total *= factorial(c)
            if a == b:
                # each loop whose two sides carry identical data may be flipped
                d0, d1 = key
                if d0 == d1:
                    total *= 2**c
        return total

    count = 0
    # vertices with legs are fixed (labels are preserved pointwise)
    movable = [v for v in range(nv) if not graph.legs_at(v)]
    fixed = [v for v in range(nv) if graph.legs_at(v)]
    groups: dict = {}
    for v in movable:
        groups.setdefault(repr(colors[v]), []).append(v)
    group_list = list(groups.values())
    for images in itertools.product(
        *(itertools.permutations(grp) for grp in group_list)
    ):
        sigma = {v: v for v in fixed}
        for grp, img in zip(group_list, images):
            for v, w in zip(grp, img):
                sigma[v] = w
        ok = True
        factor = 1
        seen_pairs = set()
        for a, b in graph.edges:
            key = (min(a, b), max(a, b))
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            ia, ib = sigma[key[0]], sigma[key[1]]
            ikey = (min(ia, ib), max(ia, ib))
            src = pair_data(*key)
            dst = pair_data(*ikey)
            if key[0] != key[1] and (ia, ib) != ikey:
                # the pair is reversed by sigma: reorient the source records
                src = sorted((d1, d0) for d0, d1 in src)
            if src != dst:
                ok = False
                break
            factor *= pair_count(*key)
        if ok:
            count += factor
    return count


# ---------------------------------------------------------------------------
# multiplicity data of a two-level graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplicityData:
    """Vanishing-order data of a two-level twisted graph.

    ``m`` is the product of the twists of the level-crossing edges, ``L``
    their least common multiple, and ``torsion_order`` the order of the
    associated product of cyclic groups modulo its diagonal cyclic subgroup,
    so that ``m == L * torsion_order``.
    """

    m: int
    L: int
    torsion_order: int


def multiplicity(tg: TwistedGraph, sig: Signature) -> MultiplicityData:
    twists = []
    for e, (a, b) in enumerate(tg.graph.edges):
        if tg.level[a] != tg.level[b]:
            twists.append(abs(tg.twist[e]))
    m = prod(twists) if twists else 1
    L = 1
    for t in twists:
        L = L * t // gcd(L, t)
    assert m % L == 0
    return MultiplicityData(m=m, L=L, torsion_order=m // L)


# ---------------------------------------------------------------------------
# stabilization
# ---------------------------------------------------------------------------


def bubble_vertices(tg: TwistedGraph, sig: Signature) -> list[int]:
    """Level-0 genus-0 vertices carrying one marked pole of order >= 2 and one edge."""
    out = []
    graph = tg.graph
    for v in range(graph.num_vertices):
        if tg.level[v] != 0 or graph.genus[v] != 0:
            continue
        legs = graph.legs_at(v)
        he = graph.edges_at(v)
        if (
            len(legs) == 1
            and len(he) == 1
            and sig.is_pole_leg(legs[0])
            and sig.leg_order(legs[0]) >= 2
        ):
            out.append(v)
    return out


def unstabilize(tg: TwistedGraph, sig: Signature) -> TwistedGraph:
    """Move every marked pole of order p >= 2 off a negative-level vertex onto a
    new level-0 rational vertex joined by an edge of twist p-1."""
    graph = tg.graph
    genus = list(graph.genus)
    component = list(graph.component)
    edges = list(graph.edges)
    legs = dict(graph.legs)
    twist = list(tg.twist)
    level = list(tg.level)
    for lbl, v in list(legs.items()):
        p = sig.leg_order(lbl)
        if sig.is_pole_leg(lbl) and p >= 2 and level[v] < 0:
            w = len(genus)
            genus.append(0)
            component.append(component[v])
            level.append(0)
            legs[lbl] = w
            edges.append((w, v))
            twist.append(p - 1)
    return TwistedGraph(
        SemiStableGraph(tuple(genus), tuple(component), tuple(edges), tuple(legs.items())),
        tuple(twist),
        tuple(level),
    )


def stabilize(tg: TwistedGraph, sig: Signature) -> TwistedGraph:
    """Contract the rational pole-carrying level-0 bubbles, returning the
    twisted graph on the stabilized curve (the pole leg moves to the vertex
    the bubble was attached to)."""
    graph = tg.graph
    bubbles = set(bubble_vertices(tg, sig))
    if not bubbles:
        return tg
    keep = [v for v in range(graph.num_vertices) if v not in bubbles]
    new_id = {v: k for k, v in enumerate(keep)}
    legs = dict(graph.legs)
    edges = []
    twist = []
    for e, (a, b) in enumerate(graph.edges):
        if a in bubbles or b in bubbles:
            bub, other = (a, b) if a in bubbles else (b, a)
            (lbl,) = graph.legs_at(bub)
            legs[lbl] = other
        else:
            edges.append((new_id[a], new_id[b]))
            twist.append(tg.twist[e])
    new_legs = tuple((l, new_id[v]) for l, v in legs.items())
    return TwistedGraph(
        SemiStableGraph(
            tuple(graph.genus[v] for v in keep),
            tuple(graph.component[v] for v in keep),
            tuple(edges),
            new_legs,
        ),
        tuple(twist),
        tuple(tg.level[v] for v in keep),
    )


# ---------------------------------------------------------------------------
# enumeration of two-level graphs
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int):
    """Weak compositions of ``total`` into ``parts`` parts."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class _Piece:
    """A two-level structure on one ambient component (local vertex ids)."""

    genus: tuple[int, ...]
    level: tuple[int, ...]
    legs: tuple[tuple[Label, int], ...]
    edges: tuple[tuple[int, int], ...]  # (level0 vertex, level-1 vertex)
    twists: tuple[int, ...]

    def has_lower(self) -> bool:
        return any(l < 0 for l in self.level)


_piece_cache: dict[tuple, list[_Piece]] = {}


def _component_pieces(sig: Signature, j: int, max_vertices=None) -> list[_Piece]:
    comp = sig.components[j]
    cache_key = (j, comp.g, tuple(comp.Z), tuple(comp.P), max_vertices)
    cached = _piece_cache.get(cache_key)
    if cached is not None:
        return cached
    g, Z, P = comp.g, comp.Z, comp.P
    n, m = comp.n, comp.m
    zero_lbls = [(j, i) for i in range(n)]
    pole_lbls = [(j, n + t) for t in range(m)]
    pieces: list[_Piece] = []

    # trivial: single level-0 vertex
    pieces.append(
        _Piece((g,), (0,), tuple((l, 0) for l in zero_lbls + pole_lbls), (), ())
    )
    # sunk: single level(-1) vertex; needs every marked pole simple
    if all(p == 1 for p in P):
        pieces.append(
            _Piece((g,), (-1,), tuple((l, 0) for l in zero_lbls + pole_lbls), (), ())
        )

    a_cap = g + m + 1
    b_cap = (5 * g + m + 3 * n + 3) // 2 + 1
    if max_vertices is not None:
        a_cap = min(a_cap, max_vertices)
        b_cap = min(b_cap, max_vertices)

    for a in range(1, a_cap + 1):
        for b in range(1, b_cap + 1):
            for h1 in range(0, g + 1):
                num_e = h1 + a + b - 1
                gfree = g - h1
                if num_e < max(a, b):
                    continue
                for genera in _compositions(gfree, a + b):
                    # semi-stability forces a minimal number of edge ends at
                    # each vertex (two special points suffice on a rational
                    # vertex carrying a higher-order pole); legs can cover at
                    # most n + m of them
                    req0 = sum(2 if genera[u] == 0 else 1 for u in range(a))
                    req1 = sum(2 if genera[a + w] == 0 else 1 for w in range(b))
                    if req0 - (n + m) > num_e or req1 - (n + m) > num_e:
                        continue
                    # leg placements
                    zero_opts = [range(a + b)] * n
                    pole_opts = [
                        range(a + b) if P[t] == 1 else range(a) for t in range(m)
                    ]
                    for zplace in itertools.product(*zero_opts):
                        for pplace in itertools.product(*pole_opts):
                            piece = _fill_edges(
                                j,
                                a,
                                b,
                                num_e,
                                genera,
                                list(zip(zero_lbls, zplace))
                                + list(zip(pole_lbls, pplace)),
                                sig,
                            )
                            pieces.extend(piece)
    _piece_cache[cache_key] = pieces
    return pieces


def _fill_edges(j, a, b, num_e, genera, leg_place, sig: Signature) -> list[_Piece]:
    """Enumerate edge multisets with twists for a fixed vertex skeleton.

    Vertices 0..a-1 are at level 0, a..a+b-1 at level -1.  Twist budgets come
    from the per-vertex degree bound on level 0 (marked zeros and node zeros
    cannot exceed 2g-2 plus the pole orders)."""
    caps = []
    for u in range(a):
        zsum = sum(
            sig.leg_order(l) for l, v in leg_place if v == u and not sig.is_pole_leg(l)
        )
        psum = sum(
            sig.leg_order(l) for l, v in leg_place if v == u and sig.is_pole_leg(l)
        )
        cap = 2 * genera[u] - 2 - zsum + psum
        if cap < 0:
            return []
        caps.append(cap)

    out: list[_Piece] = []
    nlegs = [0] * (a + b)
    for _, v in leg_place:
        nlegs[v] += 1
    need_lower = sum(
        max(1, (2 if genera[a + w] == 0 else 3 - 2 * genera[a + w]) - nlegs[a + w])
        for w in range(b)
    )
    if need_lower > num_e or a > num_e:
        return []
    pairs = [(u, a + w) for u in range(a) for w in range(b)]
    used = [0] * a
    deg = [0] * (a + b)

    def rec(edge_list, start, remaining):
        if remaining == 0:
            if all(d > 0 for d in deg):
                _try_piece(edge_list)
            return
        uncovered = sum(1 for d in deg if d == 0)
        for k in range(start, len(pairs)):
            u, w = pairs[k]
            # vertices with no remaining candidate pair must be covered already
            if any(deg[x] == 0 for x in range(u)):
                return
            if u == a - 1 and any(deg[x] == 0 for x in range(a, w)):
                return
            # every still-isolated vertex needs at least one of the remaining
            # edges; one edge can cover at most two of them
            if 2 * remaining < uncovered:
                return
            budget = caps[u] - used[u]
            if budget < 0:
                continue
            # repeated edges on the same vertex pair: force non-decreasing
            # twists so each multiset appears once
            t_min = edge_list[-1][2] if edge_list and edge_list[-1][:2] == (u, w) and start == k else 1
            deg[u] += 1
            deg[w] += 1
            for t in range(t_min, budget + 2):
                used[u] += t - 1
                rec(edge_list + [(u, w, t)], k, remaining - 1)
                used[u] -= t - 1
            deg[u] -= 1
            deg[w] -= 1

    def _try_piece(edge_list):
        # connectivity over all a+b vertices
        if not _connected(a + b, [(u, w) for u, w, _ in edge_list]):
            return
        genus = tuple(genera)
        level = tuple([0] * a + [-1] * b)
        legs = tuple(leg_place)
        edges = tuple((u, w) for u, w, _ in edge_list)
        twists = tuple(t for _, _, t in edge_list)
        graph = SemiStableGraph(
            genus, tuple(j for _ in range(a + b)), edges, legs
        )
        tg = TwistedGraph(graph, twists, level)
        # per-vertex semi-stability and realizability
        for v in range(a + b):
            gv, nv, Pv = vertex_profile(graph, sig, v)
            if not is_semistable_triple(gv, nv, Pv):
                return
        if not is_realizable(tg, sig):
            return
        if not is_admissible(tg, sig):
            return
        out.append(_Piece(genus, level, legs, edges, twists))

    rec([], 0, num_e)
    return out


def _assemble(sig: Signature, chosen: list[_Piece]) -> TwistedGraph:
    genus: list[int] = []
    component: list[int] = []
    level: list[int] = []
    legs: list[tuple[Label, int]] = []
    edges: list[tuple[int, int]] = []
    twists: list[int] = []
    offset = 0
    for jj, piece in enumerate(chosen):
        genus.extend(piece.genus)
        component.extend(jj for _ in piece.genus)
        level.extend(piece.level)
        legs.extend((l, v + offset) for l, v in piece.legs)
        edges.extend((u + offset, w + offset) for u, w in piece.edges)
        twists.extend(piece.twists)
        offset += len(piece.genus)
    return TwistedGraph(
        SemiStableGraph(tuple(genus), tuple(component), tuple(edges), tuple(legs)),
        tuple(twists),
        tuple(level),
    )


def enumerate_bicolored(
    sig: Signature,
    *,
    leg_at_lower: Label | None = None,
    max_vertices: int | None = None,
) -> list[TwistedGraph]:
    """All two-level twisted graphs (no horizontal edges) for the signature.

    Every edge joins level 0 to level -1 and carries a positive twist on its
    level-0 side; marked poles of order >= 2 stay at level 0 (on rational
    bubbles when their original carrier sinks).  With ``leg_at_lower`` only
    graphs placing that leg on a level(-1) vertex are kept.  Graphs are
    returned up to isomorphism.
    """
    per_comp: list[list[_Piece]] = [
        _component_pieces(sig, j, max_vertices) for j in range(sig.q)
    ]
    if leg_at_lower is not None:
        jsel = leg_at_lower[0]
        per_comp[jsel] = [
            p
            for p in per_comp[jsel]
            if any(
                l == tuple(leg_at_lower) and p.level[v] < 0 for l, v in p.legs
            )
        ]
    out: dict[bytes, TwistedGraph] = {}
    for chosen in itertools.product(*per_comp):
        if not any(p.has_lower() for p in chosen):
            continue
        tg = _assemble(sig, list(chosen))
        key = canonical_key(tg.graph, twist=tg.twist, level=tg.level)
        if key not in out:
            out[key] = tg
    return list(out.values())


def enumerate_divisor_graphs(
    sig: Signature,
    R=None,
    *,
    leg_at_lower: Label | None = None,
    max_vertices: int | None = None,
) -> list[TwistedGraph]:
    """The two-level graphs whose lower-level data passes the divisor test."""
    from . import residues

    if R is None:
        R = residues.full_space(sig)
    out = []
    for tg in enumerate_bicolored(
        sig, leg_at_lower=leg_at_lower, max_vertices=max_vertices
    ):
        if residues.check_starstar(tg, sig, R):
            out.append(tg)
    return out
