"""Brute-force reference enumeration of two-level twisted graphs.

This is an intentionally naive generator used to cross-check the production
enumerator: it walks over raw vertex splits, genus assignments, leg
placements, edge multisets and twists, keeping a candidate exactly when the
defining conditions hold, and returns the set of canonical forms.  It shares
only the canonical-form routine with the production code so that the two
result sets can be compared.
"""

from __future__ import annotations

import itertools

from .graphs import (
    SemiStableGraph,
    Signature,
    TwistedGraph,
    canonical_key,
)


def _connected(nv: int, edges) -> bool:
    if nv == 0:
        return False
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for a, b in edges:
            for x, y in ((a, b), (b, a)):
                if x == v and y not in seen:
                    seen.add(y)
                    frontier.append(y)
    return len(seen) == nv


def _vertex_supports_differential(g: int, nzeros: int, poles: list[int]) -> bool:
    """A pointed curve of this genus with ``nzeros`` marked zeros and the
    given pole orders either is stable or is one of the rational
    single-higher-order-pole shapes that a scaling bubble takes."""
    npts = nzeros + len(poles)
    if 2 * g - 2 + npts > 0:
        return True
    ps = sorted(poles)
    if g == 0 and nzeros == 1 and len(ps) == 1 and ps[0] > 1:
        return True
    if g == 0 and nzeros == 0 and len(ps) == 2 and ps[0] == 1 and ps[1] > 1:
        return True
    return False


def brute_force_bicolored(
    sig: Signature, *, max_vertices: int | None = None
) -> set[bytes]:
    """Canonical forms of all two-level twisted graphs of the signature.

    Only single-component signatures are supported.  The defining conditions
    checked directly: every edge joins level 0 to level -1 with a positive
    twist; at least one vertex sits at level -1; the graph is connected; the
    genera and the cycle count add to g; marked poles of order at least two
    sit at level 0; at every vertex the marked orders plus the signed twist
    contributions stay within 2g(v)-2; every vertex supports a differential.
    """
    if sig.q != 1:
        raise ValueError("single-component signatures only")
    comp = sig.components[0]
    g, Z, P = comp.g, comp.Z, comp.P
    n, m = comp.n, comp.m
    # a twist t puts a node zero of order t-1 on a level-0 vertex, so the
    # degree inequality there forces t - 1 <= 2g - 2 + sum(P)
    t_max = 2 * g - 1 + sum(P)

    out: set[bytes] = set()
    # the fully sunk graph: a single vertex at level -1, no edges
    if all(p == 1 for p in P) and _vertex_supports_differential(
        g, n, list(P)
    ):
        tg = TwistedGraph(
            SemiStableGraph(
                (g,), (0,), (), tuple(((0, i), 0) for i in range(n + m))
            ),
            (),
            (-1,),
        )
        out.add(canonical_key(tg.graph, twist=tg.twist, level=tg.level))
    vcap = max_vertices if max_vertices is not None else g + m + n + 3
    for a in range(1, vcap + 1):  # level-0 vertices
        for b in range(1, vcap + 1 - a):  # level(-1) vertices
            nv = a + b
            for genera in itertools.product(range(g + 1), repeat=nv):
                if sum(genera) > g:
                    continue
                h1 = g - sum(genera)
                num_e = h1 + nv - 1
                if num_e < 1:
                    continue
                # leg placements; higher-order poles must stay at level 0
                placements = []
                for i in range(n):
                    placements.append(range(nv))
                for t in range(m):
                    placements.append(range(nv) if P[t] == 1 else range(a))
                for place in itertools.product(*placements):
                    legs = tuple(
                        ((0, i), place[i]) for i in range(n + m)
                    )
                    pairs = list(itertools.product(range(a), range(a, nv)))
                    for edge_sel in itertools.combinations_with_replacement(
                        pairs, num_e
                    ):
                        if not _connected(nv, edge_sel):
                            continue
                        for twists in itertools.product(
                            range(1, t_max + 1), repeat=num_e
                        ):
                            if not _check_degrees(
                                sig, a, nv, genera, legs, edge_sel, twists
                            ):
                                continue
                            tg = TwistedGraph(
                                SemiStableGraph(
                                    tuple(genera),
                                    (0,) * nv,
                                    tuple(edge_sel),
                                    legs,
                                ),
                                tuple(twists),
                                (0,) * a + (-1,) * b,
                            )
                            out.add(
                                canonical_key(
                                    tg.graph, twist=tg.twist, level=tg.level
                                )
                            )
    return out


def _check_degrees(sig, a, nv, genera, legs, edges, twists) -> bool:
    nzeros = [0] * nv
    poles = [[] for _ in range(nv)]
    slack = [0] * nv
    for lbl, v in legs:
        o = sig.leg_order(lbl)
        if sig.is_pole_leg(lbl):
            poles[v].append(o)
            slack[v] -= o
        else:
            nzeros[v] += 1
            slack[v] += o
    for (u, w), t in zip(edges, twists):
        # for the semi-stability count a node is a simple pole on both sides;
        # the degree bound sees the signed twist
        poles[u].append(1)
        slack[u] += t - 1
        poles[w].append(1)
        slack[w] -= t + 1
    for v in range(nv):
        if slack[v] > 2 * genera[v] - 2:
            return False
        if not _vertex_supports_differential(genera[v], nzeros[v], poles[v]):
            return False
    return True
