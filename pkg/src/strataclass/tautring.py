"""Formal sums of decorated graphs with exact rational coefficients.

A :class:`Term` is a semi-stable graph over an ambient signature together
with cotangent-class powers at legs and half-edges, kappa and lambda
decorations at vertices, and a global power of the line-bundle class ``xi``
of the projectivized cone of differentials.  A :class:`DecoratedClass` is a
finite rational combination of terms, merged under graph isomorphism; every
term is stored with its full coefficient (no implicit automorphism factors).

The module provides the ring operations used by the stratum-class engine:
multiplication by ``xi``, cotangent and lambda classes, the clutching
pushforward :func:`glue` assembling a class on the ambient space from
classes on the two levels of a twisted graph, the marked-point forgetful
pushforward :func:`push_forget_point`, and the pushforward
:func:`push_forget_differential` along the projection that forgets the
differential (capping with the Segre class of the twisted Hodge bundle).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, prod

from . import residues
from .graphs import (
    Label,
    SemiStableGraph,
    Signature,
    TwistedGraph,
    bubble_vertices,
    canonical_key,
    trivial_graph,
)
from .residues import LevelData


def _norm(items) -> tuple:
    out = {}
    for k, p in items:
        if p:
            out[k] = out.get(k, 0) + p
    return tuple(sorted((k, p) for k, p in out.items() if p))


@dataclass(frozen=True)
class Term:
    graph: SemiStableGraph
    xi: int = 0
    psi_leg: tuple = ()  # ((label, power), ...)
    psi_he: tuple = ()  # (((edge, side), power), ...)
    kappa: tuple = ()  # (((vertex, a), power), ...)
    lam: tuple = ()  # (((vertex, a), power), ...)

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi_leg", _norm([(tuple(k), p) for k, p in self.psi_leg]))
        object.__setattr__(self, "psi_he", _norm(self.psi_he))
        object.__setattr__(self, "kappa", _norm(self.kappa))
        object.__setattr__(self, "lam", _norm(self.lam))

    def key(self) -> bytes:
        vdec: dict[int, tuple] = {}
        for (v, a), p in self.kappa:
            vdec.setdefault(v, ())
        for (v, a), p in self.lam:
            vdec.setdefault(v, ())
        for v in vdec:
            k = tuple(sorted(("k", a, p) for (w, a), p in self.kappa if w == v))
            l = tuple(sorted(("l", a, p) for (w, a), p in self.lam if w == v))
            vdec[v] = k + l
        hdec = {hs: (("psi", p),) for hs, p in self.psi_he}
        leg_psi = {lbl: p for lbl, p in self.psi_leg}
        return canonical_key(
            self.graph, vdec=vdec, hdec=hdec, leg_psi=leg_psi, extra=self.xi
        )

    def degree(self) -> int:
        d = self.xi + len(self.graph.edges)
        d += sum(p for _, p in self.psi_leg)
        d += sum(p for _, p in self.psi_he)
        d += sum(a * p for (_, a), p in self.kappa)
        d += sum(a * p for (_, a), p in self.lam)
        return d

    def local_decorations(self, v: int) -> list[tuple[str, object, int]]:
        """Decorations attached to vertex ``v`` (via its legs and half-edges)."""
        out = []
        for lbl, p in self.psi_leg:
            if self.graph.leg_vertex(lbl) == v:
                out.append(("psi_leg", lbl, p))
        he = set(self.graph.edges_at(v))
        for hs, p in self.psi_he:
            if hs in he:
                out.append(("psi_he", hs, p))
        for (w, a), p in self.kappa:
            if w == v:
                out.append(("kappa", a, p))
        for (w, a), p in self.lam:
            if w == v:
                out.append(("lam", a, p))
        return out


class DecoratedClass:
    """A finite rational combination of decorated-graph terms."""

    def __init__(self) -> None:
        self.terms: dict[bytes, tuple[Term, Fraction]] = {}

    # -- construction -------------------------------------------------------

    def add_term(self, term: Term, coeff: Fraction) -> None:
        coeff = Fraction(coeff)
        if coeff == 0:
            return
        k = term.key()
        if k in self.terms:
            old_t, old_c = self.terms[k]
            new_c = old_c + coeff
            if new_c == 0:
                del self.terms[k]
            else:
                self.terms[k] = (old_t, new_c)
        else:
            self.terms[k] = (term, coeff)

    def copy(self) -> "DecoratedClass":
        out = DecoratedClass()
        out.terms = dict(self.terms)
        return out

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "DecoratedClass") -> "DecoratedClass":
        out = self.copy()
        for t, c in other.terms.values():
            out.add_term(t, c)
        return out

    def __sub__(self, other: "DecoratedClass") -> "DecoratedClass":
        return self + other.scaled(Fraction(-1))

    def scaled(self, c) -> "DecoratedClass":
        out = DecoratedClass()
        c = Fraction(c)
        for t, co in self.terms.values():
            out.add_term(t, co * c)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecoratedClass):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self) -> str:
        return f"DecoratedClass({len(self.terms)} terms)"

    # -- multiplication by generators --------------------------------------

    def mul_xi(self, k: int = 1) -> "DecoratedClass":
        out = DecoratedClass()
        for t, c in self.terms.values():
            out.add_term(
                Term(t.graph, t.xi + k, t.psi_leg, t.psi_he, t.kappa, t.lam), c
            )
        return out

    def mul_psi_leg(self, lbl: Label, power: int = 1) -> "DecoratedClass":
        out = DecoratedClass()
        lbl = tuple(lbl)
        for t, c in self.terms.values():
            out.add_term(
                Term(
                    t.graph,
                    t.xi,
                    t.psi_leg + ((lbl, power),),
                    t.psi_he,
                    t.kappa,
                    t.lam,
                ),
                c,
            )
        return out

    def mul_lambda_comp(self, j: int, a: int) -> "DecoratedClass":
        """Multiply by the degree-``a`` Chern class of the Hodge bundle of
        ambient component ``j`` (distributed over the graph vertices)."""
        if a == 0:
            return self.copy()
        out = DecoratedClass()
        for t, c in self.terms.values():
            verts = t.graph.vertices_of_component(j)
            for split in _bounded_compositions(
                a, [t.graph.genus[v] for v in verts]
            ):
                lam = t.lam + tuple(
                    ((v, av), 1) for v, av in zip(verts, split) if av
                )
                out.add_term(Term(t.graph, t.xi, t.psi_leg, t.psi_he, t.kappa, lam), c)
        return out

    def to_jsonable(self) -> list:
        out = []
        for key in sorted(self.terms):
            t, c = self.terms[key]
            out.append(
                {
                    "coeff": str(c),
                    "xi": t.xi,
                    "genus": list(t.graph.genus),
                    "component": list(t.graph.component),
                    "edges": [list(e) for e in t.graph.edges],
                    "legs": [[list(l), v] for l, v in t.graph.legs],
                    "psi_leg": [[list(l), p] for l, p in t.psi_leg],
                    "psi_he": [[list(h), p] for h, p in t.psi_he],
                    "kappa": [[list(k), p] for k, p in t.kappa],
                    "lambda": [[list(k), p] for k, p in t.lam],
                }
            )
        return out


def _bounded_compositions(total: int, bounds: list[int]):
    """Weak compositions of ``total`` with the given per-part upper bounds."""
    if not bounds:
        if total == 0:
            yield ()
        return
    for first in range(0, min(total, bounds[0]) + 1):
        for rest in _bounded_compositions(total - first, bounds[1:]):
            yield (first,) + rest


def fundamental(sig: Signature) -> DecoratedClass:
    out = DecoratedClass()
    out.add_term(Term(trivial_graph(sig)), Fraction(1))
    return out


def term_class(term: Term, coeff=Fraction(1)) -> DecoratedClass:
    out = DecoratedClass()
    out.add_term(term, Fraction(coeff))
    return out


# ---------------------------------------------------------------------------
# clutching pushforward along a two-level graph
# ---------------------------------------------------------------------------


def glue(
    ld: LevelData,
    sig: Signature,
    A: DecoratedClass,
    B: DecoratedClass,
) -> DecoratedClass:
    """Pushforward to the ambient space of (level-0 class) x (level-1 class).

    ``A`` lives over the level-0 signature (one component per level-0
    vertex), ``B`` over the level-1 signature.  Rational level-0 vertices
    carrying a single marked pole and a single edge are contracted: their
    pole leg moves to the lower end of the edge and the edge contributes the
    first Chern class of the lower cotangent line twisted by the scaling
    weight, i.e. a factor ``xi/(p-1) - psi`` at the relocated pole.

    No automorphism factor and no global power of ``xi`` is applied here.
    """
    tg = ld.tg
    graph = tg.graph
    bubbles = set(bubble_vertices(tg, sig))
    bubble_comp = {
        c0 for c0, v in enumerate(ld.level0_vertices) if v in bubbles
    }

    # reverse maps: ambient legs and cross edges to sub-signature legs
    a_sub_of_src: dict = {}
    for c0, srcs in enumerate(ld.level0_zero_src):
        for i, src in enumerate(srcs):
            a_sub_of_src[src] = (c0, i)
    for c0, srcs in enumerate(ld.level0_pole_src):
        n0 = ld.level0_sig.components[c0].n
        for t, src in enumerate(srcs):
            a_sub_of_src[src] = (c0, n0 + t)
    b_sub_of_src: dict = {}
    for c1, srcs in enumerate(ld.level1_zero_src):
        for i, src in enumerate(srcs):
            b_sub_of_src[src] = (c1, i)
    for c1, srcs in enumerate(ld.level1_pole_src):
        n1 = ld.level1_sig.components[c1].n
        for t, src in enumerate(srcs):
            b_sub_of_src[src] = (c1, n1 + t)

    out = DecoratedClass()
    for tA, cA in A.terms.values():
        for tB, cB in B.terms.values():
            pieces = _glue_terms(
                ld, sig, graph, bubbles, bubble_comp, a_sub_of_src, b_sub_of_src, tA, tB
            )
            if pieces is None:
                continue
            for term, extra in pieces:
                out.add_term(term, cA * cB * extra)
    return out


def _glue_terms(
    ld, sig, graph, bubbles, bubble_comp, a_sub_of_src, b_sub_of_src, tA, tB
):
    gA, gB = tA.graph, tB.graph
    # vertices of bubble components must be bare single vertices
    a_keep = []
    for u in range(gA.num_vertices):
        if gA.component[u] in bubble_comp:
            if gA.edges_at(u) or tA.local_decorations(u):
                return None  # decorated bubble factors vanish
        else:
            a_keep.append(u)
    a_id = {u: k for k, u in enumerate(a_keep)}
    b_off = len(a_keep)
    b_id = {u: b_off + u for u in range(gB.num_vertices)}

    genus = [gA.genus[u] for u in a_keep] + list(gB.genus)
    comp = [
        graph.component[ld.level0_vertices[gA.component[u]]] for u in a_keep
    ] + [graph.component[ld.level1_vertices[c]] for c in gB.component]

    edges: list[tuple[int, int]] = []
    a_edge_id: dict[int, int] = {}
    for e, (x, y) in enumerate(gA.edges):
        a_edge_id[e] = len(edges)
        edges.append((a_id[x], a_id[y]))
    b_edge_id: dict[int, int] = {}
    for e, (x, y) in enumerate(gB.edges):
        b_edge_id[e] = len(edges)
        edges.append((b_id[x], b_id[y]))

    legs: dict[Label, int] = {}
    psi_leg: dict[Label, int] = {}
    psi_he: dict[tuple[int, int], int] = {}

    # ambient marked points carried by either level
    for src, (c0, i) in a_sub_of_src.items():
        if src[0] != "leg" or c0 in bubble_comp:
            continue
        sub_lbl = (c0, i)
        legs[tuple(src[1])] = a_id[gA.leg_vertex(sub_lbl)]
    for src, (c1, i) in b_sub_of_src.items():
        if src[0] != "leg":
            continue
        legs[tuple(src[1])] = b_id[gB.leg_vertex((c1, i))]

    # cross edges and bubble contractions
    cross_edge_id: dict[int, int] = {}
    bubble_leg_of_edge: dict[int, Label] = {}
    bubble_factors: list[tuple[Label, int]] = []  # (relocated pole leg, order)
    for e, (v0, v1) in enumerate(graph.edges):
        b_vertex = b_id[gB.leg_vertex(b_sub_of_src[("edge", e)])]
        if v0 in bubbles:
            (lbl,) = graph.legs_at(v0)
            legs[tuple(lbl)] = b_vertex
            bubble_leg_of_edge[e] = tuple(lbl)
            bubble_factors.append((tuple(lbl), sig.leg_order(lbl)))
        else:
            a_vertex = a_id[gA.leg_vertex(a_sub_of_src[("edge", e)])]
            cross_edge_id[e] = len(edges)
            edges.append((a_vertex, b_vertex))

    # decorations from the level-0 term
    kappa = []
    lam = []
    for lbl, p in tA.psi_leg:
        src = _src_of_sub(ld, True, lbl)
        if src[0] == "leg":
            psi_leg[tuple(src[1])] = psi_leg.get(tuple(src[1]), 0) + p
        else:
            hs = (cross_edge_id[src[1]], 0)
            psi_he[hs] = psi_he.get(hs, 0) + p
    for (e, side), p in tA.psi_he:
        psi_he[(a_edge_id[e], side)] = p
    for (v, a), p in tA.kappa:
        kappa.append(((a_id[v], a), p))
    for (v, a), p in tA.lam:
        lam.append(((a_id[v], a), p))
    # decorations from the level-1 term
    for lbl, p in tB.psi_leg:
        src = _src_of_sub(ld, False, lbl)
        if src[0] == "leg":
            psi_leg[tuple(src[1])] = psi_leg.get(tuple(src[1]), 0) + p
        elif src[1] in bubble_leg_of_edge:
            # contracted bubble edge: the node point becomes the relocated leg
            lbl = bubble_leg_of_edge[src[1]]
            psi_leg[lbl] = psi_leg.get(lbl, 0) + p
        else:
            hs = (cross_edge_id[src[1]], 1)
            psi_he[hs] = psi_he.get(hs, 0) + p
    for (e, side), p in tB.psi_he:
        psi_he[(b_edge_id[e], side)] = p
    for (v, a), p in tB.kappa:
        kappa.append(((b_id[v], a), p))
    for (v, a), p in tB.lam:
        lam.append(((b_id[v], a), p))

    base = Term(
        SemiStableGraph(tuple(genus), tuple(comp), tuple(edges), tuple(legs.items())),
        tA.xi + tB.xi,
        tuple(psi_leg.items()),
        tuple(psi_he.items()),
        tuple(kappa),
        tuple(lam),
    )
    results = [(base, Fraction(1))]
    for lbl, p in bubble_factors:
        new_results = []
        for t, c in results:
            new_results.append(
                (
                    Term(t.graph, t.xi + 1, t.psi_leg, t.psi_he, t.kappa, t.lam),
                    c / (p - 1),
                )
            )
            new_results.append(
                (
                    Term(
                        t.graph,
                        t.xi,
                        t.psi_leg + ((lbl, 1),),
                        t.psi_he,
                        t.kappa,
                        t.lam,
                    ),
                    -c,
                )
            )
        results = new_results
    return results


def _src_of_sub(ld: LevelData, level0: bool, sub_lbl: Label):
    c, i = sub_lbl
    if level0:
        comp = ld.level0_sig.components[c]
        if i < comp.n:
            return ld.level0_zero_src[c][i]
        return ld.level0_pole_src[c][i - comp.n]
    comp = ld.level1_sig.components[c]
    if i < comp.n:
        return ld.level1_zero_src[c][i]
    return ld.level1_pole_src[c][i - comp.n]


# ---------------------------------------------------------------------------
# forgetting a marked point
# ---------------------------------------------------------------------------


def forget_point_signature(sig: Signature, lbl: Label) -> Signature:
    j, i = lbl
    comp = sig.components[j]
    if i < comp.n:
        newc = type(comp)(comp.g, comp.Z[:i] + comp.Z[i + 1 :], comp.P)
    else:
        t = i - comp.n
        newc = type(comp)(comp.g, comp.Z, comp.P[:t] + comp.P[t + 1 :])
    comps = list(sig.components)
    comps[j] = newc
    return Signature(tuple(comps))


def _relabel_after_forget(lbl: Label, other: Label) -> Label:
    j, i = lbl
    oj, oi = other
    if oj == j and oi > i:
        return (oj, oi - 1)
    return (oj, oi)


def push_forget_point(cls: DecoratedClass, sig: Signature, lbl: Label) -> DecoratedClass:
    """Pushforward along the map forgetting marked point ``lbl``.

    Remaining marked points of the same component with a larger index are
    shifted down by one; the result lives over
    :func:`forget_point_signature` of the input signature.
    """
    lbl = tuple(lbl)
    out = DecoratedClass()
    for t, c in cls.terms.values():
        for nt, nc in _push_forget_point_term(t, sig, lbl):
            out.add_term(nt, c * nc)
    return out


def _strip_leg(graph: SemiStableGraph, lbl: Label) -> SemiStableGraph:
    legs = tuple(
        (_relabel_after_forget(lbl, l), v) for l, v in graph.legs if l != lbl
    )
    return SemiStableGraph(graph.genus, graph.component, graph.edges, legs)


def _push_forget_point_term(t: Term, sig: Signature, lbl: Label):
    graph = t.graph
    v = graph.leg_vertex(lbl)
    gv = graph.genus[v]
    deg_after = graph.degree(v) - 1
    K = dict(t.psi_leg).get(lbl, 0)

    if gv == 0 and deg_after < 3:
        yield from _contract_unstable(t, sig, lbl, v)
        return
    if 2 * gv - 2 + deg_after <= 0:
        raise NotImplementedError(
            "forgetting the point leaves an unstable vertex of positive genus"
        )

    # local data at v
    kappas = {a: p for (w, a), p in t.kappa if w == v}
    handles: list[tuple[str, object, int]] = []
    for l, p in t.psi_leg:
        if l != lbl and graph.leg_vertex(l) == v:
            handles.append(("psi_leg", l, p))
    he_at_v = set(graph.edges_at(v))
    for hs, p in t.psi_he:
        if hs in he_at_v:
            handles.append(("psi_he", hs, p))

    other_psi_leg = tuple((l, p) for l, p in t.psi_leg if l != lbl and graph.leg_vertex(l) != v)
    other_psi_he = tuple((hs, p) for hs, p in t.psi_he if hs not in he_at_v)
    other_kappa = tuple(((w, a), p) for (w, a), p in t.kappa if w != v)
    new_graph = _strip_leg(graph, lbl)

    def relabeled(pl):
        return tuple((_relabel_after_forget(lbl, l), p) for l, p in pl)

    # binomial expansion of the kappa classes at v in terms of the pulled-back
    # kappa classes and the cotangent line at the forgotten point
    for choice in _kappa_choices(kappas):
        coef, extra_k, kept = choice
        ktot = K + extra_k
        if ktot >= 1:
            # all remaining factors pulled back; integrate the cotangent power
            new_kappa = dict(kept)
            if ktot - 1 == 0:
                numeric = Fraction(2 * gv - 2 + deg_after)
            else:
                numeric = Fraction(1)
                new_kappa[ktot - 1] = new_kappa.get(ktot - 1, 0) + 1
            if numeric == 0:
                continue
            yield (
                Term(
                    new_graph,
                    t.xi,
                    relabeled(other_psi_leg)
                    + relabeled(tuple((l, p) for kind, l, p in handles if kind == "psi_leg")),
                    other_psi_he
                    + tuple((hs, p) for kind, hs, p in handles if kind == "psi_he"),
                    other_kappa + tuple(((v, a), p) for a, p in new_kappa.items()),
                    t.lam,
                ),
                coef * numeric,
            )
        else:
            # no cotangent power survives: string equation, one factor of the
            # product at v loses a power of its cotangent class
            for pick in range(len(handles)):
                kind, h, p = handles[pick]
                rest_leg = [
                    (l, q)
                    for k2, l, q in (handles[:pick] + handles[pick + 1:])
                    if k2 == "psi_leg"
                ]
                rest_he = [
                    (hs, q)
                    for k2, hs, q in (handles[:pick] + handles[pick + 1:])
                    if k2 == "psi_he"
                ]
                sign = Fraction(1)
                if kind == "psi_leg":
                    rest_leg.append((h, p - 1))
                else:
                    rest_he.append((h, p - 1))
                yield (
                    Term(
                        new_graph,
                        t.xi,
                        relabeled(other_psi_leg) + relabeled(tuple(rest_leg)),
                        other_psi_he + tuple(rest_he),
                        other_kappa + tuple(((v, a), q) for a, q in kept.items()),
                        t.lam,
                    ),
                    coef * sign,
                )


def _kappa_choices(kappas: dict[int, int]):
    """Expansion of a product of kappa powers at the vertex into pulled-back
    kappa classes times powers of the cotangent line at the forgotten point."""
    items = sorted(kappas.items())

    def rec(idx):
        if idx == len(items):
            yield Fraction(1), 0, {}
            return
        a, c = items[idx]
        for coef, extra, kept in rec(idx + 1):
            for i in range(c + 1):
                new_kept = dict(kept)
                if c - i:
                    new_kept[a] = c - i
                yield coef * comb(c, i), extra + a * i, new_kept

    yield from rec(0)


def _contract_unstable(t: Term, sig: Signature, lbl: Label, v: int):
    """Forget a point on a rational vertex with three special points."""
    if any(True for _ in t.local_decorations(v)):
        return  # any positive-degree class on a three-pointed rational factor is zero
    graph = t.graph
    attachments: list[tuple[str, object]] = []
    for l in graph.legs_at(v):
        if l != lbl:
            attachments.append(("leg", l))
    for hs in graph.edges_at(v):
        attachments.append(("he", hs))
    if len(attachments) != 2:
        raise NotImplementedError("unexpected vertex degree during contraction")
    kinds = sorted(k for k, _ in attachments)
    if kinds == ["he", "he"]:
        (_, h1), (_, h2) = attachments
        (e1, s1), (e2, s2) = h1, h2
        if e1 == e2:
            raise NotImplementedError(
                "contracting a vertex carrying both ends of one edge"
            )
        # join the far endpoints of the two edges into a single edge
        far1 = graph.edges[e1][1 - s1]
        far2 = graph.edges[e2][1 - s2]
        he_map = {}
        new_edges = []
        for e, (x, y) in enumerate(graph.edges):
            if e in (e1, e2):
                continue
            he_map[(e, 0)] = (len(new_edges), 0)
            he_map[(e, 1)] = (len(new_edges), 1)
            new_edges.append((x, y))
        joined = len(new_edges)
        new_edges.append((far1, far2))
        he_map[(e1, 1 - s1)] = (joined, 0)
        he_map[(e2, 1 - s2)] = (joined, 1)
        keep = [w for w in range(graph.num_vertices) if w != v]
        vid = {w: k for k, w in enumerate(keep)}
        new_graph = SemiStableGraph(
            tuple(graph.genus[w] for w in keep),
            tuple(graph.component[w] for w in keep),
            tuple((vid[x], vid[y]) for x, y in new_edges),
            tuple(
                (_relabel_after_forget(lbl, l), vid[w])
                for l, w in graph.legs
                if l != lbl
            ),
        )
        yield (
            Term(
                new_graph,
                t.xi,
                tuple((_relabel_after_forget(lbl, l), p) for l, p in t.psi_leg),
                tuple((he_map[hs], p) for hs, p in t.psi_he),
                tuple(((vid[w], a), p) for (w, a), p in t.kappa),
                tuple(((vid[w], a), p) for (w, a), p in t.lam),
            ),
            Fraction(1),
        )
        return
    if kinds == ["he", "leg"]:
        (k1, x1), (k2, x2) = attachments
        other_leg = x1 if k1 == "leg" else x2
        hs = x2 if k1 == "leg" else x1
        e, s = hs
        far = graph.edges[e][1 - s]
        keep = [w for w in range(graph.num_vertices) if w != v]
        vid = {w: k for k, w in enumerate(keep)}
        he_map = {}
        new_edges = []
        for e2, (x, y) in enumerate(graph.edges):
            if e2 == e:
                continue
            he_map[(e2, 0)] = (len(new_edges), 0)
            he_map[(e2, 1)] = (len(new_edges), 1)
            new_edges.append((vid[x], vid[y]))
        new_legs = []
        for l, w in graph.legs:
            if l == lbl:
                continue
            new_legs.append(
                (_relabel_after_forget(lbl, l), vid[far] if l == other_leg else vid[w])
            )
        # the cotangent line at the far side of the contracted edge becomes
        # the cotangent line at the surviving marked point
        psi_leg = []
        for l, p in t.psi_leg:
            psi_leg.append((_relabel_after_forget(lbl, l), p))
        psi_he = []
        for h2, p in t.psi_he:
            if h2 == (e, 1 - s):
                psi_leg.append((_relabel_after_forget(lbl, other_leg), p))
            else:
                psi_he.append((he_map[h2], p))
        yield (
            Term(
                SemiStableGraph(
                    tuple(graph.genus[w] for w in keep),
                    tuple(graph.component[w] for w in keep),
                    tuple(new_edges),
                    tuple(new_legs),
                ),
                t.xi,
                tuple(psi_leg),
                tuple(psi_he),
                tuple(((vid[w], a), p) for (w, a), p in t.kappa),
                tuple(((vid[w], a), p) for (w, a), p in t.lam),
            ),
            Fraction(1),
        )
        return
    raise NotImplementedError("cannot forget a point on an isolated rational vertex")


# ---------------------------------------------------------------------------
# forgetting the differential
# ---------------------------------------------------------------------------


def segre_monomials(sig: Signature, degree: int):
    """Monomials of the given degree in the Segre class of the twisted Hodge
    bundle, as (coefficient, [(component, a)], {pole label: power}).

    Per component the total class is the alternating sum of the Hodge Chern
    classes times a geometric series in the cotangent class of each pole
    weighted by the pole order minus one, with an overall rational prefactor
    from the pole orders.
    """
    pref = Fraction(1)
    for c in sig.components:
        for p in c.P:
            pref *= Fraction((p - 1) ** (p - 1), factorial(p - 1))

    options_per_comp = []
    for j, c in enumerate(sig.components):
        opts = []  # (degree, coeff, lam or None, {pole label: power})
        for a in range(0, c.g + 1):
            opts.append((a, Fraction((-1) ** a), None if a == 0 else (j, a)))
        options_per_comp.append((j, c, opts))

    out = []

    def rec_comp(idx, deg_left, coeff, lams, psis):
        if idx == len(options_per_comp):
            if deg_left == 0:
                out.append((coeff * pref, list(lams), dict(psis)))
            return
        j, c, opts = options_per_comp[idx]
        pole_lbls = [(j, c.n + t) for t in range(c.m)]
        weights = [c.P[t] - 1 for t in range(c.m)]
        for a, sgn, lam in opts:
            if a > deg_left:
                continue
            for powers in _weighted_powers(deg_left - a, pole_lbls, weights):
                psi_coeff = Fraction(1)
                psi_add = {}
                total = 0
                for lbl, w, tpow in powers:
                    if tpow:
                        if w == 0:
                            psi_coeff = Fraction(0)
                            break
                        psi_coeff *= Fraction(w) ** tpow
                        psi_add[lbl] = tpow
                        total += tpow
                if psi_coeff == 0:
                    continue
                rec_comp(
                    idx + 1,
                    deg_left - a - total,
                    coeff * sgn * psi_coeff,
                    lams + ([lam] if lam else []),
                    {**psis, **psi_add},
                )

    def _weighted_powers(max_deg, lbls, weights):
        def rec(i, left):
            if i == len(lbls):
                yield []
                return
            for t in range(0, left + 1):
                for rest in rec(i + 1, left - t):
                    yield [(lbls[i], weights[i], t)] + rest
        yield from rec(0, max_deg)

    rec_comp(0, degree, Fraction(1), [], {})
    return out


def push_forget_differential(cls: DecoratedClass, sig: Signature) -> DecoratedClass:
    """Pushforward along the projection forgetting the differential.

    A power of ``xi`` pushes to the Segre-class component of complementary
    degree of the twisted Hodge bundle; terms of too low a power of ``xi``
    push to zero.
    """
    for c in sig.components:
        if 2 * c.g - 2 + c.n + c.m <= 0:
            raise NotImplementedError(
                "pushforward over a rigid rational component"
            )
    r = residues.rank(sig)
    out = DecoratedClass()
    for t, co in cls.terms.values():
        s_deg = t.xi - (r - 1)
        if s_deg < 0:
            continue
        base = term_class(
            Term(t.graph, 0, t.psi_leg, t.psi_he, t.kappa, t.lam), co
        )
        for coeff, lams, psis in segre_monomials(sig, s_deg):
            piece = base.scaled(coeff)
            for j, a in lams:
                piece = piece.mul_lambda_comp(j, a)
            for lbl, p in psis.items():
                piece = piece.mul_psi_leg(lbl, p)
            out = out + piece
    return out


def hodge_xi_factor(sig: Signature) -> DecoratedClass:
    """The product over components of the total Hodge class evaluated
    degreewise against powers of ``xi``: sum over a of lambda_a xi^(g-a)."""
    out = fundamental(sig)
    for j, c in enumerate(sig.components):
        factor = DecoratedClass()
        for a in range(0, c.g + 1):
            for t, co in out.mul_lambda_comp(j, a).mul_xi(c.g - a).terms.values():
                factor.add_term(t, co)
        out = factor
    return out


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------


def normalize(cls: DecoratedClass, sig: Signature, *, on_cone: bool | None = None) -> DecoratedClass:
    """Drop terms exceeding the ambient or a vertex-local dimension and
    rewrite degree-one decorations on one-pointed genus-one vertices as the
    corresponding multiple of the self-node graph."""
    if on_cone is None:
        on_cone = any(t.xi > 0 for t, _ in cls.terms.values())
    ambient = (
        residues.projective_cone_dim(sig) if on_cone else residues.moduli_dim(sig)
    )
    out = DecoratedClass()
    for t, c in cls.terms.values():
        for nt, nc in _normalize_term(t, ambient):
            out.add_term(nt, c * nc)
    return out


def _normalize_term(t: Term, ambient: int):
    if t.degree() > ambient:
        return
    graph = t.graph
    for v in range(graph.num_vertices):
        gv, deg = graph.genus[v], graph.degree(v)
        local_dim = 3 * gv - 3 + deg
        local_deg = 0
        for kind, x, p in t.local_decorations(v):
            local_deg += p * (x if kind in ("kappa", "lam") else 1)
        if local_dim >= 0 and local_deg > local_dim:
            return
        if gv == 1 and deg == 1 and local_deg == 1:
            # one-pointed genus-one factor: any degree-one class equals
            # 1/24 of the pushforward of the self-node graph
            genus = list(graph.genus)
            genus[v] = 0
            e_new = len(graph.edges)
            new_graph = SemiStableGraph(
                tuple(genus),
                graph.component,
                graph.edges + ((v, v),),
                graph.legs,
            )
            dec = t.local_decorations(v)
            assert len(dec) == 1
            kind, x, p = dec[0]
            psi_leg = tuple((l, q) for l, q in t.psi_leg if not (kind == "psi_leg" and l == x))
            psi_he = tuple((h, q) for h, q in t.psi_he if not (kind == "psi_he" and h == x))
            kappa = tuple((k, q) for k, q in t.kappa if not (kind == "kappa" and k == (v, x)))
            lam = tuple((k, q) for k, q in t.lam if not (kind == "lam" and k == (v, x)))
            nt = Term(new_graph, t.xi, psi_leg, psi_he, kappa, lam)
            for nt2, nc2 in _normalize_term(nt, ambient):
                yield nt2, nc2 * Fraction(1, 24)
            return
    yield t, Fraction(1)


# ---------------------------------------------------------------------------
# boundary divisors and the genus-level relation for kappa
# ---------------------------------------------------------------------------


def boundary_nonsep(sig: Signature, j: int = 0) -> DecoratedClass:
    """Half the pushforward of the self-node graph on component ``j``."""
    comp = sig.components[j]
    base = trivial_graph(sig)
    genus = list(base.genus)
    genus[j] = comp.g - 1
    graph = SemiStableGraph(
        tuple(genus), base.component, base.edges + ((j, j),), base.legs
    )
    return term_class(Term(graph), Fraction(1, 2))


def boundary_sep(sig: Signature, h: int, j: int = 0, legs_on_first=()) -> DecoratedClass:
    """Pushforward of the two-vertex graph splitting component ``j`` into
    genus ``h`` and ``g - h``, weighted by its automorphisms."""
    comp = sig.components[j]
    base = trivial_graph(sig)
    nv = base.num_vertices
    genus = list(base.genus) + [comp.g - h]
    genus[j] = h
    component = list(base.component) + [j]
    legs_on_first = {tuple(l) for l in legs_on_first}
    legs = []
    for l, v in base.legs:
        if v == j and l not in legs_on_first:
            legs.append((l, nv))
        else:
            legs.append((l, v))
    graph = SemiStableGraph(
        tuple(genus), tuple(component), base.edges + ((j, nv),), tuple(legs)
    )
    from .graphs import automorphism_count

    aut = automorphism_count(graph)
    return term_class(Term(graph), Fraction(1, aut))


def total_boundary(sig: Signature, j: int = 0) -> DecoratedClass:
    """Sum of all boundary divisor classes of component ``j`` (no legs)."""
    comp = sig.components[j]
    if comp.n + comp.m:
        raise NotImplementedError("total boundary implemented for bare components")
    out = boundary_nonsep(sig, j)
    for h in range(1, comp.g // 2 + 1):
        out = out + boundary_sep(sig, h, j)
    return out


def apply_kappa_lambda_relation(cls: DecoratedClass, sig: Signature) -> DecoratedClass:
    """Rewrite a first kappa class on an undegenerate bare component as
    twelve lambda_1 minus the total boundary."""
    out = DecoratedClass()
    for t, c in cls.terms.values():
        k1 = [(v, p) for (v, a), p in t.kappa if a == 1]
        if not k1:
            out.add_term(t, c)
            continue
        if len(k1) != 1 or k1[0][1] != 1 or t.graph.edges or t.graph.legs:
            raise NotImplementedError(
                "kappa rewriting supported only for a single first kappa on a bare vertex"
            )
        v = k1[0][0]
        j = t.graph.component[v]
        stripped = Term(
            t.graph,
            t.xi,
            t.psi_leg,
            t.psi_he,
            tuple(((w, a), p) for (w, a), p in t.kappa if a != 1),
            t.lam,
        )
        if stripped.kappa or stripped.lam or stripped.xi or stripped.psi_leg:
            raise NotImplementedError("kappa rewriting supported only on plain terms")
        repl = term_class(
            Term(t.graph, 0, (), (), (), (((v, 1), 1),)), Fraction(12)
        ) - total_boundary(sig, j)
        out = out + repl.scaled(c)
    return out
