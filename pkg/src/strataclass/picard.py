"""Divisor-level identities on closures of loci of curves with a differential.

The closure of the locus of curves carrying a differential with prescribed
zero and pole orders sits inside the moduli of pointed curves.  Its boundary
divisors coming from two-level degenerations are indexed by two-vertex
depth-one twisted graphs; this module enumerates those graphs, builds formal
rational combinations of their classes together with a few distinguished
divisor classes, and assembles four identities relating them.  Each identity
can be rendered formally or evaluated through the induction engine as an
equality of decorated cycle classes on the ambient moduli space.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import residues, tautring
from .graphs import (
    Label,
    Signature,
    TwistedGraph,
    automorphism_count,
    bubble_vertices,
    canonical_key,
    enumerate_bicolored,
    multiplicity,
    stabilize,
    unstabilize,
)
from .residues import ResidueSpace
from .tautring import DecoratedClass


# ---------------------------------------------------------------------------
# two-vertex depth-one graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleBicoloredGraph:
    """A stable two-vertex twisted graph of depth one.

    ``tg`` has exactly two vertices, one at level 0 and one at level -1;
    every edge joins the two and carries a positive twist on its level-0
    side.  ``admissible`` is the corresponding graph before stabilization:
    marked poles of order at least two sitting at level -1 are pushed back
    onto rational level-0 vertices.
    """

    tg: TwistedGraph
    sig: Signature

    def __post_init__(self) -> None:
        if self.tg.graph.num_vertices != 2:
            raise ValueError("exactly two vertices required")
        if sorted(self.tg.level) != [-1, 0]:
            raise ValueError("one vertex per level required")

    @property
    def lower_vertex(self) -> int:
        return self.tg.level.index(-1)

    @property
    def upper_vertex(self) -> int:
        return self.tg.level.index(0)

    @property
    def key(self) -> bytes:
        return canonical_key(
            self.tg.graph, twist=self.tg.twist, level=self.tg.level
        )

    @property
    def admissible(self) -> TwistedGraph:
        return unstabilize(self.tg, self.sig)

    @property
    def m(self) -> int:
        """Multiplicity of the twist, computed on the admissible graph."""
        return multiplicity(self.admissible, self.sig).m

    @property
    def aut(self) -> int:
        return automorphism_count(
            self.tg.graph, twist=self.tg.twist, level=self.tg.level
        )

    def legs_at_lower(self) -> list[Label]:
        return self.tg.graph.legs_at(self.lower_vertex)

    def lower_zero_orders(self) -> list[int]:
        return [
            self.sig.leg_order(l)
            for l in self.legs_at_lower()
            if not self.sig.is_pole_leg(l)
        ]

    def residue_space_lower(self) -> ResidueSpace:
        """Residues vanishing at every marked pole carried by the lower level."""
        full = residues.full_space(self.sig)
        pole_lbls = [tuple(l) for l in self.sig.pole_legs()]
        rows = []
        for i, lbl in enumerate(pole_lbls):
            if self.tg.graph.leg_vertex(lbl) == self.lower_vertex:
                row = [Fraction(0)] * len(pole_lbls)
                row[i] = Fraction(1)
                rows.append(tuple(row))
        cut = residues.from_constraints(self.sig.pole_blocks(), rows)
        return residues.intersect(full, cut)

    def describe(self) -> str:
        g = self.tg.graph
        lo, up = self.lower_vertex, self.upper_vertex
        def side(v):
            legs = ",".join(
                ("-" if self.sig.is_pole_leg(l) else "+")
                + str(self.sig.leg_order(l))
                for l in g.legs_at(v)
            )
            return f"g{g.genus[v]}" + (f"({legs})" if legs else "")
        tw = ",".join(str(t) for t in self.tg.twist)
        return f"[{side(up)} ={tw}= {side(lo)}]"


def enumerate_SB(
    sig: Signature,
    *,
    at_leg: Label | None = None,
    level0_leg: Label | None = None,
    residue_space: ResidueSpace | None = None,
    max_vertices: int | None = None,
) -> list[SimpleBicoloredGraph]:
    """All stable two-vertex depth-one twisted graphs for the signature.

    A graph is kept when its unstabilized counterpart is a two-level graph
    with a single level(-1) vertex whose level-0 vertices are one stable
    vertex plus rational pole-carrying ones.  ``at_leg`` keeps graphs with
    that leg at level -1, ``level0_leg`` keeps graphs with that leg at level
    0, and ``residue_space`` keeps graphs whose vanishing conditions at the
    lower marked poles are implied by the given space.
    """
    out: dict[bytes, SimpleBicoloredGraph] = {}
    for tg in enumerate_bicolored(sig, max_vertices=max_vertices):
        bubbles = set(bubble_vertices(tg, sig))
        lower = [v for v in range(tg.graph.num_vertices) if tg.level[v] < 0]
        stable0 = [
            v
            for v in range(tg.graph.num_vertices)
            if tg.level[v] == 0 and v not in bubbles
        ]
        if len(lower) != 1 or len(stable0) != 1:
            continue
        st = stabilize(tg, sig)
        if st.graph.num_vertices != 2:
            continue
        sb = SimpleBicoloredGraph(st, sig)
        key = sb.key
        if key in out:
            continue
        if at_leg is not None and st.graph.leg_vertex(tuple(at_leg)) != sb.lower_vertex:
            continue
        if (
            level0_leg is not None
            and st.graph.leg_vertex(tuple(level0_leg)) != sb.upper_vertex
        ):
            continue
        if residue_space is not None and not residue_space.contains_space(
            sb.residue_space_lower()
        ):
            continue
        out[key] = sb
    return list(out.values())


# ---------------------------------------------------------------------------
# formal divisor expressions
# ---------------------------------------------------------------------------


class PicardExpression:
    """A rational formal combination of divisor symbols.

    Symbols are tuples: ``("xibar",)``, ``("psi", leg)``, ``("lambda1",)``,
    ``("kappa1",)``, ``("delta",)``, ``("delta_res", name)``, ``("D0",)``
    and ``("a", key)`` for two-vertex graph classes.  The expression keeps a
    registry of the graphs appearing in it so that ``("a", key)`` symbols can
    be evaluated or printed.
    """

    def __init__(self) -> None:
        self.coeffs: dict[tuple, Fraction] = {}
        self.graphs: dict[bytes, SimpleBicoloredGraph] = {}

    def add(self, symbol: tuple, coeff) -> "PicardExpression":
        c = self.coeffs.get(symbol, Fraction(0)) + Fraction(coeff)
        if c:
            self.coeffs[symbol] = c
        else:
            self.coeffs.pop(symbol, None)
        return self

    def add_graph(self, sb: SimpleBicoloredGraph, coeff) -> "PicardExpression":
        key = sb.key
        self.graphs[key] = sb
        return self.add(("a", key), coeff)

    def __add__(self, other: "PicardExpression") -> "PicardExpression":
        out = self.copy()
        for sym, c in other.coeffs.items():
            out.add(sym, c)
        out.graphs.update(other.graphs)
        return out

    def __sub__(self, other: "PicardExpression") -> "PicardExpression":
        return self + other.scaled(-1)

    def scaled(self, c) -> "PicardExpression":
        out = PicardExpression()
        c = Fraction(c)
        if c:
            out.coeffs = {s: v * c for s, v in self.coeffs.items()}
            out.graphs = dict(self.graphs)
        return out

    def copy(self) -> "PicardExpression":
        out = PicardExpression()
        out.coeffs = dict(self.coeffs)
        out.graphs = dict(self.graphs)
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        return isinstance(other, PicardExpression) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"PicardExpression({self.pretty()})"

    def _symbol_str(self, sym: tuple) -> str:
        kind = sym[0]
        if kind == "a":
            sb = self.graphs.get(sym[1])
            return sb.describe() if sb else "[graph]"
        if kind == "psi":
            return f"psi_{tuple(sym[1])}"
        if kind == "delta_res":
            return f"delta_res({sym[1]})"
        return {
            "xibar": "xibar",
            "lambda1": "lambda_1",
            "kappa1": "kappa_1",
            "delta": "delta",
            "D0": "D_0",
        }.get(kind, kind)

    def pretty(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for sym in sorted(self.coeffs, key=repr):
            c = self.coeffs[sym]
            s = self._symbol_str(sym)
            parts.append(f"{'+' if c >= 0 else '-'} {abs(c)}*{s}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text


def kappa_Z(Z) -> Fraction:
    """(1/12) sum of k(k+2)/(k+1) over the zero orders."""
    return Fraction(1, 12) * sum(
        Fraction(k * (k + 2), k + 1) for k in tuple(Z)
    )


def m_bar(sb: SimpleBicoloredGraph) -> Fraction:
    """Weight of a two-vertex graph in the fourth identity."""
    m = sb.m
    s = sum(Fraction(k * (k + 2), k + 1) for k in sb.lower_zero_orders())
    return Fraction(m, 12) * (-m + s)


def _zero_leg(sig: Signature, i: int) -> Label:
    lbl = (0, i - 1)
    if not (1 <= i <= sig.components[0].n):
        raise ValueError(f"no zero leg of index {i}")
    return lbl


def relation(
    g: int,
    Z,
    P=(),
    rel: int = 1,
    *,
    i: int | None = None,
    j: int | None = None,
    R: ResidueSpace | None = None,
    max_vertices: int | None = None,
) -> tuple[PicardExpression, PicardExpression]:
    """Both sides of one of the four divisor identities, as formal sums.

    Identity 1 needs a zero index ``i``; identity 2 needs ``i`` and ``j``;
    identity 3 needs a codimension-one residue space ``R``; identity 4
    requires the signature to have no marked poles.
    """
    from .graphs import single

    sig = single(g, Z, P)
    lhs, rhs = PicardExpression(), PicardExpression()
    if rel == 1:
        if i is None:
            raise ValueError("identity 1 needs a zero index i")
        li = _zero_leg(sig, i)
        lhs.add(("xibar",), 1)
        lhs.add(("psi", li), sig.leg_order(li) + 1)
        for sb in enumerate_SB(sig, at_leg=li, max_vertices=max_vertices):
            rhs.add_graph(sb, sb.m)
    elif rel == 2:
        if i is None or j is None:
            raise ValueError("identity 2 needs zero indices i and j")
        li, lj = _zero_leg(sig, i), _zero_leg(sig, j)
        lhs.add(("psi", li), sig.leg_order(li) + 1)
        lhs.add(("psi", lj), -(sig.leg_order(lj) + 1))
        for sb in enumerate_SB(
            sig, at_leg=li, level0_leg=lj, max_vertices=max_vertices
        ):
            rhs.add_graph(sb, sb.m)
        for sb in enumerate_SB(
            sig, at_leg=lj, level0_leg=li, max_vertices=max_vertices
        ):
            rhs.add_graph(sb, -sb.m)
    elif rel == 3:
        if R is None:
            raise ValueError("identity 3 needs a residue space")
        full = residues.full_space(sig)
        if R.dim != full.dim - 1:
            raise ValueError("identity 3 needs a codimension-one residue space")
        lhs.add(("xibar",), 1)
        rhs.add(("delta_res", "R"), 1)
        for sb in enumerate_SB(sig, residue_space=R, max_vertices=max_vertices):
            rhs.add_graph(sb, sb.m)
    elif rel == 4:
        if sig.components[0].m != 0:
            raise ValueError("identity 4 needs a signature without marked poles")
        lhs.add(("lambda1",), 1)
        lhs.add(("xibar",), kappa_Z(sig.components[0].Z))
        rhs.add(("delta",), Fraction(1, 12))
        for sb in enumerate_SB(sig, max_vertices=max_vertices):
            rhs.add_graph(sb, 2 * m_bar(sb))
    else:
        raise ValueError(f"unknown identity {rel}")
    return lhs, rhs


def universal_psi(
    g: int, Z, P=(), i: int = 1, *, max_vertices: int | None = None
) -> PicardExpression:
    """The cotangent-class combination that does not depend on the choice of
    zero: (k_i+1) psi_i minus the graph sum with the chosen leg at level -1."""
    from .graphs import single

    sig = single(g, Z, P)
    li = _zero_leg(sig, i)
    out = PicardExpression()
    out.add(("psi", li), sig.leg_order(li) + 1)
    for sb in enumerate_SB(sig, at_leg=li, max_vertices=max_vertices):
        out.add_graph(sb, -sb.m)
    return out


# ---------------------------------------------------------------------------
# evaluation through the induction engine
# ---------------------------------------------------------------------------


def graph_class(sb: SimpleBicoloredGraph, *, max_vertices: int | None = None) -> DecoratedClass:
    """The cycle class of the reduced two-vertex boundary divisor, pushed to
    the ambient moduli of pointed curves: glue the curve-level classes of the
    two sides and divide by the automorphisms of the graph."""
    from . import strata

    ld = residues.level_split(sb.tg, sb.sig, residues.full_space(sb.sig))
    side = []
    for level_sig in (ld.level0_sig, ld.level1_sig):
        sp = strata.StratumSpec(level_sig, residues.full_space(level_sig))
        cls = strata.class_of_stratum(sp, max_vertices=max_vertices)
        cls = tautring.push_forget_differential(cls, level_sig)
        side.append(tautring.normalize(cls, level_sig, on_cone=False))
    out = glue_scaled = tautring.glue(ld, sb.sig, side[0], side[1])
    out = glue_scaled.scaled(Fraction(1, sb.aut))
    return tautring.normalize(out, sb.sig, on_cone=False)


def evaluate(
    expr: PicardExpression,
    g: int,
    Z,
    P=(),
    *,
    R_named: dict[str, ResidueSpace] | None = None,
    max_vertices: int | None = None,
) -> DecoratedClass:
    """Evaluate a formal divisor expression to a decorated cycle class.

    Symbols supported: ``xibar``, ``psi``, ``delta_res`` (through the keyed
    residue spaces) and graph classes.  The ambient symbols ``lambda1``,
    ``kappa1``, ``delta`` and ``D0`` have no cycle-level evaluation here and
    raise.
    """
    from . import strata
    from .graphs import single

    sig = single(g, Z, P)
    sp = strata.StratumSpec(sig, residues.full_space(sig))
    base = strata.class_of_stratum(sp, max_vertices=max_vertices)
    out = DecoratedClass()
    for sym, c in expr.coeffs.items():
        kind = sym[0]
        if kind == "xibar":
            piece = tautring.push_forget_differential(base.mul_xi(1), sig)
        elif kind == "psi":
            piece = tautring.push_forget_differential(base, sig).mul_psi_leg(sym[1])
        elif kind == "a":
            piece = graph_class(expr.graphs[sym[1]], max_vertices=max_vertices)
        elif kind == "delta_res":
            if not R_named or sym[1] not in R_named:
                raise ValueError("no residue space supplied for delta_res")
            spR = strata.StratumSpec(sig, R_named[sym[1]])
            piece = tautring.push_forget_differential(
                strata.class_of_stratum(spR, max_vertices=max_vertices), sig
            )
        else:
            raise ValueError(f"symbol {sym} has no cycle-level evaluation")
        out = out + piece.scaled(c)
    return tautring.normalize(out, sig, on_cone=False)
