"""Exact linear algebra for residue conditions at the marked poles.

A :class:`ResidueSpace` is a rational subspace of the direct sum of one
coordinate per marked pole (grouped into blocks, one block per ambient
component).  The space of residues realized by differentials is cut out by
the condition that the residues on each connected component sum to zero;
further linear conditions may be imposed on top of that.

:func:`level_split` computes, for a two-level twisted graph, the residue
data induced on each level: the global constraint system has one variable
per edge (the residue at the node, taken on the lower branch) and one per
marked pole, subject to the marked-pole vector lying in the prescribed
subspace and to the local residues summing to zero at every vertex.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .graphs import Component, Signature, SemiStableGraph, TwistedGraph

Vec = tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# exact linear algebra over the rationals
# ---------------------------------------------------------------------------


def rref(rows: list[Vec]) -> list[Vec]:
    """Reduced row echelon form; zero rows are dropped."""
    mat = [list(map(Fraction, r)) for r in rows]
    if not mat:
        return []
    ncols = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return [tuple(row) for row in mat[:r]]


def kernel(rows: list[Vec], ncols: int) -> list[Vec]:
    """Basis of the null space of the matrix with the given rows."""
    red = rref(rows)
    pivots = []
    for row in red:
        pivots.append(next(c for c in range(ncols) if row[c] != 0))
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[fc]
        basis.append(tuple(v))
    return basis


def in_span(basis_rref: list[Vec], v: Vec) -> bool:
    w = list(map(Fraction, v))
    for row in basis_rref:
        pc = next(c for c in range(len(row)) if row[c] != 0)
        if w[pc] != 0:
            f = w[pc]
            w = [x - f * y for x, y in zip(w, row)]
    return all(x == 0 for x in w)


def intersect_spans(a: list[Vec], b: list[Vec], ncols: int) -> list[Vec]:
    """Basis of the intersection of two spans."""
    if not a or not b:
        return []
    # x in both spans: x = A^T s = B^T t; solve [A^T | -B^T] (s, t) = 0
    rows = []
    for c in range(ncols):
        rows.append(
            tuple(v[c] for v in a) + tuple(-v[c] for v in b)
        )
    sols = kernel(rows, len(a) + len(b))
    out = []
    for s in sols:
        x = [Fraction(0)] * ncols
        for coef, v in zip(s[: len(a)], a):
            for c in range(ncols):
                x[c] += coef * v[c]
        out.append(tuple(x))
    return rref(out)


# ---------------------------------------------------------------------------
# residue spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidueSpace:
    """A rational subspace of the per-pole coordinate space, stored in rref."""

    blocks: tuple[int, ...]
    basis: tuple[Vec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "basis", tuple(rref(list(self.basis))))
        for row in self.basis:
            if len(row) != self.ambient_dim:
                raise ValueError("basis vector has wrong length")

    @property
    def ambient_dim(self) -> int:
        return sum(self.blocks)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Vec) -> bool:
        return in_span(list(self.basis), v)

    def contains_space(self, other: "ResidueSpace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def block_slice(self, j: int) -> slice:
        start = sum(self.blocks[:j])
        return slice(start, start + self.blocks[j])

    def project_block(self, j: int) -> list[Vec]:
        """rref basis of the projection to block ``j`` (in block coordinates)."""
        sl = self.block_slice(j)
        return rref([v[sl] for v in self.basis])


def from_vectors(blocks, vecs) -> ResidueSpace:
    return ResidueSpace(tuple(blocks), tuple(tuple(map(Fraction, v)) for v in vecs))


def from_constraints(blocks, rows) -> ResidueSpace:
    n = sum(blocks)
    return ResidueSpace(tuple(blocks), tuple(kernel([tuple(map(Fraction, r)) for r in rows], n)))


def full_space(sig: Signature) -> ResidueSpace:
    """Residue vectors realized by differentials: per-component sum zero."""
    blocks = sig.pole_blocks()
    n = sum(blocks)
    rows = []
    start = 0
    for mj in blocks:
        row = [Fraction(0)] * n
        for t in range(mj):
            row[start + t] = Fraction(1)
        if mj:
            rows.append(tuple(row))
        start += mj
    return ResidueSpace(blocks, tuple(kernel(rows, n)))


def zero_space(sig: Signature) -> ResidueSpace:
    return ResidueSpace(sig.pole_blocks(), ())


def intersect(A: ResidueSpace, B: ResidueSpace) -> ResidueSpace:
    if A.blocks != B.blocks:
        raise ValueError("block mismatch")
    return ResidueSpace(
        A.blocks, tuple(intersect_spans(list(A.basis), list(B.basis), A.ambient_dim))
    )


# ---------------------------------------------------------------------------
# level split
# ---------------------------------------------------------------------------

Src = tuple[str, object]  # ('leg', label) or ('edge', edge index)


@dataclass(frozen=True)
class LevelData:
    """Residue and signature data induced on the two levels of a graph."""

    tg: TwistedGraph
    level0_sig: Signature
    level1_sig: Signature
    level0_vertices: tuple[int, ...]
    level1_vertices: tuple[int, ...]
    level0_zero_src: tuple[tuple[Src, ...], ...]
    level0_pole_src: tuple[tuple[Src, ...], ...]
    level1_zero_src: tuple[tuple[Src, ...], ...]
    level1_pole_src: tuple[tuple[Src, ...], ...]
    R0: ResidueSpace
    R1: ResidueSpace
    rtilde_dim: int
    d_gamma: int


def level_split(tg: TwistedGraph, sig: Signature, R: ResidueSpace) -> LevelData:
    """Split a two-level twisted graph into its level data.

    Requires every edge to join level 0 to level -1 (positive twist on the
    level-0 side, stored as side 0).
    """
    graph = tg.graph
    E = len(graph.edges)
    for e, (a, b) in enumerate(graph.edges):
        if not (tg.level[a] == 0 and tg.level[b] == -1 and tg.twist[e] > 0):
            raise ValueError("edges must join level 0 (side 0) to level -1 (side 1)")

    pole_lbls = sig.pole_legs()
    nvar = E + len(pole_lbls)
    pole_col = {tuple(l): E + i for i, l in enumerate(pole_lbls)}

    # local sum-zero constraint at every vertex
    rows: list[Vec] = []
    for v in range(graph.num_vertices):
        row = [Fraction(0)] * nvar
        nonzero = False
        for lbl in graph.legs_at(v):
            if sig.is_pole_leg(lbl):
                row[pole_col[lbl]] += 1
                nonzero = True
        for e, side in graph.edges_at(v):
            row[e] += 1 if side == 1 else -1
            nonzero = True
        if nonzero:
            rows.append(tuple(row))
    vertex_kernel = kernel(rows, nvar)

    # edge coordinates free, pole coordinates constrained to R
    ambient = []
    for e in range(E):
        v = [Fraction(0)] * nvar
        v[e] = Fraction(1)
        ambient.append(tuple(v))
    for b in R.basis:
        ambient.append((Fraction(0),) * E + tuple(b))
    rtilde = intersect_spans(vertex_kernel, rref(ambient), nvar)

    level0 = tuple(v for v in range(graph.num_vertices) if tg.level[v] == 0)
    level1 = tuple(v for v in range(graph.num_vertices) if tg.level[v] == -1)

    # sub-signatures and coordinate sources
    l0_comps, l0_zsrc, l0_psrc = [], [], []
    for v in level0:
        Z: list[int] = []
        zsrc: list[Src] = []
        P: list[int] = []
        psrc: list[Src] = []
        for lbl in graph.legs_at(v):
            if sig.is_pole_leg(lbl):
                P.append(sig.leg_order(lbl))
                psrc.append(("leg", lbl))
            else:
                Z.append(sig.leg_order(lbl))
                zsrc.append(("leg", lbl))
        for e, side in graph.edges_at(v):
            Z.append(tg.twist[e] - 1)
            zsrc.append(("edge", e))
        l0_comps.append(Component(graph.genus[v], tuple(Z), tuple(P)))
        l0_zsrc.append(tuple(zsrc))
        l0_psrc.append(tuple(psrc))

    l1_comps, l1_zsrc, l1_psrc = [], [], []
    for v in level1:
        Z, zsrc, P, psrc = [], [], [], []
        simple: list[Src] = []
        for lbl in graph.legs_at(v):
            if sig.is_pole_leg(lbl):
                simple.append(("leg", lbl))
            else:
                Z.append(sig.leg_order(lbl))
                zsrc.append(("leg", lbl))
        for e, side in graph.edges_at(v):
            P.append(tg.twist[e] + 1)
            psrc.append(("edge", e))
        for s in simple:
            P.append(1)
            psrc.append(s)
        l1_comps.append(Component(graph.genus[v], tuple(Z), tuple(P)))
        l1_zsrc.append(tuple(zsrc))
        l1_psrc.append(tuple(psrc))

    level0_sig = Signature(tuple(l0_comps))
    level1_sig = Signature(tuple(l1_comps))

    # column index in the global variable space for each sub-pole coordinate
    def src_col(src: Src) -> int:
        kind, val = src
        return val if kind == "edge" else pole_col[tuple(val)]

    l1_cols = [src_col(s) for srcs in l1_psrc for s in srcs]
    l0_cols = [src_col(s) for srcs in l0_psrc for s in srcs]

    R1 = ResidueSpace(
        tuple(c.m for c in l1_comps),
        tuple(rref([tuple(v[c] for c in l1_cols) for v in rtilde])),
    )
    # elements of the constraint space vanishing on all lower coordinates,
    # seen through their level-0 pole coordinates
    kill_rows = []
    for c in l1_cols:
        row = [Fraction(0)] * nvar
        row[c] = Fraction(1)
        kill_rows.append(tuple(row))
    sub = intersect_spans(rtilde, kernel(kill_rows, nvar), nvar)
    R0 = ResidueSpace(
        tuple(c.m for c in l0_comps),
        tuple(rref([tuple(v[c] for c in l0_cols) for v in sub])),
    )
    # part of the constraint space with every node residue equal to zero
    edge_kill = []
    for e in range(E):
        row = [Fraction(0)] * nvar
        row[e] = Fraction(1)
        edge_kill.append(tuple(row))
    dagger = intersect_spans(rtilde, kernel(edge_kill, nvar), nvar)
    d_gamma = len(rtilde) - len(dagger)

    return LevelData(
        tg=tg,
        level0_sig=level0_sig,
        level1_sig=level1_sig,
        level0_vertices=level0,
        level1_vertices=level1,
        level0_zero_src=tuple(l0_zsrc),
        level0_pole_src=tuple(l0_psrc),
        level1_zero_src=tuple(l1_zsrc),
        level1_pole_src=tuple(l1_psrc),
        R0=R0,
        R1=R1,
        rtilde_dim=len(rtilde),
        d_gamma=d_gamma,
    )


# ---------------------------------------------------------------------------
# divisor tests for the lower-level data
# ---------------------------------------------------------------------------

_SAMPLE_SEED = 20240814
_NUM_SAMPLES = 5


def generic_fiber_test(sig: Signature, R: ResidueSpace) -> bool:
    """Whether a generic residue vector in ``R`` spans, together with its
    per-component projections, only the obvious line inside ``R``.

    Trivially true with a single component.  With several components this
    requires every per-component projection of ``R`` to be positive
    dimensional and the intersection of ``R`` with the sum of the coordinate
    lines through the projections of a generic sample to be exactly one
    dimensional; genericity is tested on a fixed pseudo-random batch of
    rational samples.
    """
    if sig.q == 1:
        return True
    for j in range(sig.q):
        if not R.project_block(j):
            return False
    rng = random.Random(_SAMPLE_SEED)
    n = R.ambient_dim
    best = None
    for _ in range(_NUM_SAMPLES):
        coeffs = [
            Fraction(rng.randint(-99, 99), rng.randint(1, 20)) for _ in R.basis
        ]
        r = [Fraction(0)] * n
        for c, v in zip(coeffs, R.basis):
            for k in range(n):
                r[k] += c * v[k]
        if all(x == 0 for x in r):
            continue
        lines = []
        for j in range(sig.q):
            sl = R.block_slice(j)
            line = [Fraction(0)] * n
            line[sl] = r[sl]
            lines.append(tuple(line))
        inter = intersect_spans(list(R.basis), rref(lines), n)
        d = len(inter)
        best = d if best is None else min(best, d)
    return best == 1


def _rank(comp: Component) -> int:
    """Rank of the residue-and-period lattice of one component."""
    g, n, P = comp.g, comp.n, tuple(sorted(comp.P))
    if not P:
        return g
    if g == 0 and n == 1 and len(P) == 1:
        return P[0] - 2
    if g == 0 and n == 0 and len(P) == 2 and P[0] == 1:
        return P[1] - 1
    return g - 1 + sum(P)


def rank(sig: Signature) -> int:
    return sum(_rank(c) for c in sig.components)


def _is_stable_comp(comp: Component) -> bool:
    return 2 * comp.g - 2 + comp.n + comp.m > 0


def moduli_dim(sig: Signature) -> int:
    """Dimension of the product of moduli of stable pointed curves.

    Components whose pointed curve is rigid (the rational ones carrying a
    single higher-order pole) contribute nothing.
    """
    total = 0
    for c in sig.components:
        if _is_stable_comp(c):
            total += 3 * c.g - 3 + c.n + c.m
    return total


def extend_by_one(R: ResidueSpace, full: ResidueSpace) -> ResidueSpace:
    """The residue space spanned by ``R`` and the first basis vector of
    ``full`` outside it; deterministic, so intermediate spaces are cacheable."""
    if R.dim >= full.dim:
        raise ValueError("residue space already fills the ambient space")
    for v in full.basis:
        if not R.contains(v):
            return ResidueSpace(R.blocks, R.basis + (v,))
    raise AssertionError("no extending vector found")


def _cone_dim(comp: Component) -> int:
    """Dimension of the unprojectivized cone of stable differentials."""
    if not _is_stable_comp(comp):
        # rigid rational curve: the differential still varies in the space of
        # principal parts at the node, modulo the one-parameter automorphisms
        return _rank(comp)
    return 3 * comp.g - 3 + comp.n + comp.m + _rank(comp)


def projective_cone_dim(sig: Signature) -> int:
    """Dimension of the projectivized space of stable differentials."""
    return sum(_cone_dim(c) for c in sig.components) - 1


def check_starstar(tg: TwistedGraph, sig: Signature, R: ResidueSpace) -> bool:
    """Divisor test for a two-level graph: the generic-fiber test for the
    lower residue space, plus a per-lower-vertex dimension bound."""
    ld = level_split(tg, sig, R)
    return check_starstar_split(ld)


def check_starstar_split(ld: LevelData) -> bool:
    if not generic_fiber_test(ld.level1_sig, ld.R1):
        return False
    for j, comp in enumerate(ld.level1_sig.components):
        if not _is_stable_comp(comp):
            # rigid rational vertex: no moduli to bound
            continue
        proj = ld.R1.project_block(j)
        codim = (comp.m - 1) - len(proj)
        ambient = 3 * comp.g - 3 + comp.n + comp.m + _rank(comp)
        dim_a = ambient - sum(comp.Z) - codim
        if dim_a - 1 > 3 * comp.g - 3 + comp.n + comp.m:
            return False
    return True
