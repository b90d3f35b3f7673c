"""The induction engine for classes of strata of meromorphic differentials.

:func:`class_of_stratum` computes the class Poincare-dual to the closure of
the locus of differentials with prescribed zero orders, pole orders and
residue conditions, inside the projectivized space of stable differentials,
as a :class:`~strataclass.tautring.DecoratedClass`.  The recursion lowers
one zero order at a time: raising a zero order multiplies by ``xi`` plus the
order times the cotangent class at the zero, minus correction terms indexed
by two-level twisted graphs whose lower level carries the zero; each
correction is assembled by :func:`boundary_class` from recursively computed
classes on the two levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import residues, tautring
from .graphs import (
    Component,
    Label,
    Signature,
    TwistedGraph,
    automorphism_count,
    enumerate_bicolored,
    multiplicity,
    single,
    is_semistable_triple,
)
from .residues import LevelData, ResidueSpace
from .tautring import DecoratedClass


@dataclass(frozen=True)
class StratumSpec:
    """Zero orders, pole orders and a residue condition for each component."""

    sig: Signature
    R: ResidueSpace

    def __post_init__(self) -> None:
        if self.R.blocks != self.sig.pole_blocks():
            raise ValueError("residue space blocks do not match the pole counts")
        full = residues.full_space(self.sig)
        if not full.contains_space(self.R):
            raise ValueError("residue space must consist of realizable residues")
        for c in self.sig.components:
            if not is_semistable_triple(c.g, c.n, c.P):
                raise ValueError(f"component {(c.g, c.Z, c.P)} carries no differential")


def spec(g: int, Z=(), P=(), R: ResidueSpace | None = None) -> StratumSpec:
    sig = single(g, Z, P)
    if R is None:
        R = residues.full_space(sig)
    return StratumSpec(sig, R)


def codim(sp: StratumSpec) -> int:
    """Codimension of the stratum: total zero order plus the codimension of
    the residue condition."""
    total = sum(sum(c.Z) for c in sp.sig.components)
    return total + residues.full_space(sp.sig).dim - sp.R.dim


_CACHE: dict = {}
_IN_PROGRESS: set = set()


def clear_cache() -> None:
    _CACHE.clear()


def _last_positive_entry(sig: Signature) -> Label | None:
    for j in reversed(range(sig.q)):
        c = sig.components[j]
        for i in reversed(range(c.n)):
            if c.Z[i] > 0:
                return (j, i)
    return None


def _lower_entry(sp: StratumSpec, lbl: Label) -> StratumSpec:
    j, i = lbl
    comps = list(sp.sig.components)
    c = comps[j]
    Z = list(c.Z)
    Z[i] -= 1
    comps[j] = Component(c.g, tuple(Z), c.P)
    return StratumSpec(Signature(tuple(comps)), sp.R)


def _is_empty(sp: StratumSpec) -> bool:
    return any(sum(c.Z) - sum(c.P) > 2 * c.g - 2 for c in sp.sig.components)


def class_of_stratum(
    sp: StratumSpec,
    *,
    choose=None,
    use_cache: bool = True,
    max_vertices: int | None = None,
) -> DecoratedClass:
    """The class of the closure of the stratum in the projectivized space of
    stable differentials over the given signature.

    ``choose`` optionally overrides the entry-selection strategy of the
    recursion (a callable mapping a signature to a zero-leg label with a
    positive order, or None to use the default last-positive-entry rule);
    results must not depend on the choice.
    """
    use_cache = use_cache and choose is None
    key = (sp.sig, sp.R.basis)
    if use_cache and key in _CACHE:
        return _CACHE[key]
    if key in _IN_PROGRESS:
        # the stratum reappears inside its own hyperplane section; this only
        # happens when the open locus is empty, so the class is zero
        return DecoratedClass()

    _IN_PROGRESS.add(key)
    try:
        if _is_empty(sp):
            result = DecoratedClass()
        elif sp.R.dim < residues.full_space(sp.sig).dim:
            result = _peel_residue_condition(
                sp, choose=choose, use_cache=use_cache, max_vertices=max_vertices
            )
        else:
            result = _class_by_zero_induction(
                sp, choose=choose, use_cache=use_cache, max_vertices=max_vertices
            )
    finally:
        _IN_PROGRESS.discard(key)

    if use_cache:
        _CACHE[key] = result
    return result


def _peel_residue_condition(
    sp: StratumSpec, *, choose, use_cache: bool, max_vertices: int | None
) -> DecoratedClass:
    """Cut one residue hyperplane: the class is ``xi`` times the class with
    one condition fewer, minus the two-level graphs whose level-0 residues
    automatically satisfy the extra condition."""
    bigger = residues.extend_by_one(sp.R, residues.full_space(sp.sig))
    prev_sp = StratumSpec(sp.sig, bigger)
    prev = class_of_stratum(
        prev_sp, choose=choose, use_cache=use_cache, max_vertices=max_vertices
    )
    out = prev.mul_xi(1)
    for tg in enumerate_bicolored(sp.sig, max_vertices=max_vertices):
        ld = residues.level_split(tg, sp.sig, bigger)
        if not sp.R.contains_space(ld.R0):
            continue
        bc = boundary_class(
            tg, prev_sp, choose=choose, use_cache=use_cache, max_vertices=max_vertices
        )
        if bc.is_zero():
            continue
        m = multiplicity(tg, sp.sig).m
        out = out - bc.scaled(m)
    return tautring.normalize(out, sp.sig, on_cone=True)


def _class_by_zero_induction(
    sp: StratumSpec, *, choose, use_cache: bool, max_vertices: int | None
) -> DecoratedClass:
    if _is_empty(sp):
        result = DecoratedClass()
    else:
        lbl = (choose or _last_positive_entry)(sp.sig)
        if lbl is None:
            power = residues.full_space(sp.sig).dim - sp.R.dim
            result = tautring.fundamental(sp.sig).mul_xi(power)
        else:
            j, i = lbl
            comp = sp.sig.components[j]
            k = comp.Z[i]
            lowered = _lower_entry(sp, lbl)
            prev = class_of_stratum(
                lowered, choose=choose, use_cache=use_cache, max_vertices=max_vertices
            )
            if not (2 * comp.g - 2 + comp.n + comp.m > 0):
                # rational component carrying one higher-order pole: the zero
                # is a fixed point, raising its order rescales by a multiple
                # of xi
                p = max(comp.P)
                factor = Fraction(p - k - 1, p - 1)
                result = prev.mul_xi(1).scaled(factor)
            else:
                result = prev.mul_xi(1) + prev.mul_psi_leg(lbl).scaled(k)
                for tg in enumerate_bicolored(
                    lowered.sig, leg_at_lower=lbl, max_vertices=max_vertices
                ):
                    bc = boundary_class(
                        tg, lowered, choose=choose, use_cache=use_cache,
                        max_vertices=max_vertices,
                    )
                    if bc.is_zero():
                        continue
                    m = multiplicity(tg, lowered.sig).m
                    result = result - bc.scaled(m)
        result = tautring.normalize(result, sp.sig, on_cone=True)
    return result


def boundary_class(
    tg: TwistedGraph,
    sp: StratumSpec,
    *,
    choose=None,
    use_cache: bool = True,
    max_vertices: int | None = None,
) -> DecoratedClass:
    """The class of the boundary stratum attached to a two-level graph.

    Returns zero when the graph fails the divisor test.  Otherwise glues the
    recursively computed level-0 class with the pushforward to the moduli of
    curves of the level(-1) class, twists by the per-vertex Hodge factors and
    the power of ``xi`` given by the vanishing residue directions, and
    divides by the automorphisms of the twisted graph.
    """
    ld = residues.level_split(tg, sp.sig, sp.R)
    if not residues.check_starstar_split(ld):
        return DecoratedClass()

    spec0 = StratumSpec(ld.level0_sig, ld.R0)
    spec1 = StratumSpec(ld.level1_sig, ld.R1)
    C0 = class_of_stratum(
        spec0, choose=choose, use_cache=use_cache, max_vertices=max_vertices
    )
    C1 = class_of_stratum(
        spec1, choose=choose, use_cache=use_cache, max_vertices=max_vertices
    )
    if C0.is_zero() or C1.is_zero():
        return DecoratedClass()
    F1 = tautring.push_forget_differential(C1, ld.level1_sig)
    # per lower-vertex Hodge factor evaluated against powers of xi
    for c1, comp in enumerate(ld.level1_sig.components):
        new = DecoratedClass()
        for a in range(0, comp.g + 1):
            new = new + F1.mul_lambda_comp(c1, a).mul_xi(comp.g - a)
        F1 = new
    glued = tautring.glue(ld, sp.sig, C0, F1)
    aut = automorphism_count(tg.graph, twist=tg.twist, level=tg.level)
    out = glued.mul_xi(ld.d_gamma).scaled(Fraction(1, aut))
    return tautring.normalize(out, sp.sig, on_cone=True)


# ---------------------------------------------------------------------------
# residue-condition induction
# ---------------------------------------------------------------------------


def class_residue_conditioned(sp: StratumSpec, max_vertices: int | None = None) -> DecoratedClass:
    """Assemble the class of a stratum with a codimension-one residue
    condition from the unrestricted class: multiply by ``xi`` and subtract
    the two-level graphs whose level-0 residue space is contained in the
    condition."""
    if sp.sig.q != 1:
        raise ValueError("implemented for connected signatures")
    full = residues.full_space(sp.sig)
    if sp.R.dim != full.dim - 1:
        raise ValueError("residue condition must have codimension one")
    unrestricted = StratumSpec(sp.sig, full)
    out = class_of_stratum(unrestricted, max_vertices=max_vertices).mul_xi(1)
    for tg in enumerate_bicolored(sp.sig, max_vertices=max_vertices):
        ld = residues.level_split(tg, sp.sig, full)
        # keep graphs whose level-0 residues automatically satisfy the
        # condition
        if not sp.R.contains_space(ld.R0):
            continue
        bc = boundary_class(tg, unrestricted, max_vertices=max_vertices)
        if bc.is_zero():
            continue
        m = multiplicity(tg, sp.sig).m
        out = out - bc.scaled(m)
    return tautring.normalize(out, sp.sig, on_cone=True)


# ---------------------------------------------------------------------------
# pushforwards to moduli of curves
# ---------------------------------------------------------------------------


def class_on_moduli_with_point(g: int, Z) -> DecoratedClass:
    """The class of the closure of the locus of curves with a marked
    complete list of zeros, on the moduli of pointed curves."""
    sp = spec(g, Z)
    _require_complete(sp)
    cls = class_of_stratum(sp)
    out = tautring.push_forget_differential(cls, sp.sig)
    return tautring.normalize(out, sp.sig, on_cone=False)


def class_on_moduli(g: int, Z, *, divide_leg_symmetry: bool = False) -> DecoratedClass:
    """Pushforward of the stratum class to the moduli of unpointed curves:
    forget the differential, then forget all marked zeros (optionally
    dividing by the symmetry of repeated zero orders)."""
    sp = spec(g, Z)
    _require_complete(sp)
    cls = class_of_stratum(sp)
    out = tautring.push_forget_differential(cls, sp.sig)
    sig = sp.sig
    for _ in range(len(tuple(Z))):
        lbl = (0, sig.components[0].n - 1)
        out = tautring.push_forget_point(out, sig, lbl)
        sig = tautring.forget_point_signature(sig, lbl)
    out = tautring.normalize(out, sig, on_cone=False)
    if divide_leg_symmetry:
        from collections import Counter
        from math import factorial, prod

        aut = prod(factorial(c) for c in Counter(tuple(Z)).values())
        out = out.scaled(Fraction(1, aut))
    return out


def _require_complete(sp: StratumSpec) -> None:
    for c in sp.sig.components:
        if sum(c.Z) - sum(c.P) != 2 * c.g - 2:
            raise ValueError("zero orders must account for the full divisor degree")
