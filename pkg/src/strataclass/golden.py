"""Golden-value checks against published reference classes.

Each check computes a class with the production pipeline and compares it with
an independently stated reference value.  ``run_golden_suite`` returns one
record per check so callers (the CLI, the test suite) can report pass/fail
lines uniformly.
"""

from __future__ import annotations

from fractions import Fraction

from . import strata, tautring
from .graphs import single
from .tautring import DecoratedClass


def _kz_expected(g: int) -> DecoratedClass:
    sig = single(g, (), ())
    exp = tautring.fundamental(sig).mul_xi(1).scaled(6 * g - 6)
    exp = exp + tautring.fundamental(sig).mul_lambda_comp(0, 1).scaled(24)
    exp = exp - tautring.boundary_nonsep(sig).scaled(2)
    sep = DecoratedClass()
    for h in range(1, g // 2 + 1):
        sep = sep + tautring.boundary_sep(sig, h)
    exp = exp - sep.scaled(3)
    return tautring.normalize(exp, sig, on_cone=True)


def kz_computed(g: int) -> DecoratedClass:
    """Divisor of curves with a double canonical zero, on the projectivized
    Hodge bundle over unpointed curves, with the first kappa rewritten."""
    sp = strata.spec(g, (2,))
    cls = strata.class_of_stratum(sp)
    out = tautring.push_forget_point(cls, sp.sig, (0, 0))
    sig2 = tautring.forget_point_signature(sp.sig, (0, 0))
    out = tautring.apply_kappa_lambda_relation(out, sig2)
    return tautring.normalize(out, sig2, on_cone=True)


def _fundamental_coefficient(cls: DecoratedClass) -> Fraction:
    for t, c in cls.terms.values():
        if (
            not t.graph.edges
            and not t.xi
            and not t.psi_leg
            and not t.psi_he
            and not t.kappa
            and not t.lam
        ):
            return c
    return Fraction(0)


def point_count(g: int, Z) -> Fraction:
    """Degree over the unpointed moduli of the locus of curves carrying a
    differential with the given zero orders at marked points: push the
    stratum class down and read off the fundamental-class coefficient."""
    sp = strata.spec(g, Z)
    cls = strata.class_of_stratum(sp)
    out = tautring.push_forget_differential(cls, sp.sig)
    sig = sp.sig
    for _ in range(len(tuple(Z))):
        lbl = (0, sig.components[0].n - 1)
        out = tautring.push_forget_point(out, sig, lbl)
        sig = tautring.forget_point_signature(sig, lbl)
    out = tautring.normalize(out, sig, on_cone=False)
    return _fundamental_coefficient(out)


def m34_expected() -> DecoratedClass:
    sig = single(3, (), ())
    exp = tautring.fundamental(sig).mul_lambda_comp(0, 1).scaled(380)
    exp = exp - tautring.boundary_nonsep(sig).scaled(40)
    exp = exp - tautring.boundary_sep(sig, 1).scaled(100)
    return tautring.normalize(exp, sig, on_cone=False)


def m34_computed() -> DecoratedClass:
    return strata.class_on_moduli(3, (4,))


def run_golden_suite() -> list[dict]:
    results = []

    computed = kz_computed(3)
    expected = _kz_expected(3)
    results.append(
        {
            "name": "double-zero-divisor-g3",
            "computed": repr(computed),
            "expected": repr(expected),
            "ok": computed == expected,
        }
    )

    flexes = point_count(3, (3,))
    results.append(
        {
            "name": "quartic-flexes",
            "computed": str(flexes),
            "expected": "24",
            "ok": flexes == 24,
        }
    )

    bitangent_points = point_count(3, (2, 2))
    results.append(
        {
            "name": "quartic-bitangent-points",
            "computed": str(bitangent_points),
            "expected": "56",
            "ok": bitangent_points == 56,
        }
    )

    computed = m34_computed()
    expected = m34_expected()
    results.append(
        {
            "name": "hyperelliptic-like-divisor-g3",
            "computed": repr(computed),
            "expected": repr(expected),
            "ok": computed == expected,
        }
    )
    return results
