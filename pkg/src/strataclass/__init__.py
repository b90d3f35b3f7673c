"""Exact symbolic classes of strata of meromorphic differentials.

The package computes Poincare-dual classes of closures of strata of
differentials with prescribed zeros, poles and residue conditions, as exact
rational combinations of decorated boundary graphs, together with the
pushforwards to moduli of curves and divisor-level identities.
"""

from .graphs import (
    Component,
    Signature,
    SemiStableGraph,
    TwistedGraph,
    enumerate_bicolored,
    enumerate_divisor_graphs,
    multiplicity,
    single,
)
from .residues import ResidueSpace, full_space, level_split, zero_space
from .tautring import DecoratedClass, Term
from .strata import (
    StratumSpec,
    boundary_class,
    class_of_stratum,
    class_on_moduli,
    class_on_moduli_with_point,
    class_residue_conditioned,
    codim,
    spec,
)

__all__ = [
    "Component",
    "Signature",
    "SemiStableGraph",
    "TwistedGraph",
    "ResidueSpace",
    "DecoratedClass",
    "Term",
    "StratumSpec",
    "spec",
    "codim",
    "single",
    "full_space",
    "zero_space",
    "level_split",
    "enumerate_bicolored",
    "enumerate_divisor_graphs",
    "multiplicity",
    "class_of_stratum",
    "boundary_class",
    "class_residue_conditioned",
    "class_on_moduli",
    "class_on_moduli_with_point",
]

__version__ = "0.1.0"
