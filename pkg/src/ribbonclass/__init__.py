"""Exact ribbon graph complexes, Lie algebra chains, and partition functions of A-infinity algebras."""
from __future__ import annotations

from .ainfinity import AInfinityAlgebra, builtin, load_algebra
from .cyclic_lie import CEChain, CyclicWord, LetterSpace, I_map
from .graph_complex import GraphChain, boundary, coboundary, enumerate_basis, homology_dims
from .partition import characteristic_class, partition_chain, partition_value
from .ribbon_graph import RibbonGraph, canonical_form, format_graph, parse_graph
from .tcft import LeggedRibbonGraph, correlation, glue, parse_legged

__version__ = "0.1.0"

__all__ = [
    "AInfinityAlgebra",
    "CEChain",
    "CyclicWord",
    "GraphChain",
    "I_map",
    "LeggedRibbonGraph",
    "LetterSpace",
    "RibbonGraph",
    "boundary",
    "builtin",
    "canonical_form",
    "characteristic_class",
    "coboundary",
    "correlation",
    "enumerate_basis",
    "format_graph",
    "glue",
    "homology_dims",
    "load_algebra",
    "parse_graph",
    "parse_legged",
    "partition_chain",
    "partition_value",
]
