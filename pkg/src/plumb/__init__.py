"""Invariants of plumbed 3-manifolds bounding negative definite plumbing trees.

Wu sets and mu-bar, Laufer rationality, and Heegaard Floer correction terms
computed from the plumbing lattice, with exact arithmetic throughout.
"""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    GeneratorParams,
    GraphError,
    PlumbParseError,
    PlumbingGraph,
    blow_down_normalize,
    disjoint_union_with_rp3,
    framing_reduction_step,
    generate_candidates,
    parse_graph,
    serialize_graph,
)
from .invariants import (  # noqa: E402
    PreconditionError,
    d_oracle,
    d_path,
    m_counter,
    mubar,
    obstruction_report,
    verify_theorem,
)
from .lattice import build_intersection_form, lattice_summary  # noqa: E402
from .rationality import laufer_rationality, lemma_precheck  # noqa: E402
from .spin import enumerate_wu_sets, reduce_mod2  # noqa: E402

__all__ = [
    "GeneratorParams",
    "GraphError",
    "PlumbParseError",
    "PlumbingGraph",
    "PreconditionError",
    "blow_down_normalize",
    "build_intersection_form",
    "d_oracle",
    "d_path",
    "disjoint_union_with_rp3",
    "enumerate_wu_sets",
    "framing_reduction_step",
    "generate_candidates",
    "lattice_summary",
    "laufer_rationality",
    "lemma_precheck",
    "m_counter",
    "mubar",
    "obstruction_report",
    "parse_graph",
    "reduce_mod2",
    "serialize_graph",
    "verify_theorem",
]
