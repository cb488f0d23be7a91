"""Control flow, control/data dependence and CPG assembly."""

from .cfg import EXIT, Cfg, build_cfg
from .cpg import (
    ALL_LABELS,
    BASE_LABELS,
    EXTRA_LABELS,
    Cpg,
    DanglingEdge,
    Edge,
    Label,
    NodeRecord,
    analyze_functions,
    assemble_cpg,
    build_cpg,
)
from .dataflow import data_dependence
from .dominance import control_dependence, post_dominators

__all__ = [
    "EXIT",
    "Cfg",
    "build_cfg",
    "ALL_LABELS",
    "BASE_LABELS",
    "EXTRA_LABELS",
    "Cpg",
    "DanglingEdge",
    "Edge",
    "Label",
    "NodeRecord",
    "analyze_functions",
    "assemble_cpg",
    "build_cpg",
    "data_dependence",
    "control_dependence",
    "post_dominators",
]
