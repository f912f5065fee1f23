"""Multi-objective dynamic community detection with feature transfer between snapshots."""

from .graph import DynamicNetwork, NodeRegistry, ParseError, Partition, Snapshot, load_dynamic
from .metrics import UndefinedMetricError, cid, community_score, modularity, nmi
from .moea import GAParams
from .pipeline import RunReport, compare_initializations, run_tmoga, select_final

__version__ = "0.1.0"

__all__ = [
    "DynamicNetwork",
    "GAParams",
    "NodeRegistry",
    "ParseError",
    "Partition",
    "RunReport",
    "Snapshot",
    "UndefinedMetricError",
    "cid",
    "community_score",
    "compare_initializations",
    "load_dynamic",
    "modularity",
    "nmi",
    "run_tmoga",
    "select_final",
]
