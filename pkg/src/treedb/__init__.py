"""Tree-compressed state-vector storage for explicit-state exploration.

The package bundles a concurrent tree database with maximal sharing of
sub-vectors, a process-table baseline, an uncompressed reference store,
a parallel reachability engine over any of them, and analytics that
check measured compression against the closed-form predictions.
"""

from .analytics import CompressionStats, measure
from .collapse import CollapseDb, CollapseLayout
from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    InvalidReferenceError,
    ModelParseError,
    TreeDbError,
)
from .gcl import load_model, load_model_file
from .model import (
    Model,
    SyntheticSpec,
    Vector,
    cross_product,
    generate_synthetic,
    identical_slots,
    symmetric_blocks,
    uniform_slots,
)
from .node_table import NodeTable, TableConfig
from .reachability import ExplorationReport, ReachabilityConfig, explore
from .stores import PlainHashStore, insert_all, make_store
from .tree import BasicTreeDb, ConcurrentTreeDb, TreeShape, create_tree_db, tree_shape

__version__ = "0.1.0"

__all__ = [
    "BasicTreeDb",
    "CapacityError",
    "CollapseDb",
    "CollapseLayout",
    "CompressionStats",
    "ConcurrentTreeDb",
    "ConfigError",
    "DomainError",
    "ExplorationReport",
    "InvalidReferenceError",
    "Model",
    "ModelParseError",
    "NodeTable",
    "PlainHashStore",
    "ReachabilityConfig",
    "SyntheticSpec",
    "TableConfig",
    "TreeDbError",
    "TreeShape",
    "Vector",
    "create_tree_db",
    "cross_product",
    "explore",
    "generate_synthetic",
    "identical_slots",
    "insert_all",
    "load_model",
    "load_model_file",
    "make_store",
    "measure",
    "symmetric_blocks",
    "tree_shape",
    "uniform_slots",
]
