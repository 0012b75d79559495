"""Parallel contraction hierarchies with tabulation-hash tie-breaking."""

from .contraction import (
    CHResult,
    InconsistentTieBreakerError,
    PriorityCoefficients,
    available_impls,
    default_impl,
    run_preprocessing,
)
from .graph import InputGraph, load_dimacs, load_graph, save_graph, write_dimacs
from .query import build_ch_graph, dijkstra_oracle, query, query_path
from .storage import HashStorage, StorageFullError
from .tabulation import TabulationTables, init_tables, tab_hash

HAVE_CORE = "compiled" in available_impls()
IMPL = default_impl()

__all__ = [
    "CHResult", "HAVE_CORE", "IMPL", "HashStorage", "InconsistentTieBreakerError",
    "InputGraph", "PriorityCoefficients", "StorageFullError", "TabulationTables",
    "available_impls", "build_ch_graph", "default_impl", "dijkstra_oracle", "init_tables",
    "load_dimacs", "load_graph", "query", "query_path", "run_preprocessing", "save_graph",
    "tab_hash", "write_dimacs",
]
