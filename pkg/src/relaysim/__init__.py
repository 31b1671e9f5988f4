"""Link-level Monte-Carlo simulator for two-way multiuser buffer-aided
relaying with decoupled uplink/downlink transmission policies."""

__version__ = "0.1.0"

from .engine import RunSpec, SimReport, SweepReport, run_simulation, sweep
from .model import BufferPair, ScenarioConfig, capacity, db_to_linear
from .search import SearchConfig, SearchResult

__all__ = [
    "BufferPair",
    "RunSpec",
    "ScenarioConfig",
    "SearchConfig",
    "SearchResult",
    "SimReport",
    "SweepReport",
    "capacity",
    "db_to_linear",
    "run_simulation",
    "sweep",
    "__version__",
]
