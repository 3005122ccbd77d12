"""Language-server tier: JSON-RPC plumbing, debounce/cache orchestration."""

from .orchestrator import Orchestrator, OrchestratorConfig
from .server import LspServer

__all__ = ["Orchestrator", "OrchestratorConfig", "LspServer"]
