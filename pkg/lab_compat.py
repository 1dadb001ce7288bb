"""
Experiment runtime

Base classes shared by every experiment: a key/value context that carries
results between runs, and the Experiment ABC that exposes a JSON parameter
schema and an ``execute`` returning the canonical result envelope.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional


RESULT_KEY = "experiment:{name}:result"


class ExecutionContext:
    """Key/value store shared by the experiments of one session.

    Experiment results land under ``experiment:<name>:result``.
    """

    def __init__(self) -> None:
        self._store: Dict[str, Any] = {}

    def set(self, key: str, value: Any) -> None:
        self._store[key] = value

    def result(self, name: str) -> Optional[Dict[str, Any]]:
        return self._store.get(RESULT_KEY.format(name=name))


def envelope(name: str, data: Optional[Dict[str, Any]] = None, statistics: Optional[Dict[str, Any]] = None,
             error: Optional[str] = None, passed: Optional[bool] = None) -> Dict[str, Any]:
    """Canonical experiment result.

    ``success`` is False on error; ``passed`` records the outcome of the
    checks an experiment asserts (None when it asserts nothing).
    """
    return {
        "success": error is None,
        "function_name": name,
        "passed": passed,
        "data": data if error is None else None,
        "statistics": statistics or {},
        "error": error,
    }


class Experiment(ABC):
    """Base class for the experiments behind each CLI subcommand."""

    name: str = ""
    description: str = ""

    @staticmethod
    def _schema(name: str, description: str, properties: Dict[str, Any], required: Optional[List[str]] = None) -> Dict[str, Any]:
        return {
            "type": "function",
            "function": {
                "name": name,
                "description": description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": list(required or []),
                },
            },
        }

    @abstractmethod
    def get_schema(self) -> Dict[str, Any]:
        """JSON schema of the accepted parameters (OpenAI function format)."""

    @abstractmethod
    def execute(self, ctx: ExecutionContext, **kwargs) -> Dict[str, Any]:
        """Run and return the envelope."""

    def store(self, ctx: ExecutionContext, result: Dict[str, Any]) -> Dict[str, Any]:
        try:
            ctx.set(RESULT_KEY.format(name=self.name), result)
        except Exception:
            pass
        return result
