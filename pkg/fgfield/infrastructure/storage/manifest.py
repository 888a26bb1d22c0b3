"""Run manifests: everything needed to regenerate the artifacts of one invocation."""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
import platform
from typing import Any, Dict, List, Optional

import numpy as np
import scipy

from fgfield import __version__
from fgfield.infrastructure.monitoring import PerformanceMetrics
from fgfield.infrastructure.serialization import json_dumps
from .atomic import PathLike, atomic_write_text, sha256_of

MANIFEST_NAME = "manifest.json"


def versions() -> Dict[str, str]:
    return {
        "fgfield": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


@dataclass
class RunManifest:
    command: str
    flags: Dict[str, Any]
    config: Dict[str, Any] = field(default_factory=dict)
    derived: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[Path] = field(default_factory=list)
    status: str = "ok"
    error: Optional[str] = None
    message: Optional[str] = None
    context: Dict[str, Any] = field(default_factory=dict)

    def add_artifact(self, path: PathLike) -> None:
        self.artifacts.append(Path(path))

    def fail(self, error: Exception) -> None:
        self.status = "failed"
        self.error = type(error).__name__
        self.message = str(error)
        self.context = dict(getattr(error, "context", {}) or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "flags": self.flags,
            "config": self.config,
            "derived": self.derived,
            "versions": versions(),
            "artifacts": [
                {"path": path.name, "sha256": sha256_of(path)} for path in self.artifacts if path.exists()
            ],
            "timings": PerformanceMetrics().summary(),
            "status": self.status,
            "error": self.error,
            "message": self.message,
            "error_context": self.context,
            "written_at": datetime.now(timezone.utc),
        }


def write_manifest(directory: PathLike, manifest: RunManifest) -> Path:
    return atomic_write_text(Path(directory) / MANIFEST_NAME, json_dumps(manifest.to_dict(), indent=2) + "\n")
