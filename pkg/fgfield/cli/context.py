import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

import structlog

from fgfield.domain.validators.run_config import RunConfig
from fgfield.infrastructure.serialization import json_dumps
from fgfield.infrastructure.storage import RunManifest, atomic_write_text


@dataclass
class CommandContext:
    """What a subcommand handler may touch: the resolved config, the output directory and the manifest."""
    config: RunConfig
    out_dir: Path
    manifest: RunManifest
    stdout: Any = None
    logger: Any = field(default_factory=lambda: structlog.get_logger(__name__))

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def record(self, path: Path) -> Path:
        self.manifest.add_artifact(path)
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        return self.record(atomic_write_text(self.path(name), json_dumps(payload, indent=2) + "\n"))

    def write_table(self, name: str, header: Sequence[str], rows: List[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["%.17g" % value if isinstance(value, float) else value for value in row])
        return self.record(atomic_write_text(self.path(name), buffer.getvalue()))

    def derive(self, **values: Any) -> None:
        self.manifest.derived.update(values)

    def emit(self, text: str) -> None:
        print(text, file=self.stdout)


def summary_line(values: Dict[str, Any]) -> str:
    return " ".join(f"{key}={'%.12g' % value if isinstance(value, float) else value}" for key, value in values.items())
