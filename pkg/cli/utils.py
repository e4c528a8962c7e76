import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_number(value: float) -> str:
    return f"{float(value):.17g}"


def json_text(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def atomic_write_text(path: Path, text: str) -> None:
    """Write to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


class OutputTracker:
    """Files written by one command; removed again if the command fails."""

    def __init__(self):
        self.written: List[Path] = []

    def write(self, path: Path, text: str) -> Path:
        atomic_write_text(path, text)
        self.written.append(Path(path))
        logger.info(f"Wrote {path}")
        return Path(path)

    def rollback(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)
            logger.info(f"Removed partial output {path}")
        self.written.clear()


class GoldenStore:
    """Reference outputs keyed by (command, md5 of the parameters)."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    @staticmethod
    def key(command: str, params: Mapping[str, Any]) -> str:
        blob = json.dumps({"command": command, "params": params}, sort_keys=True, default=str)
        return hashlib.md5(blob.encode("utf-8")).hexdigest()

    def path(self, command: str, params: Mapping[str, Any], suffix: str) -> Path:
        return self.directory / f"{command}-{self.key(command, params)[:16]}.{suffix}"

    def record(self, command: str, params: Mapping[str, Any], text: str, suffix: str) -> Path:
        path = self.path(command, params, suffix)
        atomic_write_text(path, text)
        logger.info(f"Recorded golden {path}")
        return path

    def load(self, command: str, params: Mapping[str, Any], suffix: str) -> Optional[str]:
        path = self.path(command, params, suffix)
        if not path.exists():
            return None
        return path.read_text(encoding="utf-8")

    def matches_json(self, command: str, params: Mapping[str, Any], text: str) -> Optional[bool]:
        """Byte-exact comparison; None when no golden exists."""
        golden = self.load(command, params, "json")
        if golden is None:
            return None
        return golden == text

    def matches_csv(self, command: str, params: Mapping[str, Any], text: str, rtol: float = 1e-12, atol: float = 1e-14) -> Optional[bool]:
        golden = self.load(command, params, "csv")
        if golden is None:
            return None
        expected, actual = _parse_csv(golden), _parse_csv(text)
        if expected[0] != actual[0] or expected[1].shape != actual[1].shape:
            return False
        return bool(np.allclose(actual[1], expected[1], rtol=rtol, atol=atol))


def _parse_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    values = np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))
    return header, values
