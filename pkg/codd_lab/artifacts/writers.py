"""
JSON, CSV and binary artifacts.
"""

import json
from pathlib import Path
from typing import Any

import polars as pl

from codd_lab.artifacts.base import BaseArtifact
from codd_lab.core.constants import JSON_INDENT


def dumps_json(payload: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=JSON_INDENT) + "\n"


class JsonArtifact(BaseArtifact):
    def __init__(self, path: Path, payload: Any):
        super().__init__(path)
        self.payload = payload

    @property
    def kind(self) -> str:
        return "json"

    def render(self) -> bytes:
        return dumps_json(self.payload).encode("utf-8")


class CsvArtifact(BaseArtifact):
    def __init__(self, path: Path, frame: pl.DataFrame):
        super().__init__(path)
        self.frame = frame

    @property
    def kind(self) -> str:
        return "csv"

    def render(self) -> bytes:
        return self.frame.write_csv().encode("utf-8")


class BinaryArtifact(BaseArtifact):
    def __init__(self, path: Path, data: bytes):
        super().__init__(path)
        self.data = data

    @property
    def kind(self) -> str:
        return "binary"

    def render(self) -> bytes:
        return self.data
