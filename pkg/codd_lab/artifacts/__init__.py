from .base import BaseArtifact
from .writers import BinaryArtifact, CsvArtifact, JsonArtifact

__all__ = ["BaseArtifact", "BinaryArtifact", "CsvArtifact", "JsonArtifact"]
