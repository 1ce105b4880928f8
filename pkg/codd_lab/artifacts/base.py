"""
Base artifact class for writing experiment outputs.
"""

import os
import tempfile
from abc import ABC, abstractmethod
from pathlib import Path

from codd_lab import logger
from codd_lab.core.exceptions import FileOperationError


class BaseArtifact(ABC):
    """Base class for all artifacts written by the CLI."""

    def __init__(self, path: Path):
        """
        Initialize artifact with its target path.

        Args:
            path: Destination file.
        """
        self.path = Path(path)

    @property
    @abstractmethod
    def kind(self) -> str:
        """Return the artifact kind used in log messages."""
        pass

    @abstractmethod
    def render(self) -> bytes:
        """Return the exact bytes of the artifact."""
        pass

    def write(self) -> Path:
        """
        Write the artifact atomically: a temporary file in the target
        directory is renamed over the destination.

        Returns:
            The destination path.
        """
        data = self.render()
        directory = self.path.parent
        tmp_name: str | None = None

        logger.debug(f"Writing {self.kind} artifact ({len(data)} bytes) to {self.path}")

        try:
            directory.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile(
                dir=directory, prefix=f".{self.path.name}.", suffix=".tmp", delete=False
            ) as tmp:
                tmp_name = tmp.name
                tmp.write(data)
                tmp.flush()
                os.fsync(tmp.fileno())
            os.replace(tmp_name, self.path)
        except OSError as e:
            logger.error(f"Error writing {self.kind} artifact to {self.path}: {str(e)}")
            if tmp_name is not None and os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise FileOperationError(f"Failed to write {self.path}: {str(e)}")

        logger.info(f"Wrote {self.kind} artifact to {self.path}")
        return self.path
