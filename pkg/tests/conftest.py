import json
from pathlib import Path

import pytest
from hypothesis import settings

from codd_lab.calculus.partitions import Distribution, InputSpace
from codd_lab.core.config import reset_settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture
def space2() -> InputSpace:
    return InputSpace(2)


@pytest.fixture
def uniform2(space2) -> Distribution:
    return Distribution.uniform(space2)


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path."""

    def write(name: str, payload) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()
