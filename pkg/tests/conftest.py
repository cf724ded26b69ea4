"""Shared fixtures; puts the repository root and src/ on sys.path"""
import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
for path in (ROOT, os.path.join(ROOT, 'src')):
    if path not in sys.path:
        sys.path.insert(0, path)

from mra.field import HierCoeffField  # noqa: E402
from mra.space import AdaptiveSpace  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_field(rng):
    def build(space: AdaptiveSpace, degree: int, **kwargs) -> HierCoeffField:
        coeffs = rng.standard_normal((space.size,) + (degree + 1,) * space.dim)
        return HierCoeffField(space, coeffs, degree, **kwargs)
    return build


@pytest.fixture(autouse=True)
def _isolate_logs(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
