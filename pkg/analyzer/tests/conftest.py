from __future__ import annotations

import os
import sys

import pytest

_HERE = os.path.dirname(__file__)
sys.path.insert(0, os.path.dirname(_HERE))  # allow `import graph_core`, `import stability`, ...

from graph_core import build_graph, laplacian_spectrum  # noqa: E402
from pattern import build_pattern, cross_spectrum  # noqa: E402
from settings import get_settings  # noqa: E402

A1 = [[1.0, 1.0], [0.5, 1.0]]
A2 = [[1.0, 2.0], [0.5, 1.0]]
A3 = [[1.0, 2.0], [1.0, 1.0]]
A_IMAG = [[1.0, 1.0], [-0.5, 1.0]]


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("ANALYZER_"):
            monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def c4():
    return build_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.fixture
def c4_spectrum(c4):
    return laplacian_spectrum(c4)


@pytest.fixture
def a1():
    return build_pattern(A1)


@pytest.fixture
def a2():
    return build_pattern(A2)


@pytest.fixture
def a3():
    return build_pattern(A3)


@pytest.fixture
def a_imag():
    return build_pattern(A_IMAG)


@pytest.fixture
def a1_spectrum(a1):
    return cross_spectrum(a1)
