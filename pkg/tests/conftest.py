import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from pascalis.coeff import FieldSpec  # noqa: E402
from pascalis.config import reset_config  # noqa: E402
from pascalis.corpus import builtin  # noqa: E402
from pascalis.poly import Ambient  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: expensive acceptance suites")


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Every test starts from the packaged configuration."""
    monkeypatch.delenv("PASCALIS_TERM_CEILING", raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def amb2():
    return Ambient(2)


@pytest.fixture
def amb3():
    return Ambient(3)


@pytest.fixture
def gf2():
    return FieldSpec.prime(2)


@pytest.fixture
def gf3():
    return FieldSpec.prime(3)


@pytest.fixture
def nagata():
    return builtin("nagata").map


@pytest.fixture
def vasyunin():
    return builtin("vasyunin").map


@pytest.fixture
def vasyunin_inverse():
    return builtin("vasyunin").expected.inverse


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
