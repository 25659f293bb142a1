"""
Shared fixtures: small instances whose optima are known by hand or by enumeration.
"""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from oracle_core.generators import generate_instance  # noqa: E402
from oracle_core.instances import CutInstance, ExplicitInstance, ModularPlusConcaveInstance  # noqa: E402
from utils.settings import get_profile  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Keep tests away from the user's settings file."""
    monkeypatch.setenv("SPARSE_SFM_SETTINGS", str(tmp_path / "settings.json"))
    monkeypatch.delenv("SPARSE_SFM_DEBUG", raising=False)


@pytest.fixture
def f2():
    """f(empty)=0, f({0})=1, f({1})=2, f({0,1})=2"""
    return ExplicitInstance(2, [0.0, 1.0, 2.0, 2.0])


@pytest.fixture
def modular():
    return ModularPlusConcaveInstance([1.0, 1.0, -2.0])


@pytest.fixture
def zero():
    return ModularPlusConcaveInstance(np.zeros(4))


@pytest.fixture
def path_cut():
    """Path 0 - 1 - 2 - 3 with unit weights"""
    return CutInstance(4, [[0, 1], [1, 2], [2, 3]])


@pytest.fixture
def planted8():
    return generate_instance("planted", {"n": 8, "k": 2}, 7)


@pytest.fixture
def desk():
    return get_profile("desk", use_settings=False)


@pytest.fixture
def exact_profile():
    """Analysed constants with the query-free early exit and sequential phi rounds"""
    return replace(get_profile("faithful", use_settings=False), early_exit=True, fan_out_rounds=False)
