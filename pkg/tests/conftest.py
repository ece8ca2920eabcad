from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import settings

from rispla.channel import load_scenario

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

REPO_ROOT = Path(__file__).resolve().parents[1]
TABLE1 = REPO_ROOT / "scenarios" / "table1.cfg"


@pytest.fixture(scope="session")
def scenario():
    """Shipped default scenario (256 elements, 100 dB link quality)."""
    return load_scenario(TABLE1)


@pytest.fixture(scope="session")
def scenario_small(scenario):
    """Desk-scale variant for CIR features: 8 elements, 20 dB link quality."""
    return replace(scenario, n_elements=8, lq_db=20.0)
