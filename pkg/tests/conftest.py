"""Shared fixtures: canonical instances and the committed reference data."""

import json
import os

import numpy as np
import pytest

import oracles

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def tiny():
    return oracles.tiny_instance()


@pytest.fixture(scope="session")
def tiny_lp(tiny):
    import barylp
    b, c, dims = barylp.lp_data(tiny)
    return b, c, dims


@pytest.fixture(scope="session")
def tiny_reference():
    """Committed reference data for the tiny instance.

    Checksummed against the regenerated instance so fixture drift fails
    loudly instead of producing confusing tolerance misses.
    """
    path = os.path.join(FIXTURE_DIR, "tiny_reference.npz")
    data = np.load(path)
    inst = oracles.tiny_instance()
    sums = oracles.instance_checksums(inst)
    assert abs(sums["b_sum"] - float(data["b_sum"])) < 1e-12, \
        "fixture was built against a different generator output"
    assert abs(sums["c_sum"] - float(data["c_sum"])) < 1e-12, \
        "fixture was built against a different generator output"
    return data


@pytest.fixture(scope="session")
def quality_oracle():
    path = os.path.join(FIXTURE_DIR, "quality_oracle.json")
    with open(path) as fh:
        return json.load(fh)
