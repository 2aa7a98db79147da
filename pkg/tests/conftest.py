from importlib import resources

import hypothesis
import numpy as np
import pytest

from qfunctest.device import load_device

np.seterr(all="warn", under="ignore")
hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=8, deadline=None)
hypothesis.settings.load_profile("default")


def _device_text(name):
    return resources.files("qfunctest").joinpath(f"data/{name}.json").read_text()


@pytest.fixture(scope="session")
def falcon():
    """(topology, device) for the 27-qubit calibration snapshot."""
    return load_device(_device_text("ehningen"))


@pytest.fixture(scope="session")
def eagle():
    return load_device(_device_text("brisbane"))


@pytest.fixture
def device_path(tmp_path):
    path = tmp_path / "ehningen.json"
    path.write_text(_device_text("ehningen"))
    return path
