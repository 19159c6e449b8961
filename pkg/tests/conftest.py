import pytest

from spinmarket.experiment import config_from_dict, run_experiment


@pytest.fixture(scope="session")
def full_report():
    """The full default sweep (6 models x 30 replicates x 8192 steps)."""
    cfg = config_from_dict({})
    return run_experiment(cfg, jobs=2)


@pytest.fixture()
def tiny_config_doc():
    """A fast two-model config for orchestration tests."""
    return {
        "models": [{"topology": "ring2"}, {"topology": "moore8", "k": 2}],
        "params": {"steps": 256},
        "replicates": 3,
        "seed": 99,
    }
