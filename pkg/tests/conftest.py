import pytest

from agentsight.config import load_config
from agentsight.datastore import ingest
from agentsight.synthetic import (generate_mini_dataset, generate_tiny_dataset,
                                  load_karate_club)


@pytest.fixture(scope="session")
def mini(tmp_path_factory):
    out = tmp_path_factory.mktemp("mini-data")
    return generate_mini_dataset(out)


@pytest.fixture(scope="session")
def mini_snapshot(mini):
    snapshot, report = ingest(mini.users_path, mini.posts_path, mini.edges_path)
    assert not report.rejected
    return snapshot


@pytest.fixture(scope="session")
def tiny(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny-data")
    return generate_tiny_dataset(out)


@pytest.fixture(scope="session")
def tiny_snapshot(tiny):
    snapshot, _ = ingest(tiny.users_path, tiny.posts_path, tiny.edges_path)
    return snapshot


@pytest.fixture(scope="session")
def karate():
    return load_karate_club()


@pytest.fixture()
def config():
    return load_config()


@pytest.fixture(scope="session")
def fuzz_config():
    """Small grids so fuzzed sessions stay fast."""
    return load_config(overrides={
        "default_grids": {
            "lda_topics": [{"k": 3, "alpha": 0.1, "beta": 0.01,
                            "iterations": 15, "seed": 4}],
            "dynamic_topic_modeling": [{"k": 3, "alpha": 0.1, "beta": 0.01,
                                        "iterations": 10, "seed": 4, "bin": "week",
                                        "penalty": 0.0, "min_segment": 2}],
            "louvain_communities": [{"resolution": 1.0, "seed": 5}],
        },
    })
