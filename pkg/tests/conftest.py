import pytest

from nca.fixture import reference_network
from nca.network import build_network


@pytest.fixture(scope="session")
def fixture_spec_study():
    return reference_network()


@pytest.fixture(scope="session")
def fixture_model(fixture_spec_study):
    spec, _ = fixture_spec_study
    return build_network(spec)


@pytest.fixture(scope="session")
def fixture_study(fixture_spec_study):
    _, study = fixture_spec_study
    return study
