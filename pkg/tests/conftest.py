import pytest

from gprtfa import SurveyConfig


@pytest.fixture
def default_config():
    return SurveyConfig()


@pytest.fixture
def small_config():
    """A fast survey: 101 sweep points, 5 traces."""
    return SurveyConfig(n_freq_points=101, n_traces=5)
