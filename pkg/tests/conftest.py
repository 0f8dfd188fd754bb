import numpy as np
import pytest

from pseudosphere.config import FlatnessConfig, QuadConfig, SearchConfig
from pseudosphere.stability import PipelineConfig

# lighter search for 3D shapes; 2D runs use the defaults
SEARCH_3D = SearchConfig(seeds_per_shell=8, starts=2, pattern_iters=30)
FLAT_3D = FlatnessConfig(dirs_per_ring=4, max_points=2)


def pipeline(n, max_points=8):
    if n == 2:
        return PipelineConfig(flatness=FlatnessConfig(max_points=max_points))
    return PipelineConfig(search=SEARCH_3D, flatness=FlatnessConfig(dirs_per_ring=4, max_points=max_points))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def fast_quad():
    return QuadConfig(panels=16, azimuth=32)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
