import numpy as np
import pytest

from ldpgrid import AdaptiveGridParams, build_aag, build_privag, synth_clustered


@pytest.fixture(scope="session")
def small_clustered():
    """20k-user clustered population for pipeline-level tests."""
    return synth_clustered(20_000, seed=424242)


@pytest.fixture(scope="session")
def built_grids(small_clustered):
    """One grid of each kind, built the way the pipelines build them."""
    from ldpgrid import build_uniform

    uniform = build_uniform(small_clustered.domain, 7, 5)
    privag, _ = build_privag(
        small_clustered, AdaptiveGridParams.for_privag(1.0), np.random.default_rng(11)
    )
    aag, _ = build_aag(
        small_clustered, AdaptiveGridParams.for_aag(1.0), np.random.default_rng(12)
    )
    return {"uniform": uniform, "privag": privag, "aag": aag}
