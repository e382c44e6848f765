import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from banditcoord.objective import SubmodularOracle, blank_world, camera_ring
from banditcoord.scenario import build_urban_preset

GOLDEN_DIR = Path(__file__).parent / "golden"


def make_instance(seed, n_agents=None, max_actions=4, map_size=16.0,
                  radius_range=(4.0, 8.0), aov_range=(math.pi / 2, math.pi),
                  comm_range=100.0):
    """A random small coverage instance with distinct camera positions."""
    rng = np.random.default_rng(seed)
    if n_agents is None:
        n_agents = int(rng.integers(2, 5))
    cameras = []
    for _ in range(n_agents):
        pos = tuple(rng.uniform(2.0, map_size - 2.0, size=2))
        cameras.append(camera_ring(
            pos,
            fov_radius=rng.uniform(*radius_range),
            aov=rng.uniform(*aov_range),
            direction_count=int(rng.integers(2, max_actions + 1)),
            comm_range=comm_range,
        ))
    world = blank_world(map_size, map_size, cameras)
    return SubmodularOracle(world)


@pytest.fixture(scope="session")
def urban_oracle():
    world, _ = build_urban_preset()
    return SubmodularOracle(world)
