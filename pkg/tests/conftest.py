from typing import Callable

import numpy as np
import pytest

from pyplancherel.core import partitions


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xD1CE)


@pytest.fixture
def random_partition(
    rng: np.random.Generator,
) -> Callable[[int, int], partitions.Partition]:
    """Returns a drawer of partitions with at most 'max_length' rows and parts
    bounded by 'max_part'."""

    def draw(max_length: int, max_part: int) -> partitions.Partition:
        length = int(rng.integers(0, max_length + 1))
        parts = rng.integers(1, max_part + 1, size=length).tolist()
        return partitions.Partition(tuple(sorted(parts, reverse=True)))

    return draw
