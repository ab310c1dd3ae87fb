import numpy as np
import pytest

from macromicro.snake import SnakeDescriptor


@pytest.fixture
def desc() -> SnakeDescriptor:
    return SnakeDescriptor.default()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


def random_configs(desc: SnakeDescriptor, rng: np.random.Generator, n: int,
                   margin: float = 1.0) -> np.ndarray:
    """Uniform module-angle samples inside the joint-limit envelope."""
    lim = desc.module_limits() * margin
    return rng.uniform(-lim, lim, size=(n, 4))
