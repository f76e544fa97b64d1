import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from intsig.curves import Curve

settings.register_profile("default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def smooth_curve(dim: int, n: int, seed: int, closed: bool = False, span: float = 1.6 * np.pi) -> Curve:
    """Random trigonometric curve; closed curves repeat their first sample."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 2 * np.pi if closed else span, n)
    k = np.arange(1, 4)
    cols = [np.cos(np.outer(t, k)) @ rng.uniform(-1, 1, 3) + np.sin(np.outer(t, k)) @ rng.uniform(-1, 1, 3)
            for _ in range(dim)]
    pts = np.column_stack(cols)
    if closed:
        pts[-1] = pts[0]
    return Curve(pts)


def rel_err(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


@pytest.fixture
def curve2():
    return smooth_curve(2, 300, 1)


@pytest.fixture
def curve3():
    return smooth_curve(3, 300, 2)
