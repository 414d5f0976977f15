import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from conformal_rmt.curve import PolynomialCurve
from conformal_rmt.moments import zeros_of_h

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_curve(r, alpha, margin=0.05):
    """Curve with a_0 = r alpha_0, a_j = r^j alpha_j, shrunk until it is certified and contains 0."""
    alpha = np.asarray(alpha, dtype=complex).copy()
    scale = r ** np.maximum(np.arange(alpha.size), 1)
    for _ in range(60):
        c = PolynomialCurve(r, alpha * scale)
        if c.xi > margin * r and np.max(np.abs(zeros_of_h(c)), initial=0) < 1 - 1e-3:
            return c
        alpha[1:] *= 0.8
        alpha[0] *= 0.5
    return PolynomialCurve(r, np.zeros_like(alpha))


def random_curve(rng, n_max=5, alpha_max=0.15, r_range=(0.2, 1.0)):
    n = int(rng.integers(1, n_max + 1))
    r = float(rng.uniform(*r_range))
    mod = alpha_max * np.sqrt(rng.uniform(size=n + 1))
    alpha = mod * np.exp(2j * np.pi * rng.uniform(size=n + 1))
    return make_curve(r, alpha)


@st.composite
def certified_curves(draw, n_max=6, alpha_max=0.2):
    n = draw(st.integers(1, n_max))
    r = draw(st.floats(0.1, 1.5))
    mods = draw(st.lists(st.floats(0, alpha_max), min_size=n + 1, max_size=n + 1))
    args = draw(st.lists(st.floats(0, 2 * np.pi), min_size=n + 1, max_size=n + 1))
    alpha = np.array(mods) * np.exp(1j * np.array(args))
    return make_curve(r, alpha)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _quiet_admissibility():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="r = .* admissibility radius")
        yield


ELLIPSE = PolynomialCurve(1.0, [0, 0.5])
CIRCLE = PolynomialCurve(1.0, [0])
TRIFOLD = PolynomialCurve(1.0, [0, 0, 0.3])
