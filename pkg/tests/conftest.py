import numpy as np
import pytest

from forecasting.cdfm import init_cdfm
from timeseries.dataset import from_array, split_and_standardize


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def random_walk_dataset():
    """Three correlated random-walk channels, split 0.6/0.2/0.2 and standardized."""
    rng = np.random.default_rng(7)
    steps = rng.normal(size=(600, 3))
    values = np.cumsum(steps, axis=0)
    values[:, 2] = 0.5 * values[:, 0] + rng.normal(scale=0.5, size=600)
    ds = from_array(values, ["a", "b", "c"], name="walk")
    return split_and_standardize(ds, (0.6, 0.2, 0.2))


@pytest.fixture
def ett_like_csv(tmp_path):
    """Small CSV in the ETT layout: date column then numeric channels."""
    rng = np.random.default_rng(3)
    T = 200
    t = np.arange(T)
    lines = ["date,HUFL,HULL,OT"]
    for i in range(T):
        hufl = np.sin(2 * np.pi * i / 24) + 0.1 * rng.normal()
        hull = 0.5 * np.cos(2 * np.pi * i / 24) + 0.1 * rng.normal()
        ot = 0.01 * t[i] + 0.2 * rng.normal()
        lines.append(f"2016-07-01 {i % 24:02d}:00:00,{float(hufl)!r},{float(hull)!r},{float(ot)!r}")
    path = tmp_path / "toy.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def tiny_state():
    """L=8, H=4, N=2 model with every channel fused and W kept inside (0, 1)."""
    state = init_cdfm(8, 4, 2, 3, np.random.default_rng(11))
    state.sigma_predictor.W[...] = 0.01 * np.random.default_rng(12).uniform(-1, 1, size=state.sigma_predictor.W.shape)
    state.sigma_predictor.b[...] = 0.5
    state.lam[...] = 0.2
    return state
