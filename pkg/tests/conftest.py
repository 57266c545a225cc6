import numpy as np
import pytest

from epicast import SplitSpec, run_grid, synthetic_epidemic


@pytest.fixture(scope="session")
def series():
    return synthetic_epidemic()


@pytest.fixture(scope="session")
def chrono_split():
    return SplitSpec(mode="chronological", train_fraction=0.8, seed=0)


@pytest.fixture(scope="session")
def grid_table(series, chrono_split):
    # One shared grid run; several tests only read from it.
    return run_grid(series, chrono_split)


@pytest.fixture(scope="session")
def series_csv_path(tmp_path_factory, series):
    from epicast import serialize_csv

    path = tmp_path_factory.mktemp("data") / "synthetic.csv"
    path.write_text(serialize_csv(series), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
