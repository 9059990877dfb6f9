import numpy as np
import pytest

from tods.benchmark import dataset_to_csv, make_spike_benchmark
from tods.dataset import TimeSeriesDataset


@pytest.fixture(scope="session")
def bench():
    """Small seeded spike benchmark; cheap enough to share across tests."""
    return make_spike_benchmark(n=400, period=25, n_anomalies=4, seed=7)


@pytest.fixture(scope="session")
def bench_csv(bench):
    return dataset_to_csv(bench)


@pytest.fixture()
def bench_csv_path(tmp_path, bench_csv):
    path = tmp_path / "bench.csv"
    path.write_text(bench_csv)
    return path


def make_dataset(values, labels=None, name="toy") -> TimeSeriesDataset:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        features = {"value": arr}
    else:
        features = {f"f{i}": arr[:, i] for i in range(arr.shape[1])}
    n = len(arr)
    return TimeSeriesDataset(
        timestamps=np.arange(n, dtype=np.int64),
        features=features,
        labels=None if labels is None else np.asarray(labels),
        name=name,
    )
