from __future__ import annotations

import numpy as np
import pytest

from trajsim import fixtures
from trajsim.core import Dataset, Trajectory, mbr_of
from trajsim.errors import ParameterError
from trajsim.partition import parallel_topk, str_partition
from trajsim.query import topk


def test_single_partition_holds_everything():
    ds = fixtures.random_walks(12, seed=0)
    (part,) = str_partition(ds, 1)
    assert part.ids == ds.ids


def test_four_corners_split_apart():
    corners = [(0, 0), (0, 100), (100, 0), (100, 100)]
    ds = Dataset([Trajectory(k, [c, (c[0] + 1, c[1] + 1)]) for k, c in enumerate(corners)])
    parts = str_partition(ds, 4)
    assert sorted(len(p) for p in parts) == [1, 1, 1, 1]
    assert sorted(p.ids[0] for p in parts) == [0, 1, 2, 3]


def test_partition_sizes_and_coverage():
    ds = fixtures.random_walks(100, seed=6)
    parts = str_partition(ds, 9)
    assert len(parts) == 9
    sizes = [len(p) for p in parts]
    assert max(sizes) - min(sizes) <= 1
    ids = [i for p in parts for i in p.ids]
    assert sorted(ids) == ds.ids
    for p in parts:
        for t in p.members:
            box = mbr_of(t)
            assert p.mbr.min_lat <= box.min_lat and box.max_lat <= p.mbr.max_lat
            assert p.mbr.min_lon <= box.min_lon and box.max_lon <= p.mbr.max_lon


def test_more_partitions_than_items():
    ds = fixtures.random_walks(3, seed=0)
    assert len(str_partition(ds, 10)) == 3
    assert str_partition(Dataset(), 4) == []
    with pytest.raises(ParameterError):
        str_partition(ds, 0)


@pytest.mark.parametrize("measure,params", [("dtw", None), ("lcss", {"epsilon": 3.0})])
def test_parallel_matches_sequential(measure, params):
    ds = fixtures.random_walks(60, seed=2)
    parts = str_partition(ds, 4)
    q = ds[5]
    want = topk(q, ds, measure, params, 10).items
    assert parallel_topk(q, parts, measure, params, 10, workers=1).items == want
    assert parallel_topk(q, parts, measure, params, 10, workers=2).items == want


def test_k_larger_than_any_partition():
    ds = fixtures.random_walks(20, seed=9)
    parts = str_partition(ds, 5)
    q = ds[0]
    res = parallel_topk(q, parts, "frechet", None, 12)
    assert res.items == topk(q, ds, "frechet", None, 12).items
    assert not res.truncated
    assert parallel_topk(q, parts, "frechet", None, 50).truncated


def test_parallel_rejects_bad_args():
    ds = fixtures.random_walks(5, seed=9)
    parts = str_partition(ds, 2)
    with pytest.raises(ParameterError):
        parallel_topk(ds[0], parts, "dtw", None, 1, workers=0)
    with pytest.raises(ParameterError):
        parallel_topk(ds[0], parts, "dtw", None, 0)
    with pytest.raises(ParameterError):
        parallel_topk(ds[0], [], "dtw", None, 1)
    assert np.isfinite(parallel_topk(ds[0], parts, "dtw", None, 1).scores[0])
