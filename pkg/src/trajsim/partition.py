"""Partitioned Top-k execution on a single machine.

Mirrors the global-partition / local-scan / merge pattern of distributed
trajectory engines: the dataset is tiled with Sort-Tile-Recursive on
trajectory bounding-box centers, each worker ranks its partitions locally,
and the local winners are merged under the global ranking rule.  Because
every score comes from the same scalar code path, results are identical for
any worker count.
"""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .core import MBR, Dataset, _id_key, mbr_of
from .errors import ParameterError
from .query import QueryResult, get_measure, rank, scan


@dataclass(frozen=True)
class Partition:
    id: int
    members: tuple
    """Member trajectories in ascending id order."""
    mbr: MBR

    @property
    def ids(self) -> list:
        return [t.id for t in self.members]

    def __len__(self) -> int:
        return len(self.members)


def _split_even(items: list, parts: int) -> list[list]:
    """Cut ``items`` into ``parts`` consecutive runs whose sizes differ by at most 1."""
    q, r = divmod(len(items), parts)
    out, start = [], 0
    for k in range(parts):
        size = q + (1 if k < r else 0)
        out.append(items[start : start + size])
        start += size
    return out


def _bbox(trajs) -> MBR:
    box = mbr_of(trajs[0])
    for t in trajs[1:]:
        box = box.union(mbr_of(t))
    return box


def str_partition(dataset: Dataset, n_partitions: int) -> list[Partition]:
    """Sort-Tile-Recursive tiling of the dataset.

    Trajectories are keyed by their MBR centers, sorted by lat into
    ``ceil(sqrt(n))`` vertical slabs, and each slab is sorted by lon and cut
    into tiles.  Tiles are distributed over slabs as evenly as possible and
    the items over tiles in proportion, so tile sizes differ by at most one.
    When the dataset has fewer trajectories than requested partitions, one
    partition per trajectory is returned.
    """
    if not isinstance(n_partitions, int) or n_partitions < 1:
        raise ParameterError("n_partitions must be a positive integer")
    trajs = list(dataset)
    if not trajs:
        return []
    n = min(n_partitions, len(trajs))
    keyed = []
    for t in trajs:
        clat, clon = mbr_of(t).center
        keyed.append((clat, clon, _id_key(t.id), t))
    keyed.sort(key=lambda r: (r[0], r[1], r[2]))
    n_slabs = math.ceil(math.sqrt(n))
    tiles_per_slab = [len(run) for run in _split_even(list(range(n)), n_slabs)]
    tiles_per_slab = [c for c in tiles_per_slab if c]
    # hand out items tile-evenly: slab k receives as many items as its tiles would get
    tile_sizes = [len(run) for run in _split_even(keyed, n)]
    partitions = []
    start = 0
    tile_no = 0
    for n_tiles in tiles_per_slab:
        count = sum(tile_sizes[tile_no : tile_no + n_tiles])
        slab = sorted(keyed[start : start + count], key=lambda r: (r[1], r[0], r[2]))
        sizes = tile_sizes[tile_no : tile_no + n_tiles]
        pos = 0
        for size in sizes:
            tile = slab[pos : pos + size]
            pos += size
            members = tuple(sorted((r[3] for r in tile), key=lambda t: _id_key(t.id)))
            partitions.append(Partition(len(partitions), members, _bbox(members)))
        start += count
        tile_no += n_tiles
    return partitions


def _local_topk(args):
    query, members, measure_name, params, k = args
    desc = get_measure(measure_name)
    return rank(desc, scan(query, members, desc, params), k)


def parallel_topk(
    query,
    partitions: Sequence[Partition],
    measure,
    params: Mapping[str, Any] | None,
    k: int,
    workers: int = 1,
) -> QueryResult:
    """Top-k over partitions; each partition is one unit of work.

    ``workers == 1`` scans in-process.  Larger values use a process pool
    (Python threads would serialize on the interpreter lock).
    """
    desc = get_measure(measure)
    if not isinstance(workers, int) or workers < 1:
        raise ParameterError("workers must be a positive integer")
    if not isinstance(k, int) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    prm = desc.validate(params)
    total = sum(len(p) for p in partitions)
    if total == 0:
        raise ParameterError("cannot query an empty dataset")
    t0 = time.perf_counter()
    tasks = [(query, p.members, desc.name, prm, k) for p in partitions if len(p)]
    if workers == 1:
        local = [_local_topk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            local = list(pool.map(_local_topk, tasks))
    merged = heapq.merge(*local, key=lambda it: desc.rank_key(*it))
    items = [it for _, it in zip(range(k), merged)]
    elapsed = (time.perf_counter() - t0) * 1000.0
    return QueryResult(items, elapsed, k, k > total, desc.name, {"workers": workers, "partitions": len(tasks)})
