"""Directed road networks, map-matched trajectories and shortest paths."""

from __future__ import annotations

import heapq
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NetworkError, ParameterError, UnknownVertexError, UnreachableError

UNREACHABLE = math.inf
"""Distance returned for vertex pairs with no connecting path."""


@dataclass(frozen=True)
class RoadVertex:
    id: int
    lat: float
    lon: float


@dataclass(frozen=True)
class RoadEdge:
    id: int
    source: int
    target: int
    length: float


class DistanceCache:
    """Bounded LRU map from source vertex to its single-source distance array.

    Lookups and inserts are guarded by a lock.  Two threads missing on the
    same source may both run Dijkstra; the results are identical, so the
    later insert is harmless.
    """

    def __init__(self, network: RoadNetwork, capacity: int = 4096):
        if capacity < 1:
            raise ParameterError("cache capacity must be >= 1")
        self._net = network
        self._capacity = capacity
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._rows)

    def row(self, source: int) -> np.ndarray:
        with self._lock:
            cached = self._rows.get(source)
            if cached is not None:
                self._rows.move_to_end(source)
                self.hits += 1
                return cached
            self.misses += 1
        dist = self._net.dijkstra(source)
        with self._lock:
            self._rows[source] = dist
            self._rows.move_to_end(source)
            while len(self._rows) > self._capacity:
                self._rows.popitem(last=False)
        return dist

    def clear(self) -> None:
        with self._lock:
            self._rows.clear()


class RoadNetwork:
    """Immutable directed graph with positive edge lengths.

    ``distance(u, v)`` answers through a per-network :class:`DistanceCache`;
    pass ``cache_capacity`` to size it.
    """

    def __init__(
        self,
        vertices: Iterable[RoadVertex],
        edges: Iterable[RoadEdge],
        cache_capacity: int = 4096,
    ):
        self.vertices: dict[int, RoadVertex] = {}
        for v in vertices:
            if v.id in self.vertices:
                raise NetworkError(f"duplicate vertex id {v.id}")
            self.vertices[v.id] = v
        self.edges: dict[int, RoadEdge] = {}
        for e in edges:
            if e.id in self.edges:
                raise NetworkError(f"duplicate edge id {e.id}")
            if e.source not in self.vertices or e.target not in self.vertices:
                raise NetworkError(f"edge {e.id} has a dangling endpoint")
            if not (e.length > 0 and math.isfinite(e.length)):
                raise NetworkError(f"edge {e.id} has non-positive length {e.length}")
            self.edges[e.id] = e
        self._vids = sorted(self.vertices)
        self._index = {vid: k for k, vid in enumerate(self._vids)}
        out: list[list[tuple[int, float]]] = [[] for _ in self._vids]
        self._edge_between: dict[tuple[int, int], RoadEdge] = {}
        for e in sorted(self.edges.values(), key=lambda e: e.id):
            out[self._index[e.source]].append((self._index[e.target], e.length))
            key = (e.source, e.target)
            best = self._edge_between.get(key)
            if best is None or e.length < best.length:
                self._edge_between[key] = e
        self._out = out
        self.cache = DistanceCache(self, cache_capacity)

    def __repr__(self) -> str:
        return f"RoadNetwork(|V|={len(self.vertices)}, |E|={len(self.edges)})"

    def __getstate__(self):
        state = self.__dict__.copy()
        state["cache"] = self.cache._capacity
        return state

    def __setstate__(self, state):
        capacity = state.pop("cache")
        self.__dict__.update(state)
        self.cache = DistanceCache(self, capacity)

    def out_edges(self, vid: int) -> list[RoadEdge]:
        self._check(vid)
        return [e for e in self.edges.values() if e.source == vid]

    def edge_between(self, u: int, v: int) -> RoadEdge | None:
        """Shortest direct edge u -> v (lowest id on ties), if any."""
        return self._edge_between.get((u, v))

    def _check(self, vid: int) -> int:
        try:
            return self._index[vid]
        except (KeyError, TypeError):
            raise UnknownVertexError(f"unknown vertex id {vid!r}") from None

    def dijkstra(self, source: int) -> np.ndarray:
        """Distances from ``source`` to every vertex, ordered by ascending vertex id."""
        s = self._check(source)
        dist = np.full(len(self._vids), UNREACHABLE)
        dist[s] = 0.0
        heap = [(0.0, s)]
        done = np.zeros(len(self._vids), dtype=bool)
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for w, length in self._out[u]:
                nd = d + length
                if nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        dist.setflags(write=False)
        return dist

    def distance(self, u: int, v: int, use_cache: bool = True) -> float:
        j = self._check(v)
        row = self.cache.row(u) if use_cache else self.dijkstra(u)
        return float(row[j])

    def distance_matrix(self, sources: Sequence[int], targets: Sequence[int]) -> np.ndarray:
        cols = [self._check(v) for v in targets]
        if not sources:
            return np.zeros((0, len(cols)))
        rows = {u: self.cache.row(u) for u in dict.fromkeys(sources)}
        return np.array([rows[u][cols] for u in sources], dtype=np.float64).reshape(len(sources), len(cols))


def shortest_path_distance(net: RoadNetwork, u: int, v: int, symmetrize: bool = False) -> float:
    """Directed shortest-path length from ``u`` to ``v``.

    Returns :data:`UNREACHABLE` when no path exists.  With ``symmetrize`` the
    smaller of the two directed distances is returned.
    """
    d = net.distance(u, v)
    if symmetrize:
        d = min(d, net.distance(v, u))
    return d


@dataclass(frozen=True)
class MatchedTrajectory:
    """A trajectory already snapped to network vertices."""

    id: object
    vertices: tuple[int, ...]
    times: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        if len(self.vertices) == 0:
            raise ParameterError(f"matched trajectory {self.id!r} has no vertices")
        if self.times is not None:
            times = tuple(float(t) for t in self.times)
            if len(times) != len(self.vertices):
                raise ParameterError("times and vertices differ in length")
            if any(b < a for a, b in zip(times, times[1:])):
                raise ParameterError(f"matched trajectory {self.id!r} has decreasing timestamps")
            object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def has_times(self) -> bool:
        return self.times is not None

    def validate(self, net: RoadNetwork) -> MatchedTrajectory:
        for v in self.vertices:
            net._check(v)
        return self

    def edges(self, net: RoadNetwork) -> list[RoadEdge]:
        """Edges joining consecutive vertices, skipping pairs with no direct edge."""
        out = []
        for u, v in zip(self.vertices, self.vertices[1:]):
            e = net.edge_between(u, v)
            if e is not None:
                out.append(e)
        return out

    def route_length(self, net: RoadNetwork) -> float:
        """Length driven along the trajectory.

        A consecutive pair costs its direct edge when there is one and the
        shortest-path distance otherwise.
        """
        total = 0.0
        for u, v in zip(self.vertices, self.vertices[1:]):
            e = net.edge_between(u, v)
            if e is not None:
                total += e.length
            elif u != v:
                d = net.distance(u, v)
                if d == UNREACHABLE:
                    raise UnreachableError(u, v)
                total += d
        return total


EDGE_FIELDS = ("edge_id", "from_id", "to_id", "length", "from_lat", "from_lon", "to_lat", "to_lon")


def load_network(
    edge_records: Iterable[Mapping | Sequence],
    vertices: Iterable[RoadVertex] | None = None,
    cache_capacity: int = 4096,
) -> RoadNetwork:
    """Build a network from edge records.

    Records are mappings keyed by the CSV header names or sequences in
    ``EDGE_FIELDS`` order.  Without explicit ``vertices`` the vertex set is
    taken from the records' endpoint coordinates; with them, every endpoint
    must already exist.
    """
    explicit = vertices is not None
    vmap: dict[int, RoadVertex] = {}
    for v in vertices or ():
        if v.id in vmap:
            raise NetworkError(f"duplicate vertex id {v.id}")
        vmap[v.id] = v
    edges = []
    for rec in edge_records:
        r = rec if isinstance(rec, Mapping) else dict(zip(EDGE_FIELDS, rec))
        try:
            eid, u, v = int(r["edge_id"]), int(r["from_id"]), int(r["to_id"])
            length = float(r["length"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkError(f"malformed edge record {rec!r}") from exc
        for vid, lat_key, lon_key in ((u, "from_lat", "from_lon"), (v, "to_lat", "to_lon")):
            if explicit:
                if vid not in vmap:
                    raise NetworkError(f"edge {eid} has a dangling endpoint {vid}")
                continue
            if r.get(lat_key) in (None, "") or r.get(lon_key) in (None, ""):
                raise NetworkError(f"edge {eid} lacks coordinates for vertex {vid}")
            vert = RoadVertex(vid, float(r[lat_key]), float(r[lon_key]))
            seen = vmap.setdefault(vid, vert)
            if (seen.lat, seen.lon) != (vert.lat, vert.lon):
                raise NetworkError(f"vertex {vid} has conflicting coordinates")
        edges.append(RoadEdge(eid, u, v, length))
    return RoadNetwork(vmap.values(), edges, cache_capacity=cache_capacity)


def grid_network(nx: int, ny: int, spacing: float = 1.0) -> RoadNetwork:
    """Bidirectional unit grid; vertex ``ix * ny + iy`` sits at ``(ix, iy) * spacing``."""
    verts = [RoadVertex(ix * ny + iy, ix * spacing, iy * spacing) for ix in range(nx) for iy in range(ny)]
    edges = []
    eid = 0
    for ix in range(nx):
        for iy in range(ny):
            u = ix * ny + iy
            for jx, jy in ((ix + 1, iy), (ix, iy + 1)):
                if jx < nx and jy < ny:
                    w = jx * ny + jy
                    edges.append(RoadEdge(eid, u, w, spacing))
                    edges.append(RoadEdge(eid + 1, w, u, spacing))
                    eid += 2
    return RoadNetwork(verts, edges)


def grid_vertex(ix: int, iy: int, ny: int) -> int:
    return ix * ny + iy
