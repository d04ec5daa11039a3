"""Trajectory similarity toolkit.

Free-space and road-network similarity measures, exact Top-k search with
pivot pruning and partitioned execution, and a seeded robustness benchmark.
"""

from __future__ import annotations

from .core import (
    MBR,
    Dataset,
    GeoPoint,
    GridCell,
    GridSpec,
    Segment,
    Trajectory,
    mbr_of,
    point_distance,
    point_segment_distance,
    polygon_area,
    segment_distance,
    segment_intersection,
    to_grid,
)
from .errors import (
    DataError,
    NetworkError,
    ParameterError,
    TrajSimError,
    UnreachableError,
)
from .metric_index import (
    PivotTable,
    build_pivot_table,
    load_pivot_table,
    pruned_topk,
    save_pivot_table,
    select_pivots_hf,
)
from .partition import parallel_topk, str_partition
from .query import REGISTRY, QueryResult, get_measure, pairwise_matrix, threshold_query, topk
from .road_network import MatchedTrajectory, RoadEdge, RoadNetwork, RoadVertex, shortest_path_distance

__version__ = "0.1.0"
