from .free import (
    MeasureParams,
    dtw,
    ed,
    edr,
    edwp,
    erp,
    frechet,
    hausdorff,
    lcss,
    lip,
    owd_grid,
    owd_linear,
    pairwise_distances,
    seg_frechet,
    seg_hausdorff,
)
from .network import (
    NetMeasureParams,
    TPParams,
    lcrs,
    lors,
    net_dtw,
    net_edr,
    net_erp,
    net_lcss,
    tp,
    tp_components,
)

__all__ = [
    "MeasureParams",
    "NetMeasureParams",
    "TPParams",
    "dtw",
    "ed",
    "edr",
    "edwp",
    "erp",
    "frechet",
    "hausdorff",
    "lcrs",
    "lcss",
    "lip",
    "lors",
    "net_dtw",
    "net_edr",
    "net_erp",
    "net_lcss",
    "owd_grid",
    "owd_linear",
    "pairwise_distances",
    "seg_frechet",
    "seg_hausdorff",
    "tp",
    "tp_components",
]
