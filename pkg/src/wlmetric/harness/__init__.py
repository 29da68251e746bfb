from .estimators import WLDistance, WLKernel
from .io import (
    Dataset,
    DistanceMatrix,
    load_edgelist_json,
    load_tudataset,
    read_classes,
    read_matrix_csv,
    write_classes,
    write_matrix_csv,
)
from .pipeline import KnnResult, cross_distances, distance_matrix, kernel_export, knn_classify

__all__ = [
    "Dataset",
    "DistanceMatrix",
    "KnnResult",
    "WLDistance",
    "WLKernel",
    "cross_distances",
    "distance_matrix",
    "kernel_export",
    "knn_classify",
    "load_edgelist_json",
    "load_tudataset",
    "read_classes",
    "read_matrix_csv",
    "write_classes",
    "write_matrix_csv",
]
