"""Sphere enumeration and sphere-average distance statistics for Cayley graphs."""
from .groups import (
    Cyclic,
    Free,
    FreeAbelian,
    FreeProduct,
    GroupError,
    GroupSpec,
    InfiniteDihedral,
    Lamplighter,
    ParseError,
    SplitDirectProduct,
    bfs_distance,
    parse_group,
)
from .spheres import SphereDataset, enumerate_sphere, growth_report, sample_sphere, sphere_counts
from .estat import EstimateRecord, convergence_series, exact_E, sampled_E
from .relhyp import decompose_counts, decompose_sphere, poincare_partial
from .kernels import available_backends

__version__ = "0.1.0"

__all__ = [
    "Cyclic", "Free", "FreeAbelian", "FreeProduct", "GroupError", "GroupSpec",
    "InfiniteDihedral", "Lamplighter", "ParseError", "SplitDirectProduct",
    "bfs_distance", "parse_group", "SphereDataset", "enumerate_sphere",
    "growth_report", "sample_sphere", "sphere_counts", "EstimateRecord",
    "convergence_series", "exact_E", "sampled_E", "decompose_counts",
    "decompose_sphere", "poincare_partial", "available_backends",
]
