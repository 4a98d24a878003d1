"""Density-based Mapper: Mapper graphs whose cover widens where the lens is sparse."""

__version__ = "0.1.0"

from .cluster import ClusterAssignment, Clusterer, single_linkage, weighted_dbscan
from .cover import (GomicCover, GomicReport, Interval, coarse_fine_covers, data_spaced_cover,
                    kerneled_resolution, morse_spaced_cover, validate_gomic)
from .density import DensityProfile, WidthScaler, compute_density, width_multiplier
from .errors import (DBMapperError, DegenerateCoverError, InputFormatError,
                     InvalidParameterError, NonRegularCoverError, VerificationError)
from .geometry import (LensMap, NeighborGraph, PointCloud, hausdorff_estimate, knn,
                       modulus_of_continuity, read_csv, write_csv)
from .kernel import KernelSpec, KerneledSet, build_kerneled_set, eval_kernel
from .mapper import (MapperGraph, build_mapper, build_pullback_mapper, collapse_multigraph,
                     find_intersection_crossing_edges)
from .persistence import (MorseGraph, PersistenceDiagram, PersistencePoint, bottleneck,
                          diagram_gap, extended_persistence, reeb_oracle)
from .synthgen import SynthSpec, gen_genus1, gen_three_component
