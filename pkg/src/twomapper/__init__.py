"""2-Mapper and Multiscale 2-Mapper.

Build the 2-skeleton of the nerve of a clustered pullback cover, align
2-Mapper complexes across a tower of cubical covers into a filtration, and
read off Z/2 persistence barcodes to choose cover parameters.
"""

from .clustering import (
    ClusterCover,
    ClusterNode,
    DbscanParams,
    check_cluster_cover_good,
    cluster_cover,
    cluster_map,
    compose,
    dbscan,
    detect_free_border_points,
)
from .cover import (
    BoundingBox,
    CoverSet,
    CubicalCoverSpec,
    GoodCoverReport,
    Tower,
    TowerLevel,
    bounding_box,
    build_cubical_cover,
    build_tower,
    check_good_tower,
    epsilon_prime,
    resolution,
)
from .errors import TwoMapperError
from .multiscale import AlignmentMap, MultiscaleResult, align, build_multiscale, complexity_probe, jaccard_matrix
from .nerve import TwoMapperComplex, betti, build_two_mapper, one_skeleton
from .persistence import Barcode, BettiCurve, FilteredComplex, Interval, betti_at, betti_curve, reduce
from .pointcloud import (
    Lens,
    LensImage,
    PointCloud,
    apply_lens,
    diameter,
    generate_klein_bottle,
    generate_torus,
    knn_radius,
    load_csv,
    save_csv,
)

__version__ = "0.1.0"
