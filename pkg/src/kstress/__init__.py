"""k-stresses on cell complexes, reciprocal diagrams and polynomial trace maps."""
from .complex import (
    CellComplex, FVector, OrientationClass, build_complex, f_g_h, homology_rank_mod2,
    is_k_primitive, manifold_report, orient, stars_links_dual,
)
from .errors import (
    ClosureFailure, DegenerateGeometry, DisconnectedDualGraph, KStressError, NonFlatCell,
    NonOrientable, NumericalAmbiguity, ParseError, TopologyError, ValidationError,
)
from .geometry import (
    OrientedFacetCycle, Realization, flag_frame_sign, frame_class, generalized_volume,
    inner_unit_normal, minkowski_residual, slab_volume, validate_flatness,
)
from .io import ComplexDocument, GeneratorConfig, load, save
from .reciprocal import Reciprocal, build_reciprocal, classify_edges, local_reciprocal, reciprocal_volume
from .stress import (
    StressAssignment, assemble, find_positive_stress, is_statically_rigid, stress_basis,
    stress_space, verify_stress,
)
from .trace import TraceResult, homogeneity_check, jacobian_rank, tension_positivity, trace

__version__ = "0.1.0"
