"""Thurston metric laboratory for the once-punctured torus and the four-punctured sphere."""

from .curves import (
    INFINITY,
    S04,
    S11,
    ZERO,
    CurveWord,
    EnumerationControl,
    FareyGraph,
    MappingClass,
    Slope,
    SurfaceKind,
    curve_word,
    dehn_twist,
    enumerate_slopes,
    farey_graph,
    intersection_number,
    mapping_class_apply,
    normalize,
)
from .errors import ThurstonLabError
from .geometry import (
    DualSphere,
    Facet,
    delta_twist,
    dual_sphere,
    facet,
    facets_in_arc,
    integrate_stretch,
    longest_facet,
    stretch_vector,
    thurston_distance,
    thurston_norm,
)
from .holonomy import (
    TeichPoint,
    build_point,
    curve_length,
    length_gradient,
    log_length_gradient,
    modular_torus,
    remark,
    symmetric_sphere,
    trace_table,
)
from .lab import (
    ExperimentReport,
    LinearMap2,
    facet_asymptotics,
    facet_bounds,
    gamma_linearity_defect,
    gamma_map,
    isometry_check,
    longest_facet_correspondence,
    mapping_class_differential,
    surface_discriminator,
    twist_length_ratio,
)
from .precision import PrecisionContext, TangentVec, Covector, Vec2, vec, working_precision

__version__ = "0.1.0"
