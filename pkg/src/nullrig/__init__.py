"""nullrig: rigged null hypersurfaces, numerically.

Construct a rigged frame (xi, N, screen) on a null hypersurface patch,
compute the extrinsic package (B, C, tau, shape operators, expansions),
classify (marginally) trapped leaves, and check every structural identity
of the construction at runtime.
"""

from .jets import Jet2, JetDomainError, lift_and_evaluate, directional_second_derivative
from .exprlang import parse, pretty, ExprError, ParseError, EvalDomainError
from .spacetime import (
    MetricSpec,
    MetricFileError,
    metric_catalog,
    minkowski,
    schwarzschild_ef,
    warped_product_6d,
    load_metric,
    loads_metric,
    save_metric,
    dumps_metric,
)
from .hypersurface import (
    Axis,
    HypersurfacePatch,
    AmbientRigging,
    FrameField,
    FrameTolerances,
    GeometryError,
    NotNullError,
    DegenerateRankError,
    TangentRiggingError,
    patch_from_exprs,
    classify_point,
)
from .monge import MongeSurface, MongeReport, monge_surface
from .rigging import RiggingChange, make_change, seeded_changes, identity_residuals
from .analysis import (
    LeafPatch,
    DragResult,
    HorizonVerdict,
    leaf_patches,
    leaf_curvature,
    lie_drag,
    expansion_variation,
    area_variation,
    horizon_classify,
    raychaudhuri_residual,
    newton_trace_residual,
    gauss_codazzi_residuals,
    umbilic_ode_residual,
    parallel_mean_curvature_residual,
)
from . import catalogs

__version__ = "0.1.0"

__all__ = [
    "Jet2",
    "JetDomainError",
    "lift_and_evaluate",
    "directional_second_derivative",
    "parse",
    "pretty",
    "ExprError",
    "ParseError",
    "EvalDomainError",
    "MetricSpec",
    "MetricFileError",
    "metric_catalog",
    "minkowski",
    "schwarzschild_ef",
    "warped_product_6d",
    "load_metric",
    "loads_metric",
    "save_metric",
    "dumps_metric",
    "Axis",
    "HypersurfacePatch",
    "FrameField",
    "FrameTolerances",
    "GeometryError",
    "NotNullError",
    "DegenerateRankError",
    "TangentRiggingError",
    "patch_from_exprs",
    "classify_point",
    "MongeSurface",
    "MongeReport",
    "monge_surface",
    "AmbientRigging",
    "RiggingChange",
    "make_change",
    "seeded_changes",
    "identity_residuals",
    "LeafPatch",
    "DragResult",
    "HorizonVerdict",
    "leaf_patches",
    "leaf_curvature",
    "lie_drag",
    "expansion_variation",
    "area_variation",
    "horizon_classify",
    "raychaudhuri_residual",
    "newton_trace_residual",
    "gauss_codazzi_residuals",
    "umbilic_ode_residual",
    "parallel_mean_curvature_residual",
    "catalogs",
]
