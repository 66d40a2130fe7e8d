"""secregion: exact projection of linear operating regions onto
renewable-injection subspaces, with a power-system front end and an
independent verification harness."""

from .linalg import (DegenerateError, Hyperplane, RankError, SingularError,
                     facet_cosine, nullspace_1d, orient_and_normalize,
                     same_facet, solve_square)
from .network import (Branch, Bus, Generator, NetworkCase, ParseError,
                      RegSpec, ValidationError, parse_case_json,
                      parse_matpower_subset)
from .projector import (BadBoundaryPoint, DepaExhausted, InteriorPointInvalid,
                        ModelInfeasible, Polytope, ProjectionConfig,
                        ProjectionStats, RayOutcome, UnboundedModel,
                        accepts_angle, adjacent_facets, exterior_candidates,
                        facet_from_points, next_spanning_point,
                        project_polytope, reselect_exterior,
                        solve_boundary_point, spanning_points)
from .region import (BuildOptions, LinearRegion, build_linear_region,
                     membership, membership_lp, segment_lp, support_lp)
from .simplex import (LpProblem, LpResult, LpStatus, NumericalFailure,
                      feasible, solve)
from .verify import (ErrorReport, SampleClass, SizeGuardExceeded,
                     UnboundedRegion, classify_samples, enumerate_vertices,
                     facet_support_audit, fme_project, regions_equivalent)

__version__ = "0.1.0"

__all__ = [
    "Branch", "BadBoundaryPoint", "BuildOptions", "Bus", "DegenerateError",
    "DepaExhausted", "ErrorReport", "Generator", "Hyperplane",
    "InteriorPointInvalid", "LinearRegion", "LpProblem", "LpResult",
    "LpStatus", "ModelInfeasible", "NetworkCase", "NumericalFailure",
    "ParseError", "Polytope", "ProjectionConfig", "ProjectionStats",
    "RankError", "RayOutcome", "RegSpec", "SampleClass", "SingularError",
    "SizeGuardExceeded", "UnboundedModel", "UnboundedRegion",
    "ValidationError", "accepts_angle", "adjacent_facets",
    "build_linear_region", "classify_samples", "enumerate_vertices",
    "exterior_candidates", "facet_cosine", "facet_from_points",
    "facet_support_audit", "feasible", "fme_project", "membership",
    "membership_lp", "next_spanning_point", "nullspace_1d",
    "orient_and_normalize", "parse_case_json", "parse_matpower_subset",
    "project_polytope", "regions_equivalent", "reselect_exterior",
    "same_facet", "segment_lp", "solve", "solve_boundary_point",
    "solve_square", "spanning_points", "support_lp",
]
