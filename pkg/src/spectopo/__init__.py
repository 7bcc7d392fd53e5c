"""spectopo: infer a graph's topology from the eigenvectors of its shift
operator.

The shift (adjacency or Laplacian) of an unknown graph is recovered
from spectral templates, the orthonormal eigenbasis that, for example,
principal component analysis extracts from signals diffused over the
graph. Recovery searches the shifts diagonalized by the templates for
the sparsest one satisfying the structural constraints of the requested
kind, via iteratively reweighted l1 linear programs.
"""

__version__ = "0.1.0"

from .graphs import (Graph, ShiftKind, ShiftMatrix, build_shift, complete_graph,
                     cycle_graph, degrees, erdos_renyi, is_connected, path_graph,
                     read_edgelist, star_graph, write_edgelist)
from .spectral import (DegreeEigenvectorError, EigenDecomposition, SpectralTemplates,
                       TemplateSource, build_w, eig_symmetric, find_degree_eigenvector,
                       freq_response, gft, nullspace_dim, templates_from_operator,
                       templates_from_shift)
from .diffusion import (FilterSpec, SignalBatch, apply_filter, match_columns,
                        sample_covariance, synthesize_diffused, templates_from_covariance)
from .lp import LinearProgram, LpSolution, LpStatus, dump_program, lp_solve
from .recovery import (InfeasibleTemplatesError, RecoveryConfig, RecoveryError,
                       RecoveryResult, check_uniqueness, edge_error,
                       laplacian_to_adjacency, recover, recover_adjacency,
                       recover_laplacian, rescale_and_binarize)

__all__ = [
    "Graph", "ShiftKind", "ShiftMatrix", "build_shift", "complete_graph",
    "cycle_graph", "degrees", "erdos_renyi", "is_connected", "path_graph",
    "read_edgelist", "star_graph", "write_edgelist",
    "DegreeEigenvectorError", "EigenDecomposition", "SpectralTemplates",
    "TemplateSource", "build_w", "eig_symmetric", "find_degree_eigenvector",
    "freq_response", "gft", "nullspace_dim", "templates_from_operator",
    "templates_from_shift",
    "FilterSpec", "SignalBatch", "apply_filter", "match_columns",
    "sample_covariance", "synthesize_diffused", "templates_from_covariance",
    "LinearProgram", "LpSolution", "LpStatus", "dump_program", "lp_solve",
    "InfeasibleTemplatesError", "RecoveryConfig", "RecoveryError",
    "RecoveryResult", "check_uniqueness", "edge_error", "laplacian_to_adjacency",
    "recover", "recover_adjacency", "recover_laplacian", "rescale_and_binarize",
    "__version__",
]
