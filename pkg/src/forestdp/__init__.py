"""Node-differentially-private spanning-forest size and connected-component counts."""

from .combinatorics import (
    ForestEdgeSet,
    RepairTrace,
    build_bounded_spanning_forest,
    delta_star_exact,
    down_sensitivity_bruteforce,
    down_sensitivity_sf,
    largest_induced_star_exact,
    largest_induced_star_greedy,
    repair_spanning_forest,
)
from .errors import (
    CapacityError,
    ContractViolation,
    ConvergenceError,
    ForestDPError,
    GraphParseError,
    LpError,
    ParameterError,
    VertexRangeError,
)
from .graph import (
    Graph,
    connected_components,
    gen_geometric,
    gen_gnp,
    induced_subgraph,
    node_distance_in_poset,
    parse_edge_list,
    spanning_forest_size,
)
from .mechanisms import (
    ExtensionFamily,
    GemSelection,
    PrivacyBudget,
    err_score,
    exponential_mechanism,
    gem_select,
    laplace_mechanism,
    laplace_sample,
)
from .polytope import (
    LpCertificate,
    eval_extension_bruteforce,
    eval_lipschitz_extension,
    separate_forest_bruteforce,
    separate_forest_maxflow,
)
from .release import ReleaseReport, default_beta, private_cc, private_sf
from .rng import make_stream

__version__ = "0.1.0"
