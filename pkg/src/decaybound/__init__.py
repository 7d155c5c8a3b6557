"""Power-law decay bounds for two-point correlations in lattice systems with a U(1)
symmetry, together with the tools to check them: exact diagonalisation on small
graphs and Monte Carlo for the associated random loop model.
"""
from .bounds import (
    DecayBound,
    asymptotic_exponent,
    bound_curve,
    family_knorm,
    k_norm,
    model_bound,
    optimize_xi,
    rotation_angles,
    verify_rotation_machinery,
    xi_of_K,
    zeta_sum,
)
from .ed import ModelOperators, Spectrum, gibbs_correlator, standard_correlators
from .exceptions import DecayBoundError, DomainError, InputError, NumericError, ResourceError
from .lattice import Graph, graph_distance, make_lattice, perimeter_constant, read_edge_list, subset_diameter
from .loops import (
    LoopChain,
    LoopConfig,
    LoopPartition,
    McEstimate,
    count_loops,
    direct_sample,
    estimate_connectivity,
    estimate_partition_function,
    loop_weight,
    mcmc_step,
    spin_correlation_from_loops,
    trace_loops,
)
from .models import Correlator, ModelSpec, build_interaction, load_config, parse_config, symmetry_for

__version__ = "0.1.0"
