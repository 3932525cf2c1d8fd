"""Channel-resolved Markov jump networks.

Builds state generators from reservoir/filter-resolved transition channels,
computes full counting statistics analytically and by Monte Carlo, and
decides exactly which thermodynamic records (heat, charge, entropy
production, noise) are fixed by the state dynamics alone, with exact
compatible-record intervals for the rest.
"""

from .completeness import (
    CompletenessVerdict,
    QuotientForm,
    completeness_test,
    first_order_record_change,
    generator_preserving_basis,
    predictability_test,
    quotient_form,
    remaining_kernel,
    velocity_only_kernel_dim,
)
from .dot import (
    DotSpec,
    DotTotals,
    Reservoir,
    build_dot,
    dot_heat_bounds,
    dot_relaxation_matrix,
    dot_stationary,
    dot_totals,
    fermi,
    make_twin,
    twin_dot_spec,
)
from .errors import ChanjumpError, NonErgodicError, NumericalError, ValidationError
from .fcs import (
    CumulantReport,
    analytic_cumulants,
    cumulants_fd,
    mean_currents,
    noise_matrix,
    scgf,
    tilt_derivatives,
    tilted_generator,
    tilted_null_variation,
)
from .linalg import (
    DEFAULT_TOL,
    KernelBasis,
    StationaryState,
    drazin_inverse,
    kernel_basis,
    numerical_rank,
    pseudo_inverse,
    stationary_state,
)
from .montecarlo import SimConfig, TrajectoryStats, empirical_cumulants, simulate
from .network import (
    ChannelNetwork,
    ProjectionPair,
    RecordMap,
    StateGenerator,
    TransitionChannel,
    build_generator,
    build_projection,
    build_record_map,
    channel_counts,
    load_network,
    serialize_network,
)
from .records import (
    EntropyReport,
    HullSummand,
    RecordInterval,
    entropy_production,
    mean_record,
    record_hull_summary,
    record_interval,
    stationary_transition_totals,
)

__version__ = "0.1.0"
