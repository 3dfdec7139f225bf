"""bosonlab: shallow-depth linear-optical circuits, exact Boson Sampling, and
the constructive machinery around them at desk scale.

The package is organized around the butterfly interconnect family: layout
builders and circuit composition (:mod:`~bosonlab.architecture`), permutation
routing and grid embeddings (:mod:`~bosonlab.routing`), exact output
probabilities via permanents and hafnians (:mod:`~bosonlab.probability`),
exact samplers and collision statistics (:mod:`~bosonlab.sampling`),
Cayley-path perturbations with polynomial extrapolation
(:mod:`~bosonlab.cayley`), photon-loss trajectories (:mod:`~bosonlab.loss`),
and squeezed-light embeddings (:mod:`~bosonlab.gbs`).
"""

from .architecture import (
    Architecture,
    Circuit,
    GatePlacement,
    build_butterfly,
    build_inverse_butterfly,
    build_kaleidoscope,
    circuit_from_json,
    circuit_to_json,
    circuit_unitary,
    identity_circuit,
)
from .cayley import (
    CayleyGate,
    LossModel,
    PrecisionError,
    ReductionDemoResult,
    ReductionPlan,
    big_q,
    build_reduction_plan,
    cayley_transform,
    execute_reduction,
    postselection_constant,
    q1_lower_bound,
    q_factor,
    perturb_circuit,
    rational_degree_check,
    reduction_demo,
)
from .gbs import (
    BlowupFactor,
    blowup_factor,
    build_tmsv_embedding,
    interleave_outcome,
    truncated_fock_gbs,
    truncated_fock_outcome_probability,
    verify_gbs_reduction,
)
from .linalg import (
    RECON_TOL,
    UNITARY_TOL,
    Eigen2,
    RngHandle,
    assert_unitary,
    compose,
    eig_unitary2,
    haar_unitary,
)
from .loss import (
    TrajectoryResult,
    lossy_outcome_probability,
    lossy_sample,
    lossy_trajectories,
    no_loss_probability,
)
from .probability import (
    GbsParams,
    full_distribution,
    gbs_probability,
    hafnian,
    hafnian_by_matchings,
    is_collision_free,
    occupation_vectors,
    output_probability,
    permanent,
    permanent_naive,
    submatrix_repeat,
    transition_amplitude,
)
from .routing import (
    GridSpec,
    Permutation,
    embed_grid,
    embed_grid_1d,
    grid_circuit_unitary,
    random_permutation,
    route_permutation,
    sample_permutation_circuit,
    verify_embedding,
)
from .sampling import (
    CollisionRatioConfig,
    EnsembleSample,
    EnsembleSpec,
    ExperimentRecord,
    PAPER_SCALE_CONFIG,
    balls_bins_singletons,
    birthday_bound_check,
    boson_sample,
    collision_free_fraction_bound_holds,
    collision_ratio_experiment,
    enumeration_sampler,
    first_modes_input,
    global_haar_unitary,
    local_random_circuit,
    records_to_csv,
    sample_circuit,
    sample_collision_free_outcome,
    summarize_ratios,
)

__version__ = "0.1.0"
