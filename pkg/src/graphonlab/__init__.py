"""Step-graphon numerics: cut norms, homomorphism densities, sampling,
clustering maps and (normalized) Laplacian spectra."""

from .errors import (
    BlockLimitError,
    CoverageError,
    DegenerateDegreeError,
    GraphonError,
    IncompatibleRefinementError,
    MultiplicityError,
    PreconditionFailure,
)
from .graphon import (
    FiniteGraph,
    StepFunction,
    StepGraphon,
    degree_function,
    evaluate,
    graph_to_graphon,
    l1_distance,
    l2_distance,
    refine,
)
from .cutnorm import (
    cut_distance_upper,
    cut_norm_exact,
    cut_norm_lower,
    cut_norm_upper,
    op_norm_inf_to_1,
)
from .homomorphism import (
    MOTIFS,
    LabelledGraph,
    counting_lemma_gap,
    generalized_counting_bound,
    generalized_density,
    hom_count,
    hom_density_graph,
    hom_density_graphon,
    labelled_density,
    motif,
)
from .colored import (
    ColoredGraph,
    ColoredStepGraphon,
    colored_cut_distance_upper,
    colored_cut_norm,
    colored_hom_density_graph,
    colored_hom_density_graphon,
    embed_colored_graph,
    sample_colored,
)
from .sampling import bernoulli_round, concentration_curve, sample_graph, sample_weighted
from .regions import Box, RegionSet
from .spectral import (
    SpectrumResult,
    cutoff,
    eigendecompose,
    eigenprojection,
    enormlap_demo,
    laplacian_convergence_experiment,
    normalize_kernel,
    normalized_laplacian_spectrum,
    phyper_diagnostic,
    spectral_embedding,
    unnormalized_laplacian_spectrum,
    weighted_kmeans,
)
from .clustering import (
    Composite,
    Degree,
    LabelledHomDensity,
    SpectralEmbedding,
    compute_statistic,
    consistency_experiment,
    inconsistency_demo_degree_mass,
    lipschitz_check,
    partition_by_regions,
    threshold_cluster,
)

__version__ = "0.1.0"
