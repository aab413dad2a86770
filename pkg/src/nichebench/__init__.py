"""Niching evolutionary algorithms and a budgeted benchmark harness."""

from .algorithms import (
    ALGORITHMS,
    AlgorithmConfig,
    RunResult,
    crowding_de,
    crowding_ga,
    crowding_replacement,
    conserve_species_seeds,
    determine_species_seeds,
    get_algorithm,
    preselection_ga,
    scga,
    sde,
    shared_fitness,
    sharing_de,
    sharing_ga,
)
from .core import (
    BudgetExhausted,
    EvalBudget,
    Individual,
    Population,
    RngStream,
    binary_tournament,
    blend_crossover,
    de_trial_vector,
    euclidean_distance,
    evaluate,
    gaussian_mutation,
)
from .grating import (
    GratingDesign,
    GratingParams,
    SyntheticRecordingModel,
    grating_problem,
    integrated_square_error,
    make_default_problem,
    residuals,
    synthetic_recording_model,
)
from .harness import (
    ConfigError,
    ExperimentSpec,
    ResultTable,
    emit_reports,
    run_experiment,
)
from .metrics import avg_min_distance, best_fitness, distinct_peaks, peak_ratio
from .problems import (
    PROBLEM_FACTORIES,
    BoundedProblem,
    branin,
    deb1,
    get_problem,
    himmelblau,
    rosenbrock,
    six_hump_camel,
)
from .stats import (
    SampleSet,
    SignificanceMatrix,
    ks_two_sample,
    mann_whitney_u,
    pairwise_matrix,
    welch_t,
)

__version__ = "0.1.0"
