"""specmix: spectral recovery of mixtures of categorical measures.

Recovers the components and weights of a finite mixture of categorical
distributions from grouped samples (several iid draws per latent
component) by whitening and eigendecomposition of symmetrized moment
tensors, and constructs mixture pairs showing the required group sizes
are tight.  Hot sampling kernels run through a compiled extension when
available, with a pure numpy fallback (set SPECMIX_FORCE_NUMPY=1 to
force the fallback).
"""

from .counterexamples import (
    CounterexamplePair,
    MomentComparison,
    build_pair,
    dependence_coefficients,
    verify_moment_equality,
)
from .estimation import (
    MomentEstimate,
    build_c_hat,
    build_e_hat,
    empirical_sym_moment,
    moment_from_tally,
)
from .experiments import (
    BaselineReport,
    ExperimentConfig,
    ExperimentReport,
    matched_l1_error,
    random_baseline,
    run_experiment,
)
from .kernels import BACKEND
from .model import (
    DiagonalMap,
    DistinctNorms,
    DominatingMeasure,
    MixtureSpec,
    b_map,
    check_distinct_norms,
    dominating_measure,
    make_mixture,
    population_moment,
    probability_vector,
    random_dominating_measure,
)
from .multinomial import (
    MultinomialSpec,
    enumerate_compositions,
    f_nq,
    multinomial_mixture_equal,
    multinomial_pmf,
    t_nq_apply,
    verify_lemma_mult,
)
from .recovery import (
    RecoveryConfig,
    RecoveryError,
    RecoveryResult,
    WeightSolution,
    build_t_hat,
    estimate_num_components,
    extract_components,
    li_recover_4,
    recover_full,
    recover_weights,
    resolve_dominating,
    whiten,
)
from .sampling import (
    GroupedDataset,
    GroupTallyHistogram,
    draw_groups,
    num_compositions,
    read_groups,
    tally,
    write_groups,
)
from .tensors import (
    EigenDecomposition,
    RankDeficiencyError,
    blockwise_apply,
    fold,
    numerical_rank,
    outer_power,
    psd_sqrt_pinv,
    sym_eig,
    symmetrize,
    unfold,
)

__version__ = "1.0.0"

__all__ = [
    "BACKEND",
    "BaselineReport",
    "CounterexamplePair",
    "DiagonalMap",
    "DistinctNorms",
    "DominatingMeasure",
    "EigenDecomposition",
    "ExperimentConfig",
    "ExperimentReport",
    "GroupTallyHistogram",
    "GroupedDataset",
    "MixtureSpec",
    "MomentComparison",
    "MomentEstimate",
    "MultinomialSpec",
    "RankDeficiencyError",
    "RecoveryConfig",
    "RecoveryError",
    "RecoveryResult",
    "WeightSolution",
    "b_map",
    "blockwise_apply",
    "build_c_hat",
    "build_e_hat",
    "build_pair",
    "build_t_hat",
    "check_distinct_norms",
    "dependence_coefficients",
    "dominating_measure",
    "draw_groups",
    "empirical_sym_moment",
    "enumerate_compositions",
    "estimate_num_components",
    "extract_components",
    "f_nq",
    "fold",
    "li_recover_4",
    "make_mixture",
    "matched_l1_error",
    "moment_from_tally",
    "multinomial_mixture_equal",
    "multinomial_pmf",
    "numerical_rank",
    "outer_power",
    "population_moment",
    "probability_vector",
    "psd_sqrt_pinv",
    "random_baseline",
    "random_dominating_measure",
    "num_compositions",
    "read_groups",
    "recover_full",
    "recover_weights",
    "resolve_dominating",
    "run_experiment",
    "sym_eig",
    "symmetrize",
    "t_nq_apply",
    "tally",
    "unfold",
    "verify_lemma_mult",
    "verify_moment_equality",
    "whiten",
    "write_groups",
]
