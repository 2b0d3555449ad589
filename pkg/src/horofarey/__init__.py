"""Farey fractions on expanding horospheres of SL(d,R): ensembles,
invariant lattice observables, limit-law oracles and equidistribution
experiments."""

__version__ = "0.1.0"

from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    load_thresholds,
    run_case_a,
    run_case_b,
    run_experiment,
    run_joint,
    write_report,
)
from .farey import (
    FareyPoint,
    FareySet,
    farey_count_asymptotic,
    farey_count_exact,
    farey_fractions,
    generate_farey,
)
from .groups import conjugator, flow, m_y, n_minus, n_plus
from .lattices import (
    Lattice,
    ObservableSpec,
    ball_count,
    embed_farey,
    embed_farey_sheared,
    evaluate_observable,
    lll_reduce,
    second_minimum,
    shortest_vector,
)
from .proof_geometry import (
    ConeRegion,
    cone_volume,
    cone_volume_mc,
    mahler_epsilon0,
)
from .reference_laws import (
    ReferenceLaw,
    build_reference,
    case_b_quadrature,
    case_b_reference,
    haar_exact_d2,
    haar_reference_horosphere,
    sample_mu_h,
)
from .stats import ks_two_sample, wasserstein1

__all__ = [
    "ExperimentConfig", "ExperimentReport", "load_thresholds",
    "run_case_a", "run_case_b", "run_experiment", "run_joint", "write_report",
    "FareyPoint", "FareySet", "farey_count_asymptotic", "farey_count_exact",
    "farey_fractions", "generate_farey",
    "conjugator", "flow", "m_y", "n_minus", "n_plus",
    "Lattice", "ObservableSpec", "ball_count", "embed_farey",
    "embed_farey_sheared", "evaluate_observable", "lll_reduce",
    "second_minimum", "shortest_vector",
    "ConeRegion", "cone_volume", "cone_volume_mc", "mahler_epsilon0",
    "ReferenceLaw", "build_reference", "case_b_quadrature", "case_b_reference",
    "haar_exact_d2", "haar_reference_horosphere", "sample_mu_h",
    "ks_two_sample", "wasserstein1",
    "__version__",
]
