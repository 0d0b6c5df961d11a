"""Workbench for the fixed-point decomposition of random unlabeled rooted trees.

Exact generating-function tables, brute-force enumeration oracles, numeric
singularity constants, a uniform sampler with automorphism decomposition,
and Monte Carlo experiment drivers.
"""

from .asymptotics import (
    DEFAULT_PRECISION,
    MomentSummary,
    SingularityConstants,
    cn_moments,
    compute_constants,
    forest_pgf,
    forest_prob_asymptotic,
    ln_expectation,
    ln_tail_prob,
    table1,
    tn_asymptotic,
)
from .errors import ConsistencyError, NonConvergenceError, ResourceCapError, UsageError
from .sampler import (
    DEFAULT_SEED,
    Decomposition,
    ExperimentStats,
    RngStream,
    SamplerTables,
    decompose,
    run_experiment,
    sample_automorphism,
    sample_decomposition,
    sample_tree,
    shared_tables,
)
from .series import (
    DEFAULT_ORDER,
    BivariatePolynomialTable,
    ExactSeries,
    UPolynomial,
    cayley_series,
    cayley_weights,
    ctree_polynomials,
    dforest_weights,
    divisor_weight_sums,
    exact_forest_prob,
    forest_series,
    fraction_str,
    pointed_series,
    polya_counts,
    series_compose,
    tree_count_table,
    tree_series,
)
from .trees import (
    AutomorphismElement,
    CanonicalTree,
    ForestSpec,
    aut_elements,
    aut_order,
    canonical_form,
    compare_canonical,
    derangements,
    dn_oracle,
    enumerate_forests,
    enumerate_trees,
    fixed_point_polynomial,
    forest_aut_order,
    forest_weight,
    forest_weight_oracle,
    identity_element,
    leaf,
    orbit_count,
    parse_level_sequence,
    parse_parens,
    tcn_polynomial_oracle,
    tree_from_children,
)

__version__ = "0.1.0"

__all__ = [
    "AutomorphismElement",
    "BivariatePolynomialTable",
    "CanonicalTree",
    "ConsistencyError",
    "Decomposition",
    "DEFAULT_ORDER",
    "DEFAULT_PRECISION",
    "DEFAULT_SEED",
    "ExactSeries",
    "ExperimentStats",
    "ForestSpec",
    "MomentSummary",
    "NonConvergenceError",
    "ResourceCapError",
    "RngStream",
    "SamplerTables",
    "SingularityConstants",
    "UPolynomial",
    "UsageError",
    "aut_elements",
    "aut_order",
    "canonical_form",
    "cayley_series",
    "cayley_weights",
    "cn_moments",
    "compare_canonical",
    "compute_constants",
    "ctree_polynomials",
    "decompose",
    "derangements",
    "dforest_weights",
    "divisor_weight_sums",
    "dn_oracle",
    "enumerate_forests",
    "enumerate_trees",
    "exact_forest_prob",
    "fixed_point_polynomial",
    "forest_aut_order",
    "forest_pgf",
    "forest_prob_asymptotic",
    "forest_series",
    "forest_weight",
    "forest_weight_oracle",
    "fraction_str",
    "identity_element",
    "leaf",
    "ln_expectation",
    "ln_tail_prob",
    "orbit_count",
    "parse_level_sequence",
    "parse_parens",
    "pointed_series",
    "polya_counts",
    "run_experiment",
    "sample_automorphism",
    "sample_decomposition",
    "sample_tree",
    "series_compose",
    "shared_tables",
    "table1",
    "tcn_polynomial_oracle",
    "tn_asymptotic",
    "tree_count_table",
    "tree_from_children",
    "tree_series",
]
