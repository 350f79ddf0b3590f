"""Coded shift spaces: entropy from generating sets, maximal-entropy
measures with exact cylinder formulas, stationary sampling, and the
constructive families and procedures that exercise them.
"""

from . import families as families  # registers the family builders
from .automaton import FactorAutomaton, count_language, factor_automaton, growth_slope
from .constructions import (
    AugmentationBuild,
    SftSpec,
    TheoremABuild,
    build_augmentation,
    build_theorem_a,
    find_absent_markers,
)
from .entropy import (
    CharacteristicSolution,
    GensetEntropyEstimate,
    Progression,
    SGraphSpec,
    SoficEntry,
    WeightedPotential,
    characteristic_fn,
    genset_entropy,
    prefix_entropy,
    sgraph_char_value,
    sofic_approx_entropies,
    solve_entropy,
    solve_pressure,
)
from .errors import (
    BudgetError,
    CodedShiftError,
    DivergenceError,
    GurevichError,
    NoRootError,
    SamplerError,
)
from .families import (
    BetaExpansion,
    DyckCounts,
    beta_generators,
    dyck_counts,
    dyck_generators,
    dyck_words,
    multigap,
    nongibbs,
    preset,
    sgap,
    three_mme,
)
from .genset import (
    GeneratingSet,
    RepresentationReport,
    TailBound,
    UdVerdict,
    sardinas_patterson,
    unique_representation_check,
)
from .measures import (
    CylinderEstimate,
    GBernoulliMeasure,
    GibbsReport,
    MeasureError,
    custom_measure,
    equilibrium_measure,
    g_cylinder,
    gibbs_scan,
    induced_entropy,
    measure_entropy,
    mme,
    word_cylinder,
)
from .sampler import (
    SampleWindow,
    empirical_block_counts,
    empirical_entropy,
    sample_window,
    sample_windows,
)
from .words import (
    Alphabet,
    Factorization,
    FactorizeResult,
    Word,
    as_word,
    concat_contains,
    count_factorizations,
    factor_language,
    factorize,
    occurrences,
)

__version__ = "0.1.0"
