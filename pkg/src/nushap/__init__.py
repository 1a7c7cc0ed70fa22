"""Shapley-value feature attribution with a sufficiency-based characteristic function.

Scores are computed over a game whose value for a feature set is 1 when
fixing those features to the instance's values guarantees a similar
prediction (a weak abductive explanation), and 0 otherwise.
"""

from nushap.analysis import RboParams, Ranking, compare_reports, flaw_census, rank, rbo
from nushap.charfun import Game, axp_game, cf_axp, cf_exp, crit, delta, expectation_game
from nushap.core import (
    Feature,
    FeatureSpace,
    Instance,
    SampleSpace,
    SimilarityConfig,
    SimilarityRule,
    enumerate_space,
    similar_on,
    similar_pred,
)
from nushap.errors import (
    CapExceededError,
    ConstantModelError,
    DegenerateProblemError,
    EmptyConditioningError,
    NuShapError,
    ValidationError,
)
from nushap.explain import (
    CxpCatalog,
    ModelProblem,
    SampleProblem,
    enumerate_sb_axps,
    enumerate_sb_cxps,
    extract_sb_axp,
    is_sb_waxp,
    is_sb_waxp_via_catalog,
    is_waxp,
    relevancy,
)
from nushap.models import Model, RecordedModel, RuleListModel, TruthTableModel, truth_table_from
from nushap.shapley import (
    EstimatorParams,
    ScoreReport,
    prefixes,
    required_runs,
    shapley_estimate_cgt,
    shapley_exact_permutations,
    shapley_exact_subsets,
)

__version__ = "0.1.0"
