"""Rule learning by two-level Boolean minimization."""

from .binarize import (
    BinarizationSchema,
    BinarizeConfig,
    BitVector,
    FeatureSpec,
    describe_bit,
    discretize,
    encode_integer,
    encode_row,
    encode_table,
    infer_schema,
    one_hot,
)
from .cube import Cover, CoverCost, Cube, MinimizationProblem, ResourceLimit, cube_sharp
from .exact import ExactIntractable, ExactLimits, essential_primes, minimize_exact, prime_implicants, unate_cover
from .heuristic import espresso, expand, irredundant, minimize_heuristic, reduce
from .learn import (
    ConflictPolicy,
    FitConfig,
    LabeledBits,
    PartSummary,
    RuleSet,
    StreamState,
    build_sets,
    evaluate,
    fit,
    merge_fit,
    predict,
    rules_to_text,
    update,
)
from .pla import read_pla, write_pla
