"""BMO on measure trees: sharp constants, strip functions, and verification.

The package models finite measure trees with a child-mass ratio bound,
computes oscillation norms of tree-simple functions, and reproduces the sharp
constants of the integral John-Nirenberg inequality and of the 1- vs
2-oscillation comparison through explicit strip ("Bellman") functions, their
induction over tree generations, the staircase extremal functions attaining
the constants, and the goodness geometry of binary martingales of strip
points.
"""

from .concavity import (
    CheckConfig,
    ConditionResult,
    ShapeReport,
    SufficientConditionsReport,
    check_alpha_shape,
    check_alpha_shape_segments,
    check_sufficient_conditions,
)
from .extremals import (
    ExpAverage,
    SharpnessReport,
    StarFunction,
    abs_average_phi_a,
    build_phi_star,
    exp_average_phi_a,
    sharpness_report,
)
from .geometry import (
    OmegaPoint,
    SegmentGoodness,
    in_omega,
    segment_goodness,
    select_removable,
)
from .induction_engine import (
    InductionError,
    InductionTrace,
    JnVerification,
    OscVerification,
    Split,
    bellman_fold,
    decompose_children,
    random_alpha_tree,
    random_dyadic_instance,
    random_simple_function,
    verify_jn,
    verify_osc,
)
from .jn_bellman import (
    DyadicConstants,
    JnParams,
    ThresholdError,
    bellman_eval,
    bellman_raw,
    bellman_value,
    delta_equation,
    dyadic_constants,
    eps0_alpha,
    jn_constant,
    solve_delta,
)
from .martingales import (
    Alpha0Bound,
    BinaryMartingale,
    GoodnessReport,
    JensenError,
    MartingaleNode,
    MartingaleStructureError,
    NodeGoodness,
    SquareExample,
    alpha0_bound,
    binary_martingale_from_function,
    jensen_fold,
    martingale_from_json,
    martingale_goodness,
    martingale_to_json,
    square_example,
)
from .osc_bellman import (
    OscRegions,
    RegionInfo,
    osc_eval,
    osc_lower_bound,
    region_classify,
)
from .tree_core import (
    AlphaTree,
    BmoNorms,
    OscillationReport,
    SimpleFunction,
    TreeNode,
    TreeStructureError,
    bmo_norms,
    build_dyadic_tree,
    load_tree,
    node_point,
    save_tree,
    tree_from_json,
    tree_to_json,
    truncate,
    validate_alpha,
)

__version__ = "0.1.0"
