"""Constructive lower-bound machinery for escaping-set dimensions.

Library layout:

* ``xreal``      -- sign-log scalars for tower-scale magnitudes
* ``geometry``   -- squares, disks, interval sets, covering selection,
                    distortion bounds and their sampled verification
* ``tracts``     -- half-plane lifts (exponential and model families),
                    inverse branches, the zip-rate diagnostic
* ``growth``     -- growth function h, its derivative and bounds
* ``goodsets``   -- density lemma, good sets, admissible squares
* ``offspring``  -- the child-region construction with certification
* ``levels``     -- nested cell families, mass tree, per-lemma checks
* ``dimension``  -- mass-distribution and cover-sum dimension brackets
* ``escape``     -- escape-time grids and box-counting (heuristic)
* ``cli``        -- verification suites and experiment commands
"""

from .geometry import (Disk, IntervalSet, KoebeBounds, Square,
                       interval_length, koebe_bounds, koebe_verify,
                       vitali_select)
from .goodsets import (AnalyticGoodSet, GoodSet, density_lemma_check,
                       good_set, is_admissible)
from .growth import (GrowthProfile, build_profile, check_growth_bounds,
                     compute_h, compute_h_prime)
from .levels import (LevelBuild, build_levels, frostman_measure)
from .dimension import (bracket_dimension, dimension_lower,
                        dimension_upper, make_synthetic_tree)
from .offspring import (Offspring, OffspringParams, construct_offspring,
                        find_c0, verify_offspring)
from .tracts import (BranchAnchor, TractMap, TractSpec, inverse_branch,
                     make_map, zip_rate)
from .xreal import Xf, xf, xsum

__version__ = "0.1.0"

__all__ = [
    "Disk", "IntervalSet", "KoebeBounds", "Square", "interval_length",
    "koebe_bounds", "koebe_verify", "vitali_select",
    "AnalyticGoodSet", "GoodSet", "density_lemma_check", "good_set",
    "is_admissible",
    "GrowthProfile", "build_profile", "check_growth_bounds", "compute_h",
    "compute_h_prime",
    "LevelBuild", "build_levels", "frostman_measure",
    "bracket_dimension", "dimension_lower", "dimension_upper",
    "make_synthetic_tree",
    "Offspring", "OffspringParams", "construct_offspring", "find_c0",
    "verify_offspring",
    "BranchAnchor", "TractMap", "TractSpec", "inverse_branch", "make_map",
    "zip_rate",
    "Xf", "xf", "xsum",
]
