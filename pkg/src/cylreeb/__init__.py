"""Exact Poincare-Reeb digraphs of regions bounded by circle-cylinders, and
explicit arrangements realizing balanced-tree digraphs."""

from .arrangement import Arrangement, CircleConstraint, Side, contains, events, slice_coord
from .digraph import BalancedTreeSpec, LeveledDigraph, balanced_tree, leveled_isomorphic, target_theorem1, target_theorem2
from .numeric import Surd, compare, solve_quadratic, sqrt_exact
from .sweep import reeb, region_extent
from .synthesis import TheoremInstance, lower_bound_radius, synthesize
from .validate import ra_region, transversality, verify_theorem

__all__ = [
    "Arrangement", "CircleConstraint", "Side", "contains", "events", "slice_coord",
    "BalancedTreeSpec", "LeveledDigraph", "balanced_tree", "leveled_isomorphic", "target_theorem1", "target_theorem2",
    "Surd", "compare", "solve_quadratic", "sqrt_exact",
    "reeb", "region_extent",
    "TheoremInstance", "lower_bound_radius", "synthesize",
    "ra_region", "transversality", "verify_theorem",
]
__version__ = "0.1.0"
