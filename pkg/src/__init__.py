"""
Exact cohomology engine for rational cut-and-project tilings.
"""

from .arrangement import Arrangement, close_arrangement, counts, intersect_classes
from .catalog import builtin_scheme, scheme_names
from .cohomology import CohomologyResult, fhk_cohomology, k_theory
from .exact_linalg import AbelianGroup, hnf, snf
from .scheme import SchemeSpec, SingularFamily, load_scheme, save_scheme, validate_rationality
from .torus_mv import alpha_assembly, build_e1, homology_of_A, mv_cohomology, route_crosscheck

__all__ = [
    'AbelianGroup', 'Arrangement', 'CohomologyResult', 'SchemeSpec', 'SingularFamily',
    'alpha_assembly', 'build_e1', 'builtin_scheme', 'close_arrangement', 'counts',
    'fhk_cohomology', 'hnf', 'homology_of_A', 'intersect_classes', 'k_theory',
    'load_scheme', 'mv_cohomology', 'route_crosscheck', 'save_scheme', 'scheme_names',
    'snf', 'validate_rationality',
]
