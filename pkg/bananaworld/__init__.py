"""
Bananaworld Correlation Analyzer
Correlation arrays, local and no-signaling polytopes, quantum reference values
and seeded banana simulations
"""

from .constants import LIBRARY_VERSION
from .correlation_core import (CorrelationArray, Outcome, Relabeling, Setting, apply_relabeling,
                               chsh, chsh_max, chsh_values, expectation, marginals,
                               no_signaling_check, product_form_check, relabeling_orbit,
                               table, validate)
from .errors import BananaworldError
from .polytopes import (DeterministicVertex, LhvModel, MembershipResult, affine_dimension,
                        classify, enumerate_deterministic, membership, pr_boxes)
from .quantum import (BinaryMeasurement, StateVector, bell_state, born_array, klyachko_frame,
                      klyachko_sum, noncontextual_max, pbr_basis, pbr_probabilities)
from .banana_sim import (EmpiricalArray, KlyachkoBunch, PureBananaState, RandomSource,
                         empirical_array, epr_counterfactual_assignments,
                         infer_peeling_from_clone, peel_epr, peel_klyachko, peel_pure,
                         sample_lhv)
from .config import AnalyzerConfig, load_config

__version__ = LIBRARY_VERSION

__all__ = [
    'CorrelationArray', 'Setting', 'Outcome', 'Relabeling', 'table', 'validate',
    'marginals', 'no_signaling_check', 'expectation', 'chsh', 'chsh_values', 'chsh_max',
    'product_form_check', 'apply_relabeling', 'relabeling_orbit',
    'DeterministicVertex', 'LhvModel', 'MembershipResult', 'enumerate_deterministic',
    'pr_boxes', 'membership', 'affine_dimension', 'classify',
    'StateVector', 'BinaryMeasurement', 'bell_state', 'born_array', 'klyachko_frame',
    'klyachko_sum', 'noncontextual_max', 'pbr_basis', 'pbr_probabilities',
    'PureBananaState', 'RandomSource', 'KlyachkoBunch', 'EmpiricalArray', 'peel_pure',
    'peel_epr', 'peel_klyachko', 'sample_lhv', 'empirical_array',
    'infer_peeling_from_clone', 'epr_counterfactual_assignments',
    'AnalyzerConfig', 'load_config', 'BananaworldError',
]
