"""Friedkin-Johnsen opinion dynamics: polarization metrics, conditions and polarizing prejudices."""

from .errors import ConvergenceError, NotPolarizing, NumericalError, Unavailable, ValidationError
from .graph import (STUBBORN, SocialGraph, SusceptibilityProfile, as_opinion, build_susceptibility,
                    load_edge_list, load_karate, pagerank, read_susceptibility_file, row_normalize)
from .models import (ModelConfig, ResponseMatrix, build_response_matrix, convergence_check,
                     iterate_dynamics, map_vfj_to_gfj, steady_state)
from .metrics import MetricsBundle, ShiftReport, invariant_gap, metrics_bundle, shift_report
from .spectral import (Candidate, SpectralBasis, all_candidates, brute_force_max, candidate_b1_1,
                       candidate_b2_1, candidate_b2_t, candidate_lp_p4, candidate_subspace_qp,
                       concordance_lift, global_p23_search, heuristic_v_gt1, shift, spectral_basis)
from .conditions import (ConditionVerdict, Verdict, absolute_total_verdict, doubly_stochastic_test,
                         gfj_condition_scan, local_verdict, naive_group_limit, p1_gdi_sufficient_test,
                         vfj_rfj_condition)

__version__ = "0.1.0"
