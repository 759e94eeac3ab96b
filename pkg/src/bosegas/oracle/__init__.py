"""Exact diagonalization on capped Fock spaces, used as ground truth."""

from .fock import (FockSector, FockSpace, GroundState, SpectralData, count_states, diagonalize,
                   grand_canonical_check, ground_and_ies, interaction_terms, restrict, substitute_mode)
from .inequalities import (INEQUALITY_NAMES, inequality_toolkit, random_operator,
                           symmetry_breaking_run)
from .response import (Reference, bijls_feynman, f_sum_check, green_matrix, green_symmetries,
                       structure_and_susceptibility, van_hove_formfactor)
from .symmetry import boost_and_periodicity, twisted_boundary
from .transform import rotation_identities, verify_bogoliubov_transform
