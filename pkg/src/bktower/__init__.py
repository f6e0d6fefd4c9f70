"""Exact p-adic computations with Breuil-Kisin modules along the Frobenius tower.

The package is layered: :mod:`bktower.precision` (valuations and contexts),
:mod:`bktower.tower` (the rings 𝔖_n and S_n), :mod:`bktower.bk` and
:mod:`bktower.breuil` (modules over 𝔖 and S), :mod:`bktower.limit` (chains and
descent) and :mod:`bktower.harness` (seeded suites behind the CLI).
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .precision import (PadicCoeff, PrecisionContext, contraction_bound,  # noqa: F401
                        contraction_sequence, legendre_valuation, pd_term_valuation)
from .tower import (PDElement, SeriesElement, c0, decompose_frakS_fil,  # noqa: F401
                    decompose_keyA, fil_degree, frobenius, include_up, lambda_unit,
                    pd_canonical_form, weierstrass_divide, z_element)
from .bk import (ClassicalBK, FilteredBK, apply_phi_M, classical_to_filtered,  # noqa: F401
                 fil_membership, filtered_to_classical, mu_p_infinity, qp_zp,
                 random_filtered, validate)
from .breuil import (BreuilModule, apply_phi_breuil, base_change,  # noqa: F401
                     fil_i_membership, fil_r_membership)
from .limit import (Chain, ChainElement, check_compat, descend,  # noqa: F401
                    filr_generator_chain, generator_chain, lift, recover_filtered)
