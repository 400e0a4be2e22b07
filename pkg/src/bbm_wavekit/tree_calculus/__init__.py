"""Binary trees, admissible orders, exact iterated integrals and paired diagrams."""
from .expoly import ExpPoly
from .trees import (OrderedTree, enumerate_trees, admissible_orders, paired_trees,
                    f_sigma_exact, f_tree_total)
from .resonance import NonResonanceCertificate, CertificateError, certify_window, is_resonant_pair
from .diagrams import g_sigma, u_sigma, comb_identity_check
