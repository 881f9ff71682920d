"""Desk-scale verification toolkit for communication lower bounds over F_p.

Exact finite-field linear algebra and counting, Fourier analysis on
F_p^N with witness certificates for the approximate Fourier l1 norm, the
rank / inverse / linear-system reduction protocols, and the multi-player
symmetrization framework with uniformizing families.
"""

__version__ = "0.1.0"

from .fields import (FpMatrix, FpVector, PrimeField, RankCensus,  # noqa: F401
                     count_rank_matrices, gaussian_binomial, mat_inverse,
                     mat_rank, random_invertible, random_of_rank,
                     rank_ratio_alpha, solve_linear)
from .fourier import (FourierTable, GroupFunction, PartialSignFunction,  # noqa: F401
                      SpectrumReport, dft, idft_roundtrip, theta,
                      theta_hat_closed, verify_spectrum)
from .witness import (ApproxNormLP, BoundReport, WitnessCertificate,  # noqa: F401
                      approx_fourier_l1_exact, comm_bound_main_term, dual_bound,
                      rank_bound_constant, rank_witness_bound)
