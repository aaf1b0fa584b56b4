"""Exact certificates lifting polynomial ODE trajectories to abnormal curves.

The pipeline: pick a polynomial vector orthogonal to the ODE, integrate it to
a polynomial first integral Q on a free Carnot group, and search for a step
in which Q divides all abnormal polynomials of a layer.  The resulting
certificate (step, covector, factors) is verified by exact rational
polynomial identities.
"""

from .hall import (CapExceededError, HallBasis, HallWord, ad_factorization,
                   compare, enumerate_hall_words, factorize, generator,
                   hall_pair, layer_dimension)
from .liealg import (AlgebraContext, ContextMismatchError, LieElement,
                     apply_ad_word, bracket, lower_central_term)
from .polyring import (InexactGradientError, Monomial, Polynomial,
                       enumerate_monomials, parse_polynomial,
                       poincare_coefficients, staircase_antiderivative)
from .abnormal import Covector, abnormal_polynomial, derive, realize_polynomial
from .integral import (PolynomialODE, derivative_family, first_integral,
                       orthogonalize, translate_ode)
from .solver import (Certificate, LinearSystem, VerificationReport,
                     build_system, concat_certificate, delta_series,
                     find_certificate, reduce_system, search_certificate,
                     solve_kernel, step_bound, verify_certificate)

__version__ = "0.1.0"
