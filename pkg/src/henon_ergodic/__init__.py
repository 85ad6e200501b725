"""Random and skew-product families of complex Henon maps.

Certified Green-function estimation, averaged Green functions, slice Green
currents, current pullback and averaging convergence experiments,
equilibrium-measure sampling, and mixing / Lyapunov / entropy estimators,
with a reproducible CLI (``henon-ergodic``).
"""

from .backend import backend_name
from .engine import (FiltrationData, GreenValue, OrbitClassification,
                     classify_point, compose_n, compute_filtration,
                     get_filtration, green_estimate, holder_exponent_bound)
from .maps import (BaseDynamics, HenonComposite, HenonFactor, HenonFamily,
                   ParameterDomain, ParameterPoint, Point2, builtin_family,
                   composite_degree, differential, eval_composite,
                   eval_composite_inverse, eval_factor, eval_factor_inverse,
                   family_at, sigma_inverse_step, sigma_step)
from .sequences import (constant_sequence, explicit_sequence, fiber_sequence,
                        iid_sequence, sigma_orbit_sequence)
from .slices import SliceMeasureField, SliceSpec, slice_laplacian_measure

__version__ = "0.1.0"
