"""bach3: verification engine for 3-dimensional electrostatic systems.

Given a metric, lapse, electric field and cosmological constant on a
coordinate chart, the engine evaluates the full curvature stack (through the
Bach tensor and its divergences), measures every identity of the field
equations pointwise, and validates a catalog of exact solutions.
"""

__version__ = "0.1.0"

from .catalog import (SolutionSpec, build_solution, horizon_roots,
                      lapse_polynomial, normalize_spec, verify_solution)
from .curvature import (BachDivergences, CottonPack, CurvatureFrame, CurvaturePack,
                        bach, bach_divergences, christoffel, cotton,
                        cotton_invariant_defects, curvature_stack,
                        covariant_derivative, riemann_decomposition_defect)
from .diff import AD, FD, DiffConfig, derive_scalar, field_jets
from .electro import (ElectroFrame, ElectrostaticSystem, LDProfile, ResidualBundle,
                      combined_hessian_residual, cotton_form_defect,
                      electro_cotton_form, ld_form_check, ld_profile,
                      ld_wedge_defect, residual_suite)
from .errors import *  # noqa: F401,F403 -- the error module defines __all__-safe names
from .fields import (Chart, MetricField, ScalarField, TensorComponents, TensorField,
                     VectorField, eval_metric, euclidean_chart,
                     exterior_derivative_oneform, index_adjust, tensor_norm)
from .jets import Jet, cos, cosh, exp, jet_space, log, sin, sinh, sqrt, tan, tanh
from .report import ResidualReport, ToleranceProfile
from .warped import (LevelSetData, WarpedSpec, level_set_data, mean_curvature_formula,
                     rho_squared_reconstruct, ricci_eigenframe, warp_build,
                     warped_curvature_check)
