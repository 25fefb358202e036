"""varmeas: a desk-scale laboratory for convergence of integrals under
varying measures — signed measures on finite atom spaces, certified sequence
families, uniform-integrability checkers, set-valued (support-function)
integration, gauge (McShane) integration, and a reproducible campaign CLI.
"""

from .convex_geom import DirectionGrid, Polytope, SupportVector, default_grid, hausdorff, minkowski_combine, radstrom_embed, support
from .families import DecayCertificate, FunctionFamily, MeasureFamily, MultiFamily, convex_mix, mass_escape_family, rademacher_family, vacuous_uac_family
from .integrability import UacCertificate, UiCurve, check_p4_equivalence, check_uac, check_ui, domination_transfer, signed_vitali, vitali_limit, worst_set_integral
from .kernels import active_backend
from .mcshane import DensityMeasure, Gauge, StepFn, TaggedPartition, check_equi_integrable, check_thmc_multivalued, check_thmcsequi, ms_integral, riemann_sum, subordinate_partition
from .measure_core import AtomFunction, AtomSpace, HahnSplit, JordanPair, MeasurableSet, SignedMeasure, hahn, integrate, jordan, sup_set_gap, total_variation_distance
from .reports import HypothesisResult, TheoremReport
from .setvalued_integral import MultiMap, SetIntegral, check_equiconvergence, check_thmulti, check_thmulti2, check_uac_scalar, pettis_integral, scalar_integrand

__version__ = "0.1.0"
