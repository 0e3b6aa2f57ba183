from .polynomial import Monomial, PolyFn
from .pluri_basis import BasisEntry, BasisKind, PluriBasis
from .quadrature import GridQuadrature
from .basis_tables import BasisTables
from .contact_state import ContactState
from .operator_matrix import InnerProduct, OperatorMatrix
from .spectral_sequence import SpectralSequence, ZetaResult
from .functional_report import FunctionalReport
from .feasibility_report import CoercivityAudit, FeasibilityReport
from .ascent_trace import AscentIterate, AscentTrace
from .variation_defects import VariationDefects
from .synthetic_model import SyntheticModel
from .run_config import RunConfig
from .suite_result import SuiteResult
