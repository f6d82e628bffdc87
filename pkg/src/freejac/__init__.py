"""Free polynomial maps on matrix tuples: formal derivatives, block jets,
derivative certificates, injectivity witnesses and inversion."""

from .domain import DomainSpec, NormBound, SpectralHalfPlane, WeightedNormSum
from .errors import (ConvergenceError, DomainUnsatisfiableError, FreeJacError,
                     IllConditionedError, ParseError, SeriesInversionError, ShapeError,
                     SingularDerivativeError, SingularPencilError, WitnessError)
from .estimators import JacobianScanner, NewtonInverter, SeriesInverter
from .invertibility import (CollisionWitness, KernelWitness, ScanReport, SeriesMap,
                            collision_from_kernel, corner_conjugation, jacobian_scan,
                            kernel_from_collision, newton_invert, series_inverse)
from .linearization import (DerivativeMatrix, SingularityCertificate, certify, derivative_matrix,
                            singularity_certificate, sylvester_solve, sylvester_unique)
from .matrixeval import (MatrixTuple, SampleConfig, direct_sum, eval_map, jet_eval,
                         sample_commuting_tuple, sample_tuple, similarity)
from .ncpoly import (BiPoly, FreePoly, FreePolyMap, compose, formal_derivative, poly_add,
                     poly_mul, truncate)
from .parser import parse_map, parse_poly, print_map, print_poly

__version__ = "0.1.0"
