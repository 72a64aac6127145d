"""Phase-space (P, Q, Weyl) symbols for spin-j operators."""

__version__ = "0.1.0"

from .spin import (
    Direction,
    IncompatibleSpinError,
    Spin,
    coherent_ket,
    expectation,
    overlap_sq,
    spin_matrices,
)
from .sphere import (
    GridDegreeError,
    SphereGrid,
    SymbolField,
    eval_ylm,
    integrate,
    legendre_p,
    poisson_sphere,
    product_grid,
    quadrature_grid,
    tangential_gradient,
)
from .tensor import TensorDecomposition, adjoint_check, decompose, reconstruct, tensor_op
from .symbols import (
    SymbolCoefficients,
    SymbolKind,
    asymptotic_ratio,
    coeff_a,
    coeff_K,
    convert,
    eval_on_grid,
    eval_symbol,
    sharpen_q_to_p,
    smooth_p_to_q,
    symbol_of,
    wigner_function,
)
from .moyal import (
    ScalingStudy,
    anticommutator_symbol,
    bracket_scan,
    commutator_symbol,
    identity_kernel,
    moyal_exact,
    moyal_leading,
    operator_from_symbol,
    sw_kernel,
    trikernel,
)
from .expr import ParseError, StateSpecError, eval_operator, parse_operator, parse_state
