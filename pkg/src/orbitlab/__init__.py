"""orbitlab: a numerical laboratory for circle diffeomorphism groups,
their phase-space actions, unitary representations, and the semiclassical
kernel families that connect the two pictures."""

from .manifold import (
    CutLocusError,
    GridManifold,
    ScalarField,
    VectorField,
    TangentPoint,
    CotangentPoint,
    interpolate,
    differentiate,
    integrate,
    riem_exp,
    riem_log,
)
from .lie_group import (
    NonInvertibleError,
    Diffeo,
    GroupElement,
    AlgebraElement,
    multiply,
    inverse,
    flow,
    flow_at_times,
    group_exp,
    bracket,
    adjoint,
    scale_algebra,
)
from .coadjoint import (
    CovectorPoint,
    PhaseTangent,
    cotangent_action,
    moment_pairing,
    coadjoint_action,
    derived_action,
    symplectic_form,
)
from .quantization import (
    InvalidParameter,
    L2Operator,
    PointwiseOperator,
    radon_nikodym,
    unitary_rep,
    quantize_affine,
    l2_inner,
    l2_norm,
    operator_trace,
)
from .induction import InducedVector, lift, descend, translate_descend
from .groupoid import (
    GridMismatchError,
    SupportOverflowError,
    FiberGrid,
    FiberSymbol,
    PhaseSymbol,
    TangentGroupoidPoint,
    fiber_fourier,
    fiber_fourier_inv,
    pair_convolve,
    fiber_convolve,
    deformation_chart,
    deformation_chart_inverse,
    haar_integral,
    DiffeoFamily,
    extend_diffeo,
    extend_scalar,
)
from .semiclassics import (
    ConvergenceReport,
    GroupoidFamily,
    groupoid_quantize,
    perturb_family,
    dequantize,
    trace_functional,
    character_pairing,
    centralizer_apply,
    covariant_conjugate,
    symbol_transport,
)
from .config import ConfigError, UnknownSuiteError, ExperimentConfig, load_config
from .suites import run_suite, coverage_table

__version__ = "0.1.0"
