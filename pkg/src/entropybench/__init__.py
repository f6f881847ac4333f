"""Desk-scale simulator for entropy estimation from copies of a quantum state.

The library builds block encodings of a density matrix, transforms them
with certified Chebyshev polynomials (powers and logarithms), simulates
the ancilla measurement statistics each protocol induces, and accounts
for every copy of the state a physical run would consume.  An exact
spectral oracle validates all of it.
"""

from .accountant import (
    Budget,
    RegimeDecomposition,
    decompose_alpha,
    delta_budget,
    predicted_samples,
    propagate_entropy_error,
)
from .blockenc import (
    BlockEncoding,
    DilatedUnitary,
    be_power,
    be_product,
    dilate,
    encode_density,
    purified_encode,
    rescale,
)
from .config import DEFAULT_CONFIG, TOL, RuntimeConfig, Tolerances
from .estimators import (
    EstimateReport,
    EstimationFailure,
    MeasurementModel,
    estimate,
    ideal_p0_case1,
    ideal_p0_case2,
    ideal_p0_sub_one,
    measure_p0,
    min_eig_estimate,
    renyi_case_even,
    renyi_case_odd,
    renyi_integer,
    renyi_sub_one,
    vn_poly,
    vn_qsvt,
)
from .numkernel import HermMatrix, Spectrum, hermitian_eig, mat_fun, op_norm, op_norm_dist
from .qsvtpoly import (
    MonomialPoly,
    PolyApprox,
    apply_poly,
    approx_log,
    approx_neg_power,
    approx_pos_power,
    cheb_fit,
    to_monomial,
)
from .states import (
    DensityMatrix,
    StateMeta,
    density_from_text,
    density_to_text,
    exact_entropies,
    from_spectrum,
    purify_maximally_mixed,
    random_density,
)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "RegimeDecomposition",
    "decompose_alpha",
    "delta_budget",
    "predicted_samples",
    "propagate_entropy_error",
    "BlockEncoding",
    "DilatedUnitary",
    "be_power",
    "be_product",
    "dilate",
    "encode_density",
    "purified_encode",
    "rescale",
    "DEFAULT_CONFIG",
    "TOL",
    "RuntimeConfig",
    "Tolerances",
    "EstimateReport",
    "EstimationFailure",
    "MeasurementModel",
    "estimate",
    "ideal_p0_case1",
    "ideal_p0_case2",
    "ideal_p0_sub_one",
    "measure_p0",
    "min_eig_estimate",
    "renyi_case_even",
    "renyi_case_odd",
    "renyi_integer",
    "renyi_sub_one",
    "vn_poly",
    "vn_qsvt",
    "HermMatrix",
    "Spectrum",
    "hermitian_eig",
    "mat_fun",
    "op_norm",
    "op_norm_dist",
    "MonomialPoly",
    "PolyApprox",
    "apply_poly",
    "approx_log",
    "approx_neg_power",
    "approx_pos_power",
    "cheb_fit",
    "to_monomial",
    "DensityMatrix",
    "StateMeta",
    "density_from_text",
    "density_to_text",
    "exact_entropies",
    "from_spectrum",
    "purify_maximally_mixed",
    "random_density",
]
