"""Regime dispatch, accuracy budgets, and predicted sample counts.

The entropy order alpha is decomposed as alpha = 2k+1+c with 2k+1 odd
and |c| < 1; the sign of c picks the positive- or negative-power route.
Budgets translate a desired entropy accuracy eps into the accuracy
delta required of the underlying trace-functional estimate, and
predicted sample counts evaluate the protocol cost formulas with every
suppressed constant set to 1 and natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import DEFAULT_CONFIG, RuntimeConfig
from .states import StateMeta

_INT_TOL = 1e-9


@dataclass(frozen=True)
class RegimeDecomposition:
    alpha: float
    k: int
    c: float
    branch: str  # integer | odd_floor | even_floor | sub_one | von_neumann

    def __post_init__(self):
        if self.branch not in ("integer", "odd_floor", "even_floor", "sub_one", "von_neumann"):
            raise ValueError(f"unknown branch {self.branch!r}")


@dataclass(frozen=True)
class Budget:
    """delta is the accuracy required of the trace-functional estimate.

    measure_delta is the accuracy the raw ancilla statistic must reach
    to deliver delta; the two differ only below order 1, where the
    recovery multiplies the measured probability by the dimension and
    the measurement accuracy is rescaled by 1/(2 dim) (ae) or 1/(4 dim)
    (sampling).  shots always follows measure_delta.
    """

    delta: float
    shots: int
    predicted_samples: int
    formula_tag: str
    measure_delta: float = 0.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.measure_delta == 0.0:
            object.__setattr__(self, "measure_delta", self.delta)


def decompose_alpha(alpha: float) -> RegimeDecomposition:
    """Classify alpha and extract (k, c) with 2k+1 odd.

    Integer orders get c = 0; for even integers no odd 2k+1 with |c| < 1
    exists, so k is the largest with 2k+1 < alpha and the exact identity
    alpha = 2k+1+c holds for odd integers and all non-integers only.
    """
    if alpha <= 0:
        raise ValueError(f"order must be positive, got {alpha}")
    near = round(alpha)
    if abs(alpha - near) <= _INT_TOL:
        n = int(near)
        if n == 1:
            return RegimeDecomposition(alpha=alpha, k=0, c=0.0, branch="von_neumann")
        return RegimeDecomposition(alpha=alpha, k=(n - 1) // 2, c=0.0, branch="integer")
    if alpha < 1.0:
        return RegimeDecomposition(alpha=alpha, k=0, c=alpha - 1.0, branch="sub_one")
    # nearest odd integer below/above within distance 1
    k = int(math.floor((alpha - 1.0) / 2.0 + 0.5))
    c = alpha - (2 * k + 1)
    assert abs(c) < 1.0
    branch = "odd_floor" if c > 0 else "even_floor"
    return RegimeDecomposition(alpha=alpha, k=k, c=c, branch=branch)


def delta_budget(
    regime: RegimeDecomposition,
    eps: float,
    meta: StateMeta,
    method: str = "sampling",
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> Budget:
    """Trace-functional accuracy and shot count for a target entropy accuracy."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    a, r = regime.alpha, meta.rank
    if regime.branch == "integer":
        if abs(a - 2.0) <= _INT_TOL:
            delta = eps / (2.0 * r)
            tag = "integer_alpha2"
        else:
            delta = abs(1.0 - a) * eps / (2.0 * r ** (a - 1.0))
            tag = "integer"
    elif regime.branch == "sub_one":
        delta = eps * abs(1.0 - a) * meta.purity ** (a - 1.0) / 4.0
        tag = "sub_one"
    elif regime.branch == "von_neumann":
        gamma = 1.0 / (2.0 * math.log(4.0 / (math.pi * meta.rho_min)))
        delta = eps * gamma
        tag = "von_neumann"
    elif 1.0 < a <= 2.0:
        delta = eps * abs(1.0 - a) / (6.0 * r)
        tag = "fractional_1to2"
    else:
        delta = eps * abs(1.0 - a) / (6.0 * r ** (a - 1.0))
        tag = "fractional_gt2"
    measure_delta = delta
    if regime.branch == "sub_one":
        # the recovery multiplies the raw statistic by the dimension
        measure_delta = delta / (2.0 * meta.dim if method == "ae" else 4.0 * meta.dim)
    if method == "ae":
        shots = int(math.ceil(cfg.c_shots / measure_delta))
    else:
        shots = int(math.ceil(cfg.c_shots / measure_delta**2))
    predicted = predicted_samples(regime, eps, meta, d=meta.dim, method=method, cfg=cfg)
    return Budget(
        delta=delta,
        shots=shots,
        predicted_samples=predicted,
        formula_tag=tag,
        measure_delta=measure_delta,
    )


def _ln(x: float) -> float:
    """Natural log clamped to >= 1 so cost formulas stay positive."""
    return max(1.0, math.log(max(x, 1.0)))


def predicted_samples(
    regime: RegimeDecomposition,
    eps: float,
    meta: StateMeta,
    d: int,
    method: str = "sampling",
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> int:
    """Evaluate the protocol's cost formula for this regime.

    Constants are all 1 (times the configured global multiplier),
    logarithms natural and clamped at 1.  A comparison yardstick for the
    empirical ledgers, not a guarantee.
    """
    a, r = regime.alpha, meta.rank
    rmin = meta.rho_min
    p2 = meta.purity
    one = abs(1.0 - a)
    if regime.branch == "integer":
        val = a * r ** (2.0 * a - 2.0) / eps**2
    elif regime.branch == "sub_one":
        lead = d**2 / (eps**2 * one**2 * p2 ** (2.0 * (a - 1.0)) * rmin**2)
        val = lead * _ln(d / (eps * one * p2 ** (a - 1.0) * rmin)) ** 5 + math.log(d)
    elif regime.branch == "von_neumann":
        num = math.log(4.0 / (math.pi * rmin))
        den = math.log(4.0 / (math.pi * meta.rho_max))
        if method == "poly":
            val = _ln(1.0 / rmin) ** 4 / rmin**2 / eps**2 * _ln(1.0 / eps) ** 2
        else:
            val = (
                (num / den) ** 3
                / (eps**4 * rmin**2)
                * _ln(1.0 / eps) ** 4
                * _ln(2.0 * num / (eps * den)) ** 6
            )
    elif regime.branch == "odd_floor" and a <= 2.0:
        val = r**3 / (rmin**2 * eps**3) * _ln(r / (rmin * eps)) ** 5 + math.log(d)
    elif regime.branch == "odd_floor":
        t1 = r ** (3.0 * (a - 1.0)) * a**2 / (eps**3 * one**3) * _ln(a * r ** (a - 1.0) / (one * eps))
        t2 = r ** (3.0 * (a - 1.0)) / (one**3 * eps**3 * rmin**2) * _ln(r ** (a - 1.0) / (one * eps * rmin)) ** 5
        val = t1 + t2 + math.log(d)
    else:  # even_floor
        c = regime.c
        t1 = (
            a**2
            * r ** (3.0 * (a - 1.0))
            / (rmin ** (-3.0 * c) * eps**3 * one**3)
            * _ln(a * r ** (a - 1.0) / (one * eps))
        )
        t2 = (
            r ** (3.0 * (a - 1.0))
            / (eps**3 * one**3 * rmin ** (2.0 - 4.0 * c))
            * _ln(r ** (a - 1.0) / (eps * one * rmin ** (1.0 - c))) ** 5
        )
        val = t1 + t2 + math.log(d)
    return int(math.ceil(cfg.big_o_multiplier * val))


def propagate_entropy_error(delta: float, alpha: float, meta: StateMeta) -> float:
    """Entropy-error upper bound induced by a trace-functional error delta.

    Uses the rank form 2 delta r^(alpha-1)/|1-alpha| above order 2, the
    rank form 2 delta r/|1-alpha| on (1, 2], and the purity form
    2 delta / (|1-alpha| (Tr rho^2)^(alpha-1)) below order 1.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if abs(alpha - 1.0) <= _INT_TOL:
        raise ValueError("no propagation bound at order 1 (the prefactor 1/|1-alpha| diverges)")
    one = abs(1.0 - alpha)
    if alpha > 2.0:
        return 2.0 * delta * meta.rank ** (alpha - 1.0) / one
    if alpha > 1.0:
        return 2.0 * delta * meta.rank / one
    if alpha > 0.0:
        return 2.0 * delta / (one * meta.purity ** (alpha - 1.0))
    raise ValueError(f"order must be positive, got {alpha}")
