"""Entropy estimation pipelines driven by block encodings and ancilla statistics.

Every estimator follows the same skeleton: build the branch-appropriate
transformed encoding A of the state, read off the exact ancilla-outcome
probability p0 = Tr(A rho A) it induces, simulate the measurement of p0
at the budgeted accuracy, and invert the branch's closed-form relation
between p0 and the entropy.  Reports carry the realized and exact p0,
the certified operator-error ledger, a p0-level deviation bound, and the
copy-count bookkeeping.

Modes: "ideal" uses noiseless encodings, tight fits, and the exact p0
(isolating formula correctness); "noisy" injects encoding noise at the
budget and draws shot statistics.  The blind flag additionally replaces
oracle spectral inputs (rank, purity, smallest eigenvalue) with
estimates obtained through the protocols themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .accountant import Budget, decompose_alpha, delta_budget
from .blockenc import (
    BlockEncoding,
    be_power,
    be_product,
    encode_density,
    encode_state_side,
    rescale,
)
from .config import DEFAULT_CONFIG, TOL, RuntimeConfig
from .numkernel import op_norm
from .qsvtpoly import apply_poly, approx_log, approx_neg_power, approx_pos_power, to_monomial
from .states import DensityMatrix, StateMeta, exact_entropies

LOG_PI_OVER_4 = math.log(math.pi / 4.0)


class EstimationFailure(RuntimeError):
    """A statistical outcome made the recovery formula undefined."""


@dataclass(frozen=True)
class MeasurementModel:
    """Ancilla-outcome probability plus the measurement mechanism."""

    p0: float
    mode: str = "bernoulli"  # or "amplitude_estimation"
    cost_per_query: int = 1

    def __post_init__(self):
        if self.mode not in ("bernoulli", "amplitude_estimation"):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        if not (-1e-12 <= self.p0 <= 1.0 + 1e-12):
            raise ValueError(f"probability {self.p0!r} outside [0, 1]")
        object.__setattr__(self, "p0", float(min(1.0, max(0.0, self.p0))))


def shots_for(mode: str, delta: float, cfg: RuntimeConfig = DEFAULT_CONFIG) -> int:
    if mode == "amplitude_estimation":
        return int(math.ceil(cfg.c_shots / delta))
    return int(math.ceil(cfg.c_shots / delta**2))


def measure_p0(
    model: MeasurementModel,
    delta: float,
    seed: int,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> float:
    """Simulated estimate of p0 at accuracy parameter delta.

    Bernoulli mode draws ceil(c_shots/delta^2) coin flips (one binomial
    variate, identical in law); the amplitude-estimation model returns
    p0 plus uniform noise in [-delta, delta] at ceil(c_shots/delta)
    query cost.  Deterministic per seed.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"accuracy parameter must be in (0, 1), got {delta}")
    rng = np.random.default_rng(seed)
    n = shots_for(model.mode, delta, cfg)
    if model.mode == "bernoulli":
        return float(rng.binomial(n, model.p0) / n)
    return float(model.p0 + rng.uniform(-delta, delta))


@dataclass(frozen=True)
class EstimateReport:
    quantity_tag: str  # "S_alpha" | "S_v"
    estimate: float
    target_eps: float
    shots_used: int
    sample_cost_total: int
    method: str
    seed: int
    predicted_budget: int
    alpha: float
    branch: str
    delta: float
    exact_value: Optional[float] = None
    within_eps: Optional[bool] = None
    # the shot-sampled estimate actually inverted into the entropy
    p0_measured: Optional[float] = None
    # exact ancilla probability of the realized (possibly noisy) operator
    p0_realized: Optional[float] = None
    # exact ancilla probability of the ideal operator chain
    p0_operator_exact: Optional[float] = None
    eta_operator: float = 0.0
    # certified bound on |p0_realized - p0_operator_exact|
    p0_error_bound: float = 0.0
    rho_min_used: Optional[float] = None
    sensitivity_rho_min: Optional[float] = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.shots_used < 1:
            raise ValueError("shots_used must be >= 1")


@dataclass(frozen=True)
class MinEigResult:
    estimate: float  # of (pi/4) * rho_min
    rho_min: float
    sample_cost: int


def _child_seeds(seed: int, n: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1)[0]) for child in ss.spawn(n)]


def _op_norm_cap(h) -> float:
    """Cheap upper bound on the operator norm: cached spectrum if present,
    else min(1 + slack, Frobenius norm); corners never exceed 1."""
    if "spec" in h._cache:
        return op_norm(h)
    return min(1.0 + TOL.encoding_norm_slack, float(np.linalg.norm(h.mat)))


def _p0_pair(be: BlockEncoding, rho_mat: np.ndarray) -> tuple[float, float, float]:
    """(realized p0, exact-operator p0, certified deviation bound).

    |Tr(E rho E) - Tr(T rho T)| <= ||E - T|| (||E|| + ||T||) Tr rho, so
    the p0-level ledger is eta times the summed norm caps.
    """
    e = be.encoded.mat
    t = be.target.mat
    p_noisy = float(np.real(np.trace(e @ rho_mat @ e)))
    p_exact = float(np.real(np.trace(t @ rho_mat @ t)))
    bound = be.eta * (_op_norm_cap(be.encoded) + _op_norm_cap(be.target))
    return min(1.0, max(0.0, p_noisy)), min(1.0, max(0.0, p_exact)), bound


def _poly_budget(delta: float, cfg: RuntimeConfig, mode: str) -> float:
    if mode == "ideal":
        return cfg.ideal_poly_eps
    return min(delta, 0.4)


def _clamp_encoding_budget(x: float) -> float:
    return float(min(0.5, max(1e-300, x)))


def min_eig_estimate(
    be: BlockEncoding,
    theta: float,
    seed: int = 0,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> MinEigResult:
    """Smallest nonzero eigenvalue of the encoded block, up to additive theta.

    theta = 0 returns the exact value at zero ledger cost; otherwise
    seeded uniform noise in [-theta, theta] is added, the result clamped
    positive, and the ledger charged (T_A/theta)(ln(1/theta) + ln(d)/2).
    Eigenvalues within the encoding's own error budget of zero are
    treated as kernel directions, not as the minimum.
    """
    if not (0.0 <= theta < 1.0):
        raise ValueError(f"accuracy must be in [0, 1), got {theta}")
    eigs = be.encoded.spectrum.eigenvalues
    cutoff = max(TOL.rank_cutoff, be.eta + TOL.rank_cutoff)
    nz = eigs[eigs > cutoff]
    if nz.size == 0:
        raise ValueError("encoded block has no eigenvalue above its error budget")
    val = float(nz[-1])
    cost = 0
    if theta > 0.0:
        rng = np.random.default_rng(seed)
        val = val + float(rng.uniform(-theta, theta))
        val = max(val, TOL.rank_cutoff)
        d = be.dim
        cost = int(math.ceil((be.sample_cost / theta) * (math.log(1.0 / theta) + math.log(d) / 2.0)))
    return MinEigResult(estimate=val, rho_min=min(1.0, val * 4.0 / math.pi), sample_cost=cost)


def ideal_p0_case1(rho: DensityMatrix, k: int, c: float) -> float:
    """Closed-form ancilla probability for the positive-power route.

    (pi/4)^(alpha-1) * Tr rho^alpha with alpha = 2k+1+c.
    """
    alpha = 2 * k + 1 + c
    if alpha <= 0:
        raise ValueError("order must be positive")
    t = exact_entropies(rho, alpha).tr_pow_alpha if alpha != 1 else 1.0
    return (math.pi / 4.0) ** (alpha - 1.0) * t


def ideal_p0_case2(rho: DensityMatrix, k: int, c: float, assume_support: bool = False) -> float:
    """Closed-form ancilla probability for the negative-power route.

    (1/4) (pi/4)^(2k) (1/rho_min)^c * Tr rho^alpha with alpha = 2k+1+c.
    Rank-deficient states are rejected unless the caller vouches for a
    support restriction (negative powers are undefined at 0).
    """
    alpha = 2 * k + 1 + c
    if alpha <= 0:
        raise ValueError("order must be positive")
    meta = rho.meta
    if meta.rank < rho.dim and not assume_support:
        raise ValueError(
            "state is rank deficient; project onto its support before taking negative powers"
        )
    t = exact_entropies(rho, alpha).tr_pow_alpha if alpha != 1 else 1.0
    return 0.25 * (math.pi / 4.0) ** (2 * k) * meta.rho_min ** (-c) * t


def ideal_p0_sub_one(rho: DensityMatrix, alpha: float) -> float:
    """Closed-form ancilla probability for orders below one.

    pi^alpha / (4^(alpha+1) * d) * Tr rho^alpha, the outcome of hitting
    the maximally mixed input with the half-power transform.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"order must be in (0, 1), got {alpha}")
    t = exact_entropies(rho, alpha).tr_pow_alpha
    return math.pi**alpha / (4.0 ** (alpha + 1.0) * rho.dim) * t


@dataclass
class _Inputs:
    """Spectral inputs a run uses: oracle values or blind estimates."""

    meta: StateMeta
    rho_min_lower: float
    extra_cost: int = 0
    flags: tuple[str, ...] = ()


def _estimate_purity(rho: DensityMatrix, seed: int, cfg: RuntimeConfig, delta: float = 0.05) -> tuple[float, int]:
    """Preliminary order-2 trace estimate used by blind budgets."""
    t2 = rho.meta.purity
    n = shots_for("bernoulli", delta, cfg)
    rng = np.random.default_rng(seed)
    t2_hat = 2.0 * rng.binomial(n, (1.0 + t2) / 2.0) / n - 1.0
    return float(min(1.0, max(t2_hat, 1.0 / rho.dim))), 2 * n


def _gather_inputs(
    rho: DensityMatrix,
    blind: bool,
    mode: str,
    seed: int,
    cfg: RuntimeConfig,
    need_rho_min: bool = True,
) -> _Inputs:
    meta = rho.meta
    if not blind:
        return _Inputs(meta=meta, rho_min_lower=meta.rho_min)
    s_pur, s_min, s_enc = _child_seeds(seed, 3)
    t2_hat, cost = _estimate_purity(rho, s_pur, cfg)
    r_hat = max(1, min(rho.dim, int(math.ceil(1.0 / t2_hat - 1e-9))))
    flags = ["blind_rank", "blind_purity"]
    rho_min_lower = meta.rho_min
    if need_rho_min:
        probe = encode_density(rho, 0.01, s_enc, noiseless=(mode == "ideal"), cfg=cfg)
        res = min_eig_estimate(probe, cfg.blind_theta, s_min, cfg)
        rho_min_lower = max((res.estimate - cfg.blind_theta) * 4.0 / math.pi, 1e-4)
        cost += probe.sample_cost + res.sample_cost
        flags.append("blind_rho_min")
    blind_meta = StateMeta(
        rank=r_hat,
        rho_min=min(rho_min_lower, 1.0),
        rho_max=1.0,
        purity=t2_hat,
        dim=rho.dim,
    )
    return _Inputs(meta=blind_meta, rho_min_lower=rho_min_lower, extra_cost=cost, flags=tuple(flags))


def _finish(
    *,
    quantity: str,
    estimate: float,
    eps: float,
    budget: Budget,
    shots: int,
    ledger: int,
    method: str,
    seed: int,
    alpha: float,
    branch: str,
    exact: Optional[float],
    p0_measured: Optional[float] = None,
    p0_pair: Optional[tuple[float, float, float]] = None,
    eta: float = 0.0,
    rho_min_used: Optional[float] = None,
    sensitivity: Optional[float] = None,
    flags: tuple[str, ...] = (),
) -> EstimateReport:
    within = None if exact is None else bool(abs(estimate - exact) <= eps)
    p0r = p0e = None
    bound = 0.0
    if p0_pair is not None:
        p0r, p0e, bound = p0_pair
    return EstimateReport(
        quantity_tag=quantity,
        estimate=float(estimate),
        target_eps=eps,
        shots_used=shots,
        sample_cost_total=int(ledger),
        method=method,
        seed=seed,
        predicted_budget=budget.predicted_samples,
        alpha=alpha,
        branch=branch,
        delta=budget.delta,
        exact_value=exact,
        within_eps=within,
        p0_measured=p0_measured,
        p0_realized=p0r,
        p0_operator_exact=p0e,
        eta_operator=eta,
        p0_error_bound=bound,
        rho_min_used=rho_min_used,
        sensitivity_rho_min=sensitivity,
        flags=flags,
    )


def renyi_integer(
    rho: DensityMatrix,
    alpha: int,
    eps: float,
    seed: int = 0,
    mode: str = "noisy",
    blind: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Integer-order estimate from joint measurements on alpha copies.

    Simulated as a Bernoulli source with success probability
    (1 + Tr rho^alpha)/2, the ancilla statistics of a controlled cyclic
    shift across alpha copies; each shot consumes alpha copies.
    """
    if int(alpha) != alpha or alpha < 2:
        raise ValueError(f"order must be an integer >= 2, got {alpha}")
    alpha = int(alpha)
    s_in, s_meas = _child_seeds(seed, 2)
    inputs = _gather_inputs(rho, blind, mode, s_in, cfg, need_rho_min=False)
    regime = decompose_alpha(float(alpha))
    budget = delta_budget(regime, eps, inputs.meta, cfg=cfg)
    oracle = exact_entropies(rho, float(alpha))
    p = (1.0 + oracle.tr_pow_alpha) / 2.0
    if mode == "ideal":
        p_hat = p
    else:
        p_hat = measure_p0(MeasurementModel(p0=p, cost_per_query=alpha), budget.delta, s_meas, cfg)
    t_hat = 2.0 * p_hat - 1.0
    if t_hat <= 0.0:
        raise EstimationFailure(
            f"trace-power estimate {t_hat:.3e} is not positive; "
            "increase the shot budget (smaller eps or larger c_shots)"
        )
    estimate = math.log(t_hat) / (1.0 - alpha)
    ledger = alpha * budget.shots + inputs.extra_cost
    return _finish(
        quantity="S_alpha",
        estimate=estimate,
        eps=eps,
        budget=budget,
        shots=budget.shots,
        ledger=ledger,
        method="integer",
        seed=seed,
        alpha=float(alpha),
        branch=regime.branch,
        exact=oracle.entropy,
        p0_measured=p_hat,
        p0_pair=(p, p, 0.0),
        flags=inputs.flags,
    )


def _build_case_odd(
    rho: DensityMatrix,
    k: int,
    c: float,
    delta: float,
    poly_eps: float,
    rho_min_lower: float,
    seed: int,
    noiseless: bool,
    cfg: RuntimeConfig,
) -> BlockEncoding:
    """Encoding of ((pi/4) rho)^(k + c/2), subnormalization folded out."""
    kappa = 4.0 / (math.pi * rho_min_lower)
    fit = approx_pos_power(c / 2.0, kappa, poly_eps, cfg)
    s_pos, s_pow = _child_seeds(seed, 2)
    enc_budget = _clamp_encoding_budget(min(fit.input_precision, delta))
    branch = apply_poly(encode_density(rho, enc_budget, s_pos, noiseless, cfg), fit)
    branch = rescale(branch, 2.0)
    if k == 0:
        return branch
    powers = be_power(rho, k, _clamp_encoding_budget(delta / k), s_pow, noiseless, cfg)
    return be_product(powers, branch)


def renyi_case_odd(
    rho: DensityMatrix,
    alpha: float,
    eps: float,
    mode: str = "noisy",
    seed: int = 0,
    blind: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Fractional order with odd floor: positive-power route.

    Decomposes alpha = 2k+1+c with c > 0, realizes ((pi/4) rho)^(k+c/2),
    measures p0 = (pi/4)^(alpha-1) Tr rho^alpha on the ancilla, and
    recovers S_alpha = [log(p0 * pi/4) - alpha log(pi/4)] / (1 - alpha).
    """
    regime = decompose_alpha(alpha)
    if regime.branch != "odd_floor":
        raise ValueError(f"order {alpha} is not fractional with odd floor")
    s_in, s_build, s_meas = _child_seeds(seed, 3)
    inputs = _gather_inputs(rho, blind, mode, s_in, cfg)
    budget = delta_budget(regime, eps, inputs.meta, cfg=cfg)
    be = _build_case_odd(
        rho,
        regime.k,
        regime.c,
        budget.delta,
        _poly_budget(budget.delta, cfg, mode),
        inputs.rho_min_lower,
        s_build,
        noiseless=(mode == "ideal"),
        cfg=cfg,
    )
    pair = _p0_pair(be, rho.matrix.mat)
    p0_hat = pair[0] if mode == "ideal" else measure_p0(MeasurementModel(p0=pair[0]), budget.delta, s_meas, cfg)
    if p0_hat <= 0.0:
        raise EstimationFailure("measured ancilla probability is zero; increase the shot budget")
    estimate = (math.log(p0_hat * math.pi / 4.0) - alpha * LOG_PI_OVER_4) / (1.0 - alpha)
    oracle = exact_entropies(rho, alpha)
    return _finish(
        quantity="S_alpha",
        estimate=estimate,
        eps=eps,
        budget=budget,
        shots=budget.shots,
        ledger=be.sample_cost + budget.shots + inputs.extra_cost,
        method="odd_floor",
        seed=seed,
        alpha=alpha,
        branch=regime.branch,
        exact=oracle.entropy,
        p0_measured=p0_hat,
        p0_pair=pair,
        eta=be.eta,
        rho_min_used=inputs.rho_min_lower,
        flags=inputs.flags,
    )


def renyi_case_even(
    rho: DensityMatrix,
    alpha: float,
    eps: float,
    mode: str = "noisy",
    seed: int = 0,
    blind: bool = False,
    support_projection: bool = True,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Fractional order above 2 with even floor: negative-power route.

    Decomposes alpha = 2k+1+c with c < 0 and realizes
    (1/2) (pi/4)^k (1/rho_min)^(c/2) rho^(k+c/2); the ancilla gives
    p0 = (1/4) (pi/4)^(2k) (1/rho_min)^c Tr rho^alpha, inverted with the
    same rho_min the construction used (its exact division is what makes
    the recovery self-consistent; the report carries the sensitivity).
    """
    regime = decompose_alpha(alpha)
    if regime.branch != "even_floor":
        raise ValueError(f"order {alpha} is not fractional above 2 with even floor")
    work = rho
    if rho.meta.rank < rho.dim:
        if not support_projection:
            raise ValueError(
                "state is rank deficient and support projection is disabled; "
                "negative powers are undefined at eigenvalue 0"
            )
        work = rho.project_to_support()
    s_in, s_side, s_pow, s_meas = _child_seeds(seed, 4)
    inputs = _gather_inputs(work, blind, mode, s_in, cfg)
    budget = delta_budget(regime, eps, inputs.meta, cfg=cfg)
    delta = budget.delta
    poly_eps = _poly_budget(delta, cfg, mode)
    k, c = regime.k, regime.c
    noiseless = mode == "ideal"

    kappa = 1.0 / inputs.rho_min_lower
    fit = approx_neg_power(abs(c) / 2.0, kappa, poly_eps, cfg)
    enc_budget = _clamp_encoding_budget(min(fit.input_precision, delta))
    neg_branch = apply_poly(encode_state_side(work, enc_budget, s_side, noiseless, cfg), fit)
    powers = be_power(work, k, _clamp_encoding_budget(delta / k), s_pow, noiseless, cfg)
    be = be_product(powers, neg_branch)

    pair = _p0_pair(be, work.matrix.mat)
    p0_hat = pair[0] if mode == "ideal" else measure_p0(MeasurementModel(p0=pair[0]), delta, s_meas, cfg)
    if p0_hat <= 0.0:
        raise EstimationFailure("measured ancilla probability is zero; increase the shot budget")
    rho_min_used = 1.0 / kappa
    prefactor = 0.25 * (math.pi / 4.0) ** (2 * k) * rho_min_used ** (-c)
    estimate = (math.log(p0_hat) - math.log(prefactor)) / (1.0 - alpha)
    oracle = exact_entropies(work, alpha)
    return _finish(
        quantity="S_alpha",
        estimate=estimate,
        eps=eps,
        budget=budget,
        shots=budget.shots,
        ledger=be.sample_cost + budget.shots + inputs.extra_cost,
        method="even_floor",
        seed=seed,
        alpha=alpha,
        branch=regime.branch,
        exact=oracle.entropy,
        p0_measured=p0_hat,
        p0_pair=pair,
        eta=be.eta,
        rho_min_used=rho_min_used,
        sensitivity=c / ((1.0 - alpha) * rho_min_used),
        flags=inputs.flags,
    )


def renyi_sub_one(
    rho: DensityMatrix,
    alpha: float,
    eps: float,
    method: str = "sampling",
    mode: str = "noisy",
    seed: int = 0,
    blind: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Order in (0, 1): half-power transform against the maximally mixed input.

    sampling: realize (1/2)((pi/4) rho)^(alpha/2), feed I/d, measure
    p0 = pi^alpha/(4^(alpha+1) d) Tr rho^alpha by Bernoulli sampling.
    ae: realize (1/2)((pi/4) rho)^alpha, estimate its overlap with the
    maximally entangled purification to additive delta at ~1/delta query
    cost (d must be a power of 2 for that preparation).
    """
    regime = decompose_alpha(alpha)
    if regime.branch != "sub_one":
        raise ValueError(f"order {alpha} is not in (0, 1)")
    if method not in ("sampling", "ae"):
        raise ValueError(f"unknown method {method!r}")
    d = rho.dim
    if method == "ae" and 2 ** int(round(math.log2(d))) != d:
        raise ValueError(f"amplitude-estimation route needs a power-of-2 dimension, got {d}")
    s_in, s_build, s_meas = _child_seeds(seed, 3)
    inputs = _gather_inputs(rho, blind, mode, s_in, cfg)
    flags = inputs.flags
    if blind:
        flags = flags + ("budget_from_estimated_purity",)
    budget = delta_budget(regime, eps, inputs.meta, method=method if method == "ae" else "sampling", cfg=cfg)
    delta_meas = budget.measure_delta  # dimension-rescaled: the recovery scales by d
    poly_eps = _poly_budget(delta_meas, cfg, mode)
    noiseless = mode == "ideal"
    kappa = 4.0 / (math.pi * inputs.rho_min_lower)

    exponent = alpha / 2.0 if method == "sampling" else alpha
    fit = approx_pos_power(exponent, kappa, poly_eps, cfg)
    enc_budget = _clamp_encoding_budget(min(fit.input_precision, delta_meas))
    be = apply_poly(encode_density(rho, enc_budget, s_build, noiseless, cfg), fit)

    mixed = np.eye(d, dtype=np.complex128) / d
    if method == "sampling":
        pair = _p0_pair(be, mixed)
        mm = MeasurementModel(p0=pair[0])
        p0_hat = pair[0] if mode == "ideal" else measure_p0(mm, delta_meas, s_meas, cfg)
        if p0_hat <= 0.0:
            raise EstimationFailure("measured ancilla probability is zero; increase the shot budget")
        tr_quarter = 4.0 * d * p0_hat  # Tr ((pi/4) rho)^alpha
    else:
        q_noisy = min(1.0, max(0.0, float(np.real(np.trace(be.encoded.mat @ mixed)))))
        q_exact = float(np.real(np.trace(be.target.mat @ mixed)))
        pair = (q_noisy, q_exact, be.eta)
        mm = MeasurementModel(p0=q_noisy, mode="amplitude_estimation")
        p0_hat = q_noisy if mode == "ideal" else measure_p0(mm, delta_meas, s_meas, cfg)
        if p0_hat <= 0.0:
            raise EstimationFailure("overlap estimate is zero; increase the query budget")
        tr_quarter = 2.0 * d * p0_hat

    estimate = (math.log(tr_quarter) - alpha * LOG_PI_OVER_4) / (1.0 - alpha)
    oracle = exact_entropies(rho, alpha)
    return _finish(
        quantity="S_alpha",
        estimate=estimate,
        eps=eps,
        budget=budget,
        shots=budget.shots,
        ledger=be.sample_cost + budget.shots + inputs.extra_cost,
        method=method,
        seed=seed,
        alpha=alpha,
        branch=regime.branch,
        exact=oracle.entropy,
        p0_measured=p0_hat,
        p0_pair=pair,
        eta=be.eta,
        rho_min_used=inputs.rho_min_lower,
        flags=flags,
    )


def vn_qsvt(
    rho: DensityMatrix,
    eps: float,
    mode: str = "noisy",
    seed: int = 0,
    blind: bool = False,
    support_projection: bool = True,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Von Neumann entropy by direct spectral transformation.

    Chain: encode (pi/4) rho, apply the scaled-log fit on
    [pi rho_min/4, 1] to reach gamma * log(4 rho^{-1}/pi) with
    gamma = 1/(2 log(4/(pi rho_min))), take the half power, fold out the
    1/2.  The ancilla gives p0 = gamma log(4/pi) + gamma S_v; shots are
    budgeted at delta = eps * gamma.
    """
    work = rho
    if rho.meta.rank < rho.dim:
        if not support_projection:
            raise ValueError("state is rank deficient and support projection is disabled")
        work = rho.project_to_support()
    regime = decompose_alpha(1.0)
    s_in, s_enc, s_meas = _child_seeds(seed, 3)
    inputs = _gather_inputs(work, blind, mode, s_in, cfg)
    budget = delta_budget(regime, eps, inputs.meta, cfg=cfg)
    delta = budget.delta
    noiseless = mode == "ideal"

    beta = math.pi * inputs.rho_min_lower / 4.0
    gamma = 1.0 / (2.0 * math.log(1.0 / beta))
    stage_eps = cfg.ideal_poly_eps if mode == "ideal" else max(min(5e-4, delta / 32.0), 1e-12)

    log_fit = approx_log(beta, stage_eps, cfg)
    slope = max(1.0, log_fit.lipschitz_bound())
    enc_budget = _clamp_encoding_budget(stage_eps / (2.0 * slope))
    b1 = apply_poly(encode_density(work, enc_budget, s_enc, noiseless, cfg), log_fit)

    floor2 = gamma * math.log(4.0 / math.pi)
    kappa2 = 1.0 / floor2
    sqrt_fit = approx_pos_power(0.5, kappa2, stage_eps, cfg)
    b2 = rescale(apply_poly(b1, sqrt_fit), 2.0)

    pair = _p0_pair(b2, work.matrix.mat)
    p0_hat = pair[0] if mode == "ideal" else measure_p0(MeasurementModel(p0=pair[0]), delta, s_meas, cfg)
    margin = 4.0 * delta + pair[2]
    if p0_hat < floor2 - margin:
        raise EstimationFailure(
            f"ancilla probability {p0_hat:.4f} sits below the zero-entropy floor "
            f"{floor2:.4f} by more than the error margin; the run is inconsistent"
        )
    estimate = (p0_hat - floor2) / gamma
    oracle = exact_entropies(work, 1.0)
    return _finish(
        quantity="S_v",
        estimate=estimate,
        eps=eps,
        budget=budget,
        shots=budget.shots,
        ledger=b2.sample_cost + budget.shots + inputs.extra_cost,
        method="qsvt",
        seed=seed,
        alpha=1.0,
        branch="von_neumann",
        exact=oracle.entropy,
        p0_measured=p0_hat,
        p0_pair=pair,
        eta=b2.eta,
        rho_min_used=inputs.rho_min_lower,
        flags=inputs.flags,
    )


def vn_poly(
    rho: DensityMatrix,
    eps: float,
    seed: int = 0,
    mode: str = "noisy",
    blind: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Von Neumann entropy from a plain-power expansion of log(1/x).

    Converts the scaled-log fit on [rho_min, 1] to monomial coefficients
    a_i of log(1/x) itself and estimates each Tr rho^(i+1) with the
    integer-order machinery: S_v ~ a_0 + sum_i a_i Tr rho^(i+1) (the
    x * P(x) structure makes zero eigenvalues harmless, so no support
    projection is needed).  Per-term accuracy is eps/(2K max(log(1/beta),
    |a_i|)); the coefficient-aware denominator keeps the statistical
    error within budget even when the plain-power basis inflates the
    coefficients.
    """
    regime = decompose_alpha(1.0)
    s_in, s_meas = _child_seeds(seed, 2)
    inputs = _gather_inputs(rho, blind, mode, s_in, cfg)
    budget = delta_budget(regime, eps, inputs.meta, cfg=cfg)
    noiseless = mode == "ideal"

    beta = min(inputs.rho_min_lower, 0.9)
    log_scale = math.log(1.0 / beta)
    fit_eps = min(0.5, eps / (2.0 * log_scale))
    log_fit = approx_log(beta, fit_eps, cfg)
    k_deg = log_fit.degree
    if k_deg > cfg.monomial_degree_cap:
        raise ValueError(
            f"expansion degree {k_deg} exceeds the stable conversion cap "
            f"{cfg.monomial_degree_cap}; use the direct-transform estimator instead"
        )
    mono = to_monomial(log_fit)
    coeffs = mono.coeffs  # of log(1/x) on [beta, 1]

    oracle_powers = {i: exact_entropies(rho, float(i + 1)).tr_pow_alpha for i in range(1, len(coeffs))}
    rng_seeds = _child_seeds(s_meas, max(1, len(coeffs) - 1))
    estimate = float(coeffs[0]) if len(coeffs) else 0.0
    shots_total = 0
    ledger = inputs.extra_cost
    for i in range(1, len(coeffs)):
        a_i = float(coeffs[i])
        t_i = oracle_powers[i]
        denom = 2.0 * max(1, k_deg) * max(log_scale, abs(a_i))
        delta_i = min(0.49, eps / denom)
        n_i = shots_for("bernoulli", delta_i, cfg)
        if noiseless:
            t_hat = t_i
        else:
            rng = np.random.default_rng(rng_seeds[i - 1])
            t_hat = 2.0 * rng.binomial(n_i, (1.0 + t_i) / 2.0) / n_i - 1.0
        estimate += a_i * t_hat
        shots_total += n_i
        ledger += (i + 1) * n_i
    oracle = exact_entropies(rho, 1.0)
    report_delta = eps / (2.0 * max(1, k_deg) * log_scale)
    return _finish(
        quantity="S_v",
        estimate=estimate,
        eps=eps,
        budget=replace(budget, delta=report_delta, shots=max(1, shots_total)),
        shots=max(1, shots_total),
        ledger=ledger,
        method="poly",
        seed=seed,
        alpha=1.0,
        branch="von_neumann",
        exact=oracle.entropy,
        eta=log_scale * 2.0 * log_fit.eps,
        rho_min_used=inputs.rho_min_lower,
        flags=inputs.flags,
    )


def estimate(
    rho: DensityMatrix,
    alpha: float,
    eps: float,
    seed: int = 0,
    mode: str = "noisy",
    method: Optional[str] = None,
    blind: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> EstimateReport:
    """Dispatch to the branch-appropriate pipeline for this order."""
    regime = decompose_alpha(alpha)
    if regime.branch == "integer":
        return renyi_integer(rho, int(round(alpha)), eps, seed, mode, blind, cfg)
    if regime.branch == "odd_floor":
        return renyi_case_odd(rho, alpha, eps, mode, seed, blind, cfg)
    if regime.branch == "even_floor":
        return renyi_case_even(rho, alpha, eps, mode, seed, blind, cfg=cfg)
    if regime.branch == "sub_one":
        return renyi_sub_one(rho, alpha, eps, method or "sampling", mode, seed, blind, cfg)
    if method == "poly":
        return vn_poly(rho, eps, seed, mode, blind, cfg)
    return vn_qsvt(rho, eps, mode, seed, blind, cfg=cfg)
