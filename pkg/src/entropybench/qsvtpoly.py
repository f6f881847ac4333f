"""Certified Chebyshev approximations and their action on block encodings.

Every fit records the sup-norm error it actually achieved on a dense
certification grid (with a small aliasing safety factor), so downstream
error ledgers are backed by a checked bound rather than a requested one.
Three target families are built in: the scaled logarithm
log(1/x)/(2 log(1/beta)), positive powers x^c/2, and negative powers
x^(-c)/(2 kappa^c), each on a domain bounded away from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from .config import DEFAULT_CONFIG, TOL, RuntimeConfig
from .blockenc import BlockEncoding
from .numkernel import herm_with_spectrum, op_norm_dist

# multiplied onto the grid maximum so the recorded bound also covers
# excursions between certification nodes
_CERT_SAFETY = 1.05


class DegreeCapExceeded(RuntimeError):
    def __init__(self, cap: int, best_err: float):
        self.cap = cap
        self.best_err = best_err
        super().__init__(
            f"no Chebyshev fit up to degree {cap} met the target accuracy; "
            f"best achieved sup error {best_err:.3e}"
        )


@dataclass(frozen=True)
class PolyApprox:
    """A Chebyshev-basis polynomial certified against its target function."""

    coeffs: np.ndarray  # Chebyshev coefficients over the mapped domain
    degree: int
    domain: tuple[float, float]
    target_tag: str  # "log_scaled", "pos_power", "neg_power", "custom"
    eps: float  # certified sup-norm error on the domain
    target_fn: Callable[[float], float]
    # value assigned at eigenvalue 0 (continuous extension); None means
    # a zero eigenvalue is out of domain for this transform
    zero_extension: Optional[float] = None
    # scalar folded out of the target (2 log(1/beta), 2, 2 kappa^c, or 1)
    subnorm_factor: float = 1.0
    # input-precision requirement attached by the power transforms
    input_precision: Optional[float] = None

    def __post_init__(self):
        cheb = self._cheb()
        lo, hi = self.domain
        grid = _cheb_grid(lo, hi, max(10 * max(self.degree, 1), 10))
        err = float(np.max(np.abs(cheb(grid) - _vec(self.target_fn, grid))))
        if err > self.eps + 1e-15:
            raise ValueError(
                f"certification failed: grid error {err:.3e} exceeds recorded eps {self.eps:.3e}"
            )
        if self.target_tag == "log_scaled":
            if float(np.max(np.abs(cheb(grid)))) > 1.0 + TOL.poly_bound_slack:
                raise ValueError("scaled-log fit exceeds the |P(x)| <= 1 bound")

    def _cheb(self) -> Chebyshev:
        return Chebyshev(self.coeffs, domain=list(self.domain))

    def __call__(self, x):
        return self._cheb()(x)

    def lipschitz_bound(self, widen: float = 0.0) -> float:
        """max |P'| on the domain enlarged by `widen` on both sides."""
        lo, hi = self.domain
        span = np.linspace(lo - widen, hi + widen, 10 * max(self.degree, 1) + 21)
        return float(np.max(np.abs(self._cheb().deriv()(span))))

    def to_text(self) -> str:
        lines = [f"domain {self.domain[0]!r} {self.domain[1]!r}", f"eps {self.eps!r}"]
        lines += [repr(float(c)) for c in self.coeffs]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MonomialPoly:
    """Plain-power coefficients a_i of sum a_i x^i."""

    coeffs: np.ndarray

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _vec(f, xs):
    return np.asarray([f(float(x)) for x in xs], dtype=float)


def _cheb_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n Chebyshev certification nodes on [lo, hi], endpoints included."""
    k = np.arange(n + 1)
    nodes = np.cos(np.pi * k / n)
    return (hi + lo) / 2 + (hi - lo) / 2 * nodes


def _certified_error(cheb: Chebyshev, f, lo: float, hi: float, degree: int) -> float:
    grid = _cheb_grid(lo, hi, max(10 * max(degree, 1), 10))
    return float(np.max(np.abs(cheb(grid) - _vec(f, grid))))


def cheb_fit(
    target: Callable[[float], float],
    lo: float,
    hi: float,
    eps: float,
    k_cap: int,
    target_tag: str = "custom",
    zero_extension: Optional[float] = None,
    subnorm_factor: float = 1.0,
    input_precision: Optional[float] = None,
) -> PolyApprox:
    """Smallest-degree Chebyshev interpolant meeting sup error <= eps.

    Degrees are doubled until certification succeeds, then binary search
    finds the smallest passing degree.  The recorded eps carries a small
    aliasing safety factor over the grid maximum.
    """
    if not (0.0 < lo < hi <= 1.0):
        raise ValueError(f"domain must satisfy 0 < lo < hi <= 1, got [{lo}, {hi}]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if k_cap < 0:
        raise ValueError("degree cap must be nonnegative")

    def attempt(deg: int):
        # interpolate feeds arrays; targets are scalar functions
        cheb = Chebyshev.interpolate(
            lambda xs: _vec(target, np.atleast_1d(xs)), deg, domain=[lo, hi]
        )
        err = _certified_error(cheb, target, lo, hi, deg)
        return cheb, err

    def passes(err: float) -> bool:
        return _CERT_SAFETY * err + 1e-15 <= eps

    best_err = math.inf
    deg = 0
    prev_fail = -1
    while True:
        cheb, err = attempt(deg)
        best_err = min(best_err, err)
        if passes(err):
            break
        prev_fail = deg
        if deg >= k_cap:
            raise DegreeCapExceeded(k_cap, best_err)
        deg = min(k_cap, max(1, 2 * deg))

    # smallest passing degree between the last failure and this success
    lo_deg, hi_deg = prev_fail, deg
    best = (deg, cheb, err)
    while hi_deg - lo_deg > 1:
        mid = (lo_deg + hi_deg) // 2
        cheb_mid, err_mid = attempt(mid)
        if passes(err_mid):
            hi_deg = mid
            best = (mid, cheb_mid, err_mid)
        else:
            lo_deg = mid

    deg, cheb, err = best
    recorded = min(eps, _CERT_SAFETY * err + 1e-15)
    return PolyApprox(
        coeffs=np.asarray(cheb.coef, dtype=float),
        degree=deg,
        domain=(lo, hi),
        target_tag=target_tag,
        eps=recorded,
        target_fn=target,
        zero_extension=zero_extension,
        subnorm_factor=subnorm_factor,
        input_precision=input_precision,
    )


def _constant_poly(
    value: float,
    lo: float,
    hi: float,
    target_tag: str,
    zero_extension: Optional[float],
    subnorm_factor: float,
    input_precision: Optional[float],
) -> PolyApprox:
    return PolyApprox(
        coeffs=np.asarray([value]),
        degree=0,
        domain=(lo, hi),
        target_tag=target_tag,
        eps=1e-15,
        target_fn=lambda x: value,
        zero_extension=zero_extension,
        subnorm_factor=subnorm_factor,
        input_precision=input_precision,
    )


def approx_log(beta: float, eps: float, cfg: RuntimeConfig = DEFAULT_CONFIG) -> PolyApprox:
    """Certified fit of log(1/x) / (2 log(1/beta)) on [beta, 1].

    The scaled target sits in [0, 1/2] on the domain, with value exactly
    1/2 at x = beta.  Degree is capped at c_log * (1/beta) * ln(1/eps).
    """
    if not (0.0 < beta <= 1.0):
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    if beta >= 1.0 - 1e-12:
        raise ValueError("beta = 1 gives a degenerate single-point domain")
    if not (0.0 < eps <= 0.5):
        raise ValueError(f"eps must be in (0, 1/2], got {eps}")
    scale = 2.0 * math.log(1.0 / beta)
    cap = int(math.ceil(cfg.c_log * (1.0 / beta) * math.log(1.0 / eps)))
    return cheb_fit(
        lambda x: math.log(1.0 / x) / scale,
        beta,
        1.0,
        eps,
        cap,
        target_tag="log_scaled",
        zero_extension=None,
        subnorm_factor=scale,
    )


def pos_power_input_precision(kappa: float, eps: float) -> float:
    """Input accuracy the positive-power transform demands of its encoding."""
    return eps / (kappa * math.log(kappa / eps) ** 3)


def neg_power_input_precision(c: float, kappa: float, eps: float) -> float:
    """Input accuracy the negative-power transform demands of its encoding."""
    k1c = kappa ** (1.0 + c)
    return eps / (k1c * (1.0 + c) * math.log(k1c / eps) ** 3)


def approx_pos_power(c: float, kappa: float, eps: float, cfg: RuntimeConfig = DEFAULT_CONFIG) -> PolyApprox:
    """Certified fit of x^c / 2 on [1/kappa, 1], with its input-precision tag.

    A zero eigenvalue extends continuously to 0.
    """
    if not (0.0 < c < 1.0):
        raise ValueError(f"exponent must be in (0, 1), got {c}")
    if kappa < 1.0:
        raise ValueError(f"conditioning parameter must be >= 1, got {kappa}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    prec = pos_power_input_precision(kappa, eps)
    if kappa <= 1.0 + 1e-9:
        return _constant_poly(0.5, 0.5, 1.0, "pos_power", 0.0, 2.0, prec)
    cap = int(math.ceil(cfg.c_power * kappa * max(1.0, math.log(kappa / eps))))
    return cheb_fit(
        lambda x: 0.5 * x**c,
        1.0 / kappa,
        1.0,
        eps,
        cap,
        target_tag="pos_power",
        zero_extension=0.0,
        subnorm_factor=2.0,
        input_precision=prec,
    )


def approx_neg_power(c: float, kappa: float, eps: float, cfg: RuntimeConfig = DEFAULT_CONFIG) -> PolyApprox:
    """Certified fit of x^(-c) / (2 kappa^c) on [1/kappa, 1].

    The target peaks at exactly 1/2 at x = 1/kappa; zero eigenvalues are
    out of domain (negative powers do not extend through 0).
    """
    if not (0.0 < c < 1.0):
        raise ValueError(f"exponent must be in (0, 1), got {c}")
    if kappa < 1.0:
        raise ValueError(f"conditioning parameter must be >= 1, got {kappa}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    prec = neg_power_input_precision(c, kappa, eps)
    if kappa <= 1.0 + 1e-9:
        return _constant_poly(0.5, 0.5, 1.0, "neg_power", None, 2.0 * kappa**c, prec)
    scale = 2.0 * kappa**c
    cap = int(math.ceil(cfg.c_power * kappa * max(1.0, math.log(kappa / eps))))
    return cheb_fit(
        lambda x: x ** (-c) / scale,
        1.0 / kappa,
        1.0,
        eps,
        cap,
        target_tag="neg_power",
        zero_extension=None,
        subnorm_factor=scale,
        input_precision=prec,
    )


def apply_poly(be: BlockEncoding, p: PolyApprox) -> BlockEncoding:
    """Transform a block encoding by a certified polynomial.

    The exact ledger (`target`) moves by the target function, the
    realized ledger (`encoded`) by the polynomial itself; the new error
    bound is p.eps + L * eta with L the certified slope of the fit on an
    eta-enlarged domain.  Copy cost scales with 2 * degree, the number
    of encoding uses one polynomial application needs.
    """
    lo, hi = p.domain
    eta = be.eta
    tol = 1e-9

    tspec = be.target.spectrum
    for lam in tspec.eigenvalues:
        if lo - tol <= lam <= hi + tol:
            continue
        if abs(lam) <= tol and p.zero_extension is not None:
            continue
        raise ValueError(
            f"target eigenvalue {lam!r} outside fit domain [{lo}, {hi}]"
            + ("" if p.zero_extension is not None else " (no extension through 0)")
        )

    def f_ext(x: float) -> float:
        # only zero-extension eigenvalues can reach here below the domain
        if x < lo - tol:
            return float(p.zero_extension)
        return p.target_fn(min(max(x, lo), hi))

    tw = np.asarray([f_ext(float(x)) for x in tspec.eigenvalues])
    new_target = herm_with_spectrum(
        (tspec.eigenvectors * tw) @ tspec.eigenvectors.conj().T, tw, tspec.eigenvectors
    )

    cheb = Chebyshev(p.coeffs, domain=[lo, hi])
    espec = be.encoded.spectrum
    ew = []
    reach = eta + tol
    for mu in espec.eigenvalues:
        mu = float(mu)
        if lo - reach <= mu <= hi + reach:
            ew.append(float(cheb(mu)))
        elif abs(mu) <= reach and p.zero_extension is not None:
            ew.append(p.zero_extension)
        else:
            raise ValueError(
                f"encoded eigenvalue {mu!r} lies outside the fit domain "
                f"[{lo}, {hi}] by more than the error budget {eta:g}"
            )
    ew = np.asarray(ew)
    new_encoded = herm_with_spectrum(
        (espec.eigenvectors * ew) @ espec.eigenvectors.conj().T, ew, espec.eigenvectors
    )

    lip = p.lipschitz_bound(widen=eta) if eta > 0 else 0.0
    new_eta = p.eps + lip * eta
    if eta > 0 and not np.array_equal(be.encoded.mat, be.target.mat):
        # the scalar slope bound does not always transfer to a
        # non-commuting perturbation (the operator Lipschitz constant of
        # a polynomial can exceed max |p'|); the realized distance is
        # available here, and the ledger must never under-report
        realized = op_norm_dist(new_encoded, new_target)
        new_eta = max(new_eta, realized * (1.0 + 1e-12) + 1e-15)
    return BlockEncoding(
        encoded=new_encoded,
        target=new_target,
        subnorm=max(1.0, p.subnorm_factor),
        ancillas=be.ancillas + 1,
        eta=new_eta,
        sample_cost=be.sample_cost * 2 * p.degree,
    )


def to_monomial(p: PolyApprox, tol_check: float = TOL.monomial_eval) -> MonomialPoly:
    """Plain-power coefficients of subnorm_factor * P(x).

    For the scaled-log family this is the expansion of log(1/x) itself
    (factor 2 log(1/beta)); generic fits convert with factor 1.  Refuses
    degrees above 30, where the change of basis is no longer trustworthy
    at double precision, and verifies agreement on the domain.
    """
    if p.degree > DEFAULT_CONFIG.monomial_degree_cap:
        raise ValueError(
            f"degree {p.degree} exceeds the monomial conversion cap "
            f"{DEFAULT_CONFIG.monomial_degree_cap} (conversion would be unstable)"
        )
    factor = p.subnorm_factor if p.target_tag in ("log_scaled",) else 1.0
    plain = (p._cheb() * factor).convert(kind=Polynomial)
    coeffs = np.asarray(plain.coef, dtype=float)
    mono = MonomialPoly(coeffs=coeffs)
    lo, hi = p.domain
    grid = np.linspace(lo, hi, 10 * max(p.degree, 1) + 11)
    dev = float(np.max(np.abs(mono(grid) - factor * p(grid))))
    if dev > tol_check:
        raise ValueError(f"monomial conversion error {dev:.3e} exceeds {tol_check:g}")
    return mono
