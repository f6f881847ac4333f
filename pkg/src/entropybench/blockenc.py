"""Block encodings: a target operator sitting in the corner of a unitary.

A BlockEncoding tracks four ledgers through every composition: the exact
operator it is supposed to hold (`target`), the operator actually
realized (`encoded`, possibly perturbed), a certified bound `eta` on the
operator-norm distance between the two, and the running count of state
copies a physical construction would consume (`sample_cost`).

The honesty contract is that `eta` may over-report but never
under-report: op_norm_dist(encoded, target) <= eta always holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG, TOL, RuntimeConfig
from .numkernel import HermMatrix, herm_with_spectrum, mat_fun, op_norm, op_norm_dist
from .states import DensityMatrix, partial_trace_second


@dataclass(frozen=True)
class BlockEncoding:
    encoded: HermMatrix
    target: HermMatrix
    subnorm: float = 1.0
    ancillas: int = 1
    eta: float = 0.0
    sample_cost: int = 0

    def __post_init__(self):
        if self.encoded.dim != self.target.dim:
            raise ValueError("encoded and target dimensions differ")
        if self.subnorm < 1.0 - 1e-12:
            raise ValueError(f"subnormalization {self.subnorm} < 1")
        if self.eta < 0 or self.sample_cost < 0 or self.ancillas < 0:
            raise ValueError("eta, ancillas and sample_cost must be nonnegative")
        # Frobenius norm upper-bounds the operator norm, so try it first
        # and fall back to the exact spectral check only when needed.
        fro = float(np.linalg.norm(self.encoded.mat))
        if fro > 1.0 + TOL.encoding_norm_slack:
            if op_norm(self.encoded) > 1.0 + TOL.encoding_norm_slack:
                raise ValueError("encoded block has operator norm > 1")
        dfro = float(np.linalg.norm(self.encoded.mat - self.target.mat))
        if dfro > self.eta + TOL.encoding_err_slack:
            if op_norm_dist(self.encoded, self.target) > self.eta + TOL.encoding_err_slack:
                raise ValueError(
                    f"realized error exceeds certified bound eta = {self.eta:g}"
                )

    @property
    def dim(self) -> int:
        return self.target.dim


@dataclass(frozen=True)
class DilatedUnitary:
    """Explicit 2d x 2d unitary whose top-left block is the encoded operator."""

    matrix: np.ndarray
    parent: BlockEncoding

    def __post_init__(self):
        u = np.asarray(self.matrix)
        d = self.parent.dim
        if u.shape != (2 * d, 2 * d):
            raise ValueError("dilation must double the dimension")
        if np.linalg.norm(u.conj().T @ u - np.eye(2 * d), 2) > TOL.reconstruction:
            raise ValueError("dilation is not unitary within tolerance")
        if np.max(np.abs(u[:d, :d] - self.parent.encoded.mat)) > 1e-12:
            raise ValueError("top-left block does not match the encoded operator")


def encoding_copy_cost(delta: float, cfg: RuntimeConfig = DEFAULT_CONFIG) -> int:
    """Copies of the state consumed to realize a delta-accurate encoding."""
    return int(math.ceil(cfg.c_copy_cost * (1.0 / delta) * math.log(1.0 / delta)))


def _random_perturbation(dim: int, norm: float, seed: int) -> np.ndarray:
    """Random Hermitian direction scaled to an exact operator norm."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / 2
    cur = np.linalg.norm(h, 2)
    if cur == 0.0:
        h = np.eye(dim, dtype=np.complex128)
        cur = 1.0
    return h * (norm / cur)


def _perturbed(target: HermMatrix, norm: float, seed: int) -> HermMatrix:
    """target + P with ||P|| = norm, eigenvalues clipped into [-1, 1].

    Clipping only engages when the perturbed spectrum pokes above 1 (a
    unitary corner cannot); moving eigenvalues back toward the target
    never increases the distance to it.
    """
    if norm == 0.0:
        return target
    p = _random_perturbation(target.dim, norm, seed)
    h = HermMatrix(target.mat + p)
    spec = h.spectrum
    if np.max(np.abs(spec.eigenvalues)) <= 1.0:
        return h
    w = np.clip(spec.eigenvalues, -1.0, 1.0)
    return herm_with_spectrum(
        (spec.eigenvectors * w) @ spec.eigenvectors.conj().T, w, spec.eigenvectors
    )


def encode_density(
    rho: DensityMatrix,
    delta: float,
    noise_seed: int = 0,
    noiseless: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> BlockEncoding:
    """Encoding of (pi/4) * rho with approximation budget delta.

    The realized corner is the target plus a seeded random Hermitian
    perturbation of operator norm delta/2 (half the certified budget);
    in noiseless mode the perturbation is dropped and delta is kept as a
    bound only.  Copy cost is ceil((1/delta) log(1/delta)) up to the
    configured constant.
    """
    if not (0.0 < delta <= 0.5):
        raise ValueError(f"approximation budget must be in (0, 1/2], got {delta}")
    spec = rho.spectrum
    w = spec.eigenvalues * (np.pi / 4.0)
    target = herm_with_spectrum(rho.matrix.mat * (np.pi / 4.0), w, spec.eigenvectors)
    encoded = target if noiseless else _perturbed(target, delta / 2.0, noise_seed)
    return BlockEncoding(
        encoded=encoded,
        target=target,
        subnorm=4.0 / np.pi,
        ancillas=1,
        eta=delta,
        sample_cost=encoding_copy_cost(delta, cfg),
    )


def encode_state_side(
    rho: DensityMatrix,
    delta: float,
    noise_seed: int = 0,
    noiseless: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> BlockEncoding:
    """Encoding whose corner is rho itself (no pi/4 prefactor).

    Model plumbing for the negative-power route, which consumes the
    state's own spectrum scale.  Perturbation is capped so the corner
    norm stays <= 1 even for spectra touching 1; the certified eta is
    still delta.
    """
    if not (0.0 < delta <= 0.5):
        raise ValueError(f"approximation budget must be in (0, 1/2], got {delta}")
    spec = rho.spectrum
    target = herm_with_spectrum(rho.matrix.mat, spec.eigenvalues, spec.eigenvectors)
    encoded = target if noiseless else _perturbed(target, delta / 2.0, noise_seed)
    return BlockEncoding(
        encoded=encoded,
        target=target,
        subnorm=1.0,
        ancillas=1,
        eta=delta,
        sample_cost=encoding_copy_cost(delta, cfg),
    )


def dilate(be: BlockEncoding) -> DilatedUnitary:
    """Explicit unitary completion [[A, sqrt(I-A^2)], [sqrt(I-A^2), -A]]."""
    a = be.encoded
    if op_norm(a) > 1.0 + TOL.encoding_norm_slack:
        raise ValueError("encoding impossible: corner norm exceeds 1")
    comp = mat_fun(
        HermMatrix(np.eye(a.dim) - a.mat @ a.mat),
        lambda x: math.sqrt(max(0.0, x)),
    )
    d = a.dim
    u = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    u[:d, :d] = a.mat
    u[:d, d:] = comp.mat
    u[d:, :d] = comp.mat
    u[d:, d:] = -a.mat
    return DilatedUnitary(matrix=u, parent=be)


def be_product(be1: BlockEncoding, be2: BlockEncoding) -> BlockEncoding:
    """Composition encoding the operator product.

    The corner product of two perturbed Hermitian blocks is not exactly
    Hermitian; the Hermitian part is kept (a contraction in operator
    norm, so the composed error bound eta1 + eta2 + eta1*eta2 still
    certifies the realized block).
    """
    if be1.dim != be2.dim:
        raise ValueError(f"dimension mismatch: {be1.dim} vs {be2.dim}")
    tprod = be1.target.mat @ be2.target.mat
    eprod = be1.encoded.mat @ be2.encoded.mat
    return BlockEncoding(
        encoded=HermMatrix((eprod + eprod.conj().T) / 2),
        target=HermMatrix((tprod + tprod.conj().T) / 2),
        subnorm=be1.subnorm * be2.subnorm,
        ancillas=be1.ancillas + be2.ancillas,
        eta=be1.eta + be2.eta + be1.eta * be2.eta,
        sample_cost=be1.sample_cost + be2.sample_cost,
    )


def be_power(
    rho: DensityMatrix,
    k: int,
    per_factor_delta: float,
    noise_seed: int = 0,
    noiseless: bool = False,
    cfg: RuntimeConfig = DEFAULT_CONFIG,
) -> BlockEncoding:
    """k-fold product of fresh encodings of (pi/4) rho, one noise seed each."""
    if k < 1:
        raise ValueError("power must be >= 1")
    out = encode_density(rho, per_factor_delta, noise_seed, noiseless, cfg)
    for j in range(1, k):
        out = be_product(out, encode_density(rho, per_factor_delta, noise_seed + j, noiseless, cfg))
    return out


def purified_encode(purification: np.ndarray, d: int) -> BlockEncoding:
    """Exact encoding of the reduced state of a pure vector on C^d (x) C^m."""
    v = np.asarray(purification, dtype=np.complex128).reshape(-1)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"purification has norm {nrm!r}, expected 1")
    red = partial_trace_second(v, d)
    h = HermMatrix(red)
    return BlockEncoding(encoded=h, target=h, subnorm=1.0, ancillas=1, eta=0.0, sample_cost=0)


def rescale(be: BlockEncoding, factor: float) -> BlockEncoding:
    """Multiply the encoded block by a known scalar (subnormalization removal).

    Both ledgers scale with the block; if the amplified corner pokes
    above norm 1 by no more than the scaled error budget it is clipped
    back (the target itself must stay a valid corner).
    """
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    tspec = be.target.spectrum
    tw = tspec.eigenvalues * factor
    if float(np.max(np.abs(tw), initial=0.0)) > 1.0 + TOL.encoding_norm_slack:
        raise ValueError("rescaled target would exceed operator norm 1")
    target = herm_with_spectrum(be.target.mat * factor, tw, tspec.eigenvectors)
    eta = be.eta * factor
    espec = be.encoded.spectrum
    ew = espec.eigenvalues * factor
    overshoot = float(np.max(np.abs(ew), initial=0.0)) - 1.0
    if overshoot > eta + TOL.encoding_norm_slack:
        raise ValueError("rescaled encoding exceeds operator norm 1 beyond its error budget")
    if overshoot > 0:
        ew = np.clip(ew, -1.0, 1.0)
        encoded = herm_with_spectrum(
            (espec.eigenvectors * ew) @ espec.eigenvectors.conj().T, ew, espec.eigenvectors
        )
        eta += overshoot  # clipping is a real, ledgered error
    else:
        encoded = herm_with_spectrum(be.encoded.mat * factor, ew, espec.eigenvectors)
    return BlockEncoding(
        encoded=encoded,
        target=target,
        subnorm=max(1.0, be.subnorm / factor),
        ancillas=be.ancillas,
        eta=eta,
        sample_cost=be.sample_cost,
    )
