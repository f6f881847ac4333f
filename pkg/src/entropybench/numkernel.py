"""Dense complex linear algebra for Hermitian operators at dimension <= 64.

Self-contained spectral kernel: the eigensolver is a cyclic Jacobi
iteration (unconditionally stable at these sizes, deterministic, no
dependence on LAPACK behaviour), and every matrix function in the
package is realized through it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import MAX_DIM, TOL


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""

    def __init__(self, asymmetry: float):
        self.asymmetry = asymmetry
        super().__init__(
            f"matrix is not Hermitian: max |A - A^dagger| element = {asymmetry:.3e} "
            f"exceeds tolerance {TOL.herm:.0e}"
        )


@dataclass(frozen=True)
class HermMatrix:
    """A validated Hermitian matrix of dimension <= 64.

    Entries are stored as a read-only complex128 array.  The spectrum is
    computed lazily and cached, so repeated matrix functions on the same
    operator cost one eigendecomposition.
    """

    mat: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.mat, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.shape[0] < 1 or m.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} outside [1, {MAX_DIM}]")
        asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if asym > TOL.herm:
            raise NonHermitianError(asym)
        # exact symmetrization removes representation noise below tolerance
        m = (m + m.conj().T) / 2.0
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def spectrum(self) -> "Spectrum":
        if "spec" not in self._cache:
            self._cache["spec"] = hermitian_eig(self)
        return self._cache["spec"]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (real, descending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _jacobi_rotation(app: float, aqq: float, apq: complex):
    """2x2 unitary [[c, s*w], [-s*conj(w), c*?]] data zeroing the (p,q) entry.

    Returns (c, s, w) where the rotation applied on the (p, q) plane is
    J = [[c, s], [-s*conj(w), c*conj(w)]] with w = apq/|apq| absorbed so
    the reduced 2x2 problem is real symmetric.
    """
    b = abs(apq)
    w = apq / b
    tau = (aqq - app) / (2.0 * b)
    if tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return c, s, w


def hermitian_eig(a: HermMatrix) -> Spectrum:
    """Full spectral decomposition by cyclic Jacobi sweeps.

    Stops when the off-diagonal Frobenius mass drops below the
    configured threshold; at dimension <= 64 this takes a handful of
    sweeps and leaves reconstruction error well under 1e-12.
    """
    d = a.dim
    m = np.array(a.mat, dtype=np.complex128)
    v = np.eye(d, dtype=np.complex128)
    if d > 1:
        scale = max(1.0, float(np.linalg.norm(m)))
        threshold = TOL.jacobi_off * scale
        offmask = ~np.eye(d, dtype=bool)
        for _ in range(60):
            # summed directly (not total minus diagonal) to avoid cancellation
            off = float(np.sqrt(np.sum(np.abs(m[offmask]) ** 2)))
            if off < threshold:
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = m[p, q]
                    if abs(apq) < threshold / (d * d):
                        continue
                    c, s, w = _jacobi_rotation(m[p, p].real, m[q, q].real, apq)
                    # J restricted to the (p,q) plane; A <- J^dagger A J
                    jpp, jpq = c, s
                    jqp, jqq = -s * np.conj(w), c * np.conj(w)
                    rp = np.conj(jpp) * m[p, :] + np.conj(jqp) * m[q, :]
                    rq = np.conj(jpq) * m[p, :] + np.conj(jqq) * m[q, :]
                    m[p, :], m[q, :] = rp, rq
                    cp = m[:, p] * jpp + m[:, q] * jqp
                    cq = m[:, p] * jpq + m[:, q] * jqq
                    m[:, p], m[:, q] = cp, cq
                    vp = v[:, p] * jpp + v[:, q] * jqp
                    vq = v[:, p] * jpq + v[:, q] * jqq
                    v[:, p], v[:, q] = vp, vq
    eigs = np.real(np.diag(m))
    order = np.argsort(-eigs, kind="stable")
    eigs = eigs[order].copy()
    vecs = v[:, order].copy()
    eigs.flags.writeable = False
    vecs.flags.writeable = False
    return Spectrum(eigenvalues=eigs, eigenvectors=vecs)


def herm_with_spectrum(mat: np.ndarray, eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> HermMatrix:
    """Build a HermMatrix whose spectral decomposition is already known.

    Used when an operator is produced as V diag(w) V^dagger so the cached
    spectrum can be reused instead of rediagonalizing.
    """
    h = HermMatrix(mat)
    order = np.argsort(-np.asarray(eigenvalues), kind="stable")
    eigs = np.asarray(eigenvalues, dtype=float)[order].copy()
    vecs = np.asarray(eigenvectors, dtype=np.complex128)[:, order].copy()
    eigs.flags.writeable = False
    vecs.flags.writeable = False
    h._cache["spec"] = Spectrum(eigenvalues=eigs, eigenvectors=vecs)
    return h


def mat_fun(a: HermMatrix, f: Callable[[float], float]) -> HermMatrix:
    """Apply a real scalar function to the spectrum: V diag(f(lambda)) V^dagger."""
    spec = a.spectrum
    vals = []
    for lam in spec.eigenvalues:
        y = f(float(lam))
        if not np.isfinite(y):
            raise ValueError(f"function undefined at eigenvalue {lam!r} (got {y!r})")
        vals.append(float(y))
    v = spec.eigenvectors
    w = np.asarray(vals, dtype=float)
    out = (v * w) @ v.conj().T
    return herm_with_spectrum((out + out.conj().T) / 2.0, w, v)


def op_norm(a: HermMatrix) -> float:
    """Operator norm = largest |eigenvalue| (Hermitian input)."""
    eigs = a.spectrum.eigenvalues
    return float(np.max(np.abs(eigs))) if eigs.size else 0.0


def op_norm_dist(a: HermMatrix, b: HermMatrix) -> float:
    """Operator-norm distance ||a - b||, via the spectrum of the difference."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return op_norm(HermMatrix(a.mat - b.mat))
