"""Density matrices with controlled rank/spectrum and the exact entropy oracle.

All entropies use natural logarithms internally; the CLI converts to
base 2 on request.  The zero-eigenvalue convention is 0*log(0) = 0, and
trace powers run over the nonzero spectrum only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import MAX_DIM, TOL
from .numkernel import HermMatrix, Spectrum, herm_with_spectrum


@dataclass(frozen=True)
class StateMeta:
    """Spectral summary of a state: rank, extreme nonzero eigenvalues, purity."""

    rank: int
    rho_min: float
    rho_max: float
    purity: float  # Tr rho^2
    dim: int

    def __post_init__(self):
        if not (1 <= self.rank <= self.dim):
            raise ValueError(f"need 1 <= rank <= dim, got rank={self.rank}, dim={self.dim}")
        if not (0 < self.rho_min <= self.rho_max <= 1 + 1e-9):
            raise ValueError(f"eigenvalue range invalid: [{self.rho_min}, {self.rho_max}]")
        # purity can never drop below 1/rank
        if self.purity < 1.0 / self.rank - 1e-9:
            raise ValueError(f"purity {self.purity} below 1/rank = {1 / self.rank}")


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one PSD Hermitian operator with a cached spectral decomposition."""

    matrix: HermMatrix

    def __post_init__(self):
        tr = float(np.trace(self.matrix.mat).real)
        if abs(tr - 1.0) > TOL.trace_one:
            raise ValueError(f"trace is {tr!r}, expected 1 within {TOL.trace_one:g}")
        lo = float(np.min(self.spectrum.eigenvalues))
        if lo < -TOL.rank_cutoff:
            raise ValueError(f"state has negative eigenvalue {lo!r}")

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def spectrum(self) -> Spectrum:
        return self.matrix.spectrum

    @property
    def nonzero_eigenvalues(self) -> np.ndarray:
        eigs = self.spectrum.eigenvalues
        return eigs[eigs > TOL.rank_cutoff]

    @property
    def meta(self) -> StateMeta:
        nz = self.nonzero_eigenvalues
        return StateMeta(
            rank=int(nz.size),
            rho_min=float(nz[-1]),
            rho_max=float(nz[0]),
            purity=float(np.sum(nz**2)),
            dim=self.dim,
        )

    def project_to_support(self) -> "DensityMatrix":
        """Restrict to the span of nonzero eigenvectors (rank-sized block).

        Entropies and trace powers are unchanged; negative powers and
        logarithms become well defined.
        """
        spec = self.spectrum
        keep = spec.eigenvalues > TOL.rank_cutoff
        if bool(np.all(keep)):
            return self
        w = np.clip(spec.eigenvalues[keep], 0.0, None)
        r = int(w.size)
        mat = herm_with_spectrum(np.diag(w).astype(np.complex128), w, np.eye(r, dtype=np.complex128))
        return DensityMatrix(mat)


@dataclass(frozen=True)
class GateCountRecord:
    """Gates used to prepare the maximally entangled purification."""

    hadamards: int
    cnots: int


@dataclass(frozen=True)
class EntropyRecord:
    """Exact oracle output: the trace power, the entropy, and the state summary."""

    alpha: float
    tr_pow_alpha: float
    entropy: float
    quantity: str  # "S_alpha" or "S_v"
    meta: StateMeta


def from_spectrum(eigs: Sequence[float], d: int) -> DensityMatrix:
    """Diagonal state with the given spectrum, zero-padded to dimension d."""
    v = np.asarray(list(eigs), dtype=float)
    if v.size > d:
        raise ValueError(f"{v.size} eigenvalues do not fit in dimension {d}")
    if np.any(v < -1e-15):
        raise ValueError(f"negative eigenvalue in {v.tolist()}")
    if abs(float(np.sum(v)) - 1.0) > 1e-12:
        raise ValueError(f"eigenvalues sum to {float(np.sum(v))!r}, expected 1")
    w = np.zeros(d)
    w[: v.size] = np.clip(v, 0.0, None)
    mat = herm_with_spectrum(np.diag(w).astype(np.complex128), w, np.eye(d, dtype=np.complex128))
    return DensityMatrix(mat)


def random_density(d: int, r: int, seed: int) -> DensityMatrix:
    """Random rank-r state: Dirichlet(1,...,1) spectrum, Haar-rotated support.

    Deterministic per seed.  The rotation comes from orthonormalized
    complex Gaussian columns; the spectrum is resampled in the
    (practically impossible) event a Dirichlet weight falls below the
    rank cutoff, so the realized rank is exactly r.
    """
    if not (1 <= r <= d <= MAX_DIM):
        raise ValueError(f"need 1 <= r <= d <= {MAX_DIM}, got r={r}, d={d}")
    rng = np.random.default_rng(seed)
    while True:
        p = rng.dirichlet(np.ones(r))
        if np.min(p) > 10 * TOL.rank_cutoff:
            break
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    q, _ = np.linalg.qr(g)
    rho = (q * p) @ q.conj().T
    rho = rho / float(np.trace(rho).real)
    w = np.zeros(d)
    w[:r] = np.sort(p)[::-1]
    full_v = np.zeros((d, d), dtype=np.complex128)
    full_v[:, :r] = q[:, np.argsort(p)[::-1]]
    # complete the basis for the cached decomposition
    null = _complete_basis(q)
    full_v[:, r:] = null
    return DensityMatrix(herm_with_spectrum((rho + rho.conj().T) / 2, w, full_v))


def _complete_basis(q: np.ndarray) -> np.ndarray:
    """Orthonormal complement of the column span of q."""
    d, r = q.shape
    if r == d:
        return np.zeros((d, 0), dtype=np.complex128)
    # QR of [q | I]: the first r output columns span col(q), the next
    # d - r columns are an orthonormal basis of its complement
    stack = np.hstack([q, np.eye(d, dtype=np.complex128)])
    qq, _ = np.linalg.qr(stack)
    return qq[:, r:d]


def purify_maximally_mixed(d: int) -> tuple[np.ndarray, GateCountRecord]:
    """Pure vector on d^2 dimensions whose partial trace is I/d.

    Prepared (conceptually) by log2(d) Hadamards followed by log2(d)
    CNOTs, hence the power-of-two requirement; the gate record reports
    exactly that count.
    """
    n = int(round(np.log2(d)))
    if d < 1 or 2**n != d:
        raise ValueError(f"dimension {d} is not a power of 2")
    vec = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        vec[i * d + i] = 1.0
    vec /= np.sqrt(d)
    return vec, GateCountRecord(hadamards=n, cnots=n)


def exact_entropies(rho: DensityMatrix, alpha: float) -> EntropyRecord:
    """Spectral oracle: Tr rho^alpha and the entropy of order alpha.

    alpha = 1 is read as the von Neumann limit -Tr(rho log rho) with the
    0*log(0) = 0 convention.
    """
    if alpha <= 0:
        raise ValueError(f"order must be positive, got {alpha}")
    nz = rho.nonzero_eigenvalues
    if alpha == 1.0:
        s = float(-np.sum(nz * np.log(nz)))
        return EntropyRecord(alpha=1.0, tr_pow_alpha=1.0, entropy=s, quantity="S_v", meta=rho.meta)
    t = float(np.sum(nz**alpha))
    s = float(np.log(t) / (1.0 - alpha))
    return EntropyRecord(alpha=alpha, tr_pow_alpha=t, entropy=s, quantity="S_alpha", meta=rho.meta)


def partial_trace_second(vec: np.ndarray, d: int) -> np.ndarray:
    """Trace out the second register of a pure state on C^d (x) C^m."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    if v.size % d != 0:
        raise ValueError(f"vector of length {v.size} does not factor as {d} x m")
    m = v.reshape(d, v.size // d)
    return m @ m.conj().T


def matrix_to_text(mat: np.ndarray) -> str:
    """Plain-text rendering: 'dim d' then one 'i j re im' line per entry.

    Floats are written with shortest round-trip rendering, so parsing the
    text reproduces the matrix bit-exactly.
    """
    m = np.asarray(mat)
    d = m.shape[0]
    lines = [f"dim {d}"]
    for i in range(d):
        for j in range(d):
            z = complex(m[i, j])
            lines.append(f"{i} {j} {z.real!r} {z.imag!r}")
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dim":
        raise ValueError(f"expected 'dim d' header, got {lines[0]!r}")
    d = int(head[1])
    m = np.zeros((d, d), dtype=np.complex128)
    if len(lines) - 1 != d * d:
        raise ValueError(f"expected {d * d} entry lines, got {len(lines) - 1}")
    for ln in lines[1:]:
        i, j, re_, im_ = ln.split()
        m[int(i), int(j)] = complex(float(re_), float(im_))
    return m


def density_to_text(rho: DensityMatrix) -> str:
    return matrix_to_text(rho.matrix.mat)


def density_from_text(text: str) -> DensityMatrix:
    return DensityMatrix(HermMatrix(matrix_from_text(text)))
