"""Dense complex linear algebra helpers for small Hermitian problems (n <= ~8).

Every routine is a pure function on numpy arrays. Tolerances follow a fixed
ladder, overridable per call:

    TOL_ALGEBRAIC  1e-12  algebraic identities on exact inputs
    TOL_DECOMP     1e-10  matrix decompositions
    TOL_SYMMETRY   1e-8   curvature symmetries
    TOL_FD         1e-4   finite-difference comparisons
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_ALGEBRAIC = 1e-12
TOL_DECOMP = 1e-10
TOL_SYMMETRY = 1e-8
TOL_FD = 1e-4


class NotHermitianError(ValueError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NotPositiveDefiniteError(ValueError):
    """Matrix is Hermitian but not positive definite."""


def hermitian_asymmetry(m: np.ndarray) -> float:
    """Max deviation of m from m^H, relative to max(1, max|entry|)."""
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    return float(np.abs(m - m.conj().T).max(initial=0.0)) / scale


def require_hermitian(m: np.ndarray, tol: float = TOL_ALGEBRAIC,
                      label: str = "matrix") -> np.ndarray:
    """Validate Hermiticity within tol and return the symmetrized matrix.

    Inputs inside the tolerance are symmetrized (m <- (m + m^H)/2) before
    use; downstream second derivatives carry rounding.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{label} must be square, got shape {m.shape}")
    asym = hermitian_asymmetry(m)
    if asym > tol:
        raise NotHermitianError(
            f"{label} is not Hermitian: max asymmetry {asym:.3e} exceeds {tol:.1e}")
    return 0.5 * (m + m.conj().T)


def eigh(m: np.ndarray, tol: float = TOL_ALGEBRAIC) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition; returns (eigenvalues ascending, unitary V)."""
    h = require_hermitian(m, tol)
    return np.linalg.eigh(h)


def invert_pd(m: np.ndarray, tol: float = TOL_ALGEBRAIC,
              min_eig: float = 1e-12) -> np.ndarray:
    """Inverse of a Hermitian positive definite matrix, symmetrized."""
    h = require_hermitian(m, tol)
    w = np.linalg.eigvalsh(h)
    if w[0] <= min_eig:
        raise NotPositiveDefiniteError(
            f"not positive definite: min eigenvalue {w[0]:.6e}")
    inv = np.linalg.inv(h)
    return 0.5 * (inv + inv.conj().T)


@dataclass(frozen=True)
class UnitaryFrame:
    """Frame vectors e_1..e_n as the columns of E.

    Orthonormality is with respect to the pairing <X, Y> = X_i conj(Y_j)
    g_{i jbar} used throughout (first tensor slot takes unconjugated
    components), so the invariant is the Gram condition

        sum_{i,j} E[i, a] conj(E[j, b]) g[i, j] = delta_ab,

    i.e. E^T g conj(E) = I as matrices.
    """

    E: np.ndarray
    base_metric_tag: str = ""

    @property
    def n(self) -> int:
        return self.E.shape[0]


def frame_gram(E: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Gram matrix of the frame columns under the metric value g."""
    return np.einsum("ia,jb,ij->ab", E, E.conj(), g)


def unitary_frame(g: np.ndarray, tag: str = "",
                  tol: float = TOL_ALGEBRAIC) -> UnitaryFrame:
    """Deterministic g-unitary frame from the Cholesky factor of g.

    With g = L L^H (L lower triangular) the frame matrix is E = (L^T)^{-1},
    which satisfies the Gram condition E^T g conj(E) = I. The triangular
    route (rather than eigenvectors) keeps frames reproducible across runs
    and platforms.
    """
    h = require_hermitian(g, tol, label="metric")
    w = np.linalg.eigvalsh(h)
    if w[0] <= 1e-12:
        raise NotPositiveDefiniteError(
            f"not positive definite: min eigenvalue {w[0]:.6e}")
    ell = np.linalg.cholesky(h)
    frame = np.linalg.inv(ell).T
    return UnitaryFrame(E=frame, base_metric_tag=tag)


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed n x n unitary, bit-identical for a given seed.

    Complex Gaussian matrix, QR, then the R-diagonal phase fix that makes
    the factorization unique.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
