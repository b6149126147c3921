"""Dense complex linear algebra: general and Hermitian eigendecompositions.

Non-Hermitian matrices get paired left/right (biorthogonal) eigenvectors.
Everything is dense; the dimension is capped so a full decomposition always
fits in memory and finishes in LAPACK.

Conventions (used everywhere downstream):
  * eigenvalues sorted by (Re, Im) ascending;
  * every right and left vector has unit Euclidean norm;
  * the largest-magnitude component of each right vector is real positive,
    and the left phase makes <l|r> real >= 0;
  * degenerate clusters (eigenvalues within ``pairing_tol`` of each other)
    are re-biorthogonalized so <l_j|r_l> ~ delta_jl; if that is impossible
    the system is flagged defective instead of silently repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NonHermitianError

DIM_CAP = 4096

# Relative eigenvalue clustering scale for left/right pairing. Spectra away
# from exceptional points are well separated; EPs must surface, not be
# silently repaired.
PAIRING_TOL_REL = 1e-9

# |<l|r>| at or below this is self-orthogonality (exceptional point).
EP_TOL = 1e-10

# Relative Frobenius asymmetry accepted by eig_hermitian.
HERM_TOL = 1e-10

_TINY = 1e-300


def as_matrix(h: np.ndarray) -> np.ndarray:
    """Validate and normalize a dense complex square matrix.

    Returns a C-contiguous complex128 copy. Rejects non-square shapes,
    empty matrices and non-finite entries.
    """
    a = np.asarray(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix dimension must be >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return np.ascontiguousarray(a)


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with paired right/left eigenvectors and diagnostics.

    ``right_vectors[:, k]`` and ``left_vectors[:, k]`` belong to
    ``eigenvalues[k]``; the left vectors solve the adjoint problem
    H† l = E* l. ``residual_max`` is relative to ||H||_F.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    residual_max: float
    is_defective: bool
    defect_indices: tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def overlap(self, k: int) -> complex:
        """<l_k | r_k> (real >= 0 by phase convention, except at defects)."""
        return complex(np.vdot(self.left_vectors[:, k], self.right_vectors[:, k]))

    def overlaps(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.left_vectors.conj(), self.right_vectors)


def _sort_order(w: np.ndarray) -> np.ndarray:
    return np.lexsort((w.imag, w.real))


def _cluster_eigenvalues(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group (Re, Im)-sorted eigenvalues that agree within ``tol``.

    Chains on Re first, then on Im inside each Re chain, so clusters of
    mutually close complex eigenvalues come out contiguous.
    """
    n = len(w)
    groups: list[np.ndarray] = []
    start = 0
    for i in range(1, n + 1):
        if i == n or w[i].real - w[i - 1].real > tol:
            block = np.arange(start, i)
            # split the Re chain on Im jumps
            sub = block[np.argsort(w[block].imag, kind="stable")]
            s2 = 0
            for k in range(1, len(sub) + 1):
                if k == len(sub) or w[sub[k]].imag - w[sub[k - 1]].imag > tol:
                    groups.append(np.sort(sub[s2:k]))
                    s2 = k
            start = i
    return groups


def _fix_phases(vr: np.ndarray, vl: np.ndarray) -> None:
    """In-place deterministic gauge: right pivot real positive, <l|r> >= 0."""
    piv = np.argmax(np.abs(vr), axis=0)
    cols = np.arange(vr.shape[1])
    pivots = vr[piv, cols]
    mags = np.abs(pivots)
    safe = mags > 0
    phase = np.where(safe, pivots / np.where(safe, mags, 1.0), 1.0)
    vr /= phase[None, :]
    ov = np.einsum("ij,ij->j", vl.conj(), vr)
    m = np.abs(ov)
    safe = m > 0
    vl *= np.where(safe, ov / np.where(safe, m, 1.0), 1.0)[None, :]


def _assemble(h: np.ndarray, w: np.ndarray, vr: np.ndarray, vl: np.ndarray) -> EigenSystem:
    """Sort, normalize, phase-fix, repair degenerate clusters, measure residuals."""
    order = _sort_order(w)
    w = w[order]
    vr = np.array(vr[:, order])
    vl = np.array(vl[:, order])

    vr /= np.linalg.norm(vr, axis=0)[None, :]
    vl /= np.linalg.norm(vl, axis=0)[None, :]
    _fix_phases(vr, vl)

    defect: list[int] = []
    ptol = PAIRING_TOL_REL * max(float(np.abs(w).max()), _TINY)
    for group in _cluster_eigenvalues(w, ptol):
        if len(group) < 2:
            continue
        idx = group
        m = vl[:, idx].conj().T @ vr[:, idx]
        smin = np.linalg.svd(m, compute_uv=False)[-1]
        if smin <= EP_TOL:
            defect.extend(int(i) for i in idx)
            continue
        # L' = L M^{-dagger} gives L'^dagger R = I on the cluster; then
        # renormalize, which leaves <l|r> real positive.
        vl[:, idx] = vl[:, idx] @ np.linalg.inv(m).conj().T
        vl[:, idx] /= np.linalg.norm(vl[:, idx], axis=0)[None, :]

    ov = np.einsum("ij,ij->j", vl.conj(), vr)
    self_orth = np.flatnonzero(np.abs(ov) <= EP_TOL)
    defect.extend(int(i) for i in self_orth if int(i) not in defect)

    hnorm = max(frobenius(h), _TINY)
    res_r = np.linalg.norm(h @ vr - vr * w[None, :], axis=0)
    res_l = np.linalg.norm(h.conj().T @ vl - vl * w.conj()[None, :], axis=0)
    residual_max = float(max(res_r.max(), res_l.max()) / hnorm)

    return EigenSystem(
        eigenvalues=w,
        right_vectors=vr,
        left_vectors=vl,
        residual_max=residual_max,
        is_defective=bool(defect),
        defect_indices=tuple(sorted(defect)),
    )


def eig_general(h: np.ndarray) -> EigenSystem:
    """Full eigendecomposition of a general (non-Hermitian) matrix.

    Left vectors come from the adjoint problem (same LAPACK call, index
    aligned with the right ones). Near-defective spectra set
    ``is_defective`` and report the offending indices; the caller decides
    whether to proceed.
    """
    h = as_matrix(h)
    if h.shape[0] > DIM_CAP:
        raise ValueError(f"dimension {h.shape[0]} exceeds cap {DIM_CAP}")
    if h.shape[0] == 1:
        w = np.array([h[0, 0]])
        one = np.ones((1, 1), dtype=complex)
        return _assemble(h, w, one.copy(), one.copy())
    # finiteness already enforced by as_matrix
    w, vl, vr = sla.eig(h, left=True, right=True, check_finite=False)
    return _assemble(h, w, vr, vl)


def eig_hermitian(a: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix: real ascending eigenvalues,
    orthonormal vectors, left == right.

    Rejects input whose asymmetry ||A - A†||_F exceeds HERM_TOL * ||A||_F.
    """
    a = as_matrix(a)
    if a.shape[0] > DIM_CAP:
        raise ValueError(f"dimension {a.shape[0]} exceeds cap {DIM_CAP}")
    anorm = frobenius(a)
    asym = frobenius(a - a.conj().T)
    if asym > HERM_TOL * max(anorm, _TINY):
        raise NonHermitianError(
            f"matrix is not Hermitian: ||A-A†||_F = {asym:.3e} "
            f"(relative {asym / max(anorm, _TINY):.3e})",
            asymmetry=asym,
        )
    herm = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(herm)
    v = np.array(v, dtype=complex)

    piv = np.argmax(np.abs(v), axis=0)
    cols = np.arange(v.shape[1])
    pivots = v[piv, cols]
    phase = pivots / np.abs(pivots)
    v /= phase[None, :]

    res = np.linalg.norm(herm @ v - v * w[None, :], axis=0)
    return EigenSystem(
        eigenvalues=w.astype(complex),
        right_vectors=v,
        left_vectors=v,
        residual_max=float(res.max() / max(anorm, _TINY)),
        is_defective=False,
    )


def commutator_norm(x: np.ndarray, y: np.ndarray) -> float:
    """||XY - YX||_F."""
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return frobenius(x @ y - y @ x)


def reconstruct(es: EigenSystem) -> np.ndarray:
    """Sum_l E_l |r_l><l_l| / <l_l|r_l> (completeness relation).

    Valid for non-defective systems; reproduces the original matrix.
    """
    ov = es.overlaps()
    scaled = es.right_vectors * (es.eigenvalues / ov)[None, :]
    return scaled @ es.left_vectors.conj().T
