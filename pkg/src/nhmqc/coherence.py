"""Coherence-order decomposition, MQI spectrum, and its second moment.

The machinery works on a rank-1 biorthogonal state rho = |r><l| (optionally
divided by <l|r>) and a *reference basis*: the orthonormal eigenbasis of a
Hermitian observable A, with eigenvalues clustered into degenerate groups.
The coherence order m of a matrix element rho_jl is the gap between the
eigenvalue clusters of j and l; the multiple-quantum intensity

    I_m = sum_{gap(j,l) = m} |rho_jl|^2

and the second moment F = sqrt(sum_m m^2 I_m) measure how far the state's
coherences reach across the spectrum of A.

For half-integer spin observables the gaps m are integers; for generic
observables (e.g. the anti-Hermitian part of a hopping model) they are real
numbers and degenerate gaps are merged into one label.

Because the state is rank 1, I_m never needs the blocks themselves:
rho_jl = a_j b_l* / s factorizes, so each I_m is an outer-product sum over
cluster weights, O(d) memory. ``decompose`` materializes blocks only for
diagnostics and tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, ExceptionalPointError
from .linalg import EP_TOL, EigenSystem, as_matrix, eig_hermitian

# Eigenvalue clustering scale for the reference basis: relative to the
# spectral span, with an absolute floor so a zero observable still works.
GAP_TOL_REL = 1e-9
GAP_TOL_FLOOR = 1e-12


class Normalization(enum.Enum):
    """How rho is normalized.

    TRACE_ONE: rho = |r><l| / <l|r>  (Tr rho = 1; matches the biorthogonal
        completeness relation and diverges at exceptional points).
    UNIT_VECTORS: rho = |r><l| with ||r|| = ||l|| = 1.
    """

    TRACE_ONE = "trace_one"
    UNIT_VECTORS = "unit_vectors"


@dataclass(frozen=True)
class PureBiorthState:
    """Rank-1 state |r><l| with a normalization mode.

    Under TRACE_ONE the constructor fails loudly when |<l|r>| is at the
    self-orthogonality threshold (exceptional point): the normalized state
    does not exist there.
    """

    right: np.ndarray
    left: np.ndarray
    normalization: Normalization = Normalization.TRACE_ONE
    energy: complex = 0j

    def __post_init__(self):
        r = np.asarray(self.right, dtype=complex)
        l = np.asarray(self.left, dtype=complex)
        if r.ndim != 1 or l.shape != r.shape:
            raise ValueError("right and left must be vectors of equal length")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(l))):
            raise ValueError("state vectors must be finite")
        object.__setattr__(self, "right", r)
        object.__setattr__(self, "left", l)
        if self.normalization is Normalization.TRACE_ONE:
            if abs(self.overlap) <= EP_TOL:
                raise ExceptionalPointError(
                    f"|<l|r>| = {abs(self.overlap):.3e} <= {EP_TOL:g}: "
                    "state is self-orthogonal (exceptional point)"
                )
        elif self.normalization is Normalization.UNIT_VECTORS:
            for name, v in (("right", r), ("left", l)):
                if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                    raise ValueError(f"{name} vector is not unit norm")

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.left, self.right))

    @property
    def dim(self) -> int:
        return self.right.shape[0]

    def scale(self) -> complex:
        """Denominator s with rho = |r><l| / s."""
        if self.normalization is Normalization.TRACE_ONE:
            return self.overlap
        return 1.0 + 0j

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.right, self.left.conj()) / self.scale()

    def purity(self) -> float:
        """Tr(rho† rho), the MQI sum rule target."""
        r2 = float(np.vdot(self.right, self.right).real)
        l2 = float(np.vdot(self.left, self.left).real)
        return r2 * l2 / abs(self.scale()) ** 2


@dataclass(frozen=True)
class ReferenceBasis:
    """Orthonormal eigenbasis of a Hermitian observable with clustered
    eigenvalues and the derived gap labels m.

    ``pair_label_index[c, c']`` maps a (row cluster, column cluster) pair to
    the index of its gap label in ``gap_labels``; labels come in exact +-
    pairs around 0 by construction.
    """

    vectors: np.ndarray
    eigenvalues: np.ndarray
    cluster_labels: np.ndarray
    cluster_values: np.ndarray
    gap_labels: np.ndarray
    pair_label_index: np.ndarray
    gap_tol: float

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.cluster_values.shape[0]

    def max_label(self) -> float:
        return float(np.abs(self.gap_labels).max())

    def integer_labels(self, tol: float = 1e-9) -> np.ndarray | None:
        """Rounded labels if all gaps are integers within ``tol``, else None."""
        rounded = np.rint(self.gap_labels)
        if np.all(np.abs(self.gap_labels - rounded) <= tol):
            return rounded.astype(int)
        return None


def _chain_cluster(values: np.ndarray, tol: float) -> np.ndarray:
    """Cluster ascending real values: a gap > tol starts a new cluster."""
    labels = np.zeros(values.shape[0], dtype=int)
    if values.shape[0] > 1:
        labels[1:] = np.cumsum(np.diff(values) > tol)
    return labels


def make_reference_basis(a: np.ndarray, gap_tol: float | None = None) -> ReferenceBasis:
    """Build the reference basis of a Hermitian observable.

    Eigenvalues within ``gap_tol`` form one cluster (represented by the
    cluster mean); gap labels are the distinct pairwise differences of
    cluster representatives, including 0. Distinct gaps closer than
    ``gap_tol`` are merged ("non-degenerate gaps" labeling).
    """
    a = as_matrix(a)
    es = eig_hermitian(a)  # raises NonHermitianError beyond tolerance
    lam = es.eigenvalues.real
    span = float(lam[-1] - lam[0]) if lam.shape[0] > 1 else 0.0
    if gap_tol is None:
        gap_tol = max(GAP_TOL_REL * span, GAP_TOL_FLOOR)

    cluster_labels = _chain_cluster(lam, gap_tol)
    n_clusters = int(cluster_labels[-1]) + 1
    cluster_values = np.bincount(cluster_labels, weights=lam) / np.bincount(cluster_labels)

    # Positive gaps only; the label set is completed as {-g, 0, +g} so the
    # +-m symmetry is exact in floating point.
    if n_clusters > 1:
        diffs = cluster_values[:, None] - cluster_values[None, :]
        pos = np.sort(diffs[diffs > 0].ravel())
        group = _chain_cluster(pos, gap_tol)
        n_groups = int(group[-1]) + 1
        pos_reps = np.bincount(group, weights=pos) / np.bincount(group)
    else:
        pos_reps = np.zeros(0)
        n_groups = 0

    gap_labels = np.concatenate([-pos_reps[::-1], [0.0], pos_reps])

    # pair (c, c') -> label index; |diff| assigned to its positive group by
    # nearest-representative search (groups are > gap_tol apart).
    pair = np.full((n_clusters, n_clusters), n_groups, dtype=np.int32)  # zero label
    if n_groups:
        diffs = cluster_values[:, None] - cluster_values[None, :]
        mid = (pos_reps[:-1] + pos_reps[1:]) / 2
        g = np.searchsorted(mid, np.abs(diffs))
        upper = n_groups + 1 + g
        lower = n_groups - 1 - g
        pair = np.where(diffs > 0, upper, np.where(diffs < 0, lower, n_groups)).astype(np.int32)

    return ReferenceBasis(
        vectors=es.right_vectors,
        eigenvalues=lam,
        cluster_labels=cluster_labels,
        cluster_values=cluster_values,
        gap_labels=gap_labels,
        pair_label_index=pair,
        gap_tol=float(gap_tol),
    )


@dataclass(frozen=True)
class MQISpectrum:
    """MQI values I_m per gap label plus the second moment F."""

    labels: np.ndarray
    intensities: np.ndarray
    second_moment: float

    @property
    def entries(self) -> list[tuple[float, float]]:
        return [(float(m), float(i)) for m, i in zip(self.labels, self.intensities)]

    def total(self) -> float:
        return float(self.intensities.sum())

    def intensity(self, m: float, tol: float = 1e-9) -> float:
        k = np.flatnonzero(np.abs(self.labels - m) <= tol)
        if k.shape[0] != 1:
            raise KeyError(f"no unique gap label at m = {m}")
        return float(self.intensities[k[0]])


def _state_weights(rho: PureBiorthState, basis: ReferenceBasis):
    """Per-cluster weights of |r> and |l| in the reference basis."""
    if rho.dim != basis.dim:
        raise ValueError(f"dimension mismatch: state {rho.dim}, basis {basis.dim}")
    a = basis.vectors.conj().T @ rho.right   # a_j = <psi_j|r>
    b = basis.vectors.conj().T @ rho.left    # b_j = <psi_j|l>
    return a, b


def decompose(rho: PureBiorthState, basis: ReferenceBasis) -> dict[float, np.ndarray]:
    """Coherence-order blocks rho_m, as matrices in the reference basis.

    The blocks partition the index pairs, so sum_m rho_m reassembles the
    matrix of rho in the reference basis entrywise exactly.
    """
    a, b = _state_weights(rho, basis)
    full = np.outer(a, b.conj()) / rho.scale()
    labels_elem = basis.pair_label_index[
        basis.cluster_labels[:, None], basis.cluster_labels[None, :]
    ]
    blocks: dict[float, np.ndarray] = {}
    for g in np.unique(labels_elem):
        block = np.where(labels_elem == g, full, 0.0)
        blocks[float(basis.gap_labels[g])] = block
    return blocks


def mqi(rho: PureBiorthState, basis: ReferenceBasis) -> MQISpectrum:
    """MQI spectrum I_m = sum |rho_jl|^2 over gap-m pairs, and F.

    Accumulates |rho_jl|^2 = |a_j|^2 |b_l|^2 / |s|^2 per cluster pair; no
    block is materialized.
    """
    a, b = _state_weights(rho, basis)
    u = np.bincount(basis.cluster_labels, weights=np.abs(a) ** 2,
                    minlength=basis.n_clusters)
    v = np.bincount(basis.cluster_labels, weights=np.abs(b) ** 2,
                    minlength=basis.n_clusters)
    weights = np.outer(u, v) / abs(rho.scale()) ** 2
    intensities = np.bincount(
        basis.pair_label_index.ravel(),
        weights=weights.ravel(),
        minlength=basis.gap_labels.shape[0],
    )
    second = float(np.sqrt((basis.gap_labels ** 2 * intensities).sum()))
    return MQISpectrum(labels=basis.gap_labels, intensities=intensities, second_moment=second)


def sum_rule(rho: PureBiorthState, basis: ReferenceBasis, tol: float = 1e-10) -> float:
    """sum_m I_m, checked against Tr(rho† rho).

    The two are equal by construction of the decomposition; a violation
    means the pipeline itself is broken, hence the hard error.
    """
    total = mqi(rho, basis).total()
    expected = rho.purity()
    if abs(total - expected) > tol * max(1.0, abs(expected)):
        raise ConsistencyError(
            f"MQI sum rule violated: sum I_m = {total!r}, Tr(rho† rho) = {expected!r}"
        )
    return total


def state_from_eigensystem(
    es: EigenSystem,
    index: int,
    normalization: Normalization = Normalization.TRACE_ONE,
) -> PureBiorthState:
    """Wrap eigenvector pair ``index`` of an EigenSystem as a rank-1 state."""
    return PureBiorthState(
        right=es.right_vectors[:, index],
        left=es.left_vectors[:, index],
        normalization=normalization,
        energy=complex(es.eigenvalues[index]),
    )
