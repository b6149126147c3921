"""Hamiltonians and observables as explicit dense matrices.

Model families:
  * two-level gain/loss system  H = (u - i*gamma) . sigma
  * transverse-field Ising chain with NN + NNN couplings and imaginary
    fields, periodic boundaries
  * Hatano-Nelson chain with asymmetric hopping, generalized boundary
    hoppings and optional on-site disorder

Site indices are 1-based in the docs (matching the usual lattice notation)
and 0-based in the code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

L_CAP = 14
N_CAP = 4096


def _vec3(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"{name} must be a real 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class TwoLevelParams:
    """Couplings u, gain/loss rates gamma, and the reference axis n_hat."""

    u: tuple[float, float, float]
    gamma: tuple[float, float, float]
    n_hat: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        _vec3(self.u, "u")
        _vec3(self.gamma, "gamma")
        n = _vec3(self.n_hat, "n_hat")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError(f"n_hat must be a unit vector, |n| = {np.linalg.norm(n)}")

    @classmethod
    def gain_loss(cls, j: float, gamma: float, n_hat=(0.0, 0.0, 1.0)) -> "TwoLevelParams":
        """The PT-symmetric special case H = J sigma_x + i Gamma sigma_z."""
        return cls(u=(j, 0.0, 0.0), gamma=(0.0, 0.0, -gamma), n_hat=tuple(n_hat))


@dataclass(frozen=True)
class IsingParams:
    """Chain length and couplings of the non-Hermitian Ising model (PBC)."""

    L: int
    J: float
    J2: float
    Gamma: float
    h_y: float
    h_z: float
    bc: str = "periodic"

    def __post_init__(self):
        if self.bc != "periodic":
            raise ValueError(f"unsupported boundary condition {self.bc!r}")
        if self.L < 2:
            raise ValueError("L must be >= 2")
        if self.L > L_CAP:
            raise ValueError(f"L = {self.L} exceeds cap {L_CAP}")
        if self.J2 != 0.0 and self.L < 3:
            raise ValueError("NNN coupling needs L >= 3 for the periodic wrap to be well defined")
        for name in ("J", "J2", "Gamma", "h_y", "h_z"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class DisorderParams:
    """Uniform on-site disorder V_j in [-W, W], drawn by a keyed generator."""

    W: float
    seed: int
    realization_index: int = 0

    def __post_init__(self):
        if self.W < 0:
            raise ValueError("disorder strength W must be >= 0")


@dataclass(frozen=True)
class HNParams:
    """Hatano-Nelson chain: bulk hoppings, boundary hoppings, optional disorder.

    ``disorder`` may be None (clean), a DisorderParams (sampled), or an
    explicit length-N array of on-site energies.
    """

    N: int
    J_L: float
    J_R: float
    delta_L: float = 0.0
    delta_R: float = 0.0
    disorder: DisorderParams | tuple | np.ndarray | None = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if self.N > N_CAP:
            raise ValueError(f"N = {self.N} exceeds cap {N_CAP}")
        for name in ("J_L", "J_R", "delta_L", "delta_R"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def onsite(self) -> np.ndarray:
        if self.disorder is None:
            return np.zeros(self.N)
        if isinstance(self.disorder, DisorderParams):
            d = self.disorder
            return sample_disorder(d.W, self.N, d.seed, d.realization_index)
        v = np.asarray(self.disorder, dtype=float)
        if v.shape != (self.N,):
            raise ValueError(f"explicit on-site values must have shape ({self.N},)")
        return v


def build_two_level(p: TwoLevelParams) -> np.ndarray:
    """(u_x - i g_x) sigma_x + (u_y - i g_y) sigma_y + (u_z - i g_z) sigma_z."""
    u = _vec3(p.u, "u")
    g = _vec3(p.gamma, "gamma")
    c = u - 1j * g
    return c[0] * SIGMA_X + c[1] * SIGMA_Y + c[2] * SIGMA_Z


def build_spin_observable(n_hat) -> np.ndarray:
    """(1/2) n_hat . sigma for a unit axis n_hat; eigenvalues +-1/2."""
    n = _vec3(n_hat, "n_hat")
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"n_hat must be a unit vector, |n| = {np.linalg.norm(n)}")
    return 0.5 * (n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z)


def _site_z(L: int) -> np.ndarray:
    """(2^L, L) array of sigma_z diagonals per site; site 0 is the leftmost
    Kronecker factor (most significant bit)."""
    idx = np.arange(2 ** L)
    bits = (idx[:, None] >> np.arange(L)[::-1]) & 1
    return 1.0 - 2.0 * bits


def build_collective_sz(L: int) -> np.ndarray:
    """(1/2) sum_j sigma_j^z, diagonal in the computational basis."""
    if not 1 <= L <= L_CAP:
        raise ValueError(f"L must be in [1, {L_CAP}]")
    diag = 0.5 * _site_z(L).sum(axis=1)
    return np.diag(diag.astype(complex))


def build_ising(p: IsingParams) -> np.ndarray:
    """H = H1 + i H2 with
    H1 = -sum_j (J sz_j sz_{j+1} + J2 sz_j sz_{j+2} + Gamma sx_j)   (PBC)
    H2 = -sum_j (h_z sz_j + h_y sy_j)
    """
    L = p.L
    d = 2 ** L
    z = _site_z(L)
    idx = np.arange(d)

    diag = np.zeros(d, dtype=complex)
    for j in range(L):
        diag += -p.J * z[:, j] * z[:, (j + 1) % L]
        if p.J2 != 0.0:
            diag += -p.J2 * z[:, j] * z[:, (j + 2) % L]
    diag += -1j * p.h_z * z.sum(axis=1)

    h = np.diag(diag)
    for j in range(L):
        mask = 1 << (L - 1 - j)
        flip = idx ^ mask
        # -Gamma sigma_x: plain bit flip
        h[flip, idx] += -p.Gamma
        # -i h_y sigma_y: (sigma_y)_{1,0} = i, (sigma_y)_{0,1} = -i, so the
        # flip element is +h_y when the source bit is 0 and -h_y otherwise
        if p.h_y != 0.0:
            h[flip, idx] += p.h_y * z[:, j]
    return h


def build_hatano_nelson(p: HNParams) -> np.ndarray:
    """Single-particle N x N matrix: J_L on the upper diagonal, J_R on the
    lower one, boundary hoppings delta_R = H[0, N-1], delta_L = H[N-1, 0],
    on-site energies on the diagonal."""
    n = p.N
    h = np.zeros((n, n), dtype=complex)
    j = np.arange(n - 1)
    h[j, j + 1] = p.J_L
    h[j + 1, j] = p.J_R
    h[0, n - 1] += p.delta_R
    h[n - 1, 0] += p.delta_L
    h[np.diag_indices(n)] += p.onsite()
    return h


def hermitian_split(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """H1 = (H + H†)/2, H2 = (H - H†)/(2i); both exactly Hermitian,
    H1 + i H2 == H up to rounding."""
    h = as_matrix(h)
    h1 = (h + h.conj().T) / 2
    h2 = (h - h.conj().T) / 2j
    return h1, h2


def sample_disorder(w: float, n: int, seed: int, realization_index: int) -> np.ndarray:
    """N uniform draws from [-W, W], keyed by (seed, realization_index).

    Counter-based (Philox) and therefore bit-reproducible across platforms
    and thread schedules; the same key always returns the same vector.
    """
    if w < 0:
        raise ValueError("disorder strength W must be >= 0")
    key = np.array([seed % 2 ** 64, realization_index % 2 ** 64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.uniform(-w, w, size=n)
