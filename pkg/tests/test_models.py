import numpy as np
import pytest

from nhmqc import (
    DisorderParams,
    HNParams,
    IsingParams,
    TwoLevelParams,
    build_collective_sz,
    build_hatano_nelson,
    build_ising,
    build_spin_observable,
    build_two_level,
    commutator_norm,
    hermitian_split,
    sample_disorder,
)
from nhmqc.models import SIGMA_X, SIGMA_Y, SIGMA_Z


def lift(op, site, L):
    """Independent Kronecker-product oracle for single-site operators."""
    mats = [np.eye(2, dtype=complex)] * L
    mats[site] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def ising_kron_oracle(p: IsingParams) -> np.ndarray:
    h = np.zeros((2 ** p.L, 2 ** p.L), dtype=complex)
    for j in range(p.L):
        zj = lift(SIGMA_Z, j, p.L)
        h += -p.J * zj @ lift(SIGMA_Z, (j + 1) % p.L, p.L)
        h += -p.J2 * zj @ lift(SIGMA_Z, (j + 2) % p.L, p.L)
        h += -p.Gamma * lift(SIGMA_X, j, p.L)
        h += -1j * p.h_z * zj
        h += -1j * p.h_y * lift(SIGMA_Y, j, p.L)
    return h


class TestTwoLevel:
    def test_pure_coupling_is_sigma_x(self):
        p = TwoLevelParams(u=(1.0, 0.0, 0.0), gamma=(0.0, 0.0, 0.0))
        assert np.array_equal(build_two_level(p), SIGMA_X)

    def test_formula_expansion(self):
        # (u - i gamma) . sigma with gamma along z gives -i*gz on sigma_z
        p = TwoLevelParams(u=(1.0, 0.0, 0.0), gamma=(0.0, 0.0, 0.5))
        expected = np.array([[-0.5j, 1.0], [1.0, 0.5j]])
        assert np.array_equal(build_two_level(p), expected)

    def test_gain_loss_convention(self):
        # the named PT special case realizes J sx + i Gamma sz
        h = build_two_level(TwoLevelParams.gain_loss(1.0, 0.5))
        expected = np.array([[0.5j, 1.0], [1.0, -0.5j]])
        assert np.array_equal(h, expected)
        w = np.linalg.eigvals(h)
        assert np.allclose(sorted(w.real), [-np.sqrt(0.75), np.sqrt(0.75)], atol=1e-12)
        assert np.allclose(w.imag, 0.0, atol=1e-12)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError, match="unit"):
            TwoLevelParams(u=(1, 0, 0), gamma=(0, 0, 0), n_hat=(1.0, 1.0, 0.0))


class TestSpinObservable:
    def test_z_axis(self):
        assert np.array_equal(build_spin_observable((0.0, 0.0, 1.0)), SIGMA_Z / 2)

    def test_y_axis(self):
        assert np.array_equal(build_spin_observable((0.0, 1.0, 0.0)), SIGMA_Y / 2)

    def test_tilted_axis_eigenvalues(self):
        n = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
        a = build_spin_observable(n)
        assert np.abs(a - a.conj().T).max() < 1e-15
        assert np.allclose(np.linalg.eigvalsh(a), [-0.5, 0.5])

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError, match="unit"):
            build_spin_observable((1.0, 1.0, 1.0))


class TestCollectiveSz:
    def test_single_site(self):
        assert np.array_equal(build_collective_sz(1), SIGMA_Z / 2)

    def test_two_sites(self):
        assert np.array_equal(np.diag(build_collective_sz(2)), [1.0, 0.0, 0.0, -1.0])

    def test_three_site_multiplicities(self):
        vals = np.sort(np.diag(build_collective_sz(3)).real)
        assert np.array_equal(vals, [-1.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 1.5])

    def test_site_cap(self):
        with pytest.raises(ValueError):
            build_collective_sz(15)


class TestIsing:
    def test_matches_kron_oracle(self):
        for (L, J, J2, G, hy, hz) in [
            (3, 1.0, 0.0, 0.7, 0.0, 0.2),
            (4, 0.4, 0.1, 1.0, 0.3, 0.15),
            (5, 0.4, 0.1, 1.0, 0.0, 0.1),
        ]:
            p = IsingParams(L=L, J=J, J2=J2, Gamma=G, h_y=hy, h_z=hz)
            h = build_ising(p)
            oracle = ising_kron_oracle(p)
            assert np.abs(h - oracle).max() < 1e-13

    def test_classical_ground_energy(self):
        p = IsingParams(L=3, J=1.0, J2=0.0, Gamma=0.0, h_y=0.0, h_z=0.0)
        h = build_ising(p)
        assert np.abs(h - np.diag(np.diag(h))).max() == 0.0
        assert np.min(np.diag(h).real) == -3.0

    def test_free_spin_ground_energy(self):
        p = IsingParams(L=2, J=0.0, J2=0.0, Gamma=1.0, h_y=0.0, h_z=0.0)
        evals = np.linalg.eigvalsh(build_ising(p))
        assert abs(evals[0] - (-2.0)) < 1e-12

    def test_hermitian_without_imaginary_fields(self):
        p = IsingParams(L=4, J=0.7, J2=0.2, Gamma=0.9, h_y=0.0, h_z=0.0)
        h = build_ising(p)
        assert np.linalg.norm(h - h.conj().T) <= 1e-14

    def test_complex_symmetric_when_hy_zero(self):
        p = IsingParams(L=4, J=0.4, J2=0.1, Gamma=1.0, h_y=0.0, h_z=0.3)
        h = build_ising(p)
        assert np.abs(h - h.T).max() == 0.0

    def test_hy_breaks_symmetry(self):
        p = IsingParams(L=3, J=0.4, J2=0.0, Gamma=1.0, h_y=0.2, h_z=0.0)
        h = build_ising(p)
        assert np.abs(h - h.T).max() > 0.1

    def test_commutes_with_collective_sz_when_diagonal(self):
        p = IsingParams(L=4, J=1.0, J2=0.3, Gamma=0.0, h_y=0.0, h_z=0.2)
        assert commutator_norm(build_ising(p), build_collective_sz(4)) == 0.0

    def test_nnn_needs_three_sites(self):
        with pytest.raises(ValueError, match="NNN"):
            IsingParams(L=2, J=1.0, J2=0.5, Gamma=0.0, h_y=0.0, h_z=0.0)


class TestHatanoNelson:
    def test_two_site_chain(self):
        h = build_hatano_nelson(HNParams(N=2, J_L=1.0, J_R=2.0))
        assert np.array_equal(h, np.array([[0.0, 1.0], [2.0, 0.0]]))
        assert np.allclose(sorted(np.linalg.eigvals(h).real), [-np.sqrt(2), np.sqrt(2)])

    def test_hermitian_ring_spectrum(self):
        h = build_hatano_nelson(HNParams(N=4, J_L=1.0, J_R=1.0, delta_L=1.0, delta_R=1.0))
        assert np.abs(h - h.conj().T).max() == 0.0
        assert np.allclose(np.sort(np.linalg.eigvalsh(h)), [-2.0, 0.0, 0.0, 2.0], atol=1e-12)

    def test_boundary_hopping_placement(self):
        h = build_hatano_nelson(HNParams(N=5, J_L=1.0, J_R=2.0, delta_L=3.0, delta_R=4.0))
        assert h[0, 4] == 4.0   # c_1† c_N
        assert h[4, 0] == 3.0   # c_N† c_1

    def test_onsite_values(self):
        v = np.array([0.1, -0.2, 0.3])
        h = build_hatano_nelson(HNParams(N=3, J_L=1.0, J_R=1.0, disorder=v))
        assert np.allclose(np.diag(h), v)

    def test_disorder_params_resolved(self):
        p = HNParams(N=6, J_L=1.0, J_R=2.0,
                     disorder=DisorderParams(W=0.5, seed=3, realization_index=1))
        h = build_hatano_nelson(p)
        assert np.array_equal(np.diag(h).real, sample_disorder(0.5, 6, 3, 1))


class TestHermitianSplit:
    def test_hermitian_input_has_zero_antipart(self):
        a = build_collective_sz(2)
        h1, h2 = hermitian_split(a)
        assert np.abs(h2).max() == 0.0
        assert np.array_equal(h1, a)

    def test_pure_gain_loss(self):
        h1, h2 = hermitian_split(0.7j * SIGMA_Z)
        assert np.abs(h1).max() == 0.0
        assert np.allclose(h2, 0.7 * SIGMA_Z)

    def test_open_chain_antipart_pattern(self):
        # H2 entries are (J_L - J_R)/(2i) above, its conjugate below
        h = build_hatano_nelson(HNParams(N=4, J_L=1.0, J_R=2.0))
        _, h2 = hermitian_split(h)
        up = (1.0 - 2.0) / 2j
        expected = np.diag([up] * 3, k=1) + np.diag([np.conj(up)] * 3, k=-1)
        assert np.abs(h2 - expected).max() < 1e-15

    def test_split_formulas_random_draws(self):
        # independent reconstruction of the split from the coefficient
        # formulas (bulk (J_L +- J_R)/2, boundary (delta_R +- delta_L)/2)
        rng = np.random.default_rng(11)
        for _ in range(5):
            jl, jr, dl, dr = rng.uniform(-2, 2, 4)
            n = 7
            v = rng.uniform(-1, 1, n)
            h = build_hatano_nelson(HNParams(N=n, J_L=jl, J_R=jr, delta_L=dl,
                                             delta_R=dr, disorder=v))
            h1, h2 = hermitian_split(h)
            up = np.diag(np.ones(n - 1), k=1)
            dn = up.T
            b_up = np.zeros((n, n)); b_up[0, n - 1] = 1.0   # c_1† c_N
            b_dn = b_up.T                                    # c_N† c_1
            h1_ref = ((jl + jr) / 2) * (up + dn) + ((dr + dl) / 2) * (b_up + b_dn) + np.diag(v)
            h2_ref = ((jl - jr) / 2j) * (up - dn) + ((dl - dr) / 2j) * (b_dn - b_up)
            assert np.abs(h1 - h1_ref).max() < 1e-15
            assert np.abs(h2 - h2_ref).max() < 1e-15
            assert np.abs((h1 + 1j * h2) - h).max() < 1e-15
            assert np.abs(h1 - h1.conj().T).max() == 0.0
            assert np.abs(h2 - h2.conj().T).max() == 0.0


class TestSampleDisorder:
    def test_zero_strength(self):
        assert np.array_equal(sample_disorder(0.0, 10, 1, 0), np.zeros(10))

    def test_deterministic(self):
        a = sample_disorder(1.0, 50, 42, 3)
        b = sample_disorder(1.0, 50, 42, 3)
        assert np.array_equal(a, b)

    def test_distinct_keys_differ(self):
        a = sample_disorder(1.0, 50, 42, 3)
        assert not np.array_equal(a, sample_disorder(1.0, 50, 42, 4))
        assert not np.array_equal(a, sample_disorder(1.0, 50, 43, 3))

    def test_bounds(self):
        v = sample_disorder(0.7, 1000, 5, 0)
        assert np.all(np.abs(v) <= 0.7)

    def test_uniform_moments(self):
        # law of large numbers for Uniform(-1, 1): mean 0, variance 1/3
        v = sample_disorder(1.0, 100_000, 9, 0)
        assert abs(v.mean()) < 0.01
        assert abs(v.var() - 1.0 / 3.0) < 0.01

    def test_negative_strength_rejected(self):
        with pytest.raises(ValueError):
            sample_disorder(-1.0, 5, 0, 0)
