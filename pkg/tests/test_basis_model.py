import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridqed import (ModelParams, TruncationSpec, build_hs, build_parity, build_space,
                       commutator_norm, coupling_constants, excitation_number_op,
                       hermitian_eig, spectrum_sweep)
from hybridqed.basis import EXCITED, GROUND
from hybridqed.errors import DimensionOverflow, InvalidParams


@pytest.fixture(scope="module")
def s23():
    return build_space(TruncationSpec(2, 3))


class TestBasis:
    def test_dimension(self):
        assert TruncationSpec(5, 5).dimension == 72
        assert build_space(TruncationSpec(1, 1)).dimension == 8

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_invalid_truncation(self, bad):
        with pytest.raises(InvalidParams):
            TruncationSpec(bad, 2)

    def test_dimension_cap(self):
        with pytest.raises(DimensionOverflow):
            build_space(TruncationSpec(40, 60))
        with pytest.raises(DimensionOverflow):
            build_space(TruncationSpec(2, 2), dimension_cap=10)

    def test_index_bijection(self, s23):
        seen = {s23.index(*s23.state(i)) for i in range(s23.dimension)}
        assert seen == set(range(s23.dimension))
        # photon slowest, qubit fastest
        assert s23.index(0, 0, 1) == 1 and s23.index(0, 1, 0) == 2 and s23.index(1, 0, 0) == 8

    def test_photon_only_lowering(self):
        s = build_space(TruncationSpec(1, 1))
        # restrict to n_b = 0, qubit ground
        idx = [s.index(n, 0, GROUND) for n in (0, 1)]
        a = s.a.toarray()[np.ix_(idx, idx)]
        np.testing.assert_array_equal(a, [[0, 1], [0, 0]])

    def test_number_operator_diagonal(self, s23):
        n = (s23.a.conj().T @ s23.a).toarray()
        assert np.count_nonzero(n - np.diag(np.diag(n))) == 0
        np.testing.assert_allclose(np.diag(n).real, s23.labels[:, 0])

    def test_truncated_commutator(self, s23):
        comm = (s23.a @ s23.a.conj().T - s23.a.conj().T @ s23.a).toarray()
        expect = np.where(s23.labels[:, 0] == 2, -2.0, 1.0)
        np.testing.assert_allclose(comm, np.diag(expect), atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2), st.integers(0, 3), st.sampled_from([EXCITED, GROUND]))
    def test_operators_on_basis_states(self, na, nb, q):
        s = build_space(TruncationSpec(2, 3))
        v = s.basis_vector(na, nb, q)
        out = s.a @ v
        if na == 0:
            assert not np.any(out)
        else:
            np.testing.assert_allclose(out, np.sqrt(na) * s.basis_vector(na - 1, nb, q))
        out = s.b @ v
        if nb == 0:
            assert not np.any(out)
        else:
            np.testing.assert_allclose(out, np.sqrt(nb) * s.basis_vector(na, nb - 1, q))
        out = s.sigma_minus @ v
        if q == EXCITED:
            np.testing.assert_allclose(out, s.basis_vector(na, nb, GROUND))
        else:
            assert not np.any(out)
        # a a^dag - a^dag a = 1 below the top photon level
        if na < 2:
            comm = s.a @ (s.a.conj().T @ v) - s.a.conj().T @ (s.a @ v)
            np.testing.assert_allclose(comm, v, atol=1e-14)

    def test_pauli_relations(self, s23):
        np.testing.assert_array_equal((s23.sigma_minus + s23.sigma_minus.conj().T).toarray(),
                                      s23.sigma_x.toarray())
        sz = s23.sigma_z.diagonal().real
        np.testing.assert_array_equal(sz, np.where(s23.labels[:, 2] == EXCITED, 1.0, -1.0))

    def test_excitation_number(self, s23):
        n = excitation_number_op(s23)
        assert (n @ s23.basis_vector(0, 0, GROUND))[s23.index(0, 0, GROUND)] == 0
        assert (n @ s23.basis_vector(2, 1, EXCITED))[s23.index(2, 1, EXCITED)] == 3
        expect = 2 * sum(na + nb for na in range(3) for nb in range(4))
        assert n.diagonal().sum().real == expect


class TestCouplings:
    def test_zero_plasma(self):
        c = coupling_constants(ModelParams(omega_p=0.0))
        assert (c.g_C, c.g_D) == (0.0, 0.0)

    def test_unit_arithmetic(self):
        c = coupling_constants(ModelParams(omega_p=2.0, omega0=1.0, omega_to=1.0))
        assert c.g_C == pytest.approx(1.0) and c.g_D == pytest.approx(1.0)

    def test_default_point(self):
        p = ModelParams()
        c = coupling_constants(p)
        assert c.g_D == 0.015625
        assert p.phonon_frequency == pytest.approx(1.03125)
        assert c.g_C == pytest.approx(0.125 * np.sqrt(1.03125), rel=1e-15)
        # the quoted six-digit value is low by one unit in the last place
        assert c.g_C == pytest.approx(0.126937, abs=2e-6)

    @pytest.mark.parametrize("kw", [{"omega0": 0.0}, {"omega_to": -1.0}, {"gamma_a": -0.1},
                                    {"theta": 4.0}, {"g": float("nan")}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidParams):
            coupling_constants(ModelParams(**kw))

    def test_defaults_tied(self):
        p = ModelParams()
        assert p.qubit_frequency == pytest.approx(1 + 2 * 0.015625)
        assert p.resolved().omega == p.qubit_frequency
        assert ModelParams(omega=2.0).qubit_frequency == 2.0


class TestHamiltonian:
    def test_uncoupled_diagonal(self, s23):
        p = ModelParams(g=0.0, omega_p=0.0, omega=1.7, omega_to=1.3)
        h = build_hs(p, s23)
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
        lab = s23.labels
        expect = (lab[:, 0] * 1.0 + lab[:, 1] * 1.3 + np.where(lab[:, 2] == EXCITED, 0.85, -0.85)
                  + 0.5 * (1.0 + 1.3))
        np.testing.assert_allclose(np.diag(h).real, expect, atol=1e-14)

    def test_hermitian(self, s23):
        h = build_hs(ModelParams(theta=1.0), s23)
        assert np.max(np.abs(h - h.conj().T)) == 0.0

    def test_gap_default(self, default_dressed):
        assert default_dressed.gap(1, 0) == pytest.approx(0.74, abs=0.01)

    def test_parity(self, space55):
        pi = build_parity(space55)
        np.testing.assert_array_equal(pi @ pi, np.eye(72))
        assert set(np.diag(pi).real) == {-1.0, 1.0}
        assert commutator_norm(build_hs(ModelParams(), space55), pi) < 1e-12
        assert commutator_norm(build_hs(ModelParams(theta=np.pi / 4), space55), pi) > 1e-3

    def test_eigenstate_parity(self, space55):
        eig = hermitian_eig(build_hs(ModelParams(), space55))
        pi = np.diag(build_parity(space55)).real
        pexp = np.einsum("ij,i,ij->j", eig.vectors.conj(), pi, eig.vectors).real
        assert np.all(np.abs(pexp) > 1 - 1e-8)
        assert pexp[0] == pytest.approx(1.0)

    @pytest.mark.parametrize("theta", [0.3, np.pi / 4, 1.2])
    def test_theta_reflection(self, space55, theta):
        e1 = hermitian_eig(build_hs(ModelParams(theta=theta), space55)).values
        e2 = hermitian_eig(build_hs(ModelParams(theta=np.pi - theta), space55)).values
        np.testing.assert_allclose(e1, e2, atol=1e-10)


class TestSpectrumSweep:
    @pytest.fixture(scope="class")
    @staticmethod
    def sweeps(space55):
        g = np.linspace(0, 0.5, 201)
        return g, {th: spectrum_sweep(ModelParams(theta=th), space55, g, 10)
                   for th in (np.pi / 2, np.pi / 4)}

    def test_shape_and_errors(self, space55):
        out = spectrum_sweep(ModelParams(), space55, [0.0, 0.1], 4)
        assert out.shape == (2, 4)
        with pytest.raises(InvalidParams):
            spectrum_sweep(ModelParams(), space55, [np.inf], 4)
        with pytest.raises(InvalidParams):
            spectrum_sweep(ModelParams(), space55, [0.1], 0)

    def test_zero_coupling_column(self, space55):
        p = ModelParams(g=0.0)
        e = spectrum_sweep(p, space55, [0.0], 72)[0]
        # qubit decouples: levels are plasmon-phonon levels shifted by +-omega/2
        pp = hermitian_eig(build_hs(p.resolved().replace(omega=0.0), space55)).values[::2]
        w = p.qubit_frequency
        np.testing.assert_allclose(e, np.sort(np.concatenate([pp - w / 2, pp + w / 2])),
                                   atol=1e-9)

    def test_continuity(self, sweeps):
        g, data = sweeps
        for e in data.values():
            assert np.max(np.abs(np.diff(e, axis=0))) < 0.02

    def test_crossings_versus_avoided(self, sweeps):
        # the parity-conserving spectrum has (near-)exact touchings between levels
        # of opposite parity; breaking parity opens them into avoided crossings
        g, data = sweeps
        gaps_pi2 = np.diff(data[np.pi / 2], axis=1)
        gaps_pi4 = np.diff(data[np.pi / 4], axis=1)
        i, k = np.unravel_index(np.argmin(gaps_pi2[:, :6]), gaps_pi2[:, :6].shape)
        assert gaps_pi2[i, k] < 2e-3
        window = gaps_pi4[max(0, i - 10):i + 11, k]
        assert window.min() > 5 * gaps_pi2[i, k]
