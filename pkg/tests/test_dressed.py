import warnings

import numpy as np
import pytest

from hybridqed import (ModelParams, TruncationSpec, build_space, dress, manifold_diagnostic,
                       manifold_of_index, xdot_minus, xdot_plus)
from hybridqed.dressed import CHANNELS, FIELD_CHANNELS, coincident_transitions
from hybridqed.errors import SecularityWarning

from conftest import quiet_dress

UNCOUPLED = dict(g=0.0, omega_p=0.0, omega=1.7, omega_to=1.3)


@pytest.fixture(scope="module")
def uncoupled():
    s = build_space(TruncationSpec(3, 3))
    return quiet_dress(ModelParams(**UNCOUPLED), TruncationSpec(3, 3)), s


def bare_to_dressed(d, s):
    """Map bare index -> dressed index for a diagonal (uncoupled) Hamiltonian."""
    return np.argmax(np.abs(d.vectors), axis=1)


class TestUncoupledLimit:
    def test_xdot_is_scaled_annihilator(self, uncoupled):
        d, s = uncoupled
        a_dressed = d.vectors.conj().T @ s.a.toarray() @ d.vectors
        np.testing.assert_allclose(xdot_plus(d, "a"), -1j * d.params.omega0 * a_dressed,
                                   atol=1e-12)
        b_dressed = d.vectors.conj().T @ s.b.toarray() @ d.vectors
        np.testing.assert_allclose(xdot_plus(d, "b"), -1j * 1.3 * b_dressed, atol=1e-12)

    def test_adjacent_fock_elements(self, uncoupled):
        d, s = uncoupled
        m = bare_to_dressed(d, s)
        for n in range(3):
            for q in (0, 1):
                j, k = m[s.index(n, 1, q)], m[s.index(n + 1, 1, q)]
                assert d.Y["a"][j, k] == pytest.approx(-1j * np.sqrt(n + 1), abs=1e-12)
                assert d.rates["a"][j, k] == pytest.approx(d.params.gamma_a * (n + 1), rel=1e-12)


class TestTables:
    def test_gaps_default(self, default_dressed):
        d = default_dressed
        assert d.gap(1, 0) == pytest.approx(0.74, abs=0.01)
        assert d.gap(2, 0) == pytest.approx(1.04, abs=0.01)
        assert d.gap(3, 0) == pytest.approx(1.30, abs=0.01)

    def test_stored_pairs_are_downward(self, default_dressed):
        d = default_dressed
        for c in CHANNELS:
            j, k = np.nonzero(d.rates[c])
            assert np.all(k > j) and np.all(d.gaps[j, k] > 0)
            assert np.all(d.rates[c] >= 0)
            assert not np.any(np.tril(d.C[c]))

    def test_y_equals_gap_times_c(self, default_dressed):
        d = default_dressed
        for c in FIELD_CHANNELS:
            np.testing.assert_allclose(d.Y[c], d.gaps * d.C[c], atol=1e-15)

    def test_rates_formula(self, default_dressed):
        d = default_dressed
        for c in CHANNELS:
            expect = d.params.gammas[c] * d.gaps / d.params.omega0 * np.abs(d.C[c]) ** 2
            np.testing.assert_allclose(d.rates[c], np.triu(expect, 1), atol=1e-15)

    def test_drive_elements_hermitian(self, default_dressed):
        K = default_dressed.K
        np.testing.assert_allclose(K, K.conj().T, atol=1e-16)
        assert np.abs(K).max() <= default_dressed.params.drive_strength * np.sqrt(6)

    def test_parity_selection_rule(self, default_dressed):
        d = default_dressed
        assert np.all(d.parity != 0)
        same = d.parity[:, None] == d.parity[None, :]
        for c in CHANNELS:
            assert np.abs(d.matrix_elements[c][same]).max() < 1e-8

    def test_sum_rule(self, default_dressed, space55):
        d = default_dressed
        op = (space55.a - space55.a.conj().T).toarray()
        lhs = np.sum(np.abs(d.matrix_elements["a"]) ** 2, axis=0)
        rhs = np.real(np.einsum("ik,ij,jk->k", d.vectors.conj(), op.conj().T @ op, d.vectors))
        np.testing.assert_allclose(lhs, rhs, atol=1e-8)

    def test_parity_undefined_when_broken(self, broken_dressed):
        assert np.any(broken_dressed.parity == 0)
        assert broken_dressed.parity[0] != 0 or abs(broken_dressed.parity_expectation[0]) < 0.999


class TestXdot:
    @pytest.mark.parametrize("channel", FIELD_CHANNELS)
    def test_annihilates_ground(self, default_dressed, channel):
        ground = np.zeros(default_dressed.dimension)
        ground[0] = 1
        assert np.abs(xdot_plus(default_dressed, channel) @ ground).max() == 0

    def test_adjoint(self, default_dressed):
        np.testing.assert_array_equal(xdot_minus(default_dressed, "a"),
                                      xdot_plus(default_dressed, "a").conj().T)

    def test_rejects_qubit_channel(self, default_dressed):
        with pytest.raises(ValueError):
            xdot_plus(default_dressed, "sigma")


class TestManifolds:
    def test_index_rule(self):
        assert manifold_of_index(0) == 0
        assert [manifold_of_index(j) for j in (1, 2, 3)] == [1, 1, 1]
        assert [manifold_of_index(j) for j in range(4, 9)] == [2] * 5
        with pytest.raises(ValueError):
            manifold_of_index(-1)

    def test_linear_cavity_no_disagreement(self, linear_dressed):
        # manifolds up to K = 5 are complete in a 5/5 truncation (states 0..35)
        md = manifold_diagnostic(linear_dressed)
        assert not np.any(md.disagreement[:36])

    def test_default_lowest_nine_agree(self, default_dressed):
        md = manifold_diagnostic(default_dressed)
        assert not np.any(md.disagreement[:9]), f"flagged states {md.flagged[md.flagged < 9]}"

    def test_default_state_eight_is_three_excitation(self, default_dressed):
        # parity is an independent witness: K-excitation states carry parity (-1)**K
        d = default_dressed
        md = manifold_diagnostic(d)
        assert d.parity[8] == -1 and md.dominant[8] == 3
        assert np.all(d.parity == (-1) ** md.dominant)
        assert md.mean_excitation[8] == pytest.approx(3, abs=0.5)

    def test_crossing_flagged_in_scan(self, space55):
        flagged_at = None
        for g in np.linspace(0.0, 0.5, 51):
            md = manifold_diagnostic(quiet_dress(ModelParams(g=g)))
            if np.any(md.disagreement[:9]):
                flagged_at = g
                break
        assert flagged_at is not None and 0.1 < flagged_at < 0.3
        # the flag appears where levels 8 and 9 have just exchanged order
        d_before = quiet_dress(ModelParams(g=flagged_at - 0.02))
        assert manifold_diagnostic(d_before).dominant[8] == 2

    def test_labelling_choice(self, space55):
        d = dress(ModelParams(), space55, labelling="index")
        np.testing.assert_array_equal(d.manifold, [manifold_of_index(j) for j in range(72)])
        with pytest.raises(ValueError):
            dress(ModelParams(), space55, labelling="bogus")

    def test_excitation_labels_default(self, default_dressed):
        assert list(default_dressed.manifold[:10]) == [0, 1, 1, 1, 2, 2, 2, 2, 3, 2]


class TestSecularity:
    def test_degenerate_transitions_warn(self):
        with pytest.warns(SecularityWarning):
            dress(ModelParams(g=0.0, omega_p=0.0), build_space(TruncationSpec(2, 2)))

    def test_default_has_distinct_frequencies(self, default_dressed):
        assert coincident_transitions(default_dressed) == []

    def test_groups_found(self):
        d = quiet_dress(ModelParams(g=0.0, omega_p=0.0), TruncationSpec(2, 2))
        groups = coincident_transitions(d)
        assert groups and all(len(g) > 1 for g in groups)

    def test_default_does_not_warn(self, space55):
        with warnings.catch_warnings():
            warnings.simplefilter("error", SecularityWarning)
            dress(ModelParams(), space55)
