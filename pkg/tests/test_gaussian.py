import csv
import io
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

import randgen
from clusterforge import graphs
from clusterforge.errors import DimensionMismatch, InvalidParam
from clusterforge.gaussian import (
    fit_decay_rate,
    heisenberg_transform,
    nullifier_matrix,
    nullifier_report,
    output_covariance,
    phase_shift_matrix,
    sweep_alpha,
    symplectic_eigenvalues,
    symplectic_form,
)
from clusterforge.graphs import BipartitePartition, ClusterGraph, block_adjacency, partition_from_plus_set
from clusterforge.spectral import spectral_norm
from clusterforge.synthesis import SynthesisFreedom, synthesize_G

S = 1 / math.sqrt(2)
SQUARE_A = ClusterGraph(block_adjacency([[-S, S], [S, S]]))
SQUARE_P = partition_from_plus_set(SQUARE_A, [0, 1])
STAR = graphs.star(4)
STAR_P = partition_from_plus_set(STAR, [0])
K4 = graphs.complete(4).adjacency
seeds = st.integers(0, 2**32 - 1)


def oracle_covariance(A, plus, G, alpha):
    """Separate construction: scipy expm and a mode-by-mode rotation loop."""
    n = G.shape[0]
    U = np.zeros((2 * n, 2 * n))
    U[:n, :n] = scipy.linalg.expm(alpha * G)
    U[n:, n:] = scipy.linalg.expm(-alpha * G)
    T = np.zeros((2 * n, 2 * n))
    for m in range(n):
        q, p = m, n + m
        if m in plus:
            T[q, q] = T[p, p] = 1.0
        else:
            # rows are the new (q, p) in terms of the old ones: q' = -p, p' = q
            T[q, p] = -1.0
            T[p, q] = 1.0
    K = np.zeros((n, 2 * n))
    for i in range(n):
        K[i, n + i] = 1.0
        for j in range(n):
            K[i, j] = -A[i, j]
    K = K @ T @ U
    return K @ K.T


class TestTransforms:
    def test_alpha_zero_is_identity(self):
        np.testing.assert_allclose(heisenberg_transform(K4, 0.0).S, np.eye(8), atol=1e-14)

    @pytest.mark.parametrize("alpha", [0.1, 0.7, 2.0])
    def test_two_mode_closed_form(self, alpha):
        S_ = heisenberg_transform([[0.0, 2.0], [2.0, 0.0]], alpha).S
        c, s = math.cosh(2 * alpha), math.sinh(2 * alpha)
        np.testing.assert_allclose(S_[:2, :2], [[c, s], [s, c]], rtol=1e-13)
        np.testing.assert_allclose(S_[2:, 2:], [[c, -s], [-s, c]], rtol=1e-12, atol=1e-15)
        assert not np.any(S_[:2, 2:]) and not np.any(S_[2:, :2])

    def test_negative_alpha_rejected(self):
        with pytest.raises(InvalidParam):
            heisenberg_transform(K4, -1.0)

    def test_phase_shift_all_plus_is_identity(self):
        g = ClusterGraph(np.zeros((3, 3)))
        np.testing.assert_array_equal(phase_shift_matrix(partition_from_plus_set(g, [0, 1, 2])).S, np.eye(6))

    def test_phase_shift_second_mode(self):
        p = partition_from_plus_set(graphs.chain(2), [0])
        x = np.array([10.0, 20.0, 30.0, 40.0])  # q1 q2 p1 p2
        np.testing.assert_array_equal(phase_shift_matrix(p).S @ x, [10.0, -40.0, 30.0, 20.0])

    def test_phase_shift_square_blocks(self):
        T = phase_shift_matrix(SQUARE_P).S
        ip, im = np.diag([1.0, 1, 0, 0]), np.diag([0.0, 0, 1, 1])
        np.testing.assert_array_equal(T, np.block([[ip, -im], [im, ip]]))
        np.testing.assert_allclose(T @ T.T, np.eye(8))
        assert phase_shift_matrix(SQUARE_P).symplectic_residual() == 0.0

    def test_composition_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            heisenberg_transform(K4, 1.0) @ heisenberg_transform(np.eye(2), 1.0)


class TestCovariance:
    def test_vacuum(self):
        np.testing.assert_allclose(output_covariance(heisenberg_transform(K4, 0.0)), np.eye(8), atol=1e-14)

    @pytest.mark.parametrize("g,alpha", [(1.0, 0.5), (-0.3, 2.0), (2.0, 3.0)])
    def test_single_mode_squeezer(self, g, alpha):
        cov = output_covariance(heisenberg_transform([[g]], alpha))
        np.testing.assert_allclose(cov, np.diag([math.exp(2 * alpha * g), math.exp(-2 * alpha * g)]), rtol=1e-13)

    def test_square_purity(self):
        cov = output_covariance(heisenberg_transform(SQUARE_A.adjacency, 1.0))
        np.testing.assert_allclose(symplectic_eigenvalues(cov), 1.0, atol=1e-10)

    def test_thermal_state_is_not_pure(self):
        np.testing.assert_allclose(symplectic_eigenvalues(3.0 * np.eye(4)), [3.0, 3.0])


class TestNullifiers:
    @pytest.mark.parametrize("alpha", np.linspace(0, 5, 11))
    def test_square_exact(self, alpha):
        r = nullifier_report(SQUARE_A, SQUARE_P, SQUARE_A, alpha)
        expected = 2 * math.exp(-2 * alpha)
        np.testing.assert_allclose(r.variances, expected, rtol=1e-9)

    def test_square_alpha_zero_row_norms(self):
        K = nullifier_matrix(SQUARE_A, SQUARE_P, SQUARE_A, 0.0)
        r = nullifier_report(SQUARE_A, SQUARE_P, SQUARE_A, 0.0)
        np.testing.assert_allclose(r.variances, (K**2).sum(axis=1), rtol=1e-15)
        np.testing.assert_allclose(r.variances, 2.0, rtol=1e-15)

    def test_star_from_complete_graph(self):
        values = [nullifier_report(STAR, STAR_P, K4, a).max_variance for a in range(11)]
        assert np.all(np.diff(values) < 0)
        assert values[-1] < 1e-6

    def test_wrong_partition_does_not_decay(self):
        p = partition_from_plus_set(STAR, [1, 2, 3])
        assert nullifier_report(STAR, p, K4, 5.0).max_variance > 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            nullifier_report(SQUARE_A, SQUARE_P, K4[:3, :3], 1.0)
        with pytest.raises(DimensionMismatch):
            nullifier_report(STAR, SQUARE_P, np.eye(3), 1.0)

    def test_report_dict(self):
        d = nullifier_report(SQUARE_A, SQUARE_P, SQUARE_A, 1.0).to_dict()
        assert set(d) >= {"alpha", "variances", "max_variance", "covariance"}
        assert len(d["variances"]) == 4

    def test_leakage_is_only_round_off(self):
        r = nullifier_report(STAR, STAR_P, K4, 12.0)
        assert r.leakage <= 1e-14
        unfiltered = nullifier_report(STAR, STAR_P, K4, 12.0, leak_tol=0.0)
        assert unfiltered.max_variance >= r.max_variance


class TestSweep:
    def test_square_rate(self):
        sw = sweep_alpha(SQUARE_A, SQUARE_P, SQUARE_A, range(6))
        assert sw.decay_rate == pytest.approx(-2.0, abs=0.01)
        assert sw.alphas == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]

    def test_single_alpha_has_no_fit(self):
        sw = sweep_alpha(SQUARE_A, SQUARE_P, SQUARE_A, [0.0])
        assert len(sw.reports) == 1 and sw.decay_rate is None

    def test_star_strictly_decreasing(self):
        sw = sweep_alpha(STAR, STAR_P, K4, range(6))
        assert np.all(np.diff(sw.max_variances()) < 0)

    @pytest.mark.parametrize("alphas", [[], [1.0, 0.5], [-1.0, 0.0]])
    def test_bad_lists(self, alphas):
        with pytest.raises(InvalidParam):
            sweep_alpha(SQUARE_A, SQUARE_P, SQUARE_A, alphas)

    def test_csv(self):
        text = sweep_alpha(SQUARE_A, SQUARE_P, SQUARE_A, [0.0, 1.0]).to_csv()
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["alpha", "mode", "variance"]
        assert len(rows) == 1 + 2 * 4
        assert rows[1][:2] == ["0.0", "1"] and float(rows[1][2]) == pytest.approx(2.0)
        assert float(rows[-1][2]) == pytest.approx(2 * math.exp(-2), rel=1e-12)

    def test_fit_skips_floor(self):
        assert fit_decay_rate([0, 1, 2], [1.0, math.exp(-3), 0.0]) == pytest.approx(-3.0)
        assert fit_decay_rate([0, 1], [1.0, 1e-20]) is None


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, n=st.integers(1, 16), alpha=st.floats(0, 5))
    def test_symplectic(self, seed, n, alpha):
        G = randgen.symmetric(np.random.default_rng(seed), n)
        assert heisenberg_transform(G, alpha).symplectic_residual() <= 1e-10

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, n=st.integers(1, 8), alpha=st.floats(0, 5))
    def test_purity(self, seed, n, alpha):
        G = randgen.symmetric(np.random.default_rng(seed), n, norm=1.0)
        cov = output_covariance(heisenberg_transform(G, alpha))
        assert np.max(np.abs(symplectic_eigenvalues(cov) - 1.0)) <= 1e-8

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, n=st.integers(1, 10), a1=st.floats(0, 3), a2=st.floats(0, 3))
    def test_composition(self, seed, n, a1, a2):
        G = randgen.symmetric(np.random.default_rng(seed), n, norm=1.0)
        both = heisenberg_transform(G, a2) @ heisenberg_transform(G, a1)
        direct = heisenberg_transform(G, a1 + a2)
        assert spectral_norm(both.S - direct.S) <= 1e-10 * spectral_norm(direct.S)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, n=st.integers(1, 3), alpha=st.floats(0, 2), data=st.data())
    def test_brute_force_oracle(self, seed, n, alpha, data):
        rng = np.random.default_rng(seed)
        A = randgen.symmetric(rng, n)
        np.fill_diagonal(A, 0.0)
        G = randgen.symmetric(rng, n, norm=1.0)
        plus = data.draw(st.sets(st.integers(0, n - 1)))
        # any plus set works here; the partition need not fit A for this check
        order = sorted(plus) + sorted(set(range(n)) - plus)
        perm = [0] * n
        for pos, m in enumerate(order):
            perm[m] = pos
        p = BipartitePartition(tuple(sorted(plus)), tuple(sorted(set(range(n)) - plus)), tuple(perm), np.zeros((len(plus), n - len(plus))))
        expected = oracle_covariance(A, plus, G, alpha)
        got = nullifier_report(ClusterGraph(A), p, G, alpha, leak_tol=0.0).covariance
        assert spectral_norm(got - expected) <= 1e-12 * max(1.0, spectral_norm(expected))
        dense = nullifier_matrix(ClusterGraph(A), p, G, alpha)
        assert spectral_norm(dense @ dense.T - expected) <= 1e-12 * max(1.0, spectral_norm(expected))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_zero_limit_for_synthesized_pairs(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 13))
        L = int(rng.integers(1, n + 1)) if n > 1 else 1
        A0 = randgen.bipartite_block(rng, L, n - L)
        A = ClusterGraph(block_adjacency(A0))
        p = partition_from_plus_set(A, range(L))
        G = synthesize_G(A0, SynthesisFreedom.identity(L, n - L))
        v = np.array([nullifier_report(A, p, G, a).max_variance for a in range(13)])
        assert np.all(np.diff(v) < 0)
        assert v[-1] < 1e-6

    def test_symplectic_form_shape(self):
        J = symplectic_form(2)
        np.testing.assert_array_equal(J @ J, -np.eye(4))
