import numpy as np
import pytest

from perpca import baselines, model, stiefel, synth
from perpca.errors import DimensionError


def _rng(seed=0):
    return np.random.default_rng(seed)


def _psd(d, rng, scale=1.0):
    M = rng.standard_normal((d, d + 2))
    return scale * (M @ M.T) / (d + 2)


class TestTopEigvecs:
    def test_diagonal(self):
        basis = baselines.top_eigvecs(np.diag([3.0, 2.0, 1.0]), 2)
        assert np.allclose(basis.values, [3.0, 2.0], atol=1e-12)
        assert np.allclose(np.abs(basis.vectors), np.eye(3)[:, :2], atol=1e-12)
        assert np.all(basis.vectors[[0, 1], [0, 1]] > 0)  # sign convention

    def test_identity_degenerate(self):
        basis = baselines.top_eigvecs(np.eye(4), 3)
        assert np.allclose(basis.values, 1.0, atol=1e-12)
        assert stiefel.is_orthonormal(basis.vectors)

    def test_residual_oracle(self):
        S = _psd(6, _rng(1))
        basis = baselines.top_eigvecs(S, 4)
        for j in range(4):
            v = basis.vectors[:, j]
            assert np.linalg.norm(S @ v - basis.values[j] * v) < 1e-8
        assert np.all(np.diff(basis.values) <= 1e-12)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            baselines.top_eigvecs(np.eye(3), 4)

    def test_deterministic_signs(self):
        S = _psd(5, _rng(2))
        a = baselines.top_eigvecs(S, 3).vectors
        b = baselines.top_eigvecs(S.copy(), 3).vectors
        assert np.array_equal(a, b)


class TestDistpca:
    def test_single_client_equals_spectral_truncation(self):
        S = _psd(7, _rng(3))
        state = baselines.distpca([S], r1=2, r2_list=[3])
        full = baselines.top_eigvecs(S, 5).vectors
        assert stiefel.subspace_distance(state.U, full[:, :2]) < 1e-16
        assert stiefel.subspace_distance(state.V[0], full[:, 2:]) < 1e-16

    def test_identical_clients_match_single(self):
        S = _psd(6, _rng(4))
        single = baselines.distpca([S], 1, [2])
        trio = baselines.distpca([S, S.copy(), S.copy()], 1, [2, 2, 2])
        assert stiefel.subspace_distance(single.U, trio.U) < 1e-16
        assert stiefel.subspace_distance(single.V[0], trio.V[1]) < 1e-16

    def test_valid_component_state(self):
        rng = _rng(5)
        covs = [_psd(8, rng) for _ in range(4)]
        baselines.distpca(covs, 2, [2, 2, 2, 2]).validate()

    def test_inconsistent_under_dominant_heterogeneity(self):
        # local variance 100x the global one and noise above the global
        # signal: the per-client top-(r1+r2) compression never sees the
        # shared directions, so growing n does not help
        from perpca.metrics import subspace_error

        def spec_for(n, seed):
            return synth.GenerativeSpec(
                d=15, N=20, r1=2, r2=10, n_per_client=n,
                global_score_std=1.0, local_score_std=10.0, noise_std=6.0, seed=seed,
            )

        errs = []
        for n in (500, 5000):
            per_seed = []
            for seed in range(3):
                spec = spec_for(n, seed)
                truth = synth.generate_components(spec)
                covs = [model.covariance(Y) for Y in synth.generate_observations(truth, spec)]
                state = baselines.distpca(covs, 2, [10] * 20)
                per_seed.append(subspace_error(state, truth))
            errs.append(np.mean(per_seed))
        assert errs[1] > 0.5 * errs[0]  # no 1/n decay

    def test_rank_bound(self):
        with pytest.raises(ValueError):
            baselines.distpca([np.eye(3)], 2, [2])


class TestIndivAndCentral:
    def test_indiv_single_client(self):
        S = _psd(5, _rng(6))
        frames = baselines.indiv_pca([S], 3)
        assert np.array_equal(frames[0], baselines.top_eigvecs(S, 3).vectors)

    def test_indiv_disjoint_spectra(self):
        S1 = np.diag([5.0, 1.0, 0.0, 0.0])
        S2 = np.diag([0.0, 0.0, 5.0, 1.0])
        f1, f2 = baselines.indiv_pca([S1, S2], 2)
        assert stiefel.subspace_distance(f1, np.eye(4)[:, :2]) < 1e-12
        assert stiefel.subspace_distance(f2, np.eye(4)[:, 2:]) < 1e-12

    def test_central_equal_clients(self):
        S = _psd(6, _rng(7))
        pooled = baselines.central_pca([S, S.copy()], [10, 10], 3)
        own = baselines.top_eigvecs(S, 3).vectors
        assert stiefel.subspace_distance(pooled, own) < 1e-12

    def test_central_dominant_client_limit(self):
        rng = _rng(8)
        S1, S2 = _psd(5, rng), _psd(5, rng)
        pooled = baselines.central_pca([S1, S2], [10**6, 1], 2)
        own = baselines.top_eigvecs(S1, 2).vectors
        assert stiefel.subspace_distance(pooled, own) < 1e-8

    def test_central_residual_oracle(self):
        rng = _rng(9)
        covs = [_psd(6, rng) for _ in range(3)]
        counts = [5, 10, 15]
        pooled_cov = sum(n * S for n, S in zip(counts, covs)) / 30
        frame = baselines.central_pca(covs, counts, 2)
        vals = baselines.top_eigvecs(pooled_cov, 2).values
        for j in range(2):
            v = frame[:, j]
            assert np.linalg.norm(pooled_cov @ v - vals[j] * v) < 1e-8

    def test_count_mismatch(self):
        with pytest.raises(DimensionError):
            baselines.central_pca([np.eye(3)], [1, 2], 1)
