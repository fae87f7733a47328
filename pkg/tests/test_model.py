import numpy as np
import pytest

from perpca import model, stiefel
from perpca.errors import DimensionError, InvariantError


def _rng(seed=0):
    return np.random.default_rng(seed)


def _random_state(d, r1, r2, n_clients, rng):
    U = stiefel.random_frame(d, r1, rng)
    V = []
    for _ in range(n_clients):
        raw = rng.standard_normal((d, r2))
        V.append(stiefel.qr_retract(np.zeros_like(raw), raw - U @ (U.T @ raw)))
    return model.ComponentState(U, V).validate()


def _random_cov(d, rng):
    M = rng.standard_normal((d, d + 2))
    return model.covariance(M)


class TestCovariance:
    def test_single_observation(self):
        Y = np.array([[1.0], [0.0]])
        assert np.array_equal(model.covariance(Y), np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_identity_data(self):
        assert np.allclose(model.covariance(np.eye(2)), 0.5 * np.eye(2), atol=1e-15)

    def test_trace_identity(self):
        Y = _rng(1).standard_normal((3, 5))
        S = model.covariance(Y)
        assert np.trace(S) == pytest.approx(np.linalg.norm(Y) ** 2 / 5, abs=1e-12)
        assert np.array_equal(S, S.T)
        assert np.min(np.linalg.eigvalsh(S)) >= -1e-10

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            model.covariance(np.zeros((3, 0)))


class TestObjective:
    def test_zero_covariances(self):
        state = _random_state(4, 1, 1, 2, _rng(2))
        covs = [np.zeros((4, 4))] * 2
        assert model.objective(state, covs) == 0.0

    def test_hand_value(self):
        S = np.diag([3.0, 2.0, 1.0])
        state = model.ComponentState(np.eye(3)[:, :1], [np.eye(3)[:, 1:2]])
        assert model.objective(state, [S]) == pytest.approx(2.5, abs=1e-15)

    def test_rotation_invariance(self):
        rng = _rng(3)
        state = _random_state(6, 2, 2, 3, rng)
        covs = [_random_cov(6, rng) for _ in range(3)]
        rot = stiefel.random_frame(2, 2, rng)
        rotated = model.ComponentState(state.U @ rot, [Vi @ rot for Vi in state.V])
        assert model.objective(rotated, covs) == pytest.approx(
            model.objective(state, covs), abs=1e-12
        )

    def test_length_mismatch(self):
        state = _random_state(4, 1, 1, 2, _rng(4))
        with pytest.raises(DimensionError):
            model.objective(state, [np.zeros((4, 4))])


class TestReconstructionError:
    def test_data_inside_retained_span(self):
        rng = _rng(5)
        state = _random_state(5, 2, 1, 1, rng)
        W = np.concatenate([state.U, state.V[0]], axis=1)
        Y = W @ rng.standard_normal((3, 7))
        assert model.reconstruction_error(Y, state.U, state.V[0]) < 1e-12

    def test_unit_residual(self):
        Y = np.eye(3)[:, 2:3]  # e3, one observation
        err = model.reconstruction_error(Y, np.eye(3)[:, :1], np.eye(3)[:, 1:2])
        assert err == pytest.approx(1.0, abs=1e-15)

    def test_matches_trace_identity(self):
        rng = _rng(6)
        state = _random_state(6, 2, 2, 1, rng)
        Y = rng.standard_normal((6, 11))
        S = model.covariance(Y)
        direct = model.reconstruction_error(Y, state.U, state.V[0])
        via_traces = (
            np.linalg.norm(Y) ** 2 / 11
            - np.trace(state.U.T @ S @ state.U)
            - np.trace(state.V[0].T @ S @ state.V[0])
        )
        assert direct == pytest.approx(via_traces, abs=1e-10)

    def test_cross_orthogonality_enforced(self):
        U = np.eye(3)[:, :1]
        V = np.array([[1.0], [1.0], [0.0]]) / np.sqrt(2)
        with pytest.raises(InvariantError):
            model.reconstruction_error(np.eye(3), U, V)

    def test_single_frame(self):
        rng = _rng(7)
        U = stiefel.random_frame(4, 2, rng)
        Y = U @ rng.standard_normal((2, 5))
        assert model.reconstruction_error(Y, U) < 1e-12


class TestKktResidual:
    def test_zero_at_eigvec_state(self):
        rng = _rng(8)
        S = _random_cov(6, rng)
        w, vecs = np.linalg.eigh(S)
        order = np.argsort(w)[::-1]
        top = vecs[:, order[:4]]
        state = model.ComponentState(top[:, :2], [top[:, 2:]])
        g, l = model.kkt_residual(state, [S])
        assert g < 1e-9 and l < 1e-9

    def test_positive_off_stationarity(self):
        rng = _rng(9)
        state = _random_state(6, 2, 2, 2, rng)
        covs = [_random_cov(6, rng) for _ in range(2)]
        g, l = model.kkt_residual(state, covs)
        assert g > 1e-6 and l > 1e-6

    def test_rotation_invariance(self):
        rng = _rng(10)
        state = _random_state(5, 1, 2, 2, rng)
        covs = [_random_cov(5, rng) for _ in range(2)]
        rot = stiefel.random_frame(2, 2, rng)
        rotated = model.ComponentState(state.U, [Vi @ rot for Vi in state.V])
        assert model.kkt_residual(rotated, covs) == pytest.approx(
            model.kkt_residual(state, covs), abs=1e-10
        )


def test_total_variance_split():
    # sum_i recon_i + 2 * objective equals sum_i ||Y_i||_F^2 / n_i
    rng = _rng(11)
    state = _random_state(7, 2, 2, 3, rng)
    datasets = [rng.standard_normal((7, 9 + i)) for i in range(3)]
    covs = [model.covariance(Y) for Y in datasets]
    recon = sum(model.reconstruction_error(Y, state.U, Vi) for Y, Vi in zip(datasets, state.V))
    total = sum(np.linalg.norm(Y) ** 2 / Y.shape[1] for Y in datasets)
    assert recon + 2 * model.objective(state, covs) == pytest.approx(total, abs=1e-9)


def test_mean_reconstruction_matches_raw():
    rng = _rng(12)
    state = _random_state(5, 1, 2, 2, rng)
    datasets = [rng.standard_normal((5, 20)), rng.standard_normal((5, 30))]
    covs = [model.covariance(Y) for Y in datasets]
    raw = np.mean(
        [model.reconstruction_error(Y, state.U, Vi) for Y, Vi in zip(datasets, state.V)]
    )
    assert model.mean_reconstruction_error(state, covs) == pytest.approx(raw, abs=1e-10)


def test_state_validation():
    rng = _rng(13)
    good = _random_state(5, 2, 1, 2, rng)
    good.validate()
    bad = model.ComponentState(good.U, [good.U[:, :1]])  # local equals shared column
    with pytest.raises(InvariantError):
        bad.validate()
