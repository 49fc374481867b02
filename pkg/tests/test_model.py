import numpy as np
import numpy.testing as npt
import pytest

from infdiv import (
    BlockMatrix,
    CovarianceModel,
    DegenerateInput,
    DeltaEpsilonFamily,
    NotPositiveDefinite,
    SymMatrix,
    eigen_sym,
    invert_blocks,
    materialize,
    scale_to_unit_spectral_radius,
    tilt_matrix,
)


def _model(sigma, n1, a=1.0):
    sigma = np.asarray(sigma, dtype=float)
    return CovarianceModel(SymMatrix.from_array(sigma), n1, sigma.shape[0] - n1, a)


def test_block_matrix_views():
    m = BlockMatrix.from_array(np.arange(16.0).reshape(4, 4), 2)
    assert m.dim == 4 and m.n2 == 2
    npt.assert_array_equal(m.b12, m.full[:2, 2:])
    npt.assert_array_equal(m.b21, m.b12.T)


def test_block_matrix_rejects_bad_split():
    with pytest.raises(ValueError):
        BlockMatrix.from_array(np.eye(3), 3)


def test_model_validation():
    with pytest.raises(NotPositiveDefinite):
        _model([[1.0, 2.0], [2.0, 1.0]], 1)
    with pytest.raises(ValueError):
        _model(np.eye(2), 1, a=0.0)
    with pytest.raises(ValueError):
        CovarianceModel(SymMatrix.from_array(np.eye(3)), 1, 1, 1.0)


def test_tilt_matrix_diagonal():
    # diag(1,2,3,4) at a=2: each eigenvalue maps to a*l/(1+a*l)
    mdl = _model(np.diag([1.0, 2.0, 3.0, 4.0]), 2, a=2.0)
    t = tilt_matrix(mdl)
    npt.assert_allclose(np.diag(t.full), [2 / 3, 4 / 5, 6 / 7, 8 / 9])
    npt.assert_allclose(t.full, np.diag(np.diag(t.full)), atol=1e-15)


def test_tilt_matrix_identity_covariance():
    t = tilt_matrix(_model(np.eye(4), 2, a=1.0))
    npt.assert_allclose(t.full, 0.5 * np.eye(4), atol=1e-14)


def test_tilt_eigenvalue_map(covariances):
    sigma = covariances(4)
    a = 7.5
    t = tilt_matrix(_model(sigma, 2, a=a))
    lam_s, _ = eigen_sym(sigma)
    lam_t, _ = eigen_sym(t.full)
    npt.assert_allclose(np.sort(lam_t), np.sort(a * lam_s / (1 + a * lam_s)),
                        atol=1e-10)
    assert lam_t[0] < 1.0 and lam_t[-1] > 0.0


def test_invert_blocks(covariances):
    sigma = covariances(5)
    mdl = _model(sigma, 2)
    inv = invert_blocks(mdl)
    npt.assert_allclose(inv.full @ sigma, np.eye(5), atol=1e-9)
    assert inv.n1 == 2 and inv.n2 == 3


def test_scale_to_unit_spectral_radius(covariances):
    m = BlockMatrix.from_array(covariances(4), 2)
    scaled = scale_to_unit_spectral_radius(m)
    lam, _ = eigen_sym(scaled.full)
    npt.assert_allclose(lam[0], 1.0, atol=1e-12)
    again = scale_to_unit_spectral_radius(scaled)
    npt.assert_allclose(again.full, scaled.full, atol=1e-12)


def test_scale_rejects_nonpositive_top():
    with pytest.raises(DegenerateInput):
        scale_to_unit_spectral_radius(BlockMatrix.from_array(-np.eye(2), 1))


def test_family_entry_placement():
    fam = DeltaEpsilonFamily("tilt", (0.8, 0.3, 0.8, 0.3), 0.2, 0.01)
    m = materialize(fam)
    npt.assert_array_equal(np.diag(m.full), [0.8, 0.3, 0.8, 0.3])
    assert m.full[1, 3] == -0.2  # the minus-delta slot
    assert m.full[0, 2] == m.full[0, 3] == m.full[1, 2] == 0.01
    assert m.full[0, 1] == m.full[2, 3] == 0.0

    prec = materialize(DeltaEpsilonFamily("precision", (0.8, 0.3, 0.8, 0.3), 0.2, 0.01))
    assert prec.full[0, 2] == -0.2
    assert prec.full[0, 3] == prec.full[1, 2] == prec.full[1, 3] == 0.01


def test_family_kinds_swap_conjugate():
    # one kind's off-diagonal block is the other's with both index pairs swapped
    tilt = materialize(DeltaEpsilonFamily("tilt", (0.8, 0.3, 0.8, 0.3), 0.2, 0.01))
    prec = materialize(DeltaEpsilonFamily("precision", (0.8, 0.3, 0.8, 0.3), 0.2, 0.01))
    p = np.array([[0.0, 1.0], [1.0, 0.0]])
    npt.assert_array_equal(p @ prec.b12 @ p, tilt.b12)


def test_family_requires_strict_diag_order():
    with pytest.raises(ValueError):
        DeltaEpsilonFamily("tilt", (0.3, 0.8, 0.8, 0.3), 0.2, 0.01)
    with pytest.raises(ValueError):
        DeltaEpsilonFamily("nope", (0.8, 0.3, 0.8, 0.3), 0.2, 0.01)


def test_model_json_round_trip():
    mdl = _model([[2.0, 0.5], [0.5, 1.0]], 1, a=3.0)
    again = CovarianceModel.from_json(mdl.to_json())
    npt.assert_array_equal(again.sigma.entries, mdl.sigma.entries)
    assert (again.n1, again.n2, again.a) == (1, 1, 3.0)


def test_with_a():
    mdl = _model(np.eye(2), 1, a=1.0)
    assert mdl.with_a(9.0).a == 9.0
    npt.assert_array_equal(mdl.with_a(9.0).sigma.entries, mdl.sigma.entries)
