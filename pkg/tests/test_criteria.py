import numpy as np
import numpy.testing as npt
import pytest

from infdiv import (
    BlockMatrix,
    CapExceeded,
    CovarianceModel,
    PreconditionViolated,
    ShapeError,
    SignatureMatrix,
    SymMatrix,
    block_diagonalize,
    canonical_rotation,
    construct_nonneg_signature,
    construct_nonpos_offdiag,
    falsify_word_positivity,
    griffiths_bapat_check,
    materialize,
    nonneg_signature_check,
    precision_signature_check,
    scalar_bridge_report,
    shanbhag_check,
    trace_sum_dp,
    word_positivity_check,
)
from infdiv.criteria import QUANTITY_TOL
from infdiv.model import DeltaEpsilonFamily


def _model(sigma, n1, a=1.0):
    sigma = np.asarray(sigma, dtype=float)
    return CovarianceModel(SymMatrix.from_array(sigma), n1, sigma.shape[0] - n1, a)


def test_signature_matrix_validates_orthogonality():
    with pytest.raises(ValueError):
        SignatureMatrix(u1=np.array([[1.0, 1.0], [0.0, 1.0]]), u2=np.eye(2))


def test_block_diagonalize(tilt_blocks):
    a = tilt_blocks()
    w, rot = block_diagonalize(a)
    npt.assert_allclose(rot.b11, np.diag(np.diag(rot.b11)), atol=1e-12)
    npt.assert_allclose(rot.b22, np.diag(np.diag(rot.b22)), atol=1e-12)
    assert rot.b11[0, 0] >= rot.b11[1, 1]
    assert rot.b22[0, 0] >= rot.b22[1, 1]
    npt.assert_allclose(w.conjugate(a).full, rot.full, atol=1e-12)


def test_canonical_rotation_invariance(tilt_blocks):
    # the reported quantity must not depend on the incoming basis
    a = tilt_blocks()
    _, _, q0 = canonical_rotation(a, "word")
    th = 0.7
    r = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    w = SignatureMatrix(u1=r, u2=r.T)
    _, _, q1 = canonical_rotation(w.conjugate(a), "word")
    npt.assert_allclose(q0, q1, atol=1e-12)


def test_tie_quantity_is_nonnegative():
    # equal rotated diagonals: the tie search must land on the square
    gen = np.random.default_rng(11)
    for _ in range(25):
        b = 0.3 * gen.standard_normal((2, 2))  # small enough to stay PD
        m = np.zeros((4, 4))
        m[:2, :2] = 2.0 * np.eye(2)
        m[2:, 2:] = np.diag([1.5, 0.7])
        m[:2, 2:] = b
        a = BlockMatrix.from_array(m + m.T - np.diag(np.diag(m)), 2)
        _, _, qv = canonical_rotation(a, "word")
        assert qv >= -1e-14
        _, _, qv = canonical_rotation(a, "offdiag")
        assert qv >= -1e-14


def test_word_check_on_family_boundary():
    diag = (4.0, 2.5, 3.5, 2.2)
    hold = materialize(DeltaEpsilonFamily("tilt", diag, 0.3, 0.5))
    fail = materialize(DeltaEpsilonFamily("tilt", diag, 0.5, 0.3))
    assert nonneg_signature_check(hold).holds
    assert not nonneg_signature_check(fail).holds
    assert word_positivity_check(fail).detail["quantity"] < 0


def test_construct_witness_properties(tilt_blocks):
    built = 0
    while built < 25:
        a = tilt_blocks()
        rep = nonneg_signature_check(a)
        if not rep.holds:
            with pytest.raises(PreconditionViolated):
                construct_nonneg_signature(a)
            continue
        built += 1
        w = rep.witness
        assert isinstance(w, SignatureMatrix)
        out = w.conjugate(a)
        assert out.full.min() >= -1e-10
        for u in (w.u1, w.u2):
            npt.assert_allclose(u.T @ u, np.eye(2), atol=1e-12)


def test_construct_offdiag_witness(tilt_blocks):
    built = 0
    while built < 25:
        a = tilt_blocks()
        w = construct_nonpos_offdiag(a)
        _, _, qv = canonical_rotation(a, "offdiag")
        assert (w is not None) == (qv >= -QUANTITY_TOL)
        if w is None:
            continue
        built += 1
        out = w.conjugate(a).full
        off = out - np.diag(np.diag(out))
        assert off.max() <= 1e-10
        for u in (w.u1, w.u2):
            npt.assert_allclose(u.T @ u, np.eye(2), atol=1e-12)


def test_conjugation_preserves_sums(tilt_blocks):
    a = tilt_blocks()
    rep = nonneg_signature_check(a)
    if rep.holds:
        rotated = rep.witness.conjugate(a)
        for k, m in ((1, 1), (2, 3), (3, 3)):
            npt.assert_allclose(trace_sum_dp(rotated, k, m).value,
                                trace_sum_dp(a, k, m).value, rtol=1e-9)


def test_falsify_failing_instances(tilt_blocks):
    seen = 0
    tried = 0
    while seen < 4 and tried < 3000:
        tried += 1
        a = tilt_blocks()
        if word_positivity_check(a).holds:
            continue
        seen += 1
        res = falsify_word_positivity(a)
        assert res is not None
        assert res.value < 0.0
        assert res.big_k <= 200
        assert res.k == res.m == 2 * res.big_k + 1
    assert seen == 4


def test_falsify_none_when_holding():
    t = materialize(DeltaEpsilonFamily("tilt", (0.8, 0.3, 0.8, 0.3), 0.01, 0.2))
    assert word_positivity_check(t).holds
    assert falsify_word_positivity(t) is None


def test_griffiths_bapat_two_by_two_always():
    for sigma in (np.array([[2.0, 1.0], [1.0, 2.0]]),
                  np.array([[2.0, -1.0], [-1.0, 2.0]]),
                  np.eye(2)):
        rep = griffiths_bapat_check(sigma)
        assert rep.holds
        assert rep.witness[0] == 1.0


def test_griffiths_bapat_m_matrix_inverse():
    # inverse is an M-matrix: the identity sign vector works
    prec = np.array([[2.0, -0.5, -0.1], [-0.5, 2.0, -0.3], [-0.1, -0.3, 2.0]])
    sigma = np.linalg.inv(prec)
    rep = griffiths_bapat_check(sigma)
    assert rep.holds
    npt.assert_array_equal(rep.witness, [1.0, 1.0, 1.0])
    assert rep.detail["max_offdiag"] <= 1e-12


def test_griffiths_bapat_needs_sign_flip():
    prec = np.array([[2.0, 0.5, -0.1], [0.5, 2.0, 0.3], [-0.1, 0.3, 2.0]])
    sigma = np.linalg.inv(prec)
    rep = griffiths_bapat_check(sigma)
    assert rep.holds
    signs = np.asarray(rep.witness)
    conj = np.outer(signs, signs) * prec
    off = conj - np.diag(np.diag(conj))
    assert off.max() <= 1e-12


def test_griffiths_bapat_dimension_cap():
    with pytest.raises(CapExceeded):
        griffiths_bapat_check(np.eye(21))


def test_precision_check_identity_and_family():
    assert precision_signature_check(_model(np.eye(4), 2)).holds
    diag = (4.0, 2.5, 3.5, 2.2)
    for de, ep, expect in ((0.2, 0.4, True), (0.4, 0.2, False)):
        prec = materialize(DeltaEpsilonFamily("precision", diag, de, ep))
        sigma = np.linalg.inv(prec.full)
        rep = precision_signature_check(_model(sigma, 2))
        assert rep.holds == expect
        if expect:
            assert rep.witness is not None


def test_precision_check_requires_two_two():
    with pytest.raises(ShapeError):
        precision_signature_check(_model(np.eye(4), 1))


def test_shanbhag_scalar_block(covariances):
    sigma = covariances(4)
    rep = shanbhag_check(_model(sigma, 1, a=5.0))
    assert rep.holds
    assert rep.detail["min_scalar"] >= -1e-12
    with pytest.raises(ShapeError):
        shanbhag_check(_model(sigma, 2))


def test_scalar_bridge_report_direct(tilt_blocks):
    t4 = tilt_blocks()
    t = BlockMatrix.from_array(t4.full[:3, :3], 1)
    rep = scalar_bridge_report(t)
    assert rep.holds and rep.criterion == "shanbhag"
    with pytest.raises(ShapeError):
        scalar_bridge_report(t4)
