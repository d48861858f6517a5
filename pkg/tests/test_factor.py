import math

import numpy as np
import pytest

from expfactor import factor as fc
from expfactor import fixtures as fx
from expfactor import holofun as hf
from expfactor import mat2
from expfactor import verify as vf
from expfactor.errors import ContractError, DegenerateEigenvalueError
from expfactor.holofun import DiscFunction
from expfactor.mat2 import MatFun

Z = DiscFunction([0, 1], order=128)


def const(a, b, c, d, order=128):
    return MatFun.build(a, b, c, d, order=order)


def test_detect_parabolic_examples():
    assert fc.detect_parabolic(MatFun.identity()) == fc.PLUS
    assert fc.detect_parabolic(-MatFun.identity()) == fc.MINUS
    assert fc.detect_parabolic(const(1, Z, 0, 1)) == fc.PLUS
    assert fc.detect_parabolic(const(2, 1, 1, 1)) == fc.NONE


def test_factor_parabolic_examples():
    fac = fc.factor_parabolic(const(1, Z, 0, 1), fc.PLUS)
    assert fac.factor_count == 1 and fac.branch == "parabolic_plus"
    assert np.allclose(fac.m1.b.coeffs[:2], [0, 1])
    fac = fc.factor_parabolic(-MatFun.identity(), fc.MINUS)
    assert fac.factor_count == 2
    assert fac.m1.a.coeffs[0] == pytest.approx(1j * math.pi)
    assert vf.residual_report(-MatFun.identity(), fac).residual_sup < 1e-14
    with pytest.raises(ContractError):
        fc.factor_parabolic(MatFun.identity(), fc.MINUS)


def test_unimodular_reduction_examples():
    rec = fc.unimodular_reduction(const(2, 1, 1, 1))
    assert hf.certify_unit(rec.reduced.a).ok
    assert rec.certificate.ok
    a = const(Z, -1, 1, 0)
    rec = fc.unimodular_reduction(a)
    assert hf.certify_unit(rec.reduced.a).ok
    # reduced = shear(h) A, so its first entry is a + h c
    assert np.abs((rec.reduced.a - (a.a + rec.h * a.c)).coeffs).max() < 1e-12
    assert mat2.det_defect(rec.reduced) < 1e-12


def test_scale_split_examples():
    s = fc.scale_split(MatFun.identity())
    assert s.delta == pytest.approx(4, rel=1e-5)
    s = fc.scale_split(MatFun.diag(2.0, 0.5))
    assert s.delta == pytest.approx(1.75, rel=1e-5)
    _, tr = mat2.det_trace(s.scaled)
    assert tr.coeffs[0].real == pytest.approx(3.5 + 0.5 / 1.75, rel=1e-5)
    assert abs(tr.coeffs[0]) > 2


def test_scale_split_needs_unit():
    with pytest.raises(ContractError):
        fc.scale_split(const(Z, -1, 1, 0))


def test_dominant_root_examples():
    lam, lam_inv = fc.dominant_root(DiscFunction([-3.0]))
    assert lam.coeffs[0] == pytest.approx(-(3 + math.sqrt(5)) / 2)
    assert (lam * lam_inv).coeffs[0] == pytest.approx(1)
    t = DiscFunction([3, 0.5], order=128)
    lam, lam_inv = fc.dominant_root(t)
    assert np.abs((lam + lam_inv - t).coeffs).max() < 1e-12
    assert hf.boundary_extrema(lam)[0] > 1


def test_eigen_conjugator_and_log():
    b = MatFun.diag(4.0, 0.25)
    lam, lam_inv = fc.dominant_root(DiscFunction([4.25]))
    p = fc.eigen_conjugator(b, lam, lam_inv)
    det, _ = mat2.det_trace(p)
    assert det.coeffs[0] == pytest.approx(-14.0625)
    m = fc.log_via_diagonalization(b, lam, p)
    assert m.a.coeffs[0] == pytest.approx(math.log(4))
    assert m.d.coeffs[0] == pytest.approx(-math.log(4))
    assert np.abs(m.b.coeffs).max() < 1e-14 and np.abs(m.c.coeffs).max() < 1e-14


def test_log_traceless_examples():
    j = const(0, 1, -1, 0)
    m = fc.log_traceless(j)
    assert np.allclose(m.b.coeffs, [math.pi / 2])
    with pytest.raises(ContractError):
        fc.log_traceless(MatFun.identity())


def test_factor_sl2_constant():
    a = const(2, 1, 1, 1)
    fac = fc.factor_sl2(a)
    assert fac.factor_count == 2
    assert vf.residual_report(a, fac).residual_sup < 1e-10
    assert vf.traceless_check(fac.m1) < 1e-11
    assert vf.traceless_check(fac.m2) < 1e-11


def test_factor_sl2_conjugation_invariance():
    a = fx.shear_corpus(count=3, order=256)[2]
    q = np.array([[1, 2], [0, 1]], dtype=complex)
    qi = np.array([[1, -2], [0, 1]], dtype=complex)
    b = MatFun.build(*q.ravel(), order=256) @ a @ MatFun.build(*qi.ravel(),
                                                               order=256)
    for m in (a, b):
        assert vf.residual_report(m, fc.factor_sl2(m)).residual_sup < 1e-8


def test_triangular_shortcut():
    u = fx.unit_poly(np.random.default_rng(0), 4, order=256)
    a = MatFun(u, Z * 0.5, DiscFunction([0], 256), hf.invert(u))
    assert fc.detect_triangular(a) == fc.UPPER
    fac = fc.factor_sl2(a)
    assert fac.branch == "triangular_upper" and fac.factor_count == 2
    assert vf.residual_report(a, fac).residual_sup < 1e-10
    lower = MatFun(a.d, a.c, a.b, a.a)
    fac = fc.factor_sl2(lower)
    assert fac.branch == "triangular_lower"
    assert vf.residual_report(lower, fac).residual_sup < 1e-10
    with pytest.raises(ContractError):
        fc.factor_triangular(const(2, 1, 1, 1))


def test_factor_gl2_examples():
    e = math.e
    fac = fc.factor_gl2(MatFun.diag(e, e))
    assert np.abs(fac.m1.a.coeffs[0] - 1) < 1e-12
    assert np.abs(fac.m1.b.coeffs).max() < 1e-12
    a = MatFun.diag(4.0, 1.0)
    fac = fc.factor_gl2(a)
    assert vf.residual_report(a, fac).residual_sup < 1e-10


def test_pointwise_split_examples():
    b, c, pt = fc.pointwise_traceless_split(np.array([[2, 1], [1, 1]]))
    assert pt.u == pytest.approx(0.4472136, abs=1e-6)
    assert pt.v == pytest.approx(0.8944272, abs=1e-6)
    assert pt.w == pytest.approx(-1.3416408, abs=1e-6)
    assert np.allclose(b @ c, [[2, 1], [1, 1]], atol=1e-12)
    b, c, _ = fc.pointwise_traceless_split(np.diag([2.0, 0.5]))
    assert np.allclose(b @ c, np.diag([2.0, 0.5]), atol=1e-12)
    assert abs(np.trace(b)) < 1e-12 and abs(np.linalg.det(c) - 1) < 1e-12
    with pytest.raises(DegenerateEigenvalueError):
        fc.pointwise_traceless_split(np.eye(2))
