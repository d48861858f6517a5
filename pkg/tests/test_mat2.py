import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from expfactor import fixtures as fx
from expfactor import mat2
from expfactor.errors import ContractError, NotInvertibleError
from expfactor.holofun import DiscFunction
from expfactor.mat2 import MatFun

Z = DiscFunction([0, 1], order=64)


def coeff_gap(m, n):
    return max(float(np.abs((x - y).coeffs).max())
               for x, y in zip(m.entries, n.entries))


def random_traceless(rng, degree=8, bound=2.0, order=128):
    u, v, w = (DiscFunction(fx.random_poly(rng, degree, bound / (degree + 1)),
                            order=order) for _ in range(3))
    return MatFun(u, v, w, -u)


def test_mat_mul_examples():
    m = MatFun.build(1, Z, 2, 3, order=64)
    assert coeff_gap(m @ MatFun.identity(64), m) == 0
    s = MatFun.build(1, Z, 0, 1, order=64) @ MatFun.build(1, -Z, 0, 1, order=64)
    assert coeff_gap(s, MatFun.identity(64)) == 0


def test_mat_mul_pointwise():
    rng = np.random.default_rng(0)
    m, n = random_traceless(rng), random_traceless(rng)
    z = np.exp(2j * np.pi * np.arange(64) / 64)
    assert np.abs((m @ n).at(z) - m.at(z) @ n.at(z)).max() < 1e-12


def test_det_trace_examples():
    det, tr = mat2.det_trace(MatFun.identity())
    assert det.coeffs[0] == 1 and tr.coeffs[0] == 2
    det, tr = mat2.det_trace(MatFun.build(0, 1, -1, 0))
    assert det.coeffs[0] == 1 and tr.coeffs[0] == 0
    det, tr = mat2.det_trace(MatFun.build(1, Z * 3 + 1, 0, 1))
    assert np.allclose(det.coeffs, [1, 0])
    assert tr.coeffs[0] == 2 and np.all(tr.coeffs[1:] == 0)


def test_inverse_examples():
    assert coeff_gap(mat2.mat_inverse(MatFun.identity()), MatFun.identity()) == 0
    inv = mat2.mat_inverse(MatFun.build(1, Z, 0, 1, order=64))
    assert coeff_gap(inv, MatFun.build(1, -Z, 0, 1, order=64)) < 1e-15
    p = MatFun.build(DiscFunction([2, 0.3]), Z, 0.5 * Z, 1)
    _, res = mat2.mat_inverse(p, full_output=True)
    assert res < 1e-10


def test_inverse_needs_unit_det():
    with pytest.raises(NotInvertibleError):
        mat2.mat_inverse(MatFun.build(Z, 0, 0, 1))


def test_exp_traceless_examples():
    assert coeff_gap(mat2.exp_traceless(MatFun.zero()), MatFun.identity()) == 0
    t = 0.7
    e = mat2.exp_traceless(MatFun.diag(t, -t))
    assert e.a.coeffs[0] == pytest.approx(math.exp(t))
    assert e.d.coeffs[0] == pytest.approx(math.exp(-t))
    rot = MatFun.build(0, 1, -1, 0)
    e = mat2.exp_traceless(rot * (math.pi / 2))
    assert coeff_gap(e, rot) < 1e-15


def test_exp_traceless_contract():
    with pytest.raises(ContractError):
        mat2.exp_traceless(MatFun.identity())


def test_exp_pointwise_examples():
    assert np.allclose(mat2.exp_pointwise(np.zeros((2, 2))), np.eye(2))
    out = mat2.exp_pointwise(np.diag([1.0, -1.0]))
    assert np.allclose(out, np.diag([math.e, 1 / math.e]), rtol=1e-15)


def test_exp_pointwise_vs_scipy_and_closed_form():
    rng = np.random.default_rng(1)
    p = rng.normal(size=(200, 2, 2)) + 1j * rng.normal(size=(200, 2, 2))
    p *= rng.uniform(0.01, 6, size=(200, 1, 1))
    ours = mat2.exp_pointwise(p)
    ref = np.array([scipy.linalg.expm(x) for x in p])
    assert np.abs(ours - ref).max() / np.abs(ref).max() < 1e-13
    p[:, 1, 1] = -p[:, 0, 0]
    rel = np.abs(mat2.exp_pointwise(p) - mat2.exp_closed_form(p)) \
        / np.abs(mat2.exp_closed_form(p)).max(axis=(1, 2))[:, None, None]
    assert rel.max() < 1e-12


def test_conjugate_examples():
    rng = np.random.default_rng(2)
    m = random_traceless(rng)
    assert coeff_gap(mat2.conjugate(m, MatFun.identity(128)), m) < 1e-15
    p = MatFun.build(DiscFunction([2, 0.5]), Z, DiscFunction([0.3]), 1,
                     order=128)
    c = mat2.conjugate(m, p)
    _, tr = mat2.det_trace(c)
    assert np.abs(tr.coeffs).max() < 1e-10
    lhs = mat2.conjugate(mat2.exp_traceless(m), p)
    rhs = mat2.exp_traceless(MatFun(c.a, c.b, c.c, -c.a))
    assert coeff_gap(lhs, rhs) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exp_traceless_properties(seed):
    rng = np.random.default_rng(seed)
    m = random_traceless(rng)
    e = mat2.exp_traceless(m)
    assert mat2.det_defect(e) <= 1e-10
    z = np.exp(2j * np.pi * np.arange(64) / 64)
    assert np.abs(e.at(z) - mat2.exp_pointwise(m.at(z))).max() < 1e-11


def test_cayley_hamilton_on_truncations():
    # traceless with det 1 squares to -I
    u = DiscFunction([0, 0.5], order=64)
    one = DiscFunction([1.0], order=64)
    b = MatFun(u, one, (u * u + 1.0) * -1.0, -u)
    assert mat2.det_defect(b) < 1e-12
    assert np.abs((b @ b).samples(256) + np.eye(2)).max() < 1e-12
