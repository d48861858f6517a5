import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expfactor import fixtures as fx
from expfactor import holofun as hf
from expfactor.errors import (DomainError, NotAUnitError, UncertifiableError,
                              ZeroFunctionError)
from expfactor.holofun import DiscFunction


def F(*c, order=64):
    return DiscFunction(list(c), order=order)


def test_eval_examples():
    assert hf.eval(F(1, 2), 0) == 1
    assert hf.eval(F(1, 2), 1) == 3
    e = fx.sharpness_matrix(60).d
    assert abs(hf.eval(e, 1.0) - 1.0) < 1e-9


def test_eval_outside_disc():
    with pytest.raises(DomainError):
        hf.eval(F(1, 2), 1.01)
    hf.eval(F(1, 2), 1 + 1e-13)


def test_samples_match_polyval():
    rng = np.random.default_rng(0)
    f = DiscFunction(fx.random_poly(rng, 20), order=64)
    z = np.exp(2j * np.pi * np.arange(256) / 256)
    assert np.allclose(f.samples(256), hf.eval(f, z), rtol=1e-13, atol=1e-13)


def test_ring_examples():
    assert np.allclose((F(1, 1) + F(1, -1)).coeffs, [2, 0])
    assert np.allclose((F(1, 1) * F(1, -1)).coeffs, [1, 0, -1])


def test_mul_against_direct_convolution():
    rng = np.random.default_rng(1)
    for deg in (8, 32, 64):
        a, b = fx.random_poly(rng, deg), fx.random_poly(rng, deg)
        out = (DiscFunction(a, order=256) * DiscFunction(b, order=256)).coeffs
        direct = [sum(a[i] * b[k - i] for i in range(max(0, k - deg),
                                                     min(k, deg) + 1))
                  for k in range(2 * deg + 1)]
        assert np.abs(out - direct).max() < 1e-13


def test_mul_records_dropped_tail():
    f = F(1, 1, order=2) * F(1, 1, order=2)
    assert f.coeffs.size == 2
    assert f.tail == pytest.approx(1.0)


def test_invert_examples():
    assert hf.invert(F(2)).coeffs[0] == pytest.approx(0.5)
    g, res = hf.invert(F(1, 0.5), full_output=True)
    assert np.allclose(g.coeffs[:10], (-0.5) ** np.arange(10))
    assert res < 1e-10
    with pytest.raises(NotAUnitError) as info:
        hf.invert(F(0, 1))
    assert info.value.certificate.winding == 1


def test_winding_examples():
    assert hf.winding_number(F(0, 0, 0, 1)) == 3
    assert hf.winding_number(F(2, 1)) == 0
    assert hf.winding_number(F(-0.25, 0, 1)) == 2


def test_winding_zero_function():
    with pytest.raises(ZeroFunctionError):
        hf.winding_number(F(0))


def test_winding_boundary_zero_is_uncertifiable():
    with pytest.raises(UncertifiableError):
        hf.winding_number(F(1, 1), grid=4096 * 8)


def test_boundary_extrema_examples():
    assert hf.boundary_extrema(F(3)) == (3.0, 3.0)
    lo, hi = hf.boundary_extrema(F(0, 1))
    assert lo == pytest.approx(1) and hi == pytest.approx(1)
    lo, hi = hf.boundary_extrema(F(1, 1), grid=4096)
    assert lo < 1e-3 and hi == pytest.approx(2)


def test_extrema_submultiplicative():
    rng = np.random.default_rng(2)
    f = DiscFunction(fx.random_poly(rng, 6), order=64)
    g = DiscFunction(fx.random_poly(rng, 6), order=64)
    assert hf.boundary_extrema(f * g)[1] <= \
        hf.boundary_extrema(f)[1] * hf.boundary_extrema(g)[1] + 1e-12


def test_log_examples():
    assert hf.holomorphic_log(F(math.e)).coeffs[0] == pytest.approx(1)
    # 1 + z vanishes at z = -1, on the circle; Mercator series on 1 + 0.9 z
    with pytest.raises(NotAUnitError):
        hf.holomorphic_log(F(1, 1))
    g = hf.holomorphic_log(F(1, 0.9), grid=4096 * 4)
    k = np.arange(1, 64)
    assert np.abs(g.coeffs[1:64] - (-1.0) ** (k + 1) * 0.9 ** k / k).max() < 1e-13
    with pytest.raises(NotAUnitError):
        hf.holomorphic_log(F(0, 1))


def test_log_boundary_method_agrees():
    f = F(2, 0.5, -0.25j)
    a = hf.holomorphic_log(f)
    b = hf.holomorphic_log(f, method="boundary")
    assert np.abs(a.coeffs - b.coeffs).max() < 1e-13


def test_log_boundary_method_wide_range():
    # |exp(4 pi i z)| spans 1e-6 .. 3e5 on the circle
    f = fx.sharpness_matrix(60).d
    g, res = hf.holomorphic_log(f, full_output=True, method="boundary")
    assert res < 1e-7
    assert g.coeffs[1] == pytest.approx(4j * math.pi, abs=1e-6)


def test_log_principal_branch():
    g = hf.holomorphic_log(F(-1, 0.1j))
    assert g.coeffs[0] == pytest.approx(cmath.log(-1))


def test_sqrt_examples():
    assert hf.holomorphic_sqrt(F(4)).coeffs[0] == pytest.approx(2)
    r = hf.holomorphic_sqrt(F(1, 1, 0.25))
    assert np.allclose(r.coeffs[:3], [1, 0.5, 0], atol=1e-12)
    # binomial series, again on 1 + 0.9 z
    r = hf.holomorphic_sqrt(F(1, 0.9))
    binom = [1, 0.5, -0.125, 0.0625, -0.0390625]
    assert np.abs(r.coeffs[:5] - binom * 0.9 ** np.arange(5)).max() < 1e-13


def test_exp_examples():
    assert np.allclose(hf.exp_series(F(0)).coeffs[:3], [1, 0, 0])
    e = hf.exp_series(F(0, 1))
    k = np.arange(20)
    assert np.allclose(e.coeffs[:20], 1 / np.array([math.factorial(i) for i in k]))
    g = hf.holomorphic_log(F(1, 1 / 3))
    assert hf._sup_error(hf.exp_series(g), F(1, 1 / 3), None) < 1e-12


def test_exp_methods_agree():
    rng = np.random.default_rng(4)
    f = DiscFunction(fx.random_poly(rng, 10), order=128)
    a = hf.exp_series(f, "recurrence")
    b = hf.exp_series(f, "newton")
    assert np.abs(a.coeffs - b.coeffs).max() < 1e-12


def test_from_boundary_round_trip():
    f = F(1, 2, 3j)
    g = hf.from_boundary(f.samples(128), 64)
    assert np.allclose(g.coeffs[:3], f.coeffs)
    assert g.tail < 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 16), st.integers(0, 2**32 - 1))
def test_round_trips_on_units(deg, seed):
    f = fx.unit_poly(np.random.default_rng(seed), deg, order=256)
    g = hf.holomorphic_log(f)
    assert hf._sup_error(hf.exp_series(g), f, None) <= 1e-10
    r = hf.holomorphic_sqrt(f)
    assert hf._sup_error(r * r, f, None) <= 1e-10
    assert hf._sup_error(f * hf.invert(f), F(1), None) <= 1e-10


def test_certificate_fields():
    cert = hf.certify_unit(F(2, 1))
    assert cert.ok and cert.winding == 0
    assert cert.min_boundary_modulus <= cert.max_boundary_modulus
    assert not hf.certify_unit(F(0, 1)).ok
