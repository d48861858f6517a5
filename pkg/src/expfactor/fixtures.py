"""Seeded test matrices shared by the test suite and the command line."""
import numpy as np

from .holofun import DiscFunction
from .mat2 import MatFun


def random_poly(rng, degree, radius=1.0):
    """Coefficients uniform in the disc of the given radius."""
    n = degree + 1
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))


def shear_upper(p, order=None):
    return MatFun.build(1, p, 0, 1, order=order)


def shear_lower(q, order=None):
    return MatFun.build(1, 0, q, 1, order=order)


def shear_product(rng, order=512, max_shears=6, degree=4):
    """Alternating product of 1..max_shears shears; det is exactly 1."""
    k = int(rng.integers(1, max_shears + 1))
    upper = bool(rng.integers(0, 2))
    m = MatFun.identity(order)
    for _ in range(k):
        p = DiscFunction(random_poly(rng, int(rng.integers(0, degree + 1))),
                         order=order)
        m = m @ (shear_upper(p, order) if upper else shear_lower(p, order))
        upper = not upper
    return m


def shear_corpus(count=100, seed=0, order=512, max_shears=6, degree=4):
    rng = np.random.default_rng(seed)
    return [shear_product(rng, order, max_shears, degree)
            for _ in range(count)]


def sharpness_matrix(degree=60, order=256):
    """``[[1, 1], [0, exp(4 pi i z)]]`` with the exponential truncated."""
    k = np.arange(degree + 1)
    c = np.array([(4j * np.pi) ** j for j in range(degree + 1)], dtype=complex)
    fact = np.cumprod(np.concatenate([[1.0], k[1:].astype(float)]))
    e = DiscFunction(c / fact, order=order)
    return MatFun.build(1, 1, 0, e, order=order)


def unit_poly(rng, degree, order=512, margin=0.5):
    """Random polynomial whose constant term dominates the rest, so it is a
    unit of the disc algebra with winding number 0."""
    c = random_poly(rng, degree)
    rest = np.abs(c[1:]).sum()
    c[0] = (rest + margin + rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    return DiscFunction(c, order=order)


def gl2_corpus(count=50, seed=1, order=512):
    """Unit scalar times a shear product; det = g^2 has winding 0."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        g = unit_poly(rng, int(rng.integers(0, 4)), order)
        out.append(shear_product(rng, order, 4, 3) * g)
    return out


def random_sl2_point(rng, scale=1.0):
    """Random complex 2x2 matrix normalized to det 1."""
    m = scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return m / np.sqrt(np.linalg.det(m))
