"""2x2 matrices over :class:`~expfactor.holofun.DiscFunction`.

Includes the closed-form exponential of a traceless matrix function and an
independent pointwise matrix exponential (scaling and squaring with a
degree-13 Pade approximant) used as an oracle.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import holofun as hf
from .errors import ContractError, NotInvertibleError
from .holofun import DiscFunction

TRACELESS_TOL = 1e-12
SL_TOL = 1e-10


def _as_fun(x, order):
    if isinstance(x, DiscFunction):
        return x
    return DiscFunction([x], order=order)


@dataclass(frozen=True)
class MatFun:
    """Row-major 2x2 matrix ``[[a, b], [c, d]]`` of disc functions."""
    a: DiscFunction
    b: DiscFunction
    c: DiscFunction
    d: DiscFunction

    @classmethod
    def build(cls, a, b, c, d, order=None):
        """Accepts disc functions, scalars, or coefficient sequences."""
        def conv(x):
            if isinstance(x, DiscFunction):
                return x
            if np.isscalar(x):
                return DiscFunction([x], order=order)
            return DiscFunction(x, order=order)
        return cls(conv(a), conv(b), conv(c), conv(d))

    @classmethod
    def identity(cls, order=None):
        return cls.build(1, 0, 0, 1, order=order)

    @classmethod
    def zero(cls, order=None):
        return cls.build(0, 0, 0, 0, order=order)

    @classmethod
    def diag(cls, x, y, order=None):
        return cls.build(x, 0, 0, y, order=order)

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def order(self):
        return max(e.order for e in self.entries)

    @property
    def tail(self):
        return max(e.tail for e in self.entries)

    def __add__(self, other):
        return MatFun(*(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other):
        return MatFun(*(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self):
        return MatFun(*(-x for x in self.entries))

    def __mul__(self, other):
        if isinstance(other, MatFun):
            return mat_mul(self, other)
        return MatFun(*(x * other for x in self.entries))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return mat_mul(self, other)

    def at(self, z):
        """Pointwise values as an array of shape ``z.shape + (2, 2)``."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = hf.eval(self.a, z)
        out[..., 0, 1] = hf.eval(self.b, z)
        out[..., 1, 0] = hf.eval(self.c, z)
        out[..., 1, 1] = hf.eval(self.d, z)
        return out

    def samples(self, grid=None):
        """Boundary samples stacked as ``(M, 2, 2)``."""
        m = max(hf._grid_size(e.coeffs.size, grid) for e in self.entries)
        out = np.empty((m, 2, 2), dtype=complex)
        out[:, 0, 0] = self.a.samples(m)
        out[:, 0, 1] = self.b.samples(m)
        out[:, 1, 0] = self.c.samples(m)
        out[:, 1, 1] = self.d.samples(m)
        return out


def mat_mul(m, n):
    return MatFun(m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                  m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d)


def det_trace(m):
    return m.a * m.d - m.b * m.c, m.a + m.d


def trace_defect(m):
    """Max coefficient modulus of ``a + d``."""
    return float(np.abs((m.a + m.d).coeffs).max())


def det_defect(m, grid=None):
    """Boundary sup of ``|det m - 1|``."""
    det, _ = det_trace(m)
    return float(np.abs(det.samples(grid) - 1.0).max())


def is_traceless(m, tol=TRACELESS_TOL):
    return trace_defect(m) <= tol


def is_special_linear(m, tol=SL_TOL, grid=None):
    return det_defect(m, grid) <= tol


def mat_inverse(m, grid=None, full_output=False):
    """Adjugate times the inverse of a certified-unit determinant.

    With ``full_output`` also returns the boundary sup of the Frobenius norm
    of ``m m^{-1} - I``.
    """
    det, _ = det_trace(m)
    hf.require_unit(det, grid, label="determinant", exc=NotInvertibleError)
    r = hf.invert(det, grid)
    inv = MatFun(m.d * r, -m.b * r, -m.c * r, m.a * r)
    if not full_output:
        return inv
    eye = np.eye(2)
    res = np.linalg.norm((m @ inv).samples(grid) - eye, axis=(1, 2)).max()
    return inv, float(res)


def conjugate(m, p, grid=None):
    """``p m p^{-1}``."""
    return p @ m @ mat_inverse(p, grid)


# -- exponential of a traceless matrix ---------------------------------------

def _entire_coeffs(bound, odd):
    """Coefficients 1/(2k+odd)! of sum s^k/(2k+odd)!, cut once
    bound^k/(2k+odd)! < 1e-16; returns (coeffs, size of the first dropped term)."""
    coeffs = [1.0 / math.factorial(odd)]
    term = 1.0
    k = 0
    while True:
        k += 1
        div = (2 * k - 1 + odd) * (2 * k + odd)
        coeffs.append(coeffs[-1] / div)
        term *= bound / div
        if k > 1 and term < 1e-16 * max(1.0, max_term(coeffs, bound)):
            return coeffs, term


def max_term(coeffs, bound):
    return max(c * bound ** k for k, c in enumerate(coeffs))


def _compose_entire(s, coeffs, tail):
    """Horner evaluation of sum coeffs[k] s^k with a disc-function ``s``."""
    acc = DiscFunction([coeffs[-1]], order=s.order)
    for c in coeffs[-2::-1]:
        acc = acc * s + c
    return DiscFunction(acc.coeffs, acc.order, acc.tail + tail)


def cosh_sinhc(s):
    """``C(s) = cosh(sqrt s)`` and ``S(s) = sinh(sqrt s)/sqrt s`` as series in s."""
    bound = hf._sup_estimate(s)
    cc, tc = _entire_coeffs(bound, 0)
    cs, ts = _entire_coeffs(bound, 1)
    return _compose_entire(s, cc, tc), _compose_entire(s, cs, ts)


def exp_traceless(m, tol=TRACELESS_TOL):
    """``exp(m)`` for traceless ``m``: ``C(s) I + S(s) m`` with ``s = -det m``.

    Cayley-Hamilton gives ``m^2 = s I``, which collapses the exponential
    series onto the two entire functions of ``s``.
    """
    if not is_traceless(m, tol):
        raise ContractError(f"exp_traceless needs a traceless matrix; "
                            f"trace defect {trace_defect(m):.3e}")
    det, _ = det_trace(m)
    s = -det
    cf, sf = cosh_sinhc(s)
    return MatFun(cf + sf * m.a, sf * m.b, sf * m.c, cf + sf * m.d)


# -- pointwise oracle ------------------------------------------------------

_PADE13 = (64764752532480000., 32382376266240000., 7771770303897600.,
           1187353796428800., 129060195264000., 10559470521600.,
           670442572800., 33522128640., 1323241920., 40840800., 960960.,
           16380., 182., 1.)
_THETA13 = 5.371920351148152


def _solve2(q, p):
    """``q^{-1} p`` for stacks of 2x2 matrices via the adjugate."""
    det = q[..., 0, 0] * q[..., 1, 1] - q[..., 0, 1] * q[..., 1, 0]
    adj = np.empty_like(q)
    adj[..., 0, 0] = q[..., 1, 1]
    adj[..., 1, 1] = q[..., 0, 0]
    adj[..., 0, 1] = -q[..., 0, 1]
    adj[..., 1, 0] = -q[..., 1, 0]
    return (adj @ p) / det[..., None, None]


def exp_pointwise(p):
    """Matrix exponential of a 2x2 complex matrix or a stack ``(..., 2, 2)``.

    Scaling and squaring around the [13/13] Pade approximant, with the
    scaling chosen per matrix from its 1-norm.
    """
    a = np.array(p, dtype=complex)
    single = a.ndim == 2
    if single:
        a = a[None]
    norm1 = np.abs(a).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norm1 > _THETA13,
                     np.ceil(np.log2(np.maximum(norm1, 1e-300) / _THETA13)), 0)
    s = s.astype(int)
    a = a / (2.0 ** s)[..., None, None]
    b = _PADE13
    eye = np.broadcast_to(np.eye(2, dtype=complex), a.shape)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye)
    r = _solve2(v - u, v + u)
    for k in range(int(s.max(initial=0))):
        sq = r @ r
        r = np.where((s > k)[..., None, None], sq, r)
    return r[0] if single else r


def exp_closed_form(p):
    """Pointwise ``cosh(sqrt s) I + sinh(sqrt s)/sqrt s p`` for traceless stacks."""
    p = np.asarray(p, dtype=complex)
    s = p[..., 0, 0] ** 2 + p[..., 0, 1] * p[..., 1, 0]
    r = np.sqrt(s)
    small = np.abs(r) < 1e-8
    safe = np.where(small, 1.0, r)
    sinhc = np.where(small, 1.0 + s / 6.0, np.sinh(safe) / safe)
    out = sinhc[..., None, None] * p
    out[..., 0, 0] += np.cosh(r)
    out[..., 1, 1] += np.cosh(r)
    return out
