"""Truncated Taylor series on the closed unit disc.

A :class:`DiscFunction` stands in for an element of the disc algebra: a
polynomial ``sum c_k z**k`` kept to a working order ``N`` together with an
estimate (``tail``) of how far the truncation may sit from the function it
approximates, measured in sup norm on the closed disc.

Units are certified by the argument principle on a grid of roots of unity:
winding number 0 and a boundary modulus bounded away from zero.
"""
from dataclasses import dataclass, asdict
import cmath
import math

import numpy as np

from .errors import (DomainError, NotAUnitError, UncertifiableError,
                     ZeroFunctionError)

DEFAULT_ORDER = 256
DEFAULT_GRID = 4096
# smallest boundary modulus accepted for a unit
UNIT_FLOOR = 1e-9
_MAX_GRID = 1 << 20


def _grid_size(n_coeffs, grid):
    m = DEFAULT_GRID if grid is None else int(grid)
    if m < 1:
        raise ValueError("grid must be positive")
    need = 2 * n_coeffs
    if m < need:
        m = 1 << (need - 1).bit_length()
    return m


class DiscFunction:
    """Truncated power series ``c_0 + c_1 z + ... + c_{N-1} z^{N-1}``.

    Instances are treated as immutable; arithmetic returns new objects.
    Supports ``+ - *`` with other instances and with complex scalars.
    """

    __slots__ = ("coeffs", "order", "tail", "_samples")

    def __init__(self, coeffs, order=None, tail=0.0):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        if order is None:
            order = max(DEFAULT_ORDER, c.size)
        order = int(order)
        if order < 1:
            raise ValueError("trunc order must be positive")
        tail = float(tail)
        if c.size > order:
            tail += float(np.abs(c[order:]).sum())
            c = c[:order]
        c.setflags(write=False)
        self.coeffs = c
        self.order = order
        self.tail = tail
        self._samples = {}

    @classmethod
    def constant(cls, value, order=None):
        return cls([value], order=order)

    @classmethod
    def from_callable(cls, func, order=None, degree=None):
        """Taylor coefficients of ``func`` by FFT on a circle of radius 1/2.

        Only suitable for entire or widely convergent ``func``; used for
        fixtures.
        """
        n = degree + 1 if degree is not None else (order or DEFAULT_ORDER)
        m = 1 << (2 * n).bit_length()
        rho = 0.5
        z = rho * np.exp(2j * np.pi * np.arange(m) / m)
        c = np.fft.fft(func(z)) / m
        c = c[:n] / rho ** np.arange(n)
        return cls(c, order=order)

    @property
    def degree(self):
        return self.coeffs.size - 1

    @property
    def l1(self):
        return float(np.abs(self.coeffs).sum())

    def is_zero(self):
        return not np.any(self.coeffs)

    def padded(self, n):
        out = np.zeros(n, dtype=complex)
        k = min(n, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def samples(self, grid=None):
        """Values at the M-th roots of unity, ``z_j = exp(2 pi i j / M)``."""
        m = _grid_size(self.coeffs.size, grid)
        s = self._samples.get(m)
        if s is None:
            s = np.fft.ifft(self.padded(m)) * m
            s.setflags(write=False)
            self._samples[m] = s
        return s

    def __call__(self, z):
        return eval(self, z)

    def _coerce(self, other):
        if isinstance(other, DiscFunction):
            return other
        if np.isscalar(other):
            return DiscFunction([other], order=self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ring_op(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ring_op(self, other, "sub")

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ring_op(other, self, "sub")

    def __mul__(self, other):
        if np.isscalar(other):
            return DiscFunction(self.coeffs * other, self.order,
                                self.tail * abs(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ring_op(self, other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return NotImplemented

    def __neg__(self):
        return DiscFunction(-self.coeffs, self.order, self.tail)

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self.coeffs[:4])
        more = ", ..." if self.coeffs.size > 4 else ""
        return (f"DiscFunction([{head}{more}], order={self.order}, "
                f"tail={self.tail:.2e})")

    def derivative(self):
        c = self.coeffs
        if c.size == 1:
            return DiscFunction([0], self.order)
        return DiscFunction(c[1:] * np.arange(1, c.size), self.order)

    def antiderivative(self, const=0):
        c = self.coeffs
        out = np.empty(c.size + 1, dtype=complex)
        out[0] = const
        out[1:] = c / np.arange(1, c.size + 1)
        return DiscFunction(out, self.order)


@dataclass(frozen=True)
class Certificate:
    """Argument-principle evidence about a function on the unit circle.

    ``winding == 0`` together with ``min_boundary_modulus > threshold`` is
    what "certified unit" means throughout the package.
    """
    winding: int
    min_boundary_modulus: float
    max_boundary_modulus: float
    grid_size: int
    threshold: float = UNIT_FLOOR
    label: str = ""

    @property
    def ok(self):
        return self.winding == 0 and self.min_boundary_modulus > self.threshold

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        return d


def eval(f, z):
    """Horner evaluation of ``f`` at ``z`` (scalar or array), ``|z| <= 1``."""
    za = np.asarray(z, dtype=complex)
    if np.any(np.abs(za) > 1 + 1e-12):
        raise DomainError(f"point outside the closed unit disc: max |z| = "
                          f"{np.abs(za).max():.17g}")
    out = np.polyval(f.coeffs[::-1], za)
    return complex(out) if out.ndim == 0 else out


def _truncate(c, n):
    if c.size > n:
        return c[:n], float(np.abs(c[n:]).sum())
    return c, 0.0


def ring_op(f, g, op):
    """``f + g``, ``f - g`` or ``f * g`` truncated to the larger working order."""
    n = max(f.order, g.order)
    if op in ("add", "sub"):
        k = max(f.coeffs.size, g.coeffs.size)
        a, b = f.padded(k), g.padded(k)
        c = a + b if op == "add" else a - b
        return DiscFunction(c, n, f.tail + g.tail)
    if op == "mul":
        c, dropped = _truncate(np.convolve(f.coeffs, g.coeffs), n)
        tail = dropped
        if f.tail or g.tail:
            tail += (_sup_estimate(f) * g.tail + _sup_estimate(g) * f.tail
                     + f.tail * g.tail)
        return DiscFunction(c, n, tail)
    raise ValueError(f"unknown ring op {op!r}")


def _sup_estimate(f):
    # grid sup plus the Lipschitz slack between grid points
    if f.coeffs.size <= 2:
        return float(np.abs(f.coeffs).sum())
    m = _grid_size(f.coeffs.size, None)
    lip = float(np.abs(f.coeffs * np.arange(f.coeffs.size)).sum())
    return float(np.abs(f.samples(m)).max()) + np.pi * lip / m


def dilated_samples(f, rho, m):
    """Values of ``f`` on the circle ``|z| = rho`` at ``m`` equispaced points.

    Coefficients below 1e-15 of the l1 norm are treated as rounding noise
    and dropped before dilating, so they are not amplified by ``rho**k``.
    """
    c = f.coeffs
    if rho != 1.0:
        big = np.nonzero(np.abs(c) > 1e-15 * np.abs(c).sum())[0]
        c = c[:big[-1] + 1] if big.size else c[:1]
        c = c * rho ** np.arange(c.size)
    if c.size > m:
        raise ValueError("grid too coarse for the series length")
    return np.fft.ifft(np.pad(c, (0, m - c.size))) * m


def boundary_extrema(f, grid=None):
    """(min, max) of ``|f|`` over the boundary grid.

    Grid values only: the true extrema on the circle differ by at most
    ``pi * sum(k |c_k|) / M``. For holomorphic ``f`` the max is also the
    max over the closed disc.
    """
    a = np.abs(f.samples(grid))
    return float(a.min()), float(a.max())


def winding_number(f, grid=None):
    """Number of zeros of ``f`` in the open disc, via the argument principle.

    The grid is refined until no step in argument exceeds pi/2, so the
    continuous argument is tracked unambiguously.
    """
    if f.is_zero():
        raise ZeroFunctionError("zero function has no winding number")
    m = _grid_size(f.coeffs.size, grid)
    while m <= _MAX_GRID:
        s = f.samples(m)
        lo = float(np.abs(s).min())
        if lo == 0.0 or lo <= 10 * f.tail:
            raise UncertifiableError(
                f"boundary modulus {lo:.3e} below 10x truncation tail "
                f"{f.tail:.3e}", min_modulus=lo, tail=f.tail)
        steps = np.angle(np.roll(s, -1) / s)
        if np.abs(steps).max() < np.pi / 2:
            return int(round(steps.sum() / (2 * np.pi)))
        m *= 2
    raise UncertifiableError("argument not resolved on finest grid")


def certify_unit(f, grid=None, threshold=UNIT_FLOOR, label=""):
    """Bundle winding number and boundary extrema into a :class:`Certificate`.

    Raises :class:`UncertifiableError` when the winding number cannot be
    trusted and :class:`ZeroFunctionError` for the zero function.
    """
    w = winding_number(f, grid)
    m = _grid_size(f.coeffs.size, grid)
    lo, hi = boundary_extrema(f, m)
    thr = max(threshold, 10 * f.tail)
    return Certificate(w, lo, hi, m, thr, label)


def require_unit(f, grid=None, label="", exc=NotAUnitError):
    """Certificate for ``f`` or raise ``exc`` (a not-a-unit error)."""
    if f.is_zero():
        raise ZeroFunctionError(f"{label or 'function'} is identically zero")
    try:
        cert = certify_unit(f, grid, label=label)
    except UncertifiableError as err:
        raise exc(f"{label or 'function'} has near-zero boundary modulus: "
                  f"{err}", **err.context) from err
    if not cert.ok:
        raise exc(f"{label or 'function'} is not a certified unit "
                  f"(winding {cert.winding}, min modulus "
                  f"{cert.min_boundary_modulus:.3e})", certificate=cert)
    return cert


# -- raw coefficient kernels ------------------------------------------------

def _inv_coeffs(c, n):
    """Reciprocal power series to ``n`` terms by Newton's iteration."""
    g = np.array([1.0 / c[0]], dtype=complex)
    p = 1
    while p < n:
        p = min(2 * p, n)
        e = -np.convolve(c[:p], g)[:p]
        e[0] += 2.0
        g = np.convolve(g, e)[:p]
    # one correction at full length cleans up rounding from the doubling
    e = -np.convolve(c[:n], g)[:n]
    e[0] += 2.0
    return np.convolve(g, e)[:n]


def _log_coeffs(c, n):
    g = np.zeros(n, dtype=complex)
    g[0] = cmath.log(c[0])
    if n > 1 and c.size > 1:
        k = np.arange(1, c.size)
        df = c[1:] * k
        q = np.convolve(df, _inv_coeffs(c, n - 1))[:n - 1]
        g[1:q.size + 1] = q / np.arange(1, q.size + 1)
    return g


def _exp_coeffs(c, n):
    """exp of a series through ``g' = f' g`` solved term by term."""
    c = np.pad(c[:n], (0, max(0, n - c.size)))
    kf = c * np.arange(n)
    g = np.zeros(n, dtype=complex)
    g[0] = cmath.exp(c[0])
    for j in range(1, n):
        g[j] = np.dot(kf[1:j + 1], g[j - 1::-1]) / j
    return g


def _exp_newton_coeffs(c, n):
    """exp of a series through Newton's iteration ``g <- g (1 + f - log g)``."""
    c = np.pad(c[:n], (0, max(0, n - c.size)))
    g = np.array([cmath.exp(c[0])])
    p = 1
    while p < n:
        p = min(2 * p, n)
        e = c[:p] - _log_coeffs(np.pad(g, (0, p - g.size)), p)
        e[0] += 1.0
        g = np.convolve(g, e)[:p]
    e = c - _log_coeffs(g, n)
    e[0] += 1.0
    return np.convolve(g, e)[:n]


def _sup_error(f, g, grid):
    m = _grid_size(max(f.coeffs.size, g.coeffs.size), grid)
    return float(np.abs(f.samples(m) - g.samples(m)).max())


def _cut_estimate(c):
    # size of the first omitted coefficients, guessed from the last kept ones
    return float(np.abs(c[-2:]).sum()) if c.size > 2 else 0.0


def invert(f, grid=None, full_output=False):
    """Multiplicative inverse of a certified unit.

    With ``full_output`` returns ``(g, residual)`` where ``residual`` is the
    boundary sup of ``|f g - 1|`` (``f g`` formed without retruncation).
    """
    cert = require_unit(f, grid, label="divisor")
    n = f.order
    g = _inv_coeffs(f.padded(n), n)
    m = _grid_size(2 * n, grid)
    prod = np.convolve(f.coeffs, g)
    res = float(np.abs(np.fft.ifft(np.pad(prod, (0, m - prod.size))) * m
                       - 1.0).max())
    lo = cert.min_boundary_modulus
    # |1/(f+e) - 1/f| <= |e| / (|f| (|f| - |e|))
    tail = f.tail / (lo * max(lo - f.tail, 0.5 * lo)) + _cut_estimate(g)
    out = DiscFunction(g, n, tail)
    return (out, res) if full_output else out


def from_boundary(values, order):
    """Disc function from equispaced boundary values ``f(exp(2 pi i j / M))``.

    The tail collects the coefficients beyond ``order`` and the negative
    frequencies, which vanish for boundary values of a holomorphic function.
    """
    v = np.asarray(values, dtype=complex)
    m = v.size
    c = np.fft.fft(v) / m
    n = min(order, m // 2)
    tail = float(np.abs(c[n:]).sum())
    return DiscFunction(c[:n], order, tail)


def _boundary_log(f, m):
    # log|f| + i arg f, the argument unwrapped along the circle; winding 0
    # makes this the boundary trace of a holomorphic branch
    s = f.samples(m)
    steps = np.angle(np.roll(s, -1) / s)[:-1]
    arg = np.angle(s[0]) + np.concatenate([[0.0], np.cumsum(steps)])
    g = from_boundary(np.log(np.abs(s)) + 1j * arg, f.order)
    # pin the branch so that g(0) is the principal Log f(0)
    k = round((g.coeffs[0].imag - cmath.log(f.coeffs[0]).imag) / (2 * np.pi))
    c = g.coeffs.copy()
    c[0] -= 2j * np.pi * k
    return c, g.tail


def _refine_log(fs, g, m):
    """One correction of ``g`` so that ``exp(g)`` matches ``f`` in absolute terms.

    Solves ``min sum |exp(g_j)|^2 |delta(z_j) - r_j|^2`` with
    ``r = f exp(-g) - 1`` over polynomials ``delta``. The weights stop the
    rounding noise of ``f``, large in relative terms where ``|f|`` is small,
    from spreading onto the arc where ``|f|`` is large.
    """
    n = g.size
    z = np.exp(2j * np.pi * np.arange(m) / m)
    e = np.exp(np.fft.ifft(np.pad(g, (0, m - n))) * m)
    w = np.abs(e)
    vand = np.vander(z, n, increasing=True) * w[:, None]
    delta, *_ = np.linalg.lstsq(vand, w * (fs / e - 1.0), rcond=None)
    return g + delta


def holomorphic_log(f, grid=None, full_output=False, method="series"):
    """Logarithm of a certified unit, principal branch at ``z = 0``.

    ``method="series"`` builds it from ``log f = Log f(0) + integral of f'/f``;
    a unit with winding number 0 has such a logarithm on the simply
    connected disc. ``method="boundary"`` takes ``log|f| + i arg f`` on the
    grid and transforms back, which keeps full relative accuracy when
    ``|f|`` spans many orders of magnitude; if ``exp(g)`` then still misses
    ``f`` by more than ``1e-13 max|f|`` one weighted least-squares step
    follows. With ``full_output`` also returns the boundary sup of
    ``|exp(log f) - f|``.
    """
    cert = require_unit(f, grid, label="argument of log")
    n = f.order
    m = _grid_size(n, grid)
    if method == "series":
        coeffs, alias = _log_coeffs(f.padded(n), n), 0.0
    elif method == "boundary":
        # the unwrapped argument needs steps well below pi
        while True:
            s = f.samples(m)
            if np.abs(np.angle(np.roll(s, -1) / s)).max() < np.pi / 2:
                break
            m *= 2
        coeffs, alias = _boundary_log(f, m)
        fs = f.samples(m)
        with np.errstate(over="ignore", invalid="ignore"):
            miss = np.abs(np.exp(DiscFunction(coeffs, n).samples(m)) - fs)
        if not miss.max() <= 1e-13 * np.abs(fs).max():
            coeffs = _refine_log(fs, coeffs, m)
    else:
        raise ValueError(f"unknown log method {method!r}")
    g = DiscFunction(coeffs, n)
    fs = f.samples(m)
    with np.errstate(over="ignore", invalid="ignore"):
        err = np.abs(np.exp(g.samples(m)) - fs)
    res = float(err.max())
    lo = cert.min_boundary_modulus
    # a relative perturbation r of f moves log f by about r
    tail = (float((err / np.abs(fs)).max()) + f.tail / lo
            + _cut_estimate(g.coeffs) + alias)
    g = DiscFunction(g.coeffs, n, tail)
    return (g, res) if full_output else g


def holomorphic_sqrt(f, grid=None, full_output=False):
    """Square root ``exp(log(f) / 2)`` with ``r(0)`` the principal root of ``f(0)``."""
    half = holomorphic_log(f, grid) * 0.5
    r = exp_series(half)
    res = _sup_error(r * r, f, grid)
    return (r, res) if full_output else r


def exp_series(f, method="recurrence"):
    """``exp(f)`` to the working order of ``f``.

    ``method`` is ``"recurrence"`` (the ODE ``g' = f' g``) or ``"newton"``.
    """
    n = f.order
    c = f.coeffs
    if method == "recurrence":
        g = _exp_coeffs(c, n)
    elif method == "newton":
        g = _exp_newton_coeffs(c, n)
    else:
        raise ValueError(f"unknown exp method {method!r}")
    out = DiscFunction(g, n)
    if f.tail:
        # |exp(f + e) - exp(f)| <= |exp(f)| (exp(|e|) - 1)
        grow = math.expm1(f.tail) if f.tail < 700 else math.inf
        out.tail = _sup_estimate(out) * grow
    out.tail += _cut_estimate(g)
    return out
