"""Two-exponential factorization of 2x2 matrices over the disc algebra.

Pipeline for ``A`` in SL2 with non-parabolic trace:

1. conjugate by a shear ``E = [[1, h], [0, 1]]`` so the (1,1) entry
   ``a + h c`` is a unit;
2. scale rows by ``diag(delta, 1/delta)`` with ``delta`` at least
   ``sup (3 + |d|) / |a|``, which pushes ``|trace|`` above 2;
3. take the root ``lambda`` of ``T^2 - t T + 1`` with ``|lambda| > 1``;
4. diagonalize the scaled matrix with an explicit eigenvector matrix ``P``
   and take the logarithm ``P diag(log lambda, -log lambda) P^{-1}``.

Both factors come out traceless. Parabolic inputs (trace identically +-2)
take a shortcut through the nilpotent part.
"""
from dataclasses import dataclass, field
import cmath
import itertools
import logging
import math
import time

import numpy as np
from scipy.optimize import minimize

from . import holofun as hf
from . import mat2
from .errors import (ContractError, DegenerateEigenvalueError,
                     InternalConsistencyError, NotAUnitError,
                     NotNullHomotopicError, PreconditionError,
                     ReductionFailedError, UncertifiableError)
from .holofun import DiscFunction
from .mat2 import MatFun

log = logging.getLogger(__name__)

PARABOLIC_TOL = 1e-11
DELTA_MARGIN = 1e-6
REDUCTION_SEED = 20240601
# c entries below this are treated as zero by the pointwise splitter
SPLIT_C_FLOOR = 1e-6
# a reduced first entry must be zero-free out to this radius, so that the
# series built from it converge geometrically at the working order
ZERO_FREE_RADIUS = 1.1
# circles on which delta bounds beta, tried in turn when the series built
# from the scaled matrix do not converge at the working order
HEADROOM_RADII = (1.0, 1.05, 1.1)
INTERP_RADII = (1.25, 1.15)
INTERP_MAX_DEGREE = 128
# degree of the free multiplier q in p = p0 + B q, tuned to shrink delta
SHAPE_DEGREE = 12
# weight on sup log|e^p|; huge units make h huge and cost digits
SHAPE_PENALTY = 0.5
SHAPE_PENALTIES = (0.25, 0.5, 1.0, 2.0)
# soft-maximum sharpness schedule for the shaping optimization
SHAPE_SHARPNESS = (10.0, 100.0)
# below this condition estimate the cheap shears are kept without trying
# the interpolation construction
CHEAP_CONDITION = 1e7
# reduction candidates tried before giving up on the generic branch
MAX_REDUCTIONS = 8
# (frame, shear, radius) triples tried in all
MAX_TRIES = 48

PLUS, MINUS, NONE = "plus", "minus", "none"
UPPER, LOWER = "upper", "lower"


@dataclass
class ScaleSplit:
    delta: float
    beta_sup: float
    scaled: MatFun
    constant_log: MatFun


@dataclass
class ReductionRecord:
    h: DiscFunction
    shear: MatFun
    reduced: MatFun
    certificate: hf.Certificate = None
    attempts: int = 0
    kind: str = ""


@dataclass
class Factorization:
    """``A = exp(m1) exp(m2)``."""
    m1: MatFun
    m2: MatFun
    factor_count: int
    branch: str
    residual: float = float("nan")
    certificates: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)


@dataclass
class TracelessPoint:
    u: complex
    v: complex
    w: complex
    fplus: complex
    fminus: complex
    conj: np.ndarray

    def matrix(self):
        """The traceless factor ``[[u, w], [v, -u]]``."""
        return np.array([[self.u, self.w], [self.v, -self.u]])


def _max_coeff(f):
    return float(np.abs(f.coeffs).max())


def _sup(f, grid=None):
    return hf.boundary_extrema(f, grid)[1]


# -- parabolic branch ------------------------------------------------------

def detect_parabolic(a):
    """``"plus"`` if trace is identically 2, ``"minus"`` if -2, else ``"none"``."""
    _, tr = mat2.det_trace(a)
    if _max_coeff(tr - 2.0) <= PARABOLIC_TOL:
        return PLUS
    if _max_coeff(tr + 2.0) <= PARABOLIC_TOL:
        return MINUS
    return NONE


def _parabolic_log(a):
    # trace is 2 up to noise; split it evenly so the log is exactly traceless
    x = (a.a - a.d) * 0.5
    return MatFun(x, a.b, a.c, -x)


def factor_parabolic(a, sign):
    """(T-1)^2: ``A = exp(A - I)``. (T+1)^2: ``A = exp(diag(i pi, -i pi)) exp(-A - I)``."""
    found = detect_parabolic(a)
    if found != sign or sign == NONE:
        raise ContractError(f"asked for parabolic branch {sign!r}, "
                            f"trace says {found!r}")
    n = a.order
    if sign == PLUS:
        m1 = _parabolic_log(a)
        return Factorization(m1, MatFun.zero(n), 1, "parabolic_plus")
    m1 = MatFun.diag(1j * math.pi, -1j * math.pi, order=n)
    m2 = _parabolic_log(-a)
    return Factorization(m1, m2, 2, "parabolic_minus")


# -- triangular branch -----------------------------------------------------

def detect_triangular(a):
    """``"upper"`` if ``c`` vanishes, ``"lower"`` if ``b`` does, else ``"none"``."""
    if _max_coeff(a.c) <= PARABOLIC_TOL:
        return UPPER
    if _max_coeff(a.b) <= PARABOLIC_TOL:
        return LOWER
    return NONE


def _pointwise_quotient(x, y, grid):
    m = hf._grid_size(2 * max(x.order, y.order), grid)
    q = hf.from_boundary(x.samples(m) / y.samples(m), max(x.order, y.order))
    return q


def factor_triangular(a, grid=None, special=True):
    """Triangular ``A`` with unit diagonal: ``exp(diag(log a, log d)) exp(N)``.

    ``N`` is nilpotent, ``[[0, b/a], [0, 0]]`` or ``[[0, 0], [c/d, 0]]``.
    With ``special`` the diagonal log is ``diag(L, -L)``, so both factors
    are traceless. Logs use the boundary method, which stays accurate when
    the diagonal spans many orders of magnitude.
    """
    shape = detect_triangular(a)
    if shape == NONE:
        raise ContractError("matrix is not triangular")
    certs = [hf.require_unit(a.a, grid, label="a"),
             hf.require_unit(a.d, grid, label="d")]
    la = hf.holomorphic_log(a.a, grid, method="boundary")
    ld = -la if special else hf.holomorphic_log(a.d, grid, method="boundary")
    n = a.order
    zero = DiscFunction([0], n)
    m1 = MatFun(la, zero, zero, ld)
    if shape == UPPER:
        x = _pointwise_quotient(a.b, a.a, grid)
        m2 = MatFun(zero, x, zero, zero)
    else:
        x = _pointwise_quotient(a.c, a.d, grid)
        m2 = MatFun(zero, zero, x, zero)
    count = 1 if _max_coeff(x) == 0.0 else 2
    return Factorization(m1, m2, count, f"triangular_{shape}",
                         certificates=certs)


# -- stable rank reduction ---------------------------------------------------

def _constant_candidates(rng):
    out = [0.0]
    for k in (1, 2, 3, 4):
        out += [k, -k, 1j * k, -1j * k]
    r = 4 * np.sqrt(rng.uniform(size=64))
    th = rng.uniform(0, 2 * np.pi, size=64)
    out += list(r * np.exp(1j * th))
    return out


def _poly_candidates(rng, count=256):
    out = []
    for _ in range(count):
        k = int(rng.integers(0, 3)) + 1
        r = 4 * np.sqrt(rng.uniform(size=k))
        out.append(r * np.exp(1j * rng.uniform(0, 2 * np.pi, size=k)))
    return out


def _try_unit(f, grid):
    try:
        cert = hf.certify_unit(f, grid)
    except (UncertifiableError, NotAUnitError):
        return None
    return cert if cert.ok else None


def _ring_samples(f, rho, m):
    if not isinstance(f, DiscFunction):
        f = DiscFunction(f)
    return hf.dilated_samples(f, rho, m)


def _winds_zero_rows(s):
    """Per row of samples: winding number 0, or False if unresolved."""
    mod = np.abs(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.angle(np.roll(s, -1, axis=-1) / s)
    ok = mod.min(axis=-1) > 1e-9 * mod.max(axis=-1)
    ok &= np.abs(steps).max(axis=-1) < np.pi / 2
    return ok & (np.abs(steps.sum(axis=-1)) < np.pi)


def _winds_zero(s):
    """Winding number 0 read off pointwise samples, or False if unresolved."""
    return bool(_winds_zero_rows(np.asarray(s)[None])[0])


def _trimmed(c, rel=1e-13):
    big = np.nonzero(np.abs(c) > rel * np.abs(c).sum())[0]
    return c[:big[-1] + 1] if big.size else c[:1]


def _deflate(c, root):
    """Quotient of ``c(z) / (z - root)``, dropping the remainder.

    Synthetic division runs from the top for ``|root| <= 1`` and from the
    bottom otherwise, so the recurrence never multiplies by more than 1.
    """
    n = max(c.size - 1, 1)
    q = np.zeros(n, dtype=complex)
    acc = 0j
    if abs(root) <= 1.0:
        for k in range(c.size - 1, 0, -1):
            acc = c[k] + root * acc
            q[k - 1] = acc
    else:
        for k in range(n):
            acc = (acc - c[k]) / root
            q[k] = acc
    return q


def _newton_interp(nodes, values):
    """Newton divided differences, returned as power-basis coefficients."""
    x = np.asarray(nodes, dtype=complex)
    dd = np.array(values, dtype=complex)
    for j in range(1, x.size):
        dd[j:] = (dd[j:] - dd[j - 1:-1]) / (x[j:] - x[:-j])
    poly = np.array([dd[-1]])
    for j in range(x.size - 2, -1, -1):
        # poly * (z - x_j) + dd_j
        nxt = np.zeros(poly.size + 1, dtype=complex)
        nxt[1:] += poly
        nxt[:-1] -= x[j] * poly
        nxt[0] += dd[j]
        poly = nxt
    return poly


def _pick_branches(nodes, logs, zs, apd, rounds=2):
    """Shift each log value by a multiple of 2 pi i so that ``u = exp(p)``
    keeps ``(3 + |a + d - u|) / |u|`` small on the circle."""
    k = np.zeros(nodes.size)

    def cost(kk):
        p = _newton_interp(nodes, logs + 2j * np.pi * kk)
        with np.errstate(over="ignore", invalid="ignore"):
            u = np.exp(np.polyval(p[::-1], zs))
            c = np.max((3 + np.abs(apd - u)) / np.abs(u))
        return c if np.isfinite(c) else np.inf

    best = cost(k)
    for _ in range(rounds):
        improved = False
        for j in range(nodes.size):
            for step in (-1, 1):
                trial = k.copy()
                trial[j] += step
                c = cost(trial)
                if c < best:
                    best, k, improved = c, trial, True
        if not improved:
            break
    return logs + 2j * np.pi * k


def _soft_max(v, sharp):
    """Log-sum-exp maximum of ``v`` and its weights (the gradient)."""
    top = v.max()
    e = np.exp(sharp * (v - top))
    return top + np.log(e.sum()) / sharp, e / e.sum()


def _shape_log(p0, inner, zs, tau, degree=SHAPE_DEGREE, penalty=None):
    """Add ``B q`` to ``p0`` (``B`` vanishing at the nodes) so that
    ``beta = (3 + |tau - e^p|) / |e^p|`` is small over ``zs`` without
    ``|e^p|`` growing much.

    Minimizes ``softmax(log beta) + penalty * softmax(Re p)`` by BFGS with
    a rising sharpness; ``p`` keeps its values at the nodes whatever ``q``
    is. Falls back to ``p0`` if nothing improves.
    """
    penalty = SHAPE_PENALTY if penalty is None else penalty
    basis = np.polyval(np.poly(inner), zs)[:, None] \
        * zs[:, None] ** np.arange(degree + 1)
    base = np.polyval(p0[::-1], zs)
    k = degree + 1

    def cost(x, sharp):
        p = base + basis @ (x[:k] + 1j * x[k:])
        with np.errstate(over="ignore", invalid="ignore"):
            u = np.exp(p)
            w = tau - u
            aw = np.abs(w)
            v = np.log(3.0 + aw) - p.real
            # d v / d p, as v = Re(g dp) to first order
            g = -np.conj(w) * u / (aw * (3.0 + aw)) - 1.0
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(g))):
            return np.inf, np.zeros_like(x)
        f1, w1 = _soft_max(v, sharp)
        f2, w2 = _soft_max(p.real, sharp)
        dp = (w1 * g) @ basis
        if f2 > 0:
            f1 += penalty * f2
            dp = dp + penalty * (w2 @ basis)
        return f1, np.concatenate([dp.real, -dp.imag])

    x0 = np.zeros(2 * k)
    x = x0
    for sharp in SHAPE_SHARPNESS:
        x = minimize(cost, x, args=(sharp,), jac=True, method="BFGS").x
    if not cost(x, SHAPE_SHARPNESS[-1])[0] < cost(x0, SHAPE_SHARPNESS[-1])[0]:
        return p0
    q = np.polymul(np.poly(inner), (x[:k] + 1j * x[k:])[::-1])[::-1]
    out = np.zeros(max(q.size, p0.size), dtype=complex)
    out[:p0.size] += p0
    out[:q.size] += q
    return out


def interpolation_shear(a, c, d=None, radius=INTERP_RADII[0],
                        max_degree=INTERP_MAX_DEGREE, penalty=None):
    """``h = (exp(p) - a) / c`` with ``p`` interpolating ``log a`` at the
    zeros of ``c`` inside ``|z| < radius``.

    Then ``a + h c = exp(p)`` has no zeros at all. At a zero of ``c`` the
    value of ``a`` is nonzero because ``ad - bc = 1``, so the logs exist.
    When ``d`` is given the log branches are tuned to keep the later
    scaling small. Returns ``None`` when ``c`` is too long to root-find or
    the division fails.
    """
    n = a.order
    cc = _trimmed(c.coeffs)
    if cc.size - 1 > max_degree:
        return None
    roots = np.roots(cc[::-1]) if cc.size > 1 else np.array([])
    inner = roots[np.abs(roots) < radius]
    if inner.size == 0:
        # c itself is the unit: a + h c = 1
        try:
            return (1.0 - a) * hf.invert(c)
        except NotAUnitError:
            return None
    avals = np.polyval(a.coeffs[::-1], inner)
    if np.any(avals == 0):
        return None
    logs = np.log(avals)
    if d is not None:
        zs = ZERO_FREE_RADIUS * np.exp(2j * np.pi * np.arange(256) / 256)
        tau = hf.dilated_samples(a + d, ZERO_FREE_RADIUS, 256)
        logs = _pick_branches(inner, logs, zs, tau)
        p = _newton_interp(inner, logs)
        if penalty != 0:
            p = _shape_log(p, inner, zs, tau, penalty=penalty)
    else:
        p = _newton_interp(inner, logs)
    u = hf.exp_series(DiscFunction(p, n))
    num = (u - a).coeffs
    cout = c.coeffs
    for r in inner:
        num = _deflate(num, r)
        cout = _deflate(cout, r)
    try:
        inv_out = hf.invert(DiscFunction(cout, n))
    except NotAUnitError:
        return None
    return DiscFunction(num, n) * inv_out


def _candidate_rows(cands, rho, m):
    """Samples of every candidate ``h`` on ``|z| = rho``, one row each."""
    rows = np.empty((len(cands), m), dtype=complex)
    z = rho * np.exp(2j * np.pi * np.arange(m) / m)
    polys = []
    for i, (kind, h) in enumerate(cands):
        if kind == "const":
            rows[i] = h
        elif kind == "poly":
            polys.append(i)
        else:
            rows[i] = hf.dilated_samples(h, rho, m)
    if polys:
        width = max(cands[i][1].size for i in polys)
        coef = np.zeros((len(polys), width), dtype=complex)
        for j, i in enumerate(polys):
            coef[j, :cands[i][1].size] = cands[i][1]
        rows[polys] = coef @ z[None, :] ** np.arange(width)[:, None]
    return rows


def _screen(cands, rings, m, strong, weak):
    if not cands:
        return
    ar, cr, dr = rings[1.0]
    hs = _candidate_rows(cands, 1.0, m)
    f = ar + hs * cr
    ok = _winds_zero_rows(f)
    if not ok.any():
        return
    idx = np.nonzero(ok)[0]
    scores = _condition_estimate(f[idx], dr - hs[idx] * cr, hs[idx])
    ar2, cr2, _ = rings[ZERO_FREE_RADIUS]
    outer = _candidate_rows([cands[i] for i in idx], ZERO_FREE_RADIUS, m)
    far = _winds_zero_rows(ar2 + outer * cr2)
    for i, score, good in zip(idx, scores, far):
        (strong if good else weak).append((float(score),) + tuple(cands[i]))


def rank_reductions(a, seed=REDUCTION_SEED, interp=None):
    """Screened shear candidates for ``a`` as ``(strong, weak)`` lists of
    ``(score, kind, h)``, each sorted by score.

    Candidates: small Gaussian integers (``h = 0`` first) and 64 seeded
    random constants of modulus at most 4, 256 seeded random polynomials of
    degree at most 2, and the interpolation construction of
    :func:`interpolation_shear`. The last is costly and by default only
    tried when no cheap candidate scores below ``CHEAP_CONDITION``.
    ``a + h c`` must wind 0 on the unit circle; ``strong`` holds those that
    also wind 0 on ``|z| = ZERO_FREE_RADIUS`` (zeros hugging the circle
    wreck every truncated series downstream). The score is
    :func:`_condition_estimate`.
    """
    n = a.order
    rng = np.random.default_rng(seed)
    m = 1024
    rings = {rho: (_ring_samples(a.a, rho, m), _ring_samples(a.c, rho, m),
                   _ring_samples(a.d, rho, m))
             for rho in (1.0, ZERO_FREE_RADIUS)}
    cands = [("const", h) for h in _constant_candidates(rng)]
    cands += [("poly", c) for c in _poly_candidates(rng)]
    strong, weak = [], []
    _screen(cands, rings, m, strong, weak)
    if interp is None:
        interp = min(strong, key=_score, default=(np.inf,))[0] > CHEAP_CONDITION
    if interp and not a.c.is_zero():
        extra = []
        for radius in INTERP_RADII:
            for pen in SHAPE_PENALTIES:
                h = interpolation_shear(a.a, a.c, a.d, radius, penalty=pen)
                if h is not None:
                    extra.append((f"interp:{radius}:{pen}", h))
        _screen(extra, rings, m, strong, weak)
    return sorted(strong, key=_score), sorted(weak, key=_score)


def _score(entry):
    return entry[0]


def _certified(a, entries, grid):
    """ReductionRecords for the screened entries that certify, in order."""
    n = a.order
    for attempts, (score, kind, h) in enumerate(entries, start=1):
        hfun = h if isinstance(h, DiscFunction) else DiscFunction(h, order=n)
        cert = _try_unit(a.a + hfun * a.c, grid)
        if cert is None:
            continue
        log.debug("reduction: %s candidate, score %.3g", kind, score)
        shear = MatFun.build(1, hfun, 0, 1, order=n)
        yield ReductionRecord(hfun, shear, shear_conjugate(a, hfun), cert,
                              attempts, kind)


def reduction_candidates(a, grid=None, seed=REDUCTION_SEED):
    """Shears ``h`` with ``a + h c`` a certified unit, best first, as
    :class:`ReductionRecord`; see :func:`rank_reductions`."""
    strong, weak = rank_reductions(a, seed)
    return _certified(a, strong + weak, grid)


def unimodular_reduction(a, grid=None, seed=REDUCTION_SEED):
    """Best-ranked ``h`` with ``a + h c`` a certified unit."""
    for rec in reduction_candidates(a, grid, seed):
        return rec
    raise ReductionFailedError("no h with a + h c a certified unit")


def _condition_estimate(a, d, h):
    """Rounding amplification of the whole pipeline, from samples (last
    axis) of the reduced diagonal ``a, d`` and the shear ``h``:
    ``delta * sup|lambda| * (1 + sup|h|)^2``."""
    delta = np.maximum(1.0, np.max((3.0 + np.abs(d)) / np.abs(a), axis=-1))
    lam = np.max(np.abs(delta[..., None] * a + d / delta[..., None]), axis=-1)
    return delta * lam * (1.0 + np.max(np.abs(h), axis=-1)) ** 2


def _zero_free_beyond(f, rho=None):
    """True if ``f`` winds zero times around 0 on ``|z| = rho`` too."""
    rho = ZERO_FREE_RADIUS if rho is None else rho
    return _winds_zero(_ring_samples(f, rho, 1024))


def shear_conjugate(m, h):
    """``E m E^{-1}`` for ``E = [[1, h], [0, 1]]``, expanded entrywise."""
    a = m.a + h * m.c
    d = m.d - h * m.c
    b = m.b + h * (m.d - m.a) - h * h * m.c
    return MatFun(a, b, m.c, d)


def shear_unconjugate_traceless(m, h):
    """``E^{-1} m E`` for traceless ``m``; the output is traceless by construction."""
    x = m.a - h * m.c
    b = m.b + 2.0 * h * m.a - h * h * m.c
    return MatFun(x, b, m.c, -x)


# -- constant frames ----------------------------------------------------------

def _frames():
    out = [np.eye(2, dtype=complex), np.array([[0, -1], [1, 0]], dtype=complex)]
    for s in (1, -1, 1j, -1j):
        out.append(np.array([[1, 0], [s, 1]], dtype=complex))
        out.append(np.array([[1, s], [0, 1]], dtype=complex))
    return tuple(out)


# constant conjugators ``Q`` (det 1); ``Q A Q^{-1}`` can have a much better
# conditioned reduction than ``A`` itself
FRAMES = _frames()


def frame_conjugate(m, q):
    """``q m q^{-1}`` for a constant ``q`` of determinant 1."""
    qi = _inv2(q)
    ent = ((m.a, m.b), (m.c, m.d))

    def entry(i, j):
        acc = None
        for k in range(2):
            for l in range(2):
                w = complex(q[i, k] * qi[l, j])
                if w == 0:
                    continue
                t = ent[k][l] * w
                acc = t if acc is None else acc + t
        return acc if acc is not None else DiscFunction([0.0], order=m.order)

    return MatFun(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1))


def frame_unconjugate_traceless(m, q):
    """``q^{-1} m q`` for traceless ``m``, traceless by construction."""
    out = frame_conjugate(m, _inv2(q))
    x = (out.a - out.d) * 0.5
    return MatFun(x, out.b, out.c, -x)


def _reduction_plan(a, seed):
    """``(frame, conjugated matrix, entries)`` to try, best first.

    Escalates until a frame has a strong candidate scoring at most
    ``CHEAP_CONDITION`` (frames are scanned in order and the scan stops
    there): cheap candidates in the identity frame, then in
    every frame, then the interpolation construction in the identity frame
    and finally in every frame. Frames are ordered by their best strong
    score; frames with only weak candidates come last.
    """
    ranked = {}

    def run(frames, interp):
        for k in frames:
            if k in ranked and not interp:
                continue
            b = ranked[k][0] if k in ranked else (
                a if k == 0 else frame_conjugate(a, FRAMES[k]))
            ranked[k] = (b,) + rank_reductions(b, seed, interp=interp)
            if ranked[k][1] and ranked[k][1][0][0] <= CHEAP_CONDITION:
                return True
        return False

    everything = range(len(FRAMES))
    for frames, interp in (([0], False), (everything, False), ([0], True),
                           (everything, True)):
        if run(frames, interp):
            break
    plan = sorted(((FRAMES[k], b, st) for k, (b, st, _) in ranked.items()
                   if st), key=lambda t: t[2][0][0])
    weak = sorted(((FRAMES[k], b, wk) for k, (b, _, wk) in ranked.items()
                   if wk), key=lambda t: t[2][0][0])
    return plan + weak


# -- scaling --------------------------------------------------------------

def scale_split(a, grid=None, radius=1.0):
    """Pick ``delta >= max(1, sup beta)`` with ``beta = (3 + |d|) / |a|``.

    ``beta`` is a sum of moduli of holomorphic functions, hence
    subharmonic, so its sup over the closed disc sits on the boundary and
    the boundary grid suffices. Then ``|trace| > 2``, ``|lambda| > 1`` and
    ``|det P| >= 1`` on the disc. With ``radius > 1`` the sup is taken on
    ``|z| = radius`` instead, which keeps ``t^2 - 4`` zero-free out to that
    circle at the price of a larger ``delta``; ``a`` must have no zeros
    inside it. ``beta_sup`` always reports the unit-circle value.
    """
    try:
        hf.require_unit(a.a, grid, label="first entry")
    except NotAUnitError as err:
        raise ContractError(f"scale_split needs a unit first entry: {err}",
                            certificate=err.certificate) from err
    m = max(hf._grid_size(e.coeffs.size, grid) for e in a.entries)
    beta = (3.0 + np.abs(a.d.samples(m))) / np.abs(a.a.samples(m))
    beta_sup = float(beta.max())
    bound = beta_sup
    if radius != 1.0:
        sa = hf.dilated_samples(a.a, radius, m)
        if not _winds_zero(sa):
            raise InternalConsistencyError(
                f"first entry has zeros inside |z| = {radius}")
        sd = hf.dilated_samples(a.d, radius, m)
        bound = max(bound, float(np.max((3.0 + np.abs(sd)) / np.abs(sa))))
    delta = max(1.0, bound) * (1.0 + DELTA_MARGIN)
    scaled = MatFun(a.a * delta, a.b * delta, a.c / delta, a.d / delta)
    ld = math.log(delta)
    constant_log = MatFun.diag(-ld, ld, order=a.order)
    _, tr = mat2.det_trace(scaled)
    lo, _ = hf.boundary_extrema(tr, m)
    if not lo > 2.0:
        raise InternalConsistencyError(
            f"scaled trace has boundary inf {lo:.6g} <= 2")
    return ScaleSplit(delta, beta_sup, scaled, constant_log)


# -- dominant root ----------------------------------------------------------

def dominant_root(t, grid=None, tol=1e-10):
    """Roots ``lambda, 1/lambda`` of ``T^2 - t T + 1`` with ``|lambda| > 1``.

    Needs ``|t| > 2`` on the boundary; ``t^2 - 4`` must then be a unit for
    the square root to exist. ``tol`` is relative to ``max(1, sup |t|)``.
    """
    lo, hi = hf.boundary_extrema(t, grid)
    if not lo > 2.0:
        raise PreconditionError(f"dominant_root needs |t| > 2 on the "
                                f"boundary, got inf {lo:.6g}")
    r = hf.holomorphic_sqrt(t * t - 4.0, grid)
    lam = (t + r) * 0.5
    if abs(lam.coeffs[0]) <= 1.0:
        lam = (t - r) * 0.5
    lam_inv = hf.invert(lam, grid)
    lam_lo, _ = hf.boundary_extrema(lam, grid)
    if not lam_lo > 1.0:
        raise InternalConsistencyError(
            f"selected root has boundary inf |lambda| = {lam_lo:.6g} <= 1")
    err = _max_coeff(lam + lam_inv - t)
    if err > tol * max(1.0, hi):
        raise InternalConsistencyError(
            f"lambda + 1/lambda differs from t by {err:.3e}")
    return lam, lam_inv


# -- diagonalization --------------------------------------------------------

def eigen_conjugator(b, lam, lam_inv, grid=None, from_scale_split=True,
                     tol=1e-9):
    """Eigenvector matrix ``P = [[d - lam, -b], [-c, a - 1/lam]]`` of ``b``.

    The first column spans ker(b - lam), the second ker(b - 1/lam), and
    ``det P = 2 - lam a - d / lam``. When ``b`` comes out of
    :func:`scale_split`, ``|det P| >= 1`` on the disc. Residual checks are
    relative to ``(1 + sup|lam|)^2``.
    """
    p = MatFun(b.d - lam, -b.b, -b.c, b.a - lam_inv)
    m = max(hf._grid_size(e.coeffs.size, grid) for e in p.entries)
    bs = b.samples(m)
    ls, lis = lam.samples(m), lam_inv.samples(m)
    ps = p.samples(m)
    v, w = ps[:, :, 0], ps[:, :, 1]
    eye = np.eye(2)
    r1 = np.linalg.norm(((bs - ls[:, None, None] * eye) @ v[..., None])[..., 0],
                        axis=1).max()
    r2 = np.linalg.norm(((bs - lis[:, None, None] * eye) @ w[..., None])[..., 0],
                        axis=1).max()
    scale = (1.0 + np.abs(ls).max()) ** 2
    if max(r1, r2) > tol * scale:
        raise InternalConsistencyError(
            f"eigenvector residuals {r1:.3e}, {r2:.3e} exceed tolerance")
    det, _ = mat2.det_trace(p)
    closed = 2.0 - lam * b.a - lam_inv * b.d
    gap = _max_coeff(det - closed)
    if gap > 1e-12 * scale * max(1.0, _sup(b.a, m), _sup(b.d, m)):
        raise InternalConsistencyError(f"det P disagrees with closed form "
                                       f"by {gap:.3e}")
    cert = hf.require_unit(det, grid, label="det P")
    if from_scale_split and cert.min_boundary_modulus < 1.0 - 1e-6:
        raise InternalConsistencyError(
            f"|det P| boundary inf {cert.min_boundary_modulus:.6g} < 1",
            certificate=cert)
    return p


def log_via_diagonalization(b, lam, p, grid=None, tol=1e-8):
    """``P diag(l, -l) P^{-1}`` with ``l = log lambda``.

    Written out as ``l / det P * [[ps + qr, -2pq], [2rs, -(ps + qr)]]`` for
    ``P = [[p, q], [r, s]]`` so the trace vanishes identically.
    """
    ell = hf.holomorphic_log(lam, grid)
    det, _ = mat2.det_trace(p)
    k = ell * hf.invert(det, grid)
    x = (p.a * p.d + p.b * p.c) * k
    m = MatFun(x, p.a * p.b * k * -2.0, p.c * p.d * k * 2.0, -x)
    res = _grid_residual(mat2.exp_traceless(m), b, grid)
    bsup = float(np.linalg.norm(b.samples(grid), axis=(1, 2)).max())
    if res > tol * max(1.0, bsup):
        raise InternalConsistencyError(
            f"exp(log B) misses B by {res:.3e} (sup |B| = {bsup:.3e})")
    return m


def log_traceless(b, grid=None, tol=mat2.SL_TOL):
    """Traceless logarithm ``(pi/2) B`` of a traceless det-1 matrix.

    Such ``B`` squares to ``-I``, so ``exp(theta B) = cos(theta) I +
    sin(theta) B``, which equals ``B`` at ``theta = pi/2``.
    """
    if not mat2.is_traceless(b):
        raise ContractError("log_traceless needs a traceless matrix")
    if not mat2.is_special_linear(b, tol, grid):
        raise ContractError("log_traceless needs det 1")
    m = b * (math.pi / 2)
    res = _grid_residual(mat2.exp_traceless(m), b, grid)
    if res > 1e-10:
        raise InternalConsistencyError(f"exp((pi/2) B) misses B by {res:.3e}")
    return m


# -- assembly -----------------------------------------------------------------

def _grid_residual(x, y, grid=None):
    d = x.samples(grid) - y.samples(grid)
    return float(np.linalg.norm(d, axis=(1, 2)).max())


def exp_general(m):
    """``exp(m)`` for any ``m``: scalar part times the traceless exponential."""
    half = (m.a + m.d) * 0.5
    if _max_coeff(half) == 0.0:
        return mat2.exp_traceless(m)
    core = MatFun(m.a - half, m.b, m.c, m.d - half)
    core = MatFun(core.a, core.b, core.c, -core.a)
    return hf.exp_series(half) * mat2.exp_traceless(core)


def factor_product(fac):
    return exp_general(fac.m1) @ exp_general(fac.m2)


def _check_sl(a, tol, grid):
    defect = mat2.det_defect(a, grid)
    if defect > tol:
        raise ContractError(f"input is not special linear: det defect "
                            f"{defect:.3e} > {tol:.1e}")
    return defect


def _generic_core(red, grid, lap, radius):
    split = scale_split(red.reduced, grid, radius)
    lap("scale")
    _, tr = mat2.det_trace(split.scaled)
    lam, lam_inv = dominant_root(tr, grid)
    lap("root")
    p = eigen_conjugator(split.scaled, lam, lam_inv, grid)
    n2 = log_via_diagonalization(split.scaled, lam, p, grid)
    lap("diagonalize")
    return split, tr, lam, p, n2


def factor_sl2(a, grid=None, tol=mat2.SL_TOL, seed=REDUCTION_SEED):
    """Write ``A`` in SL2 as ``exp(m1) exp(m2)`` with traceless ``m1, m2``."""
    timings = {}
    t0 = time.perf_counter()
    defect = _check_sl(a, tol, grid)
    sign = detect_parabolic(a)
    if sign != NONE:
        fac = factor_parabolic(a, sign)
        timings["parabolic"] = time.perf_counter() - t0
        fac.residual = _grid_residual(factor_product(fac), a, grid)
        fac.timings = timings
        fac.details["det_defect"] = defect
        return fac
    if detect_triangular(a) != NONE:
        fac = factor_triangular(a, grid)
        timings["triangular"] = time.perf_counter() - t0
        fac.residual = _grid_residual(factor_product(fac), a, grid)
        fac.timings = timings
        fac.details["det_defect"] = defect
        return fac

    def lap(name):
        nonlocal t0
        now = time.perf_counter()
        timings[name] = timings.get(name, 0.0) + now - t0
        t0 = now

    failures = []
    tries = ((q, red, radius)
             for q, b, entries in _reduction_plan(a, seed)
             for red in itertools.islice(_certified(b, entries, grid),
                                         MAX_REDUCTIONS)
             for radius in HEADROOM_RADII)
    for q, red, radius in itertools.islice(tries, MAX_TRIES):
        lap("reduction")
        try:
            split, tr, lam, p, n2 = _generic_core(red, grid, lap, radius)
            break
        except (NotAUnitError, UncertifiableError,
                InternalConsistencyError) as err:
            # series that fail to converge at the working order; more
            # headroom or the next shear may do
            log.debug("reduction %d, radius %g failed: %s",
                      red.attempts, radius, err)
            failures.append(err)
    else:
        if failures:
            raise failures[0]
        raise ReductionFailedError("no h with a + h c a certified unit")
    h = red.h
    m1 = shear_unconjugate_traceless(split.constant_log, h)
    m2 = shear_unconjugate_traceless(n2, h)
    if q is not FRAMES[0]:
        m1 = frame_unconjugate_traceless(m1, q)
        m2 = frame_unconjugate_traceless(m2, q)
    certs = [red.certificate,
             hf.certify_unit(tr * tr - 4.0, grid, label="t^2 - 4"),
             hf.certify_unit(lam, grid, label="lambda"),
             hf.certify_unit(mat2.det_trace(p)[0], grid, label="det P")]
    fac = Factorization(m1, m2, 2, "generic", certificates=certs)
    fac.residual = _grid_residual(factor_product(fac), a, grid)
    lap("residual")
    fac.timings = timings
    fac.details.update(delta=split.delta, beta_sup=split.beta_sup,
                       h=h.coeffs.tolist(), det_defect=defect,
                       reduction_attempts=red.attempts,
                       headroom_radius=radius, reduction_kind=red.kind,
                       frame=q.tolist())
    log.debug("generic factorization: delta=%.4g residual=%.3e",
              split.delta, fac.residual)
    return fac


# (entry to solve for, partner it is divided by) with det = ad - bc = 1
_COMPLETIONS = (("d", "a"), ("a", "d"), ("b", "c"), ("c", "b"))


def _scale_to_sl(a, half, grid):
    """``exp(-half) A`` with one entry re-solved so the determinant is 1.

    Three entries are formed from boundary products; coefficient
    convolution would cost ``eps * l1(A) * l1(exp(-half))``. The fourth is
    solved from ``ad - bc = 1`` through the partner entry of ``A`` with the
    largest boundary minimum, which must be a certified unit; the error this
    adds to the final product is ``|exp(2 half) - det A| / |partner|``.
    """
    n = a.order
    m = max(hf._grid_size(2 * n, grid), 2 * hf._grid_size(n, grid))
    w = np.exp(-half.samples(m))
    wmax = float(np.abs(w).max())
    scaled = {}
    for name in "abcd":
        e = getattr(a, name)
        f = hf.from_boundary(e.samples(m) * w, n)
        scaled[name] = DiscFunction(f.coeffs, n, f.tail + e.tail * wmax)
    best = None
    for target, partner in _COMPLETIONS:
        p = getattr(a, partner)
        if p.is_zero():
            continue
        try:
            cert = hf.certify_unit(p, grid)
        except UncertifiableError:
            continue
        if cert.ok and (best is None or cert.min_boundary_modulus > best[0]):
            best = (cert.min_boundary_modulus, target, partner)
    if best is None:
        return MatFun(*(scaled[k] for k in "abcd")), None
    _, target, partner = best
    inv = hf.invert(scaled[partner], grid)
    if target in "ad":
        scaled[target] = (scaled["b"] * scaled["c"] + 1.0) * inv
    else:
        scaled[target] = (scaled["a"] * scaled["d"] - 1.0) * inv
    return MatFun(*(scaled[k] for k in "abcd")), target


def factor_gl2(a, grid=None, tol=mat2.SL_TOL, seed=REDUCTION_SEED):
    """``A = exp(D + B) exp(C)`` with ``D = (log det A / 2) I`` central."""
    det, _ = mat2.det_trace(a)
    if det.is_zero():
        raise NotAUnitError("determinant is identically zero")
    try:
        cert = hf.certify_unit(det, grid, label="det A")
    except UncertifiableError as err:
        raise NotAUnitError(f"determinant not certifiable: {err}") from err
    if cert.winding != 0:
        raise NotNullHomotopicError(
            f"det A winds {cert.winding} times around 0; no logarithm "
            f"exists on the disc", certificate=cert)
    if not cert.ok:
        raise NotAUnitError("determinant has near-zero boundary modulus",
                            certificate=cert)
    t0 = time.perf_counter()
    if detect_triangular(a) != NONE:
        fac = factor_triangular(a, grid, special=False)
        fac.details = {"sl2_branch": fac.branch}
        fac.branch = "gl2"
        fac.certificates.insert(0, cert)
        fac.timings = {"triangular": time.perf_counter() - t0}
        fac.residual = _grid_residual(factor_product(fac), a, grid)
        return fac
    half = hf.holomorphic_log(det, grid, method="boundary") * 0.5
    scaled, solved = _scale_to_sl(a, half, grid)
    t_log = time.perf_counter() - t0
    sl = factor_sl2(scaled, grid, tol, seed)
    n = a.order
    m1 = MatFun(sl.m1.a + half, sl.m1.b, sl.m1.c, sl.m1.d + half)
    fac = Factorization(m1, sl.m2, sl.factor_count, "gl2",
                        certificates=[cert] + sl.certificates,
                        timings={"log_det": t_log, **sl.timings},
                        details={"sl2_branch": sl.branch, "solved_entry": solved,
                                 **sl.details})
    fac.residual = _grid_residual(factor_product(fac), a, grid)
    return fac


# -- pointwise splitter -----------------------------------------------------

_CONJUGATORS = (np.array([[1, 0], [1, 1]], dtype=complex),
                np.array([[1, 1], [0, 1]], dtype=complex),
                np.array([[0, -1], [1, 0]], dtype=complex))


def _inv2(q):
    det = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    return np.array([[q[1, 1], -q[0, 1]], [-q[1, 0], q[0, 0]]]) / det


def traceless_point(a):
    """Solve ``(a-d)u + bv + cw = 0, u^2 + vw = -1`` with ``c != 0``.

    Uses the fiber coordinates ``u + f(+-) v`` where
    ``f(+-) = (d - a +- sqrt D) / (2c)``; their product is -1 on solutions,
    so fixing them to ``(1, -1)`` picks one point of the fiber.
    """
    (a_, b_), (c_, d_) = np.asarray(a, dtype=complex)
    disc = (a_ + d_) ** 2 - 4.0
    root = cmath.sqrt(disc)
    fp = (d_ - a_ + root) / (2 * c_)
    fm = (d_ - a_ - root) / (2 * c_)
    v = 2.0 / (fp - fm)
    u = 1.0 - fp * v
    w = ((d_ - a_) * u - b_ * v) / c_
    return TracelessPoint(u, v, w, fp, fm, np.eye(2, dtype=complex))


def pointwise_traceless_split(a, tol=1e-9):
    """``A = B C`` with ``B, C`` traceless of det 1, for constant ``A`` in SL2(C).

    Requires distinct eigenvalues. When the (2,1) entry is (nearly) zero the
    matrix is first conjugated by a fixed constant so it is not. Returns
    ``(B, C, point)``.
    """
    a = np.asarray(a, dtype=complex)
    if abs(np.trace(a) ** 2 - 4.0) <= tol:
        raise DegenerateEigenvalueError(
            "repeated eigenvalue: trace^2 - 4 vanishes")
    q = np.eye(2, dtype=complex)
    work = a
    if abs(a[1, 0]) < SPLIT_C_FLOOR:
        for cand in _CONJUGATORS:
            trial = cand @ a @ _inv2(cand)
            if abs(trial[1, 0]) >= SPLIT_C_FLOOR:
                q, work = cand, trial
                break
        else:
            raise DegenerateEigenvalueError("no conjugator lifts the (2,1) entry")
    pt = traceless_point(work)
    pt.conj = q
    b = pt.matrix()
    c = -b @ work
    if not np.array_equal(q, np.eye(2)):
        qi = _inv2(q)
        b, c = qi @ b @ q, qi @ c @ q
    return b, c, pt
