"""Independent checks of a factorization ``A = exp(m1) exp(m2)``.

Residuals are computed pointwise with :func:`expfactor.mat2.exp_pointwise`
(scaling and squaring), never with the closed-form series exponential the
factorization itself relies on.
"""
from dataclasses import dataclass, field

import numpy as np

from . import holofun as hf
from . import mat2
from .holofun import Certificate, certify_unit  # noqa: F401  (re-export)

INTERIOR_RADIUS = 0.99


@dataclass
class Report:
    """Outcome of :func:`residual_report`.

    ``residual_grid`` holds ``(z, residual)`` pairs, boundary points first.
    """
    residual_sup: float
    residual_grid: list
    traceless_defect: float
    det_defect: float  # max |det A - det(exp m1 exp m2)| over the points
    certificates: list = field(default_factory=list)
    branch: str = ""
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "residual_sup": self.residual_sup,
            "traceless_defect": self.traceless_defect,
            "det_defect": self.det_defect,
            "branch": self.branch,
            "certificates": [c.to_dict() for c in self.certificates],
            "timings": dict(self.timings),
            "points": len(self.residual_grid),
        }


def traceless_check(m):
    """Max coefficient modulus of ``trace m``."""
    return mat2.trace_defect(m)


def sample_points(boundary_pts, interior_pts, seed):
    """Roots of unity followed by seeded points uniform in ``|z| <= 0.99``."""
    zb = np.exp(2j * np.pi * np.arange(boundary_pts) / boundary_pts)
    rng = np.random.default_rng(seed)
    r = INTERIOR_RADIUS * np.sqrt(rng.uniform(size=interior_pts))
    zi = r * np.exp(2j * np.pi * rng.uniform(size=interior_pts))
    return np.concatenate([zb, zi])


def _products(m1, m2, z):
    return mat2.exp_pointwise(m1.at(z)) @ mat2.exp_pointwise(m2.at(z))


def pointwise_residuals(a, m1, m2, z):
    """Frobenius norms of ``exp(m1(z)) exp(m2(z)) - A(z)``."""
    return np.linalg.norm(_products(m1, m2, z) - a.at(z), axis=(-2, -1))


def residual_report(a, fac, boundary_pts=512, interior_pts=128, seed=0):
    """Evaluate a :class:`~expfactor.factor.Factorization` of ``a``."""
    z = sample_points(boundary_pts, interior_pts, seed)
    prod = _products(fac.m1, fac.m2, z)
    vals = a.at(z)
    res = np.linalg.norm(prod - vals, axis=(-2, -1))
    ddet = np.abs(np.linalg.det(prod) - np.linalg.det(vals))
    grid = [(complex(p), float(r)) for p, r in zip(z, res)]
    return Report(
        residual_sup=float(res.max()) if res.size else 0.0,
        residual_grid=grid,
        traceless_defect=max(traceless_check(fac.m1), traceless_check(fac.m2)),
        det_defect=float(ddet.max()) if ddet.size else 0.0,
        certificates=list(fac.certificates),
        branch=fac.branch,
        timings=dict(fac.timings),
    )


def certify_units(funcs, grid=None):
    """Certificates for several functions at once; labels are kept."""
    return [hf.certify_unit(f, grid, label=label) for label, f in funcs]
