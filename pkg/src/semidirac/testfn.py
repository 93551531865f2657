"""Regularised test spinors ``phi_n (1, 0)``, ``phi_n (0, 1)`` and their quadratic form.

``phi_n`` is radial: 1 on ``r <= n``, 0 on ``r >= n^2`` and
``xi(log_n(n^2 / r))`` in between. The quadratic form
``Q[psi] = |H psi|^2 - delta^2 |psi|^2`` is integrated pointwise: the inner
disk ``r < n`` with a polar rule (radially split at the potential's disk
edges) and the annulus ``n < r < n^2`` in ``(log r, theta)`` coordinates,
split at the flat margins of ``xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (CutoffConstants, CutoffProfile, cutoff_constants, i_eps,
                     potential_moments)
from .model import DiskIndicator, Model, Potential
from .quadrature import QuadControls, gauss_legendre

__all__ = [
    "RegularizedTestFunction",
    "SupportOverlapError",
    "cutoff_value",
    "cutoff_norms",
    "qform",
    "ConvergenceRow",
    "ConvergenceReport",
    "qform_convergence",
]


class SupportOverlapError(ValueError):
    """The cutoff transition region would overlap the potential's support."""


@dataclass(frozen=True)
class RegularizedTestFunction:
    profile: CutoffProfile
    n: float
    sign: str = "plus"

    def __post_init__(self):
        if not self.n > 1:
            raise ValueError(f"n must exceed 1, got {self.n}")
        if self.sign not in ("plus", "minus"):
            raise ValueError("sign must be 'plus' or 'minus'")

    # radial profile and its first two r-derivatives
    def _radial(self, r):
        r = np.asarray(r, dtype=float)
        L = math.log(self.n)
        inner = r <= self.n
        outer = r >= self.n ** 2
        rr = np.where(inner | outer, self.n, r)  # keeps log finite off the annulus
        t = 2.0 - np.log(rr) / L
        xi = self.profile.xi(t)
        d1 = self.profile.dxi(t)
        d2 = self.profile.d2xi(t)
        phi = np.where(inner, 1.0, np.where(outer, 0.0, xi))
        dphi = np.where(inner | outer, 0.0, -d1 / (rr * L))
        d2phi = np.where(inner | outer, 0.0, d2 / (rr * L) ** 2 + d1 / (rr * rr * L))
        return phi, dphi, d2phi

    def phi(self, x, y):
        return self._radial(np.hypot(x, y))[0]

    def derivatives(self, x, y):
        """``(phi, d_x phi, d_y phi, d_x^2 phi)`` at the given points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        phi, d1, d2 = self._radial(r)
        rs = np.where(r > 0, r, 1.0)
        ux, uy = x / rs, y / rs
        dx = d1 * ux
        dy = d1 * uy
        dxx = d2 * ux * ux + d1 * uy * uy / rs
        return phi, dx, dy, dxx

    def dphi_dx(self, x, y):
        return self.derivatives(x, y)[1]

    def dphi_dy(self, x, y):
        return self.derivatives(x, y)[2]

    def d2phi_dx2(self, x, y):
        return self.derivatives(x, y)[3]


def cutoff_value(t: RegularizedTestFunction, point, derivative: str = "value") -> float:
    """``phi_n`` or one of ``"dx"``, ``"dy"``, ``"dxx"`` at a single point."""
    idx = {"value": 0, "dx": 1, "dy": 2, "dxx": 3}[derivative]
    x, y = map(float, point)
    return float(t.derivatives(x, y)[idx])


def _annulus_nodes(t: RegularizedTestFunction, controls: QuadControls):
    """Nodes/weights (area measure) covering ``n < r < n^2``."""
    L = math.log(t.n)
    a = t.profile.margin
    # u = log r = (2 - s) L for profile argument s; panel breaks at s = 1 - a, a
    breaks = [L, (1.0 + a) * L, (2.0 - a) * L, 2.0 * L]
    us, ws = [], []
    for u0, u1 in zip(breaks[:-1], breaks[1:]):
        u, w = gauss_legendre(controls.annulus_order, u0, u1)
        us.append(u)
        ws.append(w)
    u = np.concatenate(us)
    w = np.concatenate(ws)
    r = np.exp(u)
    return _polar_product(r, w * r * r, controls.angular_count)


def _polar_product(r, wr, angular_count):
    theta = 2.0 * math.pi * np.arange(angular_count) / angular_count
    R, T = np.meshgrid(r, theta, indexing="ij")
    W = np.outer(wr, np.full(angular_count, 2.0 * math.pi / angular_count))
    return (R * np.cos(T)).ravel(), (R * np.sin(T)).ravel(), W.ravel()


def _disk_nodes(radius: float, breaks, controls: QuadControls):
    edges = sorted({0.0, radius, *(b for b in breaks if 0.0 < b < radius)})
    rs, ws = [], []
    for r0, r1 in zip(edges[:-1], edges[1:]):
        r, w = gauss_legendre(controls.radial_order, r0, r1)
        rs.append(r)
        ws.append(w * r)
    return _polar_product(np.concatenate(rs), np.concatenate(ws), controls.angular_count)


def _radial_breaks(potential: Potential):
    out = []
    for fld in (potential.v11, potential.v22, potential.v12):
        for leaf in fld.leaves():
            if isinstance(leaf, DiskIndicator):
                c = math.hypot(*leaf.center)
                out.extend([c + leaf.radius, abs(c - leaf.radius)])
    return out


def cutoff_norms(t: RegularizedTestFunction, controls: QuadControls = QuadControls()) -> dict:
    """Squared L2 norms of ``phi_n`` and its derivatives, by quadrature."""
    x, y, w = _annulus_nodes(t, controls)
    phi, dx, dy, dxx = t.derivatives(x, y)
    return {
        "phi": math.pi * t.n ** 2 + float(w @ (phi * phi)),
        "dx": float(w @ (dx * dx)),
        "dy": float(w @ (dy * dy)),
        "dxx": float(w @ (dxx * dxx)),
    }


def _integrand(model: Model, t: RegularizedTestFunction, x, y):
    p = model.potential
    diag = p.v11 if t.sign == "plus" else p.v22
    off = p.v21 if t.sign == "plus" else p.v12
    eps, delta = model.epsilon, model.delta
    phi, dx, dy, dxx = t.derivatives(x, y)
    # plus: |(-i d_y + eps V11) phi|^2 + |(-d_x^2 + delta + eps V21) phi|^2 - delta^2 phi^2
    first = -1j * dy + eps * diag(x, y) * phi
    second = -dxx + (delta + eps * off(x, y)) * phi
    return (np.abs(first) ** 2 + np.abs(second) ** 2 - (delta * phi) ** 2).real


def qform(model: Model, t: RegularizedTestFunction,
          controls: QuadControls = QuadControls()) -> float:
    """``Q_eps`` on the regularised spinor of the requested sign.

    Raises :class:`SupportOverlapError` when the potential is compactly
    supported within radius ``R`` and ``n <= R``.
    """
    radius = model.potential.compact_support_radius
    if radius is not None and t.n <= radius:
        raise SupportOverlapError(
            f"n = {t.n} does not exceed the potential support radius {radius}")
    xa, ya, wa = _annulus_nodes(t, controls)
    total = float(wa @ _integrand(model, t, xa, ya))
    if model.epsilon != 0:
        xd, yd, wd = _disk_nodes(t.n, _radial_breaks(model.potential), controls)
        total += float(wd @ _integrand(model, t, xd, yd))
    return total


@dataclass(frozen=True)
class ConvergenceRow:
    n: float
    q: float
    i: float
    diff: float
    bound: float
    passed: bool
    norm2_dx: float
    norm2_dy: float
    norm2_dxx: float
    norm2_phi: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[ConvergenceRow, ...]
    constants: CutoffConstants
    decreasing: bool
    cutoff_estimates_hold: bool

    @property
    def passed(self) -> bool:
        return (all(r.passed for r in self.rows) and self.decreasing
                and self.cutoff_estimates_hold)

    def csv_rows(self):
        for r in self.rows:
            yield {"n": r.n, "Q": r.q, "I": r.i, "diff": r.diff, "bound": r.bound,
                   "pass": r.passed}


def qform_convergence(model: Model, profile: CutoffProfile = CutoffProfile(),
                      n_grid=(8.0, 16.0, 32.0), sign: str = "plus",
                      controls: QuadControls = QuadControls()) -> ConvergenceReport:
    """Tabulate ``Q(n) - I`` against ``c / log n`` on an increasing ``n`` grid.

    Each row passes when ``|Q - I| <= c / log n``; the report also checks
    that ``Q - I`` decreases in ``n`` and that the cutoff derivative norms
    obey ``|d_x phi|^2 <= c1 / log n``, ``|d_y phi|^2 <= c1 / log n`` and
    ``|d_x^2 phi|^2 <= c2 / log n``.
    """
    n_grid = [float(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    if n_grid and n_grid[0] <= math.e:
        raise ValueError("n_grid values must exceed e")
    consts = cutoff_constants(profile, model.delta)
    i_plus, i_minus = i_eps(potential_moments(model.potential, controls), model.delta,
                            model.epsilon)
    i_val = i_plus if sign == "plus" else i_minus
    rows = []
    estimates = True
    for n in n_grid:
        t = RegularizedTestFunction(profile, n, sign)
        q = qform(model, t, controls)
        norms = cutoff_norms(t, controls)
        L = math.log(n)
        bound = consts.c / L
        diff = q - i_val
        rows.append(ConvergenceRow(n, q, i_val, diff, bound, abs(diff) <= bound,
                                   norms["dx"], norms["dy"], norms["dxx"], norms["phi"]))
        estimates &= (norms["dx"] <= consts.c1 / L and norms["dy"] <= consts.c1 / L
                      and norms["dxx"] <= consts.c2 / L and norms["phi"] <= math.pi * n ** 4)
    decreasing = all(b.diff < a.diff for a, b in zip(rows, rows[1:]))
    return ConvergenceReport(tuple(rows), consts, decreasing, estimates)
