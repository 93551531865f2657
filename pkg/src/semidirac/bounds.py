"""Closed-form existence conditions and eigenvalue bounds.

The formal energies of the constant spinors (1, 0) and (0, 1) are

    I+ = eps^2 |V11|^2 + eps^2 |V12|^2 + 2 delta eps <Re V12>
    I- = eps^2 |V22|^2 + eps^2 |V12|^2 + 2 delta eps <Re V12>

(squared L2 norms and the plane integral of Re V12). A negative value
certifies a gap eigenvalue. The quantitative bound uses the regularised
spinors ``phi_n (1, 0)`` and gives ``E^2 - delta^2 <= g(n)`` with
``g(n) = (c / log n + I) / (pi n^4)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .model import DiskIndicator, GaussianDecay, Potential, ScalarField2D
from .quadrature import QuadControls, disk_gaussian_integral

__all__ = [
    "PotentialMoments",
    "CutoffProfile",
    "CutoffConstants",
    "BoundsReport",
    "potential_moments",
    "field_integral",
    "field_norm2",
    "i_eps",
    "sufficient_condition",
    "weak_thresholds",
    "coupling_lower_bound",
    "cutoff_constants",
    "g_bound",
    "log_abs_g_at_critical",
    "critical_n",
    "critical_log_n",
    "energy_envelope",
    "weak_asymptotic_log",
    "evaluate_bounds",
]


# -- potential moments ----------------------------------------------------------

@dataclass(frozen=True)
class PotentialMoments:
    mean_re_v12: float
    norm2_v11: float
    norm2_v12: float
    norm2_v22: float


def field_integral(fld: ScalarField2D) -> complex:
    """Plane integral of a coefficient field (exact for every leaf type)."""
    total = 0j
    for leaf in fld.leaves():
        if isinstance(leaf, DiskIndicator):
            total += leaf.amplitude * leaf.area
        else:
            total += leaf.amplitude * math.pi * leaf.width ** 2
    return total


def _lens_area(d: float, r1: float, r2: float) -> float:
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    a1 = r1 * r1 * math.acos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1))
    a2 = r2 * r2 * math.acos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2))
    k = 0.5 * math.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    return a1 + a2 - k


def _overlap(a, b, controls: QuadControls) -> float:
    """Integral of the product of two unit-amplitude leaves."""
    if isinstance(a, DiskIndicator) and isinstance(b, DiskIndicator):
        d = math.dist(a.center, b.center)
        return _lens_area(d, a.radius, b.radius)
    if isinstance(a, GaussianDecay) and isinstance(b, GaussianDecay):
        pa, pb = 1.0 / a.width ** 2, 1.0 / b.width ** 2
        d2 = (a.center[0] - b.center[0]) ** 2 + (a.center[1] - b.center[1]) ** 2
        return math.pi / (pa + pb) * math.exp(-pa * pb / (pa + pb) * d2)
    disk, gauss = (a, b) if isinstance(a, DiskIndicator) else (b, a)
    return float(disk_gaussian_integral(disk.center, disk.radius, gauss.center[0],
                                        gauss.center[1], 1.0 / gauss.width ** 2,
                                        order=max(controls.chord_order, 64)))


def field_norm2(fld: ScalarField2D, controls: QuadControls = QuadControls()) -> float:
    """Squared L2 norm, summed over pairs of leaves."""
    leaves = fld.leaves()
    total = 0j
    for i, a in enumerate(leaves):
        for j, b in enumerate(leaves):
            if j < i:
                continue
            term = a.amplitude * b.amplitude.conjugate() * _overlap(a, b, controls)
            total += term if i == j else 2.0 * term.real
    return float(total.real)


def potential_moments(p: Potential, controls: QuadControls = QuadControls()) -> PotentialMoments:
    """``<Re V12>``, ``|V11|^2``, ``|V12|^2``, ``|V22|^2`` from closed forms.

    Disk-disk products use the lens area, Gaussian-Gaussian products the
    Gaussian integral, and disk-Gaussian products the chord rule.
    """
    return PotentialMoments(
        mean_re_v12=float(field_integral(p.v12).real),
        norm2_v11=field_norm2(p.v11, controls),
        norm2_v12=field_norm2(p.v12, controls),
        norm2_v22=field_norm2(p.v22, controls),
    )


# -- formal energies and existence conditions ---------------------------------------

def i_eps(m: PotentialMoments, delta: float, eps: float) -> tuple[float, float]:
    if not delta > 0:
        raise ValueError("delta must be positive")
    linear = 2.0 * delta * eps * m.mean_re_v12
    i_plus = eps * eps * (m.norm2_v11 + m.norm2_v12) + linear
    i_minus = eps * eps * (m.norm2_v22 + m.norm2_v12) + linear
    return i_plus, i_minus


def sufficient_condition(i_plus: float, i_minus: float) -> tuple[bool, int]:
    """Whether a gap eigenvalue is guaranteed, and a lower bound on their count."""
    count = int(i_plus < 0) + int(i_minus < 0)
    return count > 0, count


def weak_thresholds(m: PotentialMoments, delta: float) -> tuple[float | None, float | None]:
    """Couplings below which ``I+`` (resp. ``I-``) is negative."""
    if not m.mean_re_v12 < 0:
        return None, None
    num = -2.0 * delta * m.mean_re_v12
    out = []
    for diag in (m.norm2_v11, m.norm2_v22):
        den = diag + m.norm2_v12
        out.append(num / den if den > 0 else None)
    return out[0], out[1]


def coupling_lower_bound(m: PotentialMoments, delta: float) -> float | None:
    """Lower bound on the critical coupling for diagonal-free potentials.

    Returns ``None`` when the diagonal is non-zero (the bound is only stated
    there), when ``<Re V12> >= 0`` or when ``|V12|^2 = 0``.
    """
    if m.norm2_v11 != 0 or m.norm2_v22 != 0:
        return None
    if not m.mean_re_v12 < 0 or not m.norm2_v12 > 0:
        return None
    return -2.0 * delta * m.mean_re_v12 / m.norm2_v12


# -- cutoff profile -----------------------------------------------------------------

def _smoothstep5(s):
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


@dataclass(frozen=True)
class CutoffProfile:
    """``xi(t) = S((t - a) / (1 - 2a))`` clamped to [0, 1], S the quintic smoothstep.

    ``xi`` vanishes on ``[0, a]`` and equals one on ``[1 - a, 1]``.
    """

    margin: float = 0.1
    grid_points: int = 100_000

    def __post_init__(self):
        if not 0 < self.margin < 0.5:
            raise ValueError("margin must lie in (0, 0.5)")

    def _s(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.margin) / (1.0 - 2.0 * self.margin),
                       0.0, 1.0)

    def xi(self, t):
        return _smoothstep5(self._s(t))

    def dxi(self, t):
        s = self._s(t)
        return 30.0 * s * s * (1.0 - s) ** 2 / (1.0 - 2.0 * self.margin)

    def d2xi(self, t):
        s = self._s(t)
        return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (1.0 - 2.0 * self.margin) ** 2

    def _grid_max(self, fn, points):
        return float(np.abs(fn(np.linspace(0.0, 1.0, points))).max())

    @cached_property
    def sup1(self) -> float:
        return self._grid_max(self.dxi, self.grid_points)

    @cached_property
    def sup2(self) -> float:
        return self._grid_max(self.d2xi, self.grid_points)

    def sup_refinement_gap(self) -> float:
        """Largest relative change of the sup-norms between a 10x coarser grid and the default."""
        coarse = max(self.grid_points // 10, 2)
        gaps = [abs(self._grid_max(fn, coarse) - fine) / fine
                for fn, fine in ((self.dxi, self.sup1), (self.d2xi, self.sup2))]
        return max(gaps)


@dataclass(frozen=True)
class CutoffConstants:
    c1: float
    c2: float
    c: float
    sup1: float
    sup2: float
    delta: float
    margin: float


def cutoff_constants(profile: CutoffProfile | tuple[float, float], delta: float) -> CutoffConstants:
    """``c1 = pi sup1^2``, ``c2 = (3 pi sup2^2 / 4 + pi sup1^2) / e^2``,
    ``c = c1 + 2 delta c1 + c2``.

    ``profile`` may also be a bare ``(sup1, sup2)`` pair.
    """
    if isinstance(profile, CutoffProfile):
        sup1, sup2, margin = profile.sup1, profile.sup2, profile.margin
    else:
        (sup1, sup2), margin = profile, float("nan")
    c1 = math.pi * sup1 ** 2
    c2 = (0.75 * math.pi * sup2 ** 2 + math.pi * sup1 ** 2) / math.e ** 2
    return CutoffConstants(c1, c2, c1 + 2.0 * delta * c1 + c2, sup1, sup2, delta, margin)


# -- the quantitative bound ------------------------------------------------------

def g_bound(c: float, i_val: float, n: float) -> float:
    if not n >= math.e:
        raise ValueError(f"g_bound needs n >= e, got {n}")
    log_n = math.log(n)
    # n^-4 via exp so huge n underflows to 0 instead of overflowing
    return (c / log_n + i_val) / math.pi * math.exp(-4.0 * log_n)


def critical_log_n(c: float, i_val: float) -> float:
    """``log`` of the minimiser of ``n -> g(n)``; finite even when ``n`` overflows."""
    if not i_val < 0:
        raise ValueError("critical n only exists for negative I")
    if not c > 0:
        raise ValueError("c must be positive")
    return (c + math.sqrt(c * c - c * i_val)) / (-2.0 * i_val)


def _exp_or_inf(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def critical_n(c: float, i_val: float) -> float:
    """Minimiser of ``n -> g(n)`` for ``I < 0``; ``inf`` once it overflows."""
    return _exp_or_inf(critical_log_n(c, i_val))


def log_abs_g_at_critical(c: float, i_val: float) -> float:
    """``log|g(n_crit)|`` evaluated without forming ``n``.

    Uses ``c / log n + I = -c I^2 / (c + sqrt(c^2 - c I))^2`` at the
    minimiser, which avoids the cancellation in the direct form.
    """
    log_n = critical_log_n(c, i_val)
    root = math.sqrt(c * c - c * i_val)
    return (math.log(c) + 2.0 * math.log(-i_val) - 2.0 * math.log(c + root)
            - math.log(math.pi) - 4.0 * log_n)


def _g_at_critical(c, i_val, min_n):
    log_n = critical_log_n(c, i_val)
    if log_n < math.log(min_n):
        return None, None
    return _exp_or_inf(log_n), -math.exp(log_abs_g_at_critical(c, i_val))


def energy_envelope(delta: float, c: float, i_plus: float, i_minus: float,
                    min_n: float = math.e) -> float | None:
    """``h = sqrt(delta^2 + min g(n_crit))`` over the branches with negative I.

    A branch only counts when its critical ``n`` is at least ``min_n`` (the
    constant ``c2`` is only valid for ``n >= e``).
    """
    gs = []
    for i_val in (i_plus, i_minus):
        if i_val < 0:
            _, g = _g_at_critical(c, i_val, min_n)
            if g is not None:
                gs.append(g)
    if not gs:
        return None
    arg = delta * delta + min(gs)
    if arg <= 0:
        return None
    return math.sqrt(arg)


def weak_asymptotic_log(delta: float, c: float, mean_re_v12: float, eps: float) -> float:
    """Log-magnitude of the weak-coupling form of ``g(n_crit)``."""
    if not mean_re_v12 < 0 or not eps > 0:
        raise ValueError("needs <Re V12> < 0 and eps > 0")
    m = mean_re_v12
    return (math.log(delta ** 2 * m ** 2 * eps ** 2 / (math.pi * c))
            + 2.0 * c / (delta * m * eps))


# -- aggregate report -------------------------------------------------------------------

@dataclass(frozen=True)
class BoundsReport:
    epsilon: float
    delta: float
    i_plus: float
    i_minus: float
    sufficient_plus: bool
    sufficient_minus: bool
    eigenvalue_count_lower_bound: int
    threshold_plus: float | None = None
    threshold_minus: float | None = None
    coupling_lower_bound: float | None = None
    n_crit_plus: float | None = None
    n_crit_minus: float | None = None
    g_plus: float | None = None
    g_minus: float | None = None
    envelope_h: float | None = None
    asymptotic_log_abs_g: float | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def evaluate_bounds(moments: PotentialMoments, delta: float, eps: float,
                    constants: CutoffConstants, support_radius: float | None = None) -> BoundsReport:
    """Every analytic quantity at one coupling.

    ``g``/``n_crit`` are only reported when the critical ``n`` is at least
    ``max(e, support_radius)``: below ``e`` the constant ``c2`` is invalid,
    and below the support radius the cutoff derivatives overlap ``V``.
    """
    notes = []
    i_plus, i_minus = i_eps(moments, delta, eps)
    _, count = sufficient_condition(i_plus, i_minus)
    t_plus, t_minus = weak_thresholds(moments, delta)
    c0 = coupling_lower_bound(moments, delta)
    if c0 is None and moments.mean_re_v12 < 0 and (moments.norm2_v11 or moments.norm2_v22):
        notes.append("coupling bound only stated for vanishing diagonal")
    min_n = math.e
    if support_radius is None:
        notes.append("potential support not compact: n_crit not checked against support")
    else:
        min_n = max(min_n, support_radius)
    c = constants.c
    branch = {}
    for name, i_val in (("plus", i_plus), ("minus", i_minus)):
        if i_val < 0:
            n_c, g = _g_at_critical(c, i_val, min_n)
            if n_c is None:
                notes.append(f"n_crit_{name} below {min_n:.6g}: bound not applicable")
            branch[name] = (n_c, g)
        else:
            branch[name] = (None, None)
    gs = [g for _, g in branch.values() if g is not None]
    h = None
    if gs:
        arg = delta * delta + min(gs)
        if arg > 0:
            h = math.sqrt(arg)
        else:
            notes.append("delta^2 + g <= 0: envelope not reported")
    asym = None
    if moments.mean_re_v12 < 0 and eps > 0:
        asym = weak_asymptotic_log(delta, c, moments.mean_re_v12, eps)
    return BoundsReport(
        epsilon=float(eps), delta=float(delta), i_plus=i_plus, i_minus=i_minus,
        sufficient_plus=i_plus < 0, sufficient_minus=i_minus < 0,
        eigenvalue_count_lower_bound=count, threshold_plus=t_plus, threshold_minus=t_minus,
        coupling_lower_bound=c0,
        n_crit_plus=branch["plus"][0], n_crit_minus=branch["minus"][0],
        g_plus=branch["plus"][1], g_minus=branch["minus"][1],
        envelope_h=h, asymptotic_log_abs_g=asym, notes=tuple(notes))
