"""Deterministic 2D quadrature: tensor Gauss-Legendre and polar disk rules."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import erf

__all__ = [
    "QuadratureError",
    "QuadControls",
    "QuadratureRule",
    "gauss_legendre",
    "tensor_rect",
    "polar_disk",
    "integrate",
    "adaptive_tolerance_check",
    "disk_gaussian_integral",
]


class QuadratureError(RuntimeError):
    """Raised for non-finite integrand values or unconverged integrals."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class QuadControls:
    """Orders used wherever a potential-weighted integral is needed.

    ``radial_order``/``angular_count`` drive the polar disk rule,
    ``chord_order`` the per-panel order of the chord rule used for
    Gaussian products over disks, ``annulus_order`` the radial order in the
    logarithmic coordinate of the cutoff annulus.
    """

    radial_order: int = 24
    angular_count: int = 48
    chord_order: int = 48
    annulus_order: int = 48
    tolerance: float = 1e-10


@lru_cache(maxsize=None)
def _gauss_legendre_cached(order: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    nodes = np.empty(order)
    weights = np.empty(order)
    for i in range((order + 1) // 2):
        x = math.cos(math.pi * (i + 0.75) / (order + 0.5))
        for _ in range(100):
            p0, p1 = 1.0, x
            for k in range(2, order + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = order * (x * p1 - p0) / (x * x - 1.0)
            step = p1 / dp
            x -= step
            if abs(step) <= 1e-15:
                break
        # recompute derivative at the converged root
        p0, p1 = 1.0, x
        for k in range(2, order + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = order * (x * p1 - p0) / (x * x - 1.0)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        nodes[i], nodes[order - 1 - i] = x, -x
        weights[i] = weights[order - 1 - i] = w
    if order % 2 == 1:
        nodes[order // 2] = 0.0
    order_idx = np.argsort(nodes)
    return tuple(nodes[order_idx]), tuple(weights[order_idx])


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[a, b]`` (Newton iteration)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = (np.array(v) for v in _gauss_legendre_cached(int(order)))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    params: tuple
    points: np.ndarray  # (m, 2)
    weights: np.ndarray  # (m,)

    @property
    def area(self) -> float:
        if self.kind == "tensor":
            (x0, x1, y0, y1), _ = self.params
            return (x1 - x0) * (y1 - y0)
        _, radius, _, _ = self.params
        return math.pi * radius ** 2

    def __len__(self):
        return len(self.weights)


def tensor_rect(rect: tuple[float, float, float, float], order: int) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on ``rect = (x0, x1, y0, y1)``."""
    x0, x1, y0, y1 = map(float, rect)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate rectangle {rect}")
    xs, wx = gauss_legendre(order, x0, x1)
    ys, wy = gauss_legendre(order, y0, y1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.outer(wx, wy)
    return QuadratureRule("tensor", ((x0, x1, y0, y1), order),
                          np.column_stack([X.ravel(), Y.ravel()]), W.ravel())


def polar_disk(center, radius: float, radial_order: int, angular_count: int) -> QuadratureRule:
    """Gauss-Legendre in ``r`` (with the ``r dr`` Jacobian) times the periodic
    trapezoid rule in the angle."""
    cx, cy = map(float, center)
    if not radius > 0:
        raise ValueError("radius must be positive")
    if angular_count < 1:
        raise ValueError("angular_count must be >= 1")
    r, wr = gauss_legendre(radial_order, 0.0, radius)
    theta = 2.0 * math.pi * np.arange(angular_count) / angular_count
    R, T = np.meshgrid(r, theta, indexing="ij")
    W = np.outer(wr * r, np.full(angular_count, 2.0 * math.pi / angular_count))
    pts = np.column_stack([cx + (R * np.cos(T)).ravel(), cy + (R * np.sin(T)).ravel()])
    return QuadratureRule("polar", ((cx, cy), float(radius), radial_order, angular_count),
                          pts, W.ravel())


def integrate(f: Callable, rule: QuadratureRule) -> complex:
    """Weighted node sum of ``f(x, y)`` (vectorised) over ``rule``."""
    values = np.asarray(f(rule.points[:, 0], rule.points[:, 1]), dtype=complex)
    values = np.broadcast_to(values, rule.weights.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise QuadratureError(
            f"non-finite integrand value {values[i]} at node {i} "
            f"({rule.points[i, 0]!r}, {rule.points[i, 1]!r})")
    return complex(np.dot(rule.weights, values))


def adaptive_tolerance_check(f: Callable, rule_low: QuadratureRule, rule_high: QuadratureRule,
                             tol: float | None = None) -> tuple[complex, float]:
    """Return ``(value, error_estimate)`` from a low/high rule pair.

    Raises :class:`QuadratureError` if ``tol`` is given and the estimate
    exceeds it.
    """
    hi = integrate(f, rule_high)
    lo = integrate(f, rule_low)
    estimate = abs(hi - lo)
    if tol is not None and estimate > tol:
        raise QuadratureError(f"quadrature not converged: estimate {estimate:.3e} > {tol:.3e}",
                              estimate)
    return hi, estimate


def disk_gaussian_integral(center, radius: float, mx, my, alpha, order: int = 48,
                           cutoff: float = 37.0) -> np.ndarray:
    """Integrate ``exp(-alpha |r - m|^2)`` over a disk, vectorised over ``m``.

    The y-integral over each vertical chord is done exactly with ``erf``;
    the remaining x-integral uses ``x = cx + R sin(theta)`` so the chord
    half-length ``R cos(theta)`` is smooth, and is restricted to the window
    where the Gaussian exceeds ``exp(-cutoff)`` of its peak. Two
    Gauss-Legendre panels are used per window.
    """
    cx, cy = map(float, center)
    R = float(radius)
    mx, my, alpha = np.broadcast_arrays(np.asarray(mx, float), np.asarray(my, float),
                                        np.asarray(alpha, float))
    shape = mx.shape
    mx, my, alpha = mx.ravel(), my.ravel(), alpha.ravel()
    half = np.sqrt(cutoff / alpha)
    lo = np.clip((np.maximum(cx - R, mx - half) - cx) / R, -1.0, 1.0)
    hi = np.clip((np.minimum(cx + R, mx + half) - cx) / R, -1.0, 1.0)
    t_lo, t_hi = np.arcsin(lo), np.arcsin(hi)
    empty = t_hi <= t_lo
    u, wu = gauss_legendre(order, 0.0, 1.0)
    sa = np.sqrt(alpha)
    total = np.zeros_like(mx)
    for p0, p1 in ((0.0, 0.5), (0.5, 1.0)):
        a = t_lo + p0 * (t_hi - t_lo)
        span = (p1 - p0) * (t_hi - t_lo)
        for uk, wk in zip(u, wu):
            th = a + uk * span
            x = cx + R * np.sin(th)
            h = R * np.cos(th)
            chord = (0.5 * math.sqrt(math.pi) / sa) * (
                erf(sa * (cy + h - my)) - erf(sa * (cy - h - my)))
            total += wk * span * h * np.exp(-alpha * (x - mx) ** 2) * chord
    total[empty] = 0.0
    return total.reshape(shape)
