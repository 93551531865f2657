"""Hamiltonian data: potential coefficient descriptors, the model, the free dispersion.

The unperturbed operator is

    H_0 = [[-i d_y,          -d_x^2 + delta],
           [-d_x^2 + delta,   i d_y        ]]

and the perturbation is a 2x2 Hermitian multiplication operator whose
coefficients are given as closed-form descriptors (disk indicators, Gaussian
bumps and sums of those).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Zero",
    "DiskIndicator",
    "GaussianDecay",
    "FieldSum",
    "ScalarField2D",
    "Potential",
    "Model",
    "ValidationReport",
    "eval_field",
    "validate_potential",
    "dispersion",
    "spectral_edges",
]


def _as_point(value: Sequence[float]) -> tuple[float, float]:
    x, y = (float(v) for v in value)
    return (x, y)


class _Field:
    """Shared behaviour of scalar coefficient descriptors."""

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self._evaluate(x, y)

    def _evaluate(self, x, y):  # pragma: no cover - overridden
        raise NotImplementedError

    def leaves(self) -> list["ScalarField2D"]:
        return [self]

    @property
    def is_real(self) -> bool:
        return all(leaf.amplitude.imag == 0.0 for leaf in self.leaves()
                   if not isinstance(leaf, Zero))

    @property
    def amplitude_bound(self) -> float:
        return sum(abs(leaf.amplitude) for leaf in self.leaves()
                   if not isinstance(leaf, Zero))

    def __add__(self, other: "ScalarField2D") -> "FieldSum":
        return FieldSum((self, other))


@dataclass(frozen=True)
class Zero(_Field):
    amplitude: complex = field(default=0j, init=False, repr=False)

    def _evaluate(self, x, y):
        return np.zeros(np.broadcast(x, y).shape, dtype=complex)

    def leaves(self):
        return []

    def conj(self) -> "Zero":
        return self

    @property
    def compact_support_radius(self) -> float:
        return 0.0

    def to_dict(self) -> dict:
        return {"type": "zero"}


@dataclass(frozen=True)
class DiskIndicator(_Field):
    """``amplitude`` times the characteristic function of a closed disk."""

    radius: float
    amplitude: complex = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0 or not math.isfinite(self.radius):
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "center", _as_point(self.center))

    def _evaluate(self, x, y):
        cx, cy = self.center
        inside = (x - cx) ** 2 + (y - cy) ** 2 <= self.radius ** 2
        return self.amplitude * inside.astype(float)

    def conj(self) -> "DiskIndicator":
        return DiskIndicator(self.radius, self.amplitude.conjugate(), self.center)

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    @property
    def compact_support_radius(self) -> float:
        return math.hypot(*self.center) + self.radius

    def to_dict(self) -> dict:
        return {"type": "disk", "amplitude": _complex_to_json(self.amplitude),
                "radius": self.radius, "center": list(self.center)}


@dataclass(frozen=True)
class GaussianDecay(_Field):
    """``amplitude * exp(-|r - center|^2 / width^2)``."""

    width: float
    amplitude: complex = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.width > 0 or not math.isfinite(self.width):
            raise ValueError(f"gaussian width must be positive, got {self.width}")
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "center", _as_point(self.center))

    def _evaluate(self, x, y):
        cx, cy = self.center
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        return self.amplitude * np.exp(-r2 / self.width ** 2)

    def conj(self) -> "GaussianDecay":
        return GaussianDecay(self.width, self.amplitude.conjugate(), self.center)

    @property
    def compact_support_radius(self) -> None:
        return None

    def to_dict(self) -> dict:
        return {"type": "gaussian", "amplitude": _complex_to_json(self.amplitude),
                "width": self.width, "center": list(self.center)}


@dataclass(frozen=True)
class FieldSum(_Field):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def _evaluate(self, x, y):
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for term in self.terms:
            out = out + term._evaluate(x, y)
        return out

    def leaves(self):
        return [leaf for term in self.terms for leaf in term.leaves()]

    def conj(self) -> "FieldSum":
        return FieldSum(tuple(t.conj() for t in self.terms))

    @property
    def compact_support_radius(self) -> float | None:
        radii = [leaf.compact_support_radius for leaf in self.leaves()]
        if any(r is None for r in radii):
            return None
        return max(radii, default=0.0)

    def to_dict(self) -> dict:
        return {"type": "sum", "terms": [t.to_dict() for t in self.terms]}


ScalarField2D = Zero | DiskIndicator | GaussianDecay | FieldSum


def _complex_to_json(value: complex):
    return value.real if value.imag == 0 else [value.real, value.imag]


def eval_field(field: ScalarField2D, point: Sequence[float]) -> complex:
    """Value of ``field`` at a single point."""
    x, y = _as_point(point)
    return complex(field(x, y))


@dataclass(frozen=True)
class Potential:
    """Hermitian matrix potential; ``v21`` is always ``conj(v12)``."""

    v11: ScalarField2D = Zero()
    v22: ScalarField2D = Zero()
    v12: ScalarField2D = Zero()

    @property
    def v21(self) -> ScalarField2D:
        return self.v12.conj()

    @property
    def is_diagonal_free(self) -> bool:
        return not self.v11.leaves() and not self.v22.leaves()

    @property
    def compact_support_radius(self) -> float | None:
        radii = [f.compact_support_radius for f in (self.v11, self.v22, self.v12)]
        if any(r is None for r in radii):
            return None
        return max(radii)

    def to_dict(self) -> dict:
        return {"v11": self.v11.to_dict(), "v22": self.v22.to_dict(),
                "v12": self.v12.to_dict()}


@dataclass(frozen=True)
class Model:
    delta: float
    epsilon: float = 0.0
    potential: Potential = Potential()

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")

    def with_epsilon(self, epsilon: float) -> "Model":
        return Model(self.delta, epsilon, self.potential)


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed in self.checks)

    @property
    def first_failure(self) -> str | None:
        for name, passed in self.checks:
            if not passed:
                return name
        return None

    def __bool__(self) -> bool:
        return self.ok


def _leaf_decays(leaf) -> bool:
    # Every supported leaf is either compactly supported or Gaussian.
    return isinstance(leaf, (DiskIndicator, GaussianDecay))


def validate_potential(p: Potential) -> ValidationReport:
    """Check the self-adjointness and integrability assumptions on ``p``.

    Check names are ``realness(v11)``, ``realness(v22)``, ``decay(<name>)``
    and ``integrability(<name>)``; the first failing one is reported by
    :attr:`ValidationReport.first_failure`.
    """
    checks = [
        ("realness(v11)", p.v11.is_real),
        ("realness(v22)", p.v22.is_real),
    ]
    for name, fld in (("v11", p.v11), ("v22", p.v22), ("v12", p.v12)):
        leaves = fld.leaves()
        checks.append((f"decay({name})", all(_leaf_decays(lf) for lf in leaves)))
        # disks and Gaussians are bounded with finite area, hence in L1 and L2
        checks.append((f"integrability({name})",
                       all(_leaf_decays(lf) and math.isfinite(abs(lf.amplitude))
                           for lf in leaves)))
    return ValidationReport(tuple(checks))


def dispersion(k: Sequence[float], delta: float) -> tuple[float, float]:
    """Both bands ``(E_minus, E_plus)`` of the free symbol at momentum ``k``.

    The Fourier symbol is ``[[k_y, k_x^2 + delta], [k_x^2 + delta, -k_y]]``,
    whose eigenvalues are ``+-sqrt(k_y^2 + (k_x^2 + delta)^2)``.
    """
    kx, ky = _as_point(k)
    e = math.hypot(ky, kx * kx + delta)
    return (-e, e)


def spectral_edges(delta: float) -> tuple[float, float]:
    """Open gap ``(-delta, delta)`` that may hold discrete eigenvalues."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return (-float(delta), float(delta))
