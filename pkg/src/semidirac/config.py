"""Strict JSON run configuration.

Example (every key except ``delta`` and ``potential`` is optional)::

    {
      "delta": 5,
      "potential": {"v12": {"type": "disk", "amplitude": -1, "radius": 2}},
      "epsilon_grid": {"start": 0, "stop": 5, "count": 21},
      "basis": {"count": 841, "method": "grid", "box": [-8, 8, -8, 8],
                "shape": null, "shape_factor": 0.8},
      "quadrature": {"radial_order": 24, "angular_count": 48,
                     "chord_order": 48, "annulus_order": 48},
      "solver": {"truncation_tol": 1e-10, "residual_tol": 1e-6},
      "bounds": {"margin": 0.1, "n_grid": [8, 16, 32]},
      "output": {"directory": "out", "formats": ["csv", "json"],
                 "eigenfunctions": {"epsilons": [2.5], "max_states": 2,
                                    "points": 81, "extent": [-6, 6, -6, 6]}}
    }

Field descriptors are ``{"type": "zero"}``, ``{"type": "disk", "amplitude",
"radius", "center"}``, ``{"type": "gaussian", "amplitude", "width",
"center"}`` or ``{"type": "sum", "terms": [...]}``; a complex amplitude is
written ``[re, im]``. Any field may carry ``"is_real": true`` which is then
checked against its amplitudes.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import DiskIndicator, FieldSum, GaussianDecay, Model, Potential, Zero
from .quadrature import QuadControls

__all__ = ["ConfigError", "BasisConfig", "SolverConfig", "BoundsConfig",
           "EigenfunctionConfig", "OutputConfig", "RunConfig", "parse_config",
           "load_config", "parse_field"]


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class BasisConfig:
    count: int = 841
    method: str = "grid"
    box: tuple[float, float, float, float] = (-8.0, 8.0, -8.0, 8.0)
    shape: float | None = None
    shape_factor: float = 0.8


@dataclass(frozen=True)
class SolverConfig:
    truncation_tol: float = 1e-10
    residual_tol: float = 1e-6


@dataclass(frozen=True)
class BoundsConfig:
    margin: float = 0.1
    n_grid: tuple[float, ...] = (8.0, 16.0, 32.0)


@dataclass(frozen=True)
class EigenfunctionConfig:
    epsilons: tuple[float, ...] = ()
    max_states: int = 2
    points: int = 81
    extent: tuple[float, float, float, float] = (-6.0, 6.0, -6.0, 6.0)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv",)
    eigenfunctions: EigenfunctionConfig = EigenfunctionConfig()


DEFAULT_EPSILON_GRID = {"start": 0.0, "stop": 5.0, "count": 21}


@dataclass(frozen=True)
class RunConfig:
    delta: float
    potential: Potential
    epsilon_grid: tuple[float, ...]
    basis: BasisConfig = BasisConfig()
    quadrature: QuadControls = QuadControls()
    solver: SolverConfig = SolverConfig()
    bounds: BoundsConfig = BoundsConfig()
    output: OutputConfig = OutputConfig()
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def model(self, epsilon: float = 0.0) -> Model:
        return Model(self.delta, epsilon, self.potential)

    def to_dict(self) -> dict:
        """Fully materialised configuration (every default spelled out)."""
        ef = self.output.eigenfunctions
        return {
            "delta": self.delta,
            "potential": self.potential.to_dict(),
            "epsilon_grid": list(self.epsilon_grid),
            "basis": {"count": self.basis.count, "method": self.basis.method,
                      "box": list(self.basis.box), "shape": self.basis.shape,
                      "shape_factor": self.basis.shape_factor},
            "quadrature": {"radial_order": self.quadrature.radial_order,
                           "angular_count": self.quadrature.angular_count,
                           "chord_order": self.quadrature.chord_order,
                           "annulus_order": self.quadrature.annulus_order},
            "solver": {"truncation_tol": self.solver.truncation_tol,
                       "residual_tol": self.solver.residual_tol},
            "bounds": {"margin": self.bounds.margin, "n_grid": list(self.bounds.n_grid)},
            "output": {"directory": self.output.directory,
                       "formats": list(self.output.formats),
                       "eigenfunctions": {"epsilons": list(ef.epsilons),
                                          "max_states": ef.max_states,
                                          "points": ef.points, "extent": list(ef.extent)}},
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# -- parsing helpers ------------------------------------------------------------------

def _check_keys(doc, allowed, path):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(where, "unknown key")


def _join(path, key):
    return f"{path}.{key}" if path else key


def _number(value, path, *, positive=False, nonneg=False, unit=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and not value > 0:
        raise ConfigError(path, "must be positive")
    if nonneg and value < 0:
        raise ConfigError(path, "must be non-negative")
    if unit and not 0 < value < 1:
        raise ConfigError(path, "must lie in (0, 1)")
    return value


def _integer(value, path, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "must be an integer")
    if value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _complex(value, path):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(path, "complex amplitude must be [re, im]")
        return complex(_number(value[0], path + "[0]"), _number(value[1], path + "[1]"))
    return complex(_number(value, path))


def _vector(value, path, length):
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigError(path, f"must be a list of {length} numbers")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _box(value, path):
    box = _vector(value, path, 4)
    if not (box[1] > box[0] and box[3] > box[2]):
        raise ConfigError(path, "box must be [x0, x1, y0, y1] with x1 > x0, y1 > y0")
    return box


def parse_field(doc, path: str = "field"):
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError(path, "field descriptor needs a 'type'")
    kind = doc["type"]
    common = {"type", "is_real"}
    if kind == "zero":
        _check_keys(doc, common, path)
        out = Zero()
    elif kind == "disk":
        _check_keys(doc, common | {"amplitude", "radius", "center"}, path)
        if "radius" not in doc:
            raise ConfigError(_join(path, "radius"), "required")
        out = DiskIndicator(_number(doc["radius"], _join(path, "radius"), positive=True),
                            _complex(doc.get("amplitude", 1.0), _join(path, "amplitude")),
                            _vector(doc.get("center", [0, 0]), _join(path, "center"), 2))
    elif kind == "gaussian":
        _check_keys(doc, common | {"amplitude", "width", "center"}, path)
        if "width" not in doc:
            raise ConfigError(_join(path, "width"), "required")
        out = GaussianDecay(_number(doc["width"], _join(path, "width"), positive=True),
                            _complex(doc.get("amplitude", 1.0), _join(path, "amplitude")),
                            _vector(doc.get("center", [0, 0]), _join(path, "center"), 2))
    elif kind == "sum":
        _check_keys(doc, common | {"terms"}, path)
        terms = doc.get("terms")
        if not isinstance(terms, list):
            raise ConfigError(_join(path, "terms"), "must be a list")
        out = FieldSum(tuple(parse_field(t, f"{path}.terms[{i}]") for i, t in enumerate(terms)))
    else:
        raise ConfigError(_join(path, "type"), f"unknown field type {kind!r}")
    if "is_real" in doc:
        flag = doc["is_real"]
        if not isinstance(flag, bool):
            raise ConfigError(_join(path, "is_real"), "must be a boolean")
        if flag and not out.is_real:
            raise ConfigError(_join(path, "is_real"), "declared real but has complex amplitude")
    return out


def _parse_potential(doc, path="potential"):
    _check_keys(doc, {"v11", "v22", "v12"}, path)
    fields = {k: parse_field(doc[k], _join(path, k)) for k in ("v11", "v22", "v12") if k in doc}
    return Potential(**fields)


def _parse_epsilon_grid(doc, path="epsilon_grid"):
    if isinstance(doc, dict):
        _check_keys(doc, {"start", "stop", "count"}, path)
        for key in ("start", "stop", "count"):
            if key not in doc:
                raise ConfigError(_join(path, key), "required")
        start = _number(doc["start"], _join(path, "start"), nonneg=True)
        stop = _number(doc["stop"], _join(path, "stop"), nonneg=True)
        count = _integer(doc["count"], _join(path, "count"))
        grid = tuple(float(v) for v in np.linspace(start, stop, count))
    elif isinstance(doc, list):
        grid = tuple(_number(v, f"{path}[{i}]", nonneg=True) for i, v in enumerate(doc))
    else:
        raise ConfigError(path, "must be a list or {start, stop, count}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(path, "must be strictly increasing")
    return grid


def parse_config(document: str | dict) -> RunConfig:
    """Validate a JSON document (text or decoded) into a :class:`RunConfig`.

    Raises :class:`ConfigError` naming the offending field path.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"malformed JSON: {exc}") from exc
    else:
        doc = document
    _check_keys(doc, {"delta", "potential", "epsilon_grid", "basis", "quadrature",
                      "solver", "bounds", "output"}, "")
    if "delta" not in doc:
        raise ConfigError("delta", "required")
    delta = _number(doc["delta"], "delta", positive=True)
    potential = _parse_potential(doc.get("potential", {}))
    grid = _parse_epsilon_grid(doc.get("epsilon_grid", DEFAULT_EPSILON_GRID))

    b = doc.get("basis", {})
    _check_keys(b, {"count", "method", "box", "shape", "shape_factor"}, "basis")
    method = b.get("method", "grid")
    if method not in ("grid", "halton"):
        raise ConfigError("basis.method", "must be 'grid' or 'halton'")
    shape = b.get("shape")
    basis = BasisConfig(
        count=_integer(b.get("count", 841), "basis.count"),
        method=method,
        box=_box(b.get("box", [-8, 8, -8, 8]), "basis.box"),
        shape=None if shape is None else _number(shape, "basis.shape", positive=True),
        shape_factor=_number(b.get("shape_factor", 0.8), "basis.shape_factor", positive=True),
    )

    q = doc.get("quadrature", {})
    _check_keys(q, {"radial_order", "angular_count", "chord_order", "annulus_order"},
                "quadrature")
    quad = QuadControls(**{k: _integer(q.get(k, getattr(QuadControls, k)), f"quadrature.{k}")
                           for k in ("radial_order", "angular_count", "chord_order",
                                     "annulus_order")})

    s = doc.get("solver", {})
    _check_keys(s, {"truncation_tol", "residual_tol"}, "solver")
    solver = SolverConfig(
        truncation_tol=_number(s.get("truncation_tol", 1e-10), "solver.truncation_tol", unit=True),
        residual_tol=_number(s.get("residual_tol", 1e-6), "solver.residual_tol", unit=True))

    bd = doc.get("bounds", {})
    _check_keys(bd, {"margin", "n_grid"}, "bounds")
    margin = _number(bd.get("margin", 0.1), "bounds.margin")
    if not 0 < margin < 0.5:
        raise ConfigError("bounds.margin", "must lie in (0, 0.5)")
    n_grid = bd.get("n_grid", [8, 16, 32])
    if not isinstance(n_grid, list) or not n_grid:
        raise ConfigError("bounds.n_grid", "must be a non-empty list")
    n_grid = tuple(_number(v, f"bounds.n_grid[{i}]") for i, v in enumerate(n_grid))
    if any(v <= math.e for v in n_grid) or any(b2 <= a for a, b2 in zip(n_grid, n_grid[1:])):
        raise ConfigError("bounds.n_grid", "must be strictly increasing and exceed e")
    bounds = BoundsConfig(margin, n_grid)

    o = doc.get("output", {})
    _check_keys(o, {"directory", "formats", "eigenfunctions"}, "output")
    directory = o.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory", "must be a non-empty string")
    formats = o.get("formats", ["csv"])
    if (not isinstance(formats, list) or not formats
            or any(f not in ("csv", "json") for f in formats)):
        raise ConfigError("output.formats", "must be a non-empty subset of ['csv', 'json']")
    e = o.get("eigenfunctions", {})
    _check_keys(e, {"epsilons", "max_states", "points", "extent"}, "output.eigenfunctions")
    eps_list = e.get("epsilons", [])
    if not isinstance(eps_list, list):
        raise ConfigError("output.eigenfunctions.epsilons", "must be a list")
    eig = EigenfunctionConfig(
        epsilons=tuple(_number(v, f"output.eigenfunctions.epsilons[{i}]", nonneg=True)
                       for i, v in enumerate(eps_list)),
        max_states=_integer(e.get("max_states", 2), "output.eigenfunctions.max_states"),
        points=_integer(e.get("points", 81), "output.eigenfunctions.points", minimum=2),
        extent=_box(e.get("extent", [-6, 6, -6, 6]), "output.eigenfunctions.extent"))
    output = OutputConfig(directory, tuple(dict.fromkeys(formats)), eig)

    return RunConfig(delta, potential, grid, basis, quad, solver, bounds, output, source=doc)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
