"""Gaussian RBF basis ``phi_j(r) = exp(-s^2 |r - r_j|^2)`` and its Galerkin integrals.

All differential integrals are closed forms of Gaussian moments. For a pair
``(i, j)`` with separation ``d = r_i - r_j`` the product ``phi_i phi_j`` equals
``exp(-s^2 |d|^2 / 2) exp(-2 s^2 |r - m|^2)`` with ``m`` the midpoint, so

    (phi_i, phi_j)             = pi / (2 s^2) * exp(-s^2 |d|^2 / 2)
    (phi_i, d_y phi_j)         = s^2 (y_j - y_i) (phi_i, phi_j)
    (d_x phi_i, d_x phi_j)     = s^2 (1 - s^2 d_x^2) (phi_i, phi_j)

The kinetic entry ``(phi_i, (-d_x^2 + delta) phi_j)`` is the last line plus
``delta`` times the Gram entry (integration by parts).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Voronoi, cKDTree, QhullError

from .model import DiskIndicator, GaussianDecay, ScalarField2D, Zero
from .quadrature import QuadControls, disk_gaussian_integral

__all__ = [
    "RbfBasis",
    "generate_nodes",
    "fill_distance",
    "make_basis",
    "gram",
    "dy_moment",
    "kinetic_x",
    "potential_moment",
    "gram_matrix",
    "dy_matrix",
    "kinetic_matrix",
    "potential_matrix",
    "evaluate_basis",
]

# Gaussian products below exp(-CUTOFF) of their peak are treated as zero.
CUTOFF = 37.0


@dataclass(frozen=True)
class RbfBasis:
    nodes: np.ndarray
    shape: float
    box: tuple[float, float, float, float]
    method: str = "custom"
    fill: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        if len(nodes) < 1:
            raise ValueError("basis needs at least one node")
        if not self.shape > 0:
            raise ValueError(f"shape parameter must be positive, got {self.shape}")
        if len(nodes) > 1 and cKDTree(nodes).query(nodes, k=2)[0][:, 1].min() <= 0:
            raise ValueError("basis nodes must be pairwise distinct")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "box", tuple(float(b) for b in self.box))

    @property
    def size(self) -> int:
        return len(self.nodes)

    def report(self) -> dict:
        return {"count": self.size, "method": self.method, "box": list(self.box),
                "shape": self.shape, "fill_distance": self.fill}


def _halton(index: int, base: int) -> float:
    f, r = 1.0, 0.0
    while index > 0:
        f /= base
        index, digit = divmod(index, base)
        r += f * digit
    return r


def generate_nodes(box, count: int, method: str = "grid") -> np.ndarray:
    """Deterministic node set inside ``box = (x0, x1, y0, y1)``.

    ``halton`` uses the radical-inverse sequence in bases 2 and 3 starting
    at index 1; ``grid`` uses a cell-centred lattice with roughly square
    cells holding at least ``count`` points, truncated in row-major order.
    """
    x0, x1, y0, y1 = map(float, box)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate box {box}")
    if count < 1:
        raise ValueError("count must be >= 1")
    lx, ly = x1 - x0, y1 - y0
    if method == "halton":
        pts = np.array([[_halton(i, 2), _halton(i, 3)] for i in range(1, count + 1)])
        return np.column_stack([x0 + lx * pts[:, 0], y0 + ly * pts[:, 1]])
    if method == "grid":
        mx = max(1, math.ceil(math.sqrt(count * lx / ly)))
        my = max(1, math.ceil(count / mx))
        xs = x0 + lx * (np.arange(mx) + 0.5) / mx
        ys = y0 + ly * (np.arange(my) + 0.5) / my
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])[:count]
    raise ValueError(f"unknown node method {method!r}")


def fill_distance(nodes: np.ndarray, box, samples: int = 401) -> float:
    """Largest distance from a point of ``box`` to its nearest node.

    Evaluated on the union of a uniform sample grid, the box corners and the
    Voronoi vertices lying inside the box, where the maximum is attained
    for interior maximisers.
    """
    x0, x1, y0, y1 = map(float, box)
    xs = np.linspace(x0, x1, samples)
    ys = np.linspace(y0, y1, samples)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    probes = [np.column_stack([X.ravel(), Y.ravel()])]
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) >= 4:
        try:
            verts = Voronoi(nodes).vertices
            inside = ((verts[:, 0] >= x0) & (verts[:, 0] <= x1)
                      & (verts[:, 1] >= y0) & (verts[:, 1] <= y1))
            probes.append(verts[inside])
        except QhullError:
            pass
    dist, _ = cKDTree(nodes).query(np.vstack(probes))
    return float(dist.max())


def make_basis(box=(-8.0, 8.0, -8.0, 8.0), count: int = 841, method: str = "grid",
               shape: float | None = None, shape_factor: float = 0.8) -> RbfBasis:
    """Build a basis; the default shape is ``shape_factor / fill_distance``."""
    nodes = generate_nodes(box, count, method)
    fill = fill_distance(nodes, box)
    if shape is None:
        shape = shape_factor / fill
    return RbfBasis(nodes, shape, tuple(box), method, fill)


# -- pairwise kernels ---------------------------------------------------------

def _pair(basis: RbfBasis, i, j):
    ri = basis.nodes[i]
    rj = basis.nodes[j]
    return ri, rj


def _gram_kernel(s, dx, dy):
    return math.pi / (2.0 * s * s) * np.exp(-0.5 * s * s * (dx * dx + dy * dy))


def gram(basis: RbfBasis, i: int, j: int) -> float:
    ri, rj = _pair(basis, i, j)
    d = ri - rj
    return float(_gram_kernel(basis.shape, d[0], d[1]))


def dy_moment(basis: RbfBasis, i: int, j: int) -> float:
    """``(phi_i, d_y phi_j)``; the ``-i`` factor is applied at assembly."""
    ri, rj = _pair(basis, i, j)
    s = basis.shape
    d = ri - rj
    return float(s * s * (rj[1] - ri[1]) * _gram_kernel(s, d[0], d[1]))


def kinetic_x(basis: RbfBasis, i: int, j: int, delta: float) -> float:
    ri, rj = _pair(basis, i, j)
    s = basis.shape
    d = ri - rj
    g = _gram_kernel(s, d[0], d[1])
    return float(s * s * (1.0 - s * s * d[0] ** 2) * g + delta * g)


def gram_matrix(basis: RbfBasis) -> np.ndarray:
    P = basis.nodes
    dx = P[:, None, 0] - P[None, :, 0]
    dy = P[:, None, 1] - P[None, :, 1]
    return _gram_kernel(basis.shape, dx, dy)


def dy_matrix(basis: RbfBasis) -> np.ndarray:
    """Real antisymmetric matrix of ``(phi_i, d_y phi_j)``."""
    P = basis.nodes
    s = basis.shape
    dx = P[:, None, 0] - P[None, :, 0]
    dy = P[:, None, 1] - P[None, :, 1]
    return -s * s * dy * _gram_kernel(s, dx, dy)


def kinetic_matrix(basis: RbfBasis, delta: float) -> np.ndarray:
    P = basis.nodes
    s = basis.shape
    dx = P[:, None, 0] - P[None, :, 0]
    dy = P[:, None, 1] - P[None, :, 1]
    g = _gram_kernel(s, dx, dy)
    return s * s * (1.0 - s * s * dx * dx) * g + delta * g


# -- potential-weighted entries -----------------------------------------------

def _leaf_product_integral(leaf, s, dx, dy, mx, my, controls: QuadControls):
    """Integral of ``phi_i phi_j * leaf / amplitude`` for arrays of pairs."""
    alpha = 2.0 * s * s
    prefactor = np.exp(-0.5 * s * s * (dx * dx + dy * dy))
    out = np.zeros(np.broadcast(dx, mx).shape)
    live = prefactor > math.exp(-CUTOFF)
    if isinstance(leaf, GaussianDecay):
        beta = 1.0 / leaf.width ** 2
        cx, cy = leaf.center
        dist2 = (mx - cx) ** 2 + (my - cy) ** 2
        out[live] = (math.pi / (alpha + beta)) * np.exp(
            -alpha * beta / (alpha + beta) * dist2[live])
    elif isinstance(leaf, DiskIndicator):
        cx, cy = leaf.center
        R = leaf.radius
        half = math.sqrt(CUTOFF / alpha)
        dist = np.hypot(mx - cx, my - cy)
        inside = live & (dist + half <= R)
        straddle = live & (dist + half > R) & (dist - half < R)
        out[inside] = math.pi / alpha
        if straddle.any():
            out[straddle] = disk_gaussian_integral(
                leaf.center, R, mx[straddle], my[straddle], alpha,
                order=controls.chord_order, cutoff=CUTOFF)
    else:  # pragma: no cover - guarded by the field types
        raise TypeError(f"unsupported field leaf {leaf!r}")
    return out * prefactor


def _potential_pairs(basis, field: ScalarField2D, ii, jj, controls):
    P = basis.nodes
    ri, rj = P[ii], P[jj]
    dx = ri[..., 0] - rj[..., 0]
    dy = ri[..., 1] - rj[..., 1]
    mx = 0.5 * (ri[..., 0] + rj[..., 0])
    my = 0.5 * (ri[..., 1] + rj[..., 1])
    total = np.zeros(np.shape(dx), dtype=complex)
    for leaf in field.leaves():
        total += leaf.amplitude * _leaf_product_integral(leaf, basis.shape, dx, dy, mx, my,
                                                         controls)
    return total


def potential_moment(basis: RbfBasis, i: int, j: int, field: ScalarField2D,
                     controls: QuadControls = QuadControls()) -> complex:
    """``(phi_i, V phi_j)`` for a coefficient field ``V``."""
    return complex(_potential_pairs(basis, field, np.array(i), np.array(j), controls))


def potential_matrix(basis: RbfBasis, field: ScalarField2D,
                     controls: QuadControls = QuadControls()) -> np.ndarray:
    """Complex symmetric matrix of ``(phi_i, V phi_j)``.

    Only the upper triangle is integrated; the lower one is mirrored, so
    the result is exactly symmetric.
    """
    n = basis.size
    out = np.zeros((n, n), dtype=complex)
    if isinstance(field, Zero) or not field.leaves():
        return out
    iu, ju = np.triu_indices(n)
    vals = _potential_pairs(basis, field, iu, ju, controls)
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def evaluate_basis(basis: RbfBasis, x, y) -> np.ndarray:
    """Basis values, shape ``x.shape + (N,)``."""
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    s = basis.shape
    return np.exp(-s * s * ((x - basis.nodes[:, 0]) ** 2 + (y - basis.nodes[:, 1]) ** 2))
