"""Block Galerkin system ``C [a; b] = E diag(D, D) [a; b]``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Model
from .quadrature import QuadControls
from .rbf import RbfBasis, dy_matrix, gram_matrix, kinetic_matrix, potential_matrix

__all__ = ["AssemblyError", "BlockSystem", "SystemParts", "assemble_parts", "assemble",
           "dump_matrix", "load_matrix", "HERMITICITY_RTOL"]

HERMITICITY_RTOL = 1e-12


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True)
class BlockSystem:
    c_matrix: np.ndarray
    d_matrix: np.ndarray
    gram: np.ndarray
    basis: RbfBasis
    model: Model

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def block(self, a: int, b: int) -> np.ndarray:
        n = self.n
        return self.c_matrix[a * n:(a + 1) * n, b * n:(b + 1) * n]

    def hermiticity_defect(self) -> float:
        c = self.c_matrix
        return float(np.abs(c - c.conj().T).max() / max(np.abs(c).max(), 1e-300))


@dataclass(frozen=True)
class SystemParts:
    """Coupling-independent pieces; ``C(eps) = free + eps * potential``."""

    free: np.ndarray
    potential: np.ndarray
    gram: np.ndarray
    basis: RbfBasis
    delta: float
    meta: dict = field(default_factory=dict)

    def at(self, model: Model) -> BlockSystem:
        if model.delta != self.delta:
            raise ValueError("parts were assembled for a different delta")
        c = self.free + model.epsilon * self.potential
        return _finalize(c, self.gram, self.basis, model)


def _blocks(dy, k, v11, v12, v21, v22):
    return np.block([[-1j * dy + v11, k + v12], [k + v21, 1j * dy + v22]])


def assemble_parts(model: Model, basis: RbfBasis,
                   controls: QuadControls = QuadControls()) -> SystemParts:
    g = gram_matrix(basis)
    dy = dy_matrix(basis)
    k = kinetic_matrix(basis, model.delta)
    p = model.potential
    m11 = potential_matrix(basis, p.v11, controls)
    m22 = potential_matrix(basis, p.v22, controls)
    m12 = potential_matrix(basis, p.v12, controls)
    # assembled from the conjugated field on purpose, then compared
    m21 = potential_matrix(basis, p.v21, controls)
    scale = max(np.abs(m12).max(), 1.0)
    if np.abs(m21 - m12.conj().T).max() > HERMITICITY_RTOL * scale:
        raise AssemblyError("C21 potential block differs from C12^H: conjugation bug")
    m21 = m12.conj().T
    zero = np.zeros_like(g)
    free = _blocks(dy, k, zero, zero, zero, zero)
    pot = np.block([[m11, m12], [m21, m22]])
    return SystemParts(free, pot, g, basis, model.delta)


def _finalize(c, g, basis, model) -> BlockSystem:
    defect = np.abs(c - c.conj().T).max() / max(np.abs(c).max(), 1e-300)
    if defect > HERMITICITY_RTOL:
        raise AssemblyError(f"assembled C is not Hermitian (relative defect {defect:.3e})")
    n = g.shape[0]
    d = np.zeros((2 * n, 2 * n))
    d[:n, :n] = g
    d[n:, n:] = g
    for arr in (c, d):
        arr.setflags(write=False)
    return BlockSystem(c, d, g, basis, model)


def assemble(model: Model, basis: RbfBasis,
             controls: QuadControls = QuadControls()) -> BlockSystem:
    """Galerkin matrices of ``H_eps`` in the Gaussian basis.

    Raises :class:`AssemblyError` when the Hermiticity check fails, which
    points at a kernel sign or quadrature bug rather than bad input.
    """
    return assemble_parts(model, basis, controls).at(model)


def dump_matrix(matrix: np.ndarray, path) -> None:
    """Write ``i j re im`` lines (zero-based indices, 17 significant digits)."""
    m = np.asarray(matrix)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# shape {m.shape[0]} {m.shape[1]}\n")
        for (i, j), v in np.ndenumerate(m):
            v = complex(v)
            fh.write(f"{i} {j} {v.real:.17g} {v.imag:.17g}\n")


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        rows, cols = int(header[2]), int(header[3])
        out = np.zeros((rows, cols), dtype=complex)
        for line in fh:
            i, j, re, im = line.split()
            out[int(i), int(j)] = complex(float(re), float(im))
    return out
