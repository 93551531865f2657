"""Generalized Hermitian eigensolve with Gram whitening and gap filtering."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .assembly import BlockSystem
from .rbf import RbfBasis, evaluate_basis

__all__ = [
    "SolverError",
    "RawEigenpairs",
    "GapEigenpair",
    "SpectralResult",
    "solve_pencil",
    "gap_filter",
    "solve_gap",
    "eigenfunction_magnitude",
]


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class RawEigenpairs:
    values: np.ndarray
    vectors: np.ndarray  # columns, D-normalised
    d_condition: float
    rank: int
    dropped: int


@dataclass(frozen=True)
class GapEigenpair:
    energy: float
    residual: float
    coefficients: np.ndarray  # (2N,) = (a, b)


@dataclass(frozen=True)
class SpectralResult:
    eigenpairs: tuple[GapEigenpair, ...]
    discarded: tuple[tuple[float, str], ...]
    delta: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.eigenpairs])


def _whitener(g: np.ndarray, truncation_tol: float):
    lam, u = la.eigh(g)
    top = lam[-1]
    if not top > 0:
        raise SolverError("Gram matrix is numerically zero")
    keep = lam > truncation_tol * top
    if not keep.any():
        raise SolverError("Gram matrix numerically rank-zero after truncation")
    cond = top / lam[keep][0]
    return u[:, keep] / np.sqrt(lam[keep]), float(cond), int(keep.sum())


def solve_pencil(system: BlockSystem | tuple, truncation_tol: float = 1e-10) -> RawEigenpairs:
    """All eigenpairs of ``C x = E D x`` on the numerically non-null part of ``D``.

    ``D`` is eigen-decomposed, directions with eigenvalue below
    ``truncation_tol * max`` are dropped, and the whitened standard problem
    is solved with a dense Hermitian solver. For a :class:`BlockSystem` the
    block-diagonal structure of ``D`` is used; a plain ``(C, D)`` pair is
    also accepted.
    """
    if not 0 < truncation_tol < 1:
        raise ValueError("truncation_tol must lie in (0, 1)")
    if isinstance(system, BlockSystem):
        c = system.c_matrix
        w_half, cond, rank = _whitener(system.gram, truncation_tol)
        n, r = w_half.shape
        w = np.zeros((2 * n, 2 * r))
        w[:n, :r] = w_half
        w[n:, r:] = w_half
        rank *= 2
        full = 2 * n
    else:
        c, d = (np.asarray(m) for m in system)
        w, cond, rank = _whitener(d, truncation_tol)
        full = c.shape[0]
    a = w.T @ c @ w
    a = 0.5 * (a + a.conj().T)
    try:
        values, y = la.eigh(a)
    except la.LinAlgError as exc:
        raise SolverError(f"Hermitian eigensolver failed: {exc}") from exc
    return RawEigenpairs(values, w @ y, cond, rank, full - rank)


def _residuals(c, d, values, vectors):
    cx = c @ vectors
    dx = d @ vectors
    num = np.linalg.norm(cx - dx * values, axis=0)
    den = np.linalg.norm(cx, axis=0) + np.abs(values) * np.linalg.norm(dx, axis=0)
    return num / np.where(den > 0, den, 1.0)


def gap_filter(raw: RawEigenpairs, system: BlockSystem | tuple, delta: float,
               residual_tol: float = 1e-6) -> SpectralResult:
    """Keep eigenpairs inside ``(-delta, delta)`` with small relative residual.

    Everything else lands in ``discarded`` tagged ``"outside gap"`` or
    ``"residual"``. Kept pairs are sorted by energy, ties by residual.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(system, BlockSystem):
        c, d = system.c_matrix, system.d_matrix
    else:
        c, d = (np.asarray(m) for m in system)
    values = np.asarray(raw.values)
    in_gap = np.abs(values) < delta
    res = np.full(values.shape, np.nan)
    if in_gap.any():
        res[in_gap] = _residuals(c, d, values[in_gap], raw.vectors[:, in_gap])
    kept, discarded = [], []
    for k, e in enumerate(values):
        if not in_gap[k]:
            discarded.append((float(e), "outside gap"))
        elif not res[k] <= residual_tol:
            discarded.append((float(e), "residual"))
        else:
            kept.append(GapEigenpair(float(e), float(res[k]), raw.vectors[:, k].copy()))
    kept.sort(key=lambda p: (p.energy, p.residual))
    diagnostics = {"d_condition": raw.d_condition, "rank": raw.rank,
                   "null_space_truncated": raw.dropped,
                   "outside_gap": sum(1 for _, why in discarded if why == "outside gap"),
                   "residual_rejected": sum(1 for _, why in discarded if why == "residual")}
    return SpectralResult(tuple(kept), tuple(discarded), float(delta), diagnostics)


def solve_gap(system: BlockSystem, truncation_tol: float = 1e-10,
              residual_tol: float = 1e-6) -> SpectralResult:
    raw = solve_pencil(system, truncation_tol)
    return gap_filter(raw, system, system.model.delta, residual_tol)


def eigenfunction_magnitude(pair: GapEigenpair | np.ndarray, basis: RbfBasis, x, y):
    """``|psi| = sqrt(|sum a_j phi_j|^2 + |sum b_j phi_j|^2)`` sampled on ``(x, y)``.

    Returns ``(X, Y, magnitude)`` where ``X, Y`` are the broadcast sample
    coordinates (a meshgrid when ``x`` and ``y`` are 1D axes).
    """
    coeffs = pair.coefficients if isinstance(pair, GapEigenpair) else np.asarray(pair)
    n = basis.size
    if coeffs.shape != (2 * n,):
        raise ValueError(f"expected {2 * n} coefficients, got {coeffs.shape}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1 and y.ndim == 1:
        x, y = np.meshgrid(x, y, indexing="ij")
    phi = evaluate_basis(basis, x, y)
    psi1 = phi @ coeffs[:n]
    psi2 = phi @ coeffs[n:]
    return x, y, np.sqrt(np.abs(psi1) ** 2 + np.abs(psi2) ** 2)
