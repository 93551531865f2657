"""Coupling sweeps, persistence and plot-script emission."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import assemble_parts
from .bounds import BoundsReport, CutoffProfile, cutoff_constants, evaluate_bounds, \
    potential_moments
from .config import RunConfig
from .eigensolve import SpectralResult, eigenfunction_magnitude, gap_filter, solve_pencil
from .model import validate_potential
from .rbf import RbfBasis, make_basis

__all__ = ["EigenRow", "SweepTable", "build_basis", "run_sweep", "write_outputs",
           "read_csv", "EIGEN_HEADER", "BOUNDS_HEADER", "EIGENFUNCTION_HEADER",
           "format_float", "plot_script"]

log = logging.getLogger(__name__)

EIGEN_HEADER = ("epsilon", "index", "E", "residual")
BOUNDS_HEADER = ("epsilon", "i_plus", "i_minus", "g_plus", "g_minus", "h",
                 "threshold_plus", "threshold_minus")
EIGENFUNCTION_HEADER = ("x", "y", "abs_psi")


@dataclass(frozen=True)
class EigenRow:
    epsilon: float
    index: int
    energy: float
    residual: float


@dataclass
class SweepTable:
    rows: list[EigenRow] = field(default_factory=list)
    bounds: list[BoundsReport] = field(default_factory=list)
    failures: list[tuple[float, str]] = field(default_factory=list)
    eigenfunctions: dict = field(default_factory=dict)  # (eps, index) -> (X, Y, |psi|, E)
    provenance: dict = field(default_factory=dict)

    def energies_at(self, epsilon: float) -> np.ndarray:
        return np.array([r.energy for r in self.rows if r.epsilon == epsilon])

    def bounds_at(self, epsilon: float) -> BoundsReport | None:
        return next((b for b in self.bounds if b.epsilon == epsilon), None)


def build_basis(config: RunConfig) -> RbfBasis:
    b = config.basis
    return make_basis(b.box, b.count, b.method, b.shape, b.shape_factor)


def _select_states(result: SpectralResult, count: int):
    """Lowest non-negative energies first (ground state = smallest |E|)."""
    pos = [(i, p) for i, p in enumerate(result.eigenpairs) if p.energy >= 0]
    pos.sort(key=lambda ip: ip[1].energy)
    return pos[:count]


def run_sweep(config: RunConfig, basis: RbfBasis | None = None) -> SweepTable:
    """Solve and bound the model at every coupling of the configured grid.

    Failures at one coupling are recorded in ``failures`` and the sweep
    continues; the returned table is deterministic for a fixed config.
    """
    report = validate_potential(config.potential)
    if not report.ok:
        raise ValueError(f"potential fails assumption {report.first_failure}")
    basis = basis if basis is not None else build_basis(config)
    model0 = config.model(0.0)
    parts = assemble_parts(model0, basis, config.quadrature)
    moments = potential_moments(config.potential, config.quadrature)
    profile = CutoffProfile(config.bounds.margin)
    constants = cutoff_constants(profile, config.delta)
    support = config.potential.compact_support_radius
    table = SweepTable()
    ef = config.output.eigenfunctions
    for eps in config.epsilon_grid:
        try:
            table.bounds.append(evaluate_bounds(moments, config.delta, eps, constants, support))
            system = parts.at(config.model(eps))
            raw = solve_pencil(system, config.solver.truncation_tol)
            result = gap_filter(raw, system, config.delta, config.solver.residual_tol)
        except Exception as exc:  # noqa: BLE001 - recorded per coupling
            log.warning("epsilon=%g failed: %s", eps, exc)
            table.failures.append((float(eps), f"{type(exc).__name__}: {exc}"))
            continue
        for k, pair in enumerate(result.eigenpairs):
            table.rows.append(EigenRow(float(eps), k, pair.energy, pair.residual))
        if any(math.isclose(eps, e, rel_tol=0, abs_tol=1e-12) for e in ef.epsilons):
            xs = np.linspace(ef.extent[0], ef.extent[1], ef.points)
            ys = np.linspace(ef.extent[2], ef.extent[3], ef.points)
            for k, pair in _select_states(result, ef.max_states):
                X, Y, mag = eigenfunction_magnitude(pair, basis, xs, ys)
                table.eigenfunctions[(float(eps), k)] = (X, Y, mag, pair.energy)
    table.rows.sort(key=lambda r: (r.epsilon, r.energy))
    table.provenance = {
        "config_sha256": config.digest(),
        "basis": basis.report(),
        "cutoff": {"margin": profile.margin, "sup1": constants.sup1, "sup2": constants.sup2,
                   "c1": constants.c1, "c2": constants.c2, "c": constants.c},
        "moments": moments.__dict__,
    }
    return table


def format_float(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path) -> list[dict]:
    """Parse a CSV written here back to floats (empty cells become ``None``)."""
    with open(path, newline="") as fh:
        return [{k: (float(v) if v != "" else None) for k, v in row.items()}
                for row in csv.DictReader(fh)]


def _bounds_row(b: BoundsReport):
    return [format_float(v) for v in (b.epsilon, b.i_plus, b.i_minus, b.g_plus, b.g_minus,
                                      b.envelope_h, b.threshold_plus, b.threshold_minus)]


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_outputs(table: SweepTable, config: RunConfig, directory=None) -> list[Path]:
    """Write eigencurves, bounds, eigenfunction grids, manifest and plot script.

    Returns the written paths. I/O failures propagate as ``OSError`` with
    the offending path.
    """
    out = Path(directory if directory is not None else config.output.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    formats = config.output.formats
    eigen_rows = [[format_float(r.epsilon), str(r.index), format_float(r.energy),
                   format_float(r.residual)] for r in table.rows]
    bounds_rows = [_bounds_row(b) for b in table.bounds]
    if "csv" in formats:
        for name, header, rows in (("eigencurves.csv", EIGEN_HEADER, eigen_rows),
                                   ("bounds.csv", BOUNDS_HEADER, bounds_rows)):
            _write_csv(out / name, header, rows)
            written.append(out / name)
    if "json" in formats:
        doc = {"eigencurves": [r.__dict__ for r in table.rows],
               "bounds": [b.to_dict() for b in table.bounds],
               "failures": table.failures}
        path = out / "sweep.json"
        path.write_text(json.dumps(_json_safe(doc), indent=2) + "\n")
        written.append(path)
    ef_files = []
    for (eps, k), (X, Y, mag, energy) in sorted(table.eigenfunctions.items()):
        name = f"eigenfunction_eps{eps:g}_state{k}.csv"
        _write_csv(out / name, EIGENFUNCTION_HEADER,
                   ([format_float(x), format_float(y), format_float(m)]
                    for x, y, m in zip(X.ravel(), Y.ravel(), mag.ravel())))
        ef_files.append({"file": name, "epsilon": eps, "E": energy})
        written.append(out / name)
    manifest = {"config": config.to_dict(), "provenance": table.provenance,
                "failures": table.failures, "eigenfunctions": ef_files,
                "files": [p.name for p in written]}
    path = out / "manifest.json"
    path.write_text(json.dumps(_json_safe(manifest), indent=2, sort_keys=True) + "\n")
    written.append(path)
    path = out / "plot_eigencurves.py"
    path.write_text(plot_script(config.delta))
    written.append(path)
    return written


_PLOT_TEMPLATE = '''"""Plot eigencurves E(epsilon) (blue) and the envelope +-h(epsilon) (red).

Run from anywhere: python plot_eigencurves.py [output.png]
"""
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

DELTA = {delta!r}
HERE = Path(__file__).resolve().parent


def read(name):
    with open(HERE / name, newline="") as fh:
        return list(csv.DictReader(fh))


eig = read("eigencurves.csv")
bnd = read("bounds.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot([float(r["epsilon"]) for r in eig], [float(r["E"]) for r in eig],
        "o", color="blue", markersize=3, label="E(epsilon)")
env = [(float(r["epsilon"]), float(r["h"])) for r in bnd if r["h"]]
if env:
    xs, hs = zip(*env)
    ax.plot(xs, hs, "-", color="red", label="+-h(epsilon)")
    ax.plot(xs, [-h for h in hs], "-", color="red")
ax.axhline(DELTA, color="gray", lw=0.5)
ax.axhline(-DELTA, color="gray", lw=0.5)
ax.set_xlabel("epsilon")
ax.set_ylabel("E")
ax.set_ylim(-1.05 * DELTA, 1.05 * DELTA)
ax.legend(loc="lower left")
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else HERE / "eigencurves.png", dpi=150)
'''


def plot_script(delta: float) -> str:
    return _PLOT_TEMPLATE.format(delta=float(delta))
