import math

import numpy as np
import pytest
import scipy.linalg as la

from semidirac.assembly import (AssemblyError, HERMITICITY_RTOL, SystemParts, assemble,
                                assemble_parts, dump_matrix, load_matrix)
from semidirac.model import DiskIndicator, GaussianDecay, Model, Potential
from semidirac.rbf import RbfBasis, make_basis


def single_node():
    return RbfBasis(np.array([[0.0, 0.0]]), 1.0, (-1, 1, -1, 1))


def test_single_node_system():
    sys_ = assemble(Model(5.0, 0.0, Potential()), single_node())
    assert np.allclose(sys_.c_matrix, [[0, 3 * math.pi], [3 * math.pi, 0]], rtol=1e-15, atol=0)
    assert np.allclose(sys_.d_matrix, np.eye(2) * math.pi / 2, rtol=1e-15, atol=0)


def test_free_blocks(small_basis):
    s = assemble(Model(5.0, 0.0, Potential()), small_basis)
    assert np.array_equal(s.block(0, 0), -s.block(1, 1))
    assert np.array_equal(s.block(0, 1), s.block(1, 0))
    assert np.all(s.block(0, 1).imag == 0)
    assert np.array_equal(s.block(0, 1), s.block(0, 1).T)


def test_hermitian_and_block_structure(small_basis):
    p = Potential(v11=DiskIndicator(2.0, 0.2), v22=GaussianDecay(1.0, -0.9),
                  v12=DiskIndicator(2.0, -1.0 + 0.4j, (0.5, 0.0)))
    s = assemble(Model(5.0, 2.5, p), small_basis)
    assert s.hermiticity_defect() <= HERMITICITY_RTOL
    assert np.array_equal(s.block(1, 0), s.block(0, 1).conj().T)
    n = small_basis.size
    assert np.array_equal(s.d_matrix[:n, :n], s.d_matrix[n:, n:])
    assert not s.d_matrix[:n, n:].any() and not s.d_matrix[n:, :n].any()
    w = np.linalg.eigvalsh(s.d_matrix)
    assert w.min() >= -1e-12 * np.abs(s.d_matrix).max()


def test_chiral_symmetry(small_basis):
    p = Potential(v12=DiskIndicator(2.0, -1.0))
    c = assemble(Model(5.0, 2.5, p), small_basis).c_matrix
    n = small_basis.size
    sigma = np.diag(np.r_[np.ones(n), -np.ones(n)])
    assert np.allclose((sigma @ c @ sigma).conj(), -c, rtol=0, atol=1e-14 * np.abs(c).max())


def test_linearity_in_epsilon(small_basis):
    p = Potential(v11=DiskIndicator(2.0, 0.2), v12=DiskIndicator(2.0, -1.0))
    parts = assemble_parts(Model(5.0, 0.0, p), small_basis)
    c0 = assemble(Model(5.0, 0.0, p), small_basis).c_matrix
    for eps in (0.0, 1.0, 2.5):
        direct = assemble(Model(5.0, eps, p), small_basis).c_matrix
        assert np.allclose(direct, c0 + eps * parts.potential, rtol=0, atol=1e-13)
        assert np.array_equal(parts.at(Model(5.0, eps, p)).c_matrix, direct)


def test_parts_reject_other_delta(small_basis):
    parts = assemble_parts(Model(5.0, 0.0, Potential()), small_basis)
    with pytest.raises(ValueError):
        parts.at(Model(4.0, 1.0, Potential()))


def test_non_hermitian_is_rejected(small_basis):
    parts = assemble_parts(Model(5.0, 0.0, Potential()), small_basis)
    bad = parts.free.copy()
    bad[0, 1] += 1.0
    broken = SystemParts(bad, parts.potential, parts.gram, parts.basis, parts.delta)
    with pytest.raises(AssemblyError):
        broken.at(Model(5.0, 0.0, Potential()))


def test_spectral_mapping():
    b = make_basis((-2, 2, -2, 2), 6, "halton", shape=0.8)
    p = Potential(v12=DiskIndicator(1.0, -1.0), v11=DiskIndicator(1.5, 0.3))
    s = assemble(Model(2.0, 1.5, p), b)
    c, d = s.c_matrix, s.d_matrix
    e = la.eigh(c, d, eigvals_only=True)
    sq = la.eigh(c @ np.linalg.solve(d, c), d, eigvals_only=True)
    assert np.allclose(np.sort(e ** 2), np.sort(sq), rtol=1e-8, atol=0)


def test_matrix_dump_round_trip(tmp_path, small_basis):
    p = Potential(v12=DiskIndicator(2.0, -1.0 + 0.3j))
    c = assemble(Model(5.0, 1.0, p), small_basis).c_matrix
    path = tmp_path / "c.txt"
    dump_matrix(c, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"# shape {c.shape[0]} {c.shape[1]}"
    assert len(lines) == c.size + 1
    assert np.array_equal(load_matrix(path), c)
