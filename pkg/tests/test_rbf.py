import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from oracles import dy_oracle, gram_oracle, kinetic_oracle
from semidirac.model import DiskIndicator, FieldSum, GaussianDecay
from semidirac.rbf import (RbfBasis, dy_matrix, dy_moment, evaluate_basis, fill_distance,
                           generate_nodes, gram, gram_matrix, kinetic_matrix, kinetic_x,
                           make_basis, potential_matrix, potential_moment)


def pair_basis(ri, rj, s=1.0):
    return RbfBasis(np.array([ri, rj], dtype=float), s, (-10, 10, -10, 10))


def test_generate_examples():
    assert np.array_equal(generate_nodes((-1, 1, -1, 1), 1, "grid"), [[0.0, 0.0]])
    h = generate_nodes((0, 1, 0, 1), 2, "halton")
    assert np.allclose(h, [[0.5, 1 / 3], [0.25, 2 / 3]], atol=1e-15)


@pytest.mark.parametrize("method", ["grid", "halton"])
@pytest.mark.parametrize("count", [1, 7, 50, 841])
def test_generate_properties(method, count):
    box = (-8, 8, -3, 5)
    a = generate_nodes(box, count, method)
    assert len(a) == count
    assert np.all((a[:, 0] >= -8) & (a[:, 0] <= 8) & (a[:, 1] >= -3) & (a[:, 1] <= 5))
    assert len(np.unique(a, axis=0)) == count
    assert np.array_equal(a, generate_nodes(box, count, method))


def test_generate_rejects_bad_input():
    with pytest.raises(ValueError):
        generate_nodes((0, 0, 0, 1), 4)
    with pytest.raises(ValueError):
        generate_nodes((0, 1, 0, 1), 0)
    with pytest.raises(ValueError):
        generate_nodes((0, 1, 0, 1), 4, "random")


def test_basis_invariants():
    with pytest.raises(ValueError):
        RbfBasis(np.array([[0, 0], [0, 0]]), 1.0, (-1, 1, -1, 1))
    with pytest.raises(ValueError):
        RbfBasis(np.array([[0, 0]]), 0.0, (-1, 1, -1, 1))


def test_fill_distance_of_lattice():
    # cell-centred 4 x 4 lattice on the unit square: worst point is a corner
    nodes = generate_nodes((0, 1, 0, 1), 16, "grid")
    assert fill_distance(nodes, (0, 1, 0, 1)) == pytest.approx(math.hypot(0.125, 0.125), rel=1e-12)


def test_default_basis_report():
    b = make_basis((-8, 8, -8, 8), 100)
    assert b.shape == pytest.approx(0.8 / b.fill)
    rep = b.report()
    assert rep["count"] == 100 and rep["method"] == "grid" and rep["box"] == [-8, 8, -8, 8]
    assert make_basis((-8, 8, -8, 8), 100, shape=1.3).shape == 1.3


def test_gram_examples():
    assert gram(pair_basis((0, 0), (1, 0)), 0, 0) == pytest.approx(math.pi / 2, rel=1e-15)
    val = gram(pair_basis((0, 0), (1, 0)), 0, 1)
    assert val == pytest.approx(math.pi / 2 * math.exp(-0.5), rel=1e-15)
    assert val == pytest.approx(0.952736, abs=1e-6)
    ref, _ = gram_oracle(1.0, (0, 0), (1, 0))
    assert val == pytest.approx(ref, rel=1e-12)


def test_gram_monotone_in_distance():
    vals = [gram(pair_basis((0, 0), (d, 0.0)), 0, 1) for d in np.linspace(0.1, 5, 40)]
    assert np.all(np.diff(vals) < 0)


def test_dy_examples():
    b = pair_basis((0, 0), (0, 1))
    ref, _ = dy_oracle(1.0, (0, 0), (0, 1))
    assert dy_moment(b, 0, 1) == pytest.approx(ref, rel=1e-12)
    # phi_j sits above phi_i, so d_y phi_j is positive on the overlap
    assert dy_moment(b, 0, 1) == pytest.approx(math.pi / 2 * math.exp(-0.5), rel=1e-15)
    assert dy_moment(b, 0, 0) == 0.0
    b = pair_basis((0, 0), (1, 0))
    ref, _ = dy_oracle(1.0, (0, 0), (1, 0))
    assert dy_moment(b, 0, 1) == 0.0 and abs(ref) < 1e-12


def test_kinetic_examples():
    b = pair_basis((0, 0), (1, 0))
    assert kinetic_x(b, 0, 0, 5.0) == pytest.approx(3 * math.pi, rel=1e-15)
    assert kinetic_x(b, 0, 1, 0.0) == 0.0
    ref, scale = kinetic_oracle(1.0, (0, 0), (1, 0), 0.0)
    assert abs(ref) < 1e-12 * scale


def test_kernel_oracle_random_pairs():
    """Closed forms against the quadrature oracle on 100 random pairs, s in [0.3, 3]."""
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(100):
        s = rng.uniform(0.3, 3.0)
        ri, rj = rng.uniform(-3, 3, (2, 2))
        delta = rng.uniform(0, 10)
        b = pair_basis(ri, rj, s)
        for closed, (ref, scale) in ((gram(b, 0, 1), gram_oracle(s, ri, rj)),
                                     (dy_moment(b, 0, 1), dy_oracle(s, ri, rj)),
                                     (kinetic_x(b, 0, 1, delta), kinetic_oracle(s, ri, rj, delta))):
            err = abs(closed - ref) / max(abs(ref), scale)
            worst = max(worst, err)
    assert worst <= 1e-10


def test_matrix_forms_match_entries():
    b = make_basis((-2, 2, -2, 2), 12, "halton")
    G, Dy, K = gram_matrix(b), dy_matrix(b), kinetic_matrix(b, 3.0)
    for i in range(b.size):
        for j in range(b.size):
            assert G[i, j] == pytest.approx(gram(b, i, j), rel=1e-14, abs=1e-300)
            assert Dy[i, j] == pytest.approx(dy_moment(b, i, j), rel=1e-13, abs=1e-300)
            assert K[i, j] == pytest.approx(kinetic_x(b, i, j, 3.0), rel=1e-13, abs=1e-14)
    assert np.array_equal(G, G.T)
    assert np.array_equal(Dy, -Dy.T)
    assert np.array_equal(K, K.T)


def test_gram_is_psd(default_basis):
    G = gram_matrix(default_basis)
    w = np.linalg.eigvalsh(G)
    assert w.min() >= -1e-12 * np.abs(G).max()


def test_potential_moment_examples():
    b = pair_basis((0, 0), (1, 0))
    disk = DiskIndicator(2.0)
    assert potential_moment(b, 0, 0, disk) == pytest.approx(math.pi / 2 * (1 - math.exp(-8)),
                                                            rel=1e-12)
    assert abs(potential_moment(b, 0, 1, DiskIndicator(1e-9))) < 1e-15
    assert potential_moment(b, 0, 1, DiskIndicator(50.0)) == pytest.approx(gram(b, 0, 1), rel=1e-10)


def _disk_oracle(s, ri, rj, radius, center=(0.0, 0.0)):
    cx, cy = center

    def f(y, x):
        return float(np.exp(-s * s * ((x - ri[0]) ** 2 + (y - ri[1]) ** 2
                                      + (x - rj[0]) ** 2 + (y - rj[1]) ** 2)))

    def lo(x):
        return cy - math.sqrt(max(radius ** 2 - (x - cx) ** 2, 0.0))

    def hi(x):
        return cy + math.sqrt(max(radius ** 2 - (x - cx) ** 2, 0.0))

    return sp_integrate.dblquad(f, cx - radius, cx + radius, lo, hi, epsabs=1e-14, epsrel=1e-12)[0]


@pytest.mark.parametrize("s,ri,rj", [(1.0, (1.5, 0.2), (2.2, -0.4)), (2.5, (1.9, 0.5), (1.8, 0.7)),
                                     (0.4, (0.0, 0.0), (1.0, 1.0)), (3.0, (-1.3, -1.5), (-1.4, -1.4)),
                                     (1.7, (0.3, 2.1), (-0.2, 1.8))])
def test_disk_moment_matches_dblquad(s, ri, rj):
    b = pair_basis(ri, rj, s)
    ref = _disk_oracle(s, ri, rj, 2.0)
    val = potential_moment(b, 0, 1, DiskIndicator(2.0, -1.0))
    scale = math.pi / (2 * s * s) * math.exp(-0.5 * s * s * np.sum((np.subtract(ri, rj)) ** 2))
    assert abs(val.real + ref) <= 1e-10 * max(ref, scale)
    assert val.imag == 0


def test_offcentre_disk_moment():
    s, ri, rj = 1.2, (2.4, 0.9), (2.0, 1.3)
    b = pair_basis(ri, rj, s)
    ref = _disk_oracle(s, ri, rj, 1.5, (1.0, 1.0))
    val = potential_moment(b, 0, 1, DiskIndicator(1.5, 0.5j, (1.0, 1.0)))
    assert abs(val - 0.5j * ref) <= 1e-11


def test_gaussian_field_moment():
    s, ri, rj = 0.9, (0.3, -0.2), (1.1, 0.4)
    fld = GaussianDecay(1.3, -0.7, (0.5, 0.5))
    b = pair_basis(ri, rj, s)
    rule_vals = []
    from semidirac.quadrature import integrate, tensor_rect
    for order in (80,):
        rule = tensor_rect((-9, 9, -9, 9), order)
        rule_vals.append(integrate(lambda x, y: evaluate_basis(b, x, y)[..., 0]
                                   * evaluate_basis(b, x, y)[..., 1] * fld(x, y), rule))
    assert potential_moment(b, 0, 1, fld) == pytest.approx(rule_vals[0], rel=1e-11)


def test_potential_matrix_symmetric_and_decomposition_invariant(small_basis):
    a, c = DiskIndicator(2.0, -1.0), GaussianDecay(1.0, 0.3)
    M1 = potential_matrix(small_basis, FieldSum((a, c)))
    M2 = potential_matrix(small_basis, FieldSum((c, FieldSum((a,)))))
    assert np.array_equal(M1, M1.T)
    assert np.allclose(M1, M2, rtol=0, atol=1e-14)
    assert np.allclose(M1, potential_matrix(small_basis, a) + potential_matrix(small_basis, c),
                       rtol=0, atol=1e-14)


def test_evaluate_basis_single_function():
    b = RbfBasis(np.array([[0.0, 0.0]]), 1.0, (-1, 1, -1, 1))
    x = np.array([0.0, 0.5, 1.0])
    assert np.allclose(evaluate_basis(b, x, x)[:, 0], np.exp(-2 * x * x), rtol=1e-15)
