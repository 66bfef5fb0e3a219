import math

import numpy as np
import pytest

from crackspec import specfun
from crackspec.domain import build_cracked_disk, quarter_problems, reduce_to_sectors
from crackspec.discretize import apply, assemble, center_policy, dump_operator
from crackspec.eigensolve import lowest_eigenpairs


def _quarter(case, eps=math.pi / 2, m=10, r1=0.4356):
    spec = build_cracked_disk(2, eps, r1, 1.0)
    return assemble(next(p for p in quarter_problems(spec) if p.quarter_case == case), m)


def _floquet(n, ell, eps, m, r1=0.4356):
    spec = build_cracked_disk(n, eps, r1, 1.0)
    problem = next(p for p, t in reduce_to_sectors(spec) if p.ell == ell)
    return assemble(problem, m)


def test_grid_metadata_and_snapping():
    op = _quarter("DDD", m=10)
    g = op.grid
    assert g.dr == pytest.approx(0.1)
    assert g.dtheta == pytest.approx(math.pi / 20)
    assert g.r1_ring == 4 and g.r1 == pytest.approx(0.4)
    assert g.r1_snap_error == pytest.approx(0.0356)
    assert g.eps == pytest.approx(math.pi / 2)


def test_degenerate_snap_raises():
    spec = build_cracked_disk(2, 0.3, 0.01, 1.0)   # r1 snaps to ring 0
    with pytest.raises(ValueError):
        assemble(quarter_problems(spec)[0], 10)
    with pytest.raises(ValueError):
        assemble(quarter_problems(build_cracked_disk(2, 0.3, 0.999, 1.0))[0], 10)
    with pytest.raises(ValueError):
        assemble(quarter_problems(build_cracked_disk(2, 0.3, 0.4, 1.0))[0], 4)


def test_interior_stencil_coefficients():
    # read the stencil column off a unit vector: center coefficient
    # 2/dr^2 + 2/(r_i dtheta)^2, and at most 5 nonzeros away from seams
    op = _quarter("DDD", m=10)
    i, j = 6, 7  # interior unknown away from crack ring and boundaries
    row = np.nonzero((op.node_ring == i) & (op.node_col == j))[0][0]
    e = np.zeros(op.n)
    e[row] = 1.0
    col = apply(op, e)
    dr, dth = op.grid.dr, op.grid.dtheta
    ri = i * dr
    assert op.matrix[row, row] == pytest.approx(2 / dr**2 + 2 / (ri * dth) ** 2)
    assert np.count_nonzero(col) <= 7


def test_row_sparsity_bounds():
    per_row = np.diff(_quarter("NND", m=12).matrix.indptr)
    op = _quarter("NND", m=12)
    per_row = np.diff(op.matrix.indptr)
    regular = per_row[np.arange(op.n) != op.center_row]
    assert regular.max() <= 5
    coupled = _floquet(3, 1, 0.4, 12)
    assert np.diff(coupled.matrix.indptr).max() <= 7  # seam rows gain 2


def test_neumann_mirror_doubles_neighbor():
    op = _quarter("NND", m=10, eps=math.pi / 2)
    dr, dth = op.grid.dr, op.grid.dtheta
    i = 5
    axis = np.nonzero((op.node_ring == i) & (op.node_col == 0))[0][0]
    inner = np.nonzero((op.node_ring == i) & (op.node_col == 1))[0][0]
    cang = -1.0 / ((i * dr) ** 2 * dth**2)
    assert op.matrix[axis, inner] == pytest.approx(2 * cang)
    assert op.matrix[inner, axis] == pytest.approx(cang)


def test_apply_linearity_and_dense_reconstruction():
    op = _quarter("NDD", eps=0.9, m=10)
    assert np.all(apply(op, np.zeros(op.n)) == 0.0)
    dense = np.column_stack([apply(op, np.eye(op.n)[:, k]) for k in range(op.n)])
    rng = np.random.default_rng(3)
    v = rng.standard_normal(op.n)
    lhs = apply(op, v)
    assert np.linalg.norm(lhs - dense @ v) <= 1e-13 * np.linalg.norm(lhs)
    with pytest.raises(ValueError):
        apply(op, np.zeros(op.n + 1))


def test_crack_elimination_counts():
    # eps = 0 eliminates the whole snapped ring: m columns on one ring
    m = 16
    open_op = _floquet(2, 0, math.pi / 2, m)
    closed_op = _floquet(2, 0, 0.0, m)
    assert open_op.n - closed_op.n == m
    # half-open: crack arc [eps, pi - eps] on the sector, endpoints included
    eps = 4 * (math.pi / m)  # snaps exactly to 4 rays
    half = _floquet(2, 0, eps, m)
    assert open_op.n - half.n == m - 8 + 1


def test_crack_tie_goes_to_dirichlet():
    # a node exactly at the arc endpoint is eliminated
    m = 16
    op = _floquet(2, 0, 4 * (math.pi / m), m)
    ring = op.grid.r1_ring
    cols_on_ring = sorted(op.node_col[op.node_ring == ring])
    assert 4 not in cols_on_ring and 3 in cols_on_ring
    assert (m - 4) not in cols_on_ring and (m - 3) in cols_on_ring


def test_center_policy_table():
    spec = build_cracked_disk(2, 0.7, 0.4356, 1.0)
    policies = {p.quarter_case: center_policy(p) for p in quarter_problems(spec)}
    assert policies == {"NND": "regularity_stencil", "DDD": "dirichlet_at_center",
                        "NDD": "dirichlet_at_center", "DND": "dirichlet_at_center"}
    spec3 = build_cracked_disk(3, 0.3, 0.4356, 1.0)
    probs = dict((p.ell, p) for p, _ in reduce_to_sectors(spec3))
    assert center_policy(probs[0]) == "regularity_stencil"
    assert center_policy(probs[1]) == "dirichlet_at_center"


def test_center_row_structure():
    op = _quarter("NND", m=10)
    assert op.center_row is not None
    assert op.node_ring[op.center_row] == 0
    op2 = _quarter("DDD", m=10)
    assert op2.center_row is None


def test_disk_ground_state_small_grid():
    # full disk through the trivial n=1 sector; 1% window at m=60
    op = _floquet(1, 0, math.pi, 60)
    lam = lowest_eigenpairs(op, 1, method="sparse").eigenvalues[0]
    exact = specfun.bessel_zero(0, 1).value ** 2
    assert abs(lam - exact) / exact < 0.01


def test_quarter_nnd_endpoint_small_grid():
    op = _quarter("NND", m=45)
    lam = lowest_eigenpairs(op, 3, method="sparse").eigenvalues
    exact = [5.7832, 26.3746, 30.4713]
    for a, b in zip(lam, exact):
        assert abs(a - b) / b < 0.01


def test_grid_convergence_second_order():
    exact = specfun.bessel_zero(0, 1).value ** 2
    errs = []
    for m in (16, 32, 64):
        op = _floquet(1, 0, math.pi, m)
        lam = lowest_eigenpairs(op, 1, method="auto" if op.n <= 600 else "sparse")
        errs.append(abs(lam.eigenvalues[0] - exact))
    assert 3.0 < errs[0] / errs[1] < 5.0
    assert 3.0 < errs[1] / errs[2] < 5.0


def test_gershgorin_positivity():
    for op in (_quarter("DND", eps=0.8, m=12), _floquet(3, 1, 0.5, 12),
               _floquet(2, 1, 0.3, 12)):
        lam = lowest_eigenpairs(op, 4, method="dense").eigenvalues
        assert (lam > 0).all()


def test_floquet_open_sector_matches_disk_harmonics():
    # fully open n=3, ell=1 sector carries the m = 1, 2, 4, ... disk modes
    op = _floquet(3, 1, math.pi / 3, 48)
    lam = lowest_eigenpairs(op, 4, method="sparse").eigenvalues
    j11 = specfun.bessel_zero(1, 1).value ** 2
    j21 = specfun.bessel_zero(2, 1).value ** 2
    assert lam[0] == pytest.approx(j11, rel=5e-3)
    assert lam[1] == pytest.approx(j11, rel=5e-3)  # realified pair
    assert lam[2] == pytest.approx(j21, rel=5e-3)
    assert lam[3] == pytest.approx(j21, rel=5e-3)


def test_antiperiodic_sector_matches_odd_harmonics():
    op = _floquet(2, 1, math.pi / 2, 48)
    lam = lowest_eigenpairs(op, 2, method="sparse").eigenvalues
    j11 = specfun.bessel_zero(1, 1).value ** 2
    assert lam[0] == pytest.approx(j11, rel=5e-3)
    assert lam[1] == pytest.approx(j11, rel=5e-3)  # cos and sin partners


def test_monotone_in_epsilon():
    vals = []
    for eps in (0.2, 0.5, 0.9):
        op = _floquet(3, 0, eps, 20)
        vals.append(lowest_eigenpairs(op, 2, method="dense").eigenvalues)
    for a, b in zip(vals, vals[1:]):
        assert (b <= a + 1e-9).all()


def test_dump_operator(tmp_path):
    op = _quarter("DDD", m=10)
    path = tmp_path / "op.txt"
    dump_operator(op, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == f"% crackspec operator n={op.n}"
    i, j, v = lines[1].split()
    assert int(i) >= 1 and int(j) >= 1
    assert len(lines) - 1 == op.matrix.nnz
