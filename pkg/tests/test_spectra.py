import math

import numpy as np
import pytest

from crackspec import specfun
from crackspec.domain import build_cracked_disk, quarter_problems, reduce_to_sectors
from crackspec.discretize import assemble
from crackspec.spectra import (
    count_nodal_domains,
    detect_crossings,
    ndd_dnd_gap,
    nodal_domains,
    recombine_full_domain,
    sector_field,
    solve_full_spectrum,
    solve_sector,
    sweep,
    sweep_quarter,
)


def test_merged_disk_spectrum_small_grid():
    spec = build_cracked_disk(1, math.pi, 0.4356, 1.0)
    merged = solve_full_spectrum(spec, 48, 6)
    expected = [5.7832, 14.682, 14.682, 26.3746, 26.3746, 30.4713]
    for got, want in zip(merged.values, expected):
        assert got == pytest.approx(want, rel=0.01)
    mults = [m for _, m in merged.multiplicities(0.05)]
    assert mults[:4] == [1, 2, 2, 1]


def test_single_sector_geometry_is_trivial_merge():
    spec = build_cracked_disk(1, 0.8, 0.4356, 1.0)
    merged = solve_full_spectrum(spec, 24, 4)
    sol = solve_sector(reduce_to_sectors(spec)[0][0], 24, 4)
    assert np.allclose(merged.values, sol.values[:4], rtol=0, atol=1e-12)


def test_closed_interface_matches_disjoint_union():
    # eps = 0: merged spectrum = disk(r1) plus annulus, both at the snapped r1
    m = 60
    spec = build_cracked_disk(2, 0.0, 0.4356, 1.0)
    merged = solve_full_spectrum(spec, m, 6)
    r1s = merged.r1
    assert r1s == pytest.approx(round(0.4356 * m) / m)
    disk_vals = [e.value for e in specfun.disk_spectrum(r1s, 4).entries
                 for _ in range(e.multiplicity)]
    ann_vals = []
    for ell in range(0, 4):
        for v in specfun.annulus_spectrum(r1s, 1.0, ell, 2):
            ann_vals.extend([v] * (1 if ell == 0 else 2))
    expected = sorted(disk_vals + ann_vals)[:6]
    for got, want in zip(merged.values, expected):
        assert got == pytest.approx(want, rel=5e-3)


def test_antisymmetric_sector_splits_into_quarter_union():
    # the antiperiodic ell=1 sector of the two-crack disk carries exactly the
    # NDD and DND spectra together; grids share the rays at eps = pi/4
    eps = math.pi / 4
    spec = build_cracked_disk(2, eps, 0.4356, 1.0)
    sector = next(p for p, t in reduce_to_sectors(spec) if p.ell == 1)
    sector_vals = solve_sector(sector, 40, 4).values
    quarter_vals = []
    for case in ("NDD", "DND"):
        problem = next(p for p in quarter_problems(spec) if p.quarter_case == case)
        quarter_vals.extend(solve_sector(problem, 40, 2).values)
    for got, want in zip(sector_vals, sorted(quarter_vals)):
        assert got == pytest.approx(want, rel=5e-3)


def test_open_disk_through_three_sectors():
    # fully open n=3 geometry merges back into the plain disk spectrum
    spec = build_cracked_disk(3, math.pi / 3, 0.4356, 1.0)
    merged = solve_full_spectrum(spec, 36, 6)
    expected = [5.7832, 14.682, 14.682, 26.3746, 26.3746, 30.4713]
    for got, want in zip(merged.values, expected):
        assert got == pytest.approx(want, rel=0.01)


def test_open_disk_multiplicities_via_two_sectors():
    spec = build_cracked_disk(2, math.pi / 2, 0.4356, 1.0)
    merged = solve_full_spectrum(spec, 36, 6)
    mults = [m for _, m in merged.multiplicities(0.1)]
    assert mults[:4] == [1, 2, 2, 1]
    labels = merged.labels
    assert labels[0] == "ell=0" and labels[1] == "ell=1"


def test_coupled_sector_pairs_collapse():
    spec = build_cracked_disk(3, 0.4, 0.4356, 1.0)
    problem = next(p for p, t in reduce_to_sectors(spec) if p.ell == 1)
    sol = solve_sector(problem, 24, 3)
    assert len(sol.values) == 3
    assert (np.diff(sol.values) > 1e-6).all()  # distinct after collapsing


def test_sweep_single_point_consistency():
    spec = build_cracked_disk(2, 0.0, 0.4356, 1.0)
    curve = sweep(spec, [0.5], 24, 3)
    merged = solve_full_spectrum(
        build_cracked_disk(2, float(curve.epsilons[0]), 0.4356, 1.0), 24, 3)
    stacked = []
    for tag in curve.sectors:
        stacked.extend(curve.values[tag.label][0])
    assert min(stacked) == pytest.approx(merged.values[0], rel=1e-12)


def test_sweep_monotone_and_snapped():
    spec = build_cracked_disk(3, 0.0, 0.4356, 1.0)
    eps = np.linspace(0.15, 0.95, 5)
    curve = sweep(spec, eps, 24, 2, jobs=2)
    dtheta = (2 * math.pi / 3) / 24
    assert np.allclose(np.mod(curve.epsilons / dtheta, 1.0), 0.0, atol=1e-9)
    for label, arr in curve.values.items():
        assert (np.diff(arr, axis=0) <= 1e-7).all(), label


def test_sweep_validation():
    spec = build_cracked_disk(3, 0.0, 0.4356, 1.0)
    with pytest.raises(ValueError):
        sweep(spec, [], 24, 2)
    with pytest.raises(ValueError):
        sweep(spec, [0.5, 0.3], 24, 2)


def test_sweep_lipschitz_sanity_bound():
    spec = build_cracked_disk(3, 0.0, 0.4356, 1.0)
    eps = [0.2, 0.6, 1.0]
    curve = sweep(spec, eps, 24, 2, lipschitz_bound=1e3)  # generous: passes
    assert curve.max_slope > 0
    with pytest.raises(ValueError):
        sweep(spec, eps, 24, 2, lipschitz_bound=1e-3)


def test_detect_crossings_n3_coarse():
    spec = build_cracked_disk(3, 0.0, 0.4356, 1.0)
    eps = np.linspace(0.05, math.pi / 3 - 0.02, 14)
    curve = sweep(spec, eps, 48, 3, jobs=2)
    events = detect_crossings(curve, 3)
    assert events, "expected at least the rank-2 crossing"
    first = events[0]
    assert first.rank == 2
    assert first.total_multiplicity == 3
    assert {first.sector_a.label, first.sector_b.label} == {"ell=0", "ell=1"}
    assert first.epsilon_star == pytest.approx(0.29, abs=0.07)
    assert first.bracket_hi - first.bracket_lo <= (2 * math.pi / 3) / 48 + 1e-12
    second = [e for e in events if e.rank == 3]
    assert second and second[0].epsilon_star == pytest.approx(0.96, abs=0.1)


def test_detect_crossings_requires_two_points():
    spec = build_cracked_disk(3, 0.0, 0.4356, 1.0)
    curve = sweep(spec, [0.4], 24, 2)
    with pytest.raises(ValueError):
        detect_crossings(curve, 2)


# ---------------------------------------------------------------------------
# nodal domains
# ---------------------------------------------------------------------------

def test_nodal_count_ground_and_second_disk():
    spec = build_cracked_disk(1, math.pi, 0.4356, 1.0)
    sol = solve_sector(reduce_to_sectors(spec)[0][0], 48, 3)
    ground = count_nodal_domains(sol.operator, sol.spectrum.vectors[:, 0])
    assert ground.mu == 1
    second = count_nodal_domains(sol.operator, sol.spectrum.vectors[:, 1])
    assert second.mu == 2


def test_nodal_count_quarter_ground():
    spec = build_cracked_disk(2, 0.8, 0.4356, 1.0)
    problem = next(p for p in quarter_problems(spec) if p.quarter_case == "NND")
    sol = solve_sector(problem, 32, 1)
    assert count_nodal_domains(sol.operator, sol.spectrum.vectors[:, 0]).mu == 1


def test_nodal_count_annulus_analytic_mode():
    # analytic ell=2 annulus eigenfunction evaluated on the full polar grid
    r1, r2, m = 0.4356, 1.0, 40
    lam = specfun.annulus_spectrum(r1, r2, 2, 1)[0]
    k = math.sqrt(lam)
    rr = r2 / m * np.arange(1, m)
    radial = np.array([
        specfun.bessel_j(2, k * r) * specfun.bessel_y(2, k * r1)
        - specfun.bessel_y(2, k * r) * specfun.bessel_j(2, k * r1)
        if r > r1 else np.nan for r in rr])
    theta = 2 * math.pi / m * np.arange(m)
    field = radial[:, None] * np.cos(2 * theta)[None, :]
    assert nodal_domains(field, wrap=True).mu == 4


def test_nodal_domain_wrap_matters():
    # two sign sectors split by the theta cut merge once the seam wraps
    field = np.ones((3, 8))
    field[:, :4] = 1.0
    field[:, 4:] = 1.0
    assert nodal_domains(field, wrap=False).mu == 1
    field[:, 2:6] = -1.0
    assert nodal_domains(field, wrap=True).mu == 2
    assert nodal_domains(field, wrap=False).mu == 3


def test_nodal_degenerate_inputs():
    with pytest.raises(ValueError):
        nodal_domains(np.full((3, 3), np.nan), wrap=False)
    with pytest.raises(ValueError):
        nodal_domains(np.zeros((3, 3)), wrap=False)


def test_recombined_field_shape():
    spec = build_cracked_disk(3, 0.4, 0.4356, 1.0)
    problem = next(p for p, t in reduce_to_sectors(spec) if p.ell == 1)
    sol = solve_sector(problem, 16, 1)
    op = sol.operator
    full = recombine_full_domain(op, sol.spectrum.vectors[:, 0])
    assert full.shape == (15, 3 * len(op.cols))
    part = sector_field(op, sol.spectrum.vectors[:, 0])
    assert np.allclose(full[:, :len(op.cols)][np.isfinite(part)],
                       part[np.isfinite(part)])


def test_quarter_has_no_recombination():
    spec = build_cracked_disk(2, 0.8, 0.4356, 1.0)
    problem = quarter_problems(spec)[0]
    sol = solve_sector(problem, 16, 1)
    with pytest.raises(ValueError):
        recombine_full_domain(sol.operator, sol.spectrum.vectors[:, 0])


# ---------------------------------------------------------------------------
# NDD / DND gap
# ---------------------------------------------------------------------------

def test_ndd_dnd_gap_sign_and_endpoint():
    spec = build_cracked_disk(2, 0.0, 0.4356, 1.0)
    scan = ndd_dnd_gap(spec, [0.6, 1.0, 1.3, math.pi / 2], 45)
    assert (scan.gaps[:-1] < -1e-3).all()  # NDD strictly below DND inside
    assert abs(scan.gaps[-1]) < 1e-8       # isospectral mirror problems at pi/2
    assert scan.all_negative is bool((scan.gaps < 0).all())
    assert scan.epsilons[-1] == pytest.approx(math.pi / 2)


def test_ndd_dnd_gap_requires_n2():
    with pytest.raises(ValueError):
        ndd_dnd_gap(build_cracked_disk(3, 0.0, 0.4356, 1.0), [0.5], 24)


def test_sweep_quarter_cases():
    spec = build_cracked_disk(2, 0.0, 0.4356, 1.0)
    eps, by_case = sweep_quarter(spec, ("NND", "DDD"), [0.7, 1.2], 24, 2, jobs=2)
    assert set(by_case) == {"NND", "DDD"}
    assert by_case["NND"].shape == (2, 2)
    assert (by_case["DDD"][:, 0] > by_case["NND"][:, 0]).all()
