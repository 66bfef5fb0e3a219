"""Sector orchestration: merged spectra, epsilon sweeps, crossing detection,
nodal-domain counting and the NDD/DND gap scan.

Coupled Floquet sectors (weight 2) return every eigenvalue twice from the
realified operator; `solve_sector` collapses those exact pairs so each
distinct sector eigenvalue is reported once and carries its weight.  Crossing
locations are refined by bisection on re-solves over the angular grid of
rays (epsilon only takes snapped values, so the bracket bottoms out at one
grid step; the event stores the final bracket).

The `rank` of a crossing labels the eigenvalue by counting distinct
eigenvalue levels of the merged spectrum strictly below the crossing, at the
sweep point just below it, plus one.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domain import CrackedDiskSpec, SectorProblem, SectorTag, quarter_problems, reduce_to_sectors
from .discretize import AssembledOperator, assemble
from .eigensolve import Spectrum, lowest_eigenpairs

__all__ = [
    "SectorSolve",
    "MergedLevel",
    "MergedSpectrum",
    "EigenvalueCurve",
    "CrossingEvent",
    "NodalCount",
    "GapScan",
    "solve_sector",
    "solve_full_spectrum",
    "sweep",
    "sweep_quarter",
    "detect_crossings",
    "nodal_domains",
    "sector_field",
    "recombine_full_domain",
    "count_nodal_domains",
    "ndd_dnd_gap",
]

_PAIR_RTOL = 5e-6  # relative gap under which coupled-sector values are twins


@dataclass
class SectorSolve:
    """Distinct eigenvalues of one sector (pairs of the realified coupled
    problem already collapsed), with the operator kept for nodal analysis."""

    tag: SectorTag
    problem: SectorProblem
    values: np.ndarray
    residuals: np.ndarray
    spectrum: Spectrum
    operator: AssembledOperator


def _collapse_pairs(lam: np.ndarray, res: np.ndarray, want: int):
    """Collapse the exact twin pairs of a realified coupled sector."""
    values, residuals = [], []
    i = 0
    while i < len(lam):
        if i + 1 < len(lam) and lam[i + 1] - lam[i] <= _PAIR_RTOL * max(1.0, abs(lam[i])):
            values.append(0.5 * (lam[i] + lam[i + 1]))
            residuals.append(max(res[i], res[i + 1]))
            i += 2
        else:
            values.append(lam[i])
            residuals.append(res[i])
            i += 1
    return np.array(values[:want]), np.array(residuals[:want])


def solve_sector(problem: SectorProblem, m: int, k: int, tol: float = 1e-8,
                 method: str = "auto") -> SectorSolve:
    """Solve one sector for its k lowest distinct eigenvalues."""
    op = assemble(problem, m)
    raw = 2 * k + 2 if op.copies == 2 else k
    raw = min(raw, max(1, op.n // 4))
    spec = lowest_eigenpairs(op, raw, tol=tol, method=method)
    if op.copies == 2:
        values, residuals = _collapse_pairs(spec.eigenvalues, spec.residuals, k)
    else:
        values, residuals = spec.eigenvalues[:k], spec.residuals[:k]
    return SectorSolve(tag=op.sector, problem=problem, values=values,
                       residuals=residuals, spectrum=spec, operator=op)


@dataclass
class MergedLevel:
    value: float
    label: str
    weight: int
    residual: float


@dataclass
class MergedSpectrum:
    """Weighted multiset union of the sector spectra, ascending."""

    values: np.ndarray          # weight-expanded, truncated to k
    labels: list[str]
    levels: list[MergedLevel]   # distinct levels, ascending, not truncated
    eps: float
    r1: float
    m: int
    k: int

    def multiplicities(self, cluster_tol: float) -> list[tuple[float, int]]:
        """Cluster the weighted values and report (value, multiplicity)."""
        from .eigensolve import group_multiplicities
        return group_multiplicities(
            [lv.value for lv in self.levels], cluster_tol,
            weights=[lv.weight for lv in self.levels])


def solve_full_spectrum(spec: CrackedDiskSpec, m: int, k: int,
                        tol: float = 1e-8, method: str = "auto") -> MergedSpectrum:
    """Solve all Floquet sectors and merge the weighted union, sorted."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    levels: list[MergedLevel] = []
    eps_s = r1_s = None
    for problem, tag in reduce_to_sectors(spec):
        sol = solve_sector(problem, m, k, tol=tol, method=method)
        eps_s, r1_s = sol.operator.grid.eps, sol.operator.grid.r1
        for v, r in zip(sol.values, sol.residuals):
            levels.append(MergedLevel(value=float(v), label=tag.label,
                                      weight=tag.weight, residual=float(r)))
    levels.sort(key=lambda lv: lv.value)
    values, labels = [], []
    for lv in levels:
        values.extend([lv.value] * lv.weight)
        labels.extend([lv.label] * lv.weight)
    return MergedSpectrum(values=np.array(values[:k]), labels=labels[:k],
                          levels=levels, eps=eps_s, r1=r1_s, m=m, k=k)


@dataclass
class EigenvalueCurve:
    """Per-sector eigenvalue curves over an ascending epsilon grid."""

    geometry: CrackedDiskSpec
    m: int
    k: int
    epsilons: np.ndarray                 # snapped, unique, ascending
    requested: np.ndarray
    sectors: list[SectorTag]
    values: dict[str, np.ndarray]        # label -> (n_eps, k) distinct values
    residual_max: float

    @property
    def max_slope(self) -> float:
        """Largest |d lambda / d eps| between adjacent sweep points."""
        worst = 0.0
        de = np.diff(self.epsilons)
        if len(de) == 0:
            return 0.0
        for arr in self.values.values():
            dl = np.abs(np.diff(arr, axis=0))
            with np.errstate(invalid="ignore"):
                slopes = dl / de[:, None]
            if np.isfinite(slopes).any():
                worst = max(worst, float(np.nanmax(slopes)))
        return worst


def _snap_epsilons(spec: CrackedDiskSpec, epsilon_list, m: int) -> np.ndarray:
    dtheta = (2 * math.pi / spec.n) / m
    snapped = np.array([round(e / dtheta) * dtheta for e in epsilon_list])
    return snapped


def sweep(spec: CrackedDiskSpec, epsilon_list, m: int, k: int,
          tol: float = 1e-8, jobs: int | None = None,
          method: str = "auto",
          lipschitz_bound: float | None = None) -> EigenvalueCurve:
    """Per-sector eigenvalue curves of the cracked disk over an epsilon grid.

    Requested epsilons snap to the angular grid of rays; duplicates after
    snapping are solved once.  Sweep points run on a bounded thread pool.
    `lipschitz_bound` (per unit epsilon) is a continuity sanity check: a
    larger jump between adjacent points raises, flagging an under-resolved
    grid or a mistracked curve.
    """
    requested = np.asarray(list(epsilon_list), dtype=float)
    if len(requested) < 1:
        raise ValueError("epsilon_list must not be empty")
    if (np.diff(requested) < 0).any():
        raise ValueError("epsilon_list must be ascending")
    snapped = _snap_epsilons(spec, requested, m)
    eps_grid = np.unique(snapped)
    sectors = [tag for _, tag in reduce_to_sectors(spec)]
    tasks = []
    for ie, eps in enumerate(eps_grid):
        geo = dataclasses.replace(spec, epsilon=float(eps))
        for problem, tag in reduce_to_sectors(geo):
            tasks.append((ie, tag.label, problem))
    results: dict[tuple[int, str], SectorSolve] = {}
    workers = jobs or min(4, os.cpu_count() or 1)
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(solve_sector, p, m, k, tol, method): (ie, lb)
                    for ie, lb, p in tasks}
            for fut, key in futs.items():
                results[key] = fut.result()
    else:
        for ie, lb, p in tasks:
            results[(ie, lb)] = solve_sector(p, m, k, tol, method)
    values = {tag.label: np.full((len(eps_grid), k), np.nan) for tag in sectors}
    resmax = 0.0
    for (ie, lb), sol in results.items():
        nv = min(k, len(sol.values))
        values[lb][ie, :nv] = sol.values[:nv]
        if len(sol.residuals):
            resmax = max(resmax, float(np.max(sol.residuals)))
    curve = EigenvalueCurve(geometry=spec, m=m, k=k, epsilons=eps_grid,
                            requested=requested, sectors=sectors, values=values,
                            residual_max=resmax)
    if lipschitz_bound is not None and curve.max_slope > lipschitz_bound:
        raise ValueError(
            f"adjacent-point slope {curve.max_slope:.3g} exceeds the "
            f"continuity bound {lipschitz_bound:.3g}; refine the epsilon grid")
    return curve


def sweep_quarter(spec: CrackedDiskSpec, cases, epsilon_list, m: int, k: int,
                  tol: float = 1e-8, jobs: int | None = None,
                  method: str = "auto"):
    """Quarter-disk eigenvalue curves (n = 2): dict case -> (n_eps, k) plus
    the snapped epsilon grid."""
    requested = np.asarray(list(epsilon_list), dtype=float)
    dtheta = (math.pi / 2) / m
    eps_grid = np.unique(np.array([round(e / dtheta) * dtheta for e in requested]))
    by_case = {c: np.full((len(eps_grid), k), np.nan) for c in cases}
    tasks = []
    for ie, eps in enumerate(eps_grid):
        geo = dataclasses.replace(spec, epsilon=float(eps))
        for p in quarter_problems(geo):
            if p.quarter_case in cases:
                tasks.append((ie, p))
    workers = jobs or min(4, os.cpu_count() or 1)
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(solve_sector, p, m, k, tol, method): (ie, p.quarter_case)
                    for ie, p in tasks}
            for fut, (ie, case) in futs.items():
                sol = fut.result()
                by_case[case][ie, :len(sol.values)] = sol.values[:k]
    else:
        for ie, p in tasks:
            sol = solve_sector(p, m, k, tol, method)
            by_case[p.quarter_case][ie, :len(sol.values)] = sol.values[:k]
    return eps_grid, by_case


@dataclass
class CrossingEvent:
    """A sign change between eigenvalue curves of two different sectors."""

    epsilon_star: float
    bracket_lo: float
    bracket_hi: float
    sector_a: SectorTag
    sector_b: SectorTag
    index_a: int
    index_b: int
    lambda_star: float
    total_multiplicity: int
    rank: int


def _rank_below(curve: EigenvalueCurve, ie: int, pair_min: float,
                cluster_tol: float) -> int:
    """Distinct merged levels strictly below the crossing at grid point ie."""
    vals = []
    for label in curve.values:
        row = curve.values[label][ie]
        vals.extend([v for v in row if np.isfinite(v)])
    vals = np.sort(np.array(vals))
    below = vals[vals < pair_min - cluster_tol]
    if len(below) == 0:
        return 1
    levels = 1
    for a, b in zip(below[:-1], below[1:]):
        if b - a > cluster_tol:
            levels += 1
    return levels + 1


def detect_crossings(curve: EigenvalueCurve, rank_of_interest: int,
                     tol: float = 1e-8, refine: bool = True,
                     method: str = "auto") -> list[CrossingEvent]:
    """Locate crossings between curves of different sectors, bisect them down
    to one angular grid step, and annotate rank and total multiplicity.

    Events with rank above `rank_of_interest` are dropped.  Curves of the
    same sector never cross transversally and are not compared.
    """
    if len(curve.epsilons) < 2:
        raise ValueError("need at least two sweep points to detect crossings")
    spec = curve.geometry
    m = curve.m
    labels = [t.label for t in curve.sectors]
    events: list[CrossingEvent] = []
    for ia_lab in range(len(labels)):
        for ib_lab in range(ia_lab + 1, len(labels)):
            la, lb = labels[ia_lab], labels[ib_lab]
            va, vb = curve.values[la], curve.values[lb]
            for ca in range(va.shape[1]):
                for cb in range(vb.shape[1]):
                    d = va[:, ca] - vb[:, cb]
                    ok = np.isfinite(d)
                    for t in range(len(d) - 1):
                        if not (ok[t] and ok[t + 1]):
                            continue
                        if d[t] == 0.0 or d[t] * d[t + 1] >= 0.0:
                            continue
                        ev = _refine_crossing(
                            spec, m, curve, la, lb, ca, cb,
                            curve.epsilons[t], curve.epsilons[t + 1],
                            d[t], tol, refine, method)
                        if ev.rank <= rank_of_interest:
                            events.append(ev)
    events.sort(key=lambda e: e.epsilon_star)
    return events


def _refine_crossing(spec, m, curve, la, lb, ca, cb, e_lo, e_hi, d_lo_sign,
                     tol, refine, method) -> CrossingEvent:
    tags = {t.label: t for t in curve.sectors}
    dtheta = (2 * math.pi / spec.n) / m

    def curve_gap(eps: float) -> tuple[float, float, float]:
        geo = dataclasses.replace(spec, epsilon=float(eps))
        byl = {}
        for problem, tag in reduce_to_sectors(geo):
            if tag.label in (la, lb):
                sol = solve_sector(problem, m, max(ca, cb) + 1, tol, method)
                byl[tag.label] = sol.values
        return byl[la][ca], byl[lb][cb], byl[la][ca] - byl[lb][cb]

    lo_idx = int(round(e_lo / dtheta))
    hi_idx = int(round(e_hi / dtheta))
    sign_lo = d_lo_sign > 0
    if refine:
        while hi_idx - lo_idx > 1:
            mid_idx = (lo_idx + hi_idx) // 2
            _, _, gap = curve_gap(mid_idx * dtheta)
            if (gap > 0) == sign_lo:
                lo_idx = mid_idx
            else:
                hi_idx = mid_idx
    e_lo_f, e_hi_f = lo_idx * dtheta, hi_idx * dtheta
    va, vb, _ = curve_gap(e_lo_f)
    lam_star = 0.5 * (va + vb)
    ie_below = int(np.searchsorted(curve.epsilons, e_lo_f, side="right") - 1)
    ie_below = max(ie_below, 0)
    cluster_tol = max(1e-3, 1e-3 * abs(lam_star))
    rank = _rank_below(curve, ie_below, min(va, vb), cluster_tol)
    return CrossingEvent(
        epsilon_star=0.5 * (e_lo_f + e_hi_f), bracket_lo=e_lo_f, bracket_hi=e_hi_f,
        sector_a=tags[la], sector_b=tags[lb], index_a=ca, index_b=cb,
        lambda_star=float(lam_star),
        total_multiplicity=tags[la].weight + tags[lb].weight, rank=rank)


# ---------------------------------------------------------------------------
# nodal domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NodalCount:
    mu: int
    zero_tol: float


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.count = size

    def find(self, a: int) -> int:
        p = a
        while p != self.parent[p]:
            p = self.parent[p]
        while a != p:  # path compression
            self.parent[a], a = p, self.parent[a]
        return p

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.count -= 1


def nodal_domains(field: np.ndarray, wrap: bool, zero_tol: float = 1e-6) -> NodalCount:
    """Count sign domains of a grid eigenfunction.

    `field` is a 2-D array over (ring, column); NaN marks nodes outside the
    domain (Dirichlet / eliminated).  Nodes with |u| <= zero_tol * max|u| act
    as separators.  Adjacency is 4-neighbor, restricted to equal signs;
    columns wrap when `wrap` is true.
    """
    field = np.asarray(field, dtype=float)
    finite = np.isfinite(field)
    if not finite.any():
        raise ValueError("field has no domain nodes")
    peak = np.nanmax(np.abs(field))
    if peak == 0.0:
        raise ValueError("field vanishes everywhere: degenerate vector")
    thr = zero_tol * peak
    act = finite & (np.abs(field) > thr)
    if not act.any():
        raise ValueError("all nodes below the zero threshold: degenerate vector")
    nr, nc = field.shape
    ids = -np.ones((nr, nc), dtype=np.int64)
    ids[act] = np.arange(int(act.sum()))
    uf = _UnionFind(int(act.sum()))
    sgn = np.sign(field)

    def link(ai, aj, bi, bj):
        if act[ai, aj] and act[bi, bj] and sgn[ai, aj] == sgn[bi, bj]:
            uf.union(int(ids[ai, aj]), int(ids[bi, bj]))

    for i in range(nr):
        for j in range(nc):
            if not act[i, j]:
                continue
            if i + 1 < nr:
                link(i, j, i + 1, j)
            if j + 1 < nc:
                link(i, j, i, j + 1)
            elif wrap:
                link(i, j, i, 0)
    roots = {uf.find(int(ids[i, j])) for i in range(nr) for j in range(nc) if act[i, j]}
    return NodalCount(mu=len(roots), zero_tol=zero_tol)


def sector_field(op: AssembledOperator, vector: np.ndarray,
                 copy: int = 0) -> np.ndarray:
    """Map a solution vector onto the (ring, column) grid of one copy;
    eliminated nodes are NaN, the center unknown is dropped."""
    m = op.grid.m
    n_cols = len(op.cols)
    out = np.full((m - 1, n_cols), np.nan)
    col_pos = {int(c): t for t, c in enumerate(op.cols)}
    sel = (op.node_copy == copy) & (op.node_ring > 0)
    for row in np.nonzero(sel)[0]:
        out[op.node_ring[row] - 1, col_pos[int(op.node_col[row])]] = vector[row]
    return out


def recombine_full_domain(op: AssembledOperator, vector: np.ndarray) -> np.ndarray:
    """Extend a Floquet sector eigenvector to the full circle.

    Copy c of the sector carries cos(c*alpha) u - sin(c*alpha) v for coupled
    sectors (w = u + iv, continuation w(theta+extent) = e^{i alpha} w(theta)),
    and sigma^c u for the scalar sectors (sigma = +1 / -1)."""
    if op.wrap is False:
        raise ValueError("recombination is defined for Floquet sectors only")
    spec = op.problem.geometry
    n = spec.n
    u = sector_field(op, vector, copy=0)
    if op.copies == 2:
        v = sector_field(op, vector, copy=1)
        alpha = 2 * math.pi * op.problem.ell / n
        parts = [math.cos(c * alpha) * u - math.sin(c * alpha) * v for c in range(n)]
    else:
        sigma = 1.0 if op.problem.ell == 0 else -1.0
        parts = [(sigma ** c) * u for c in range(n)]
    return np.concatenate(parts, axis=1)


def count_nodal_domains(op: AssembledOperator, vector: np.ndarray,
                        zero_tol: float = 1e-6) -> NodalCount:
    """Nodal domains of one eigenvector on its natural domain (fully
    recombined circle for Floquet sectors, the quarter itself otherwise)."""
    if op.wrap:
        field = recombine_full_domain(op, vector)
        return nodal_domains(field, wrap=True, zero_tol=zero_tol)
    return nodal_domains(sector_field(op, vector), wrap=False, zero_tol=zero_tol)


@dataclass
class GapScan:
    """lambda_1^NDD - lambda_1^DND over an epsilon grid."""

    epsilons: np.ndarray
    lam_ndd: np.ndarray
    lam_dnd: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return self.lam_ndd - self.lam_dnd

    @property
    def all_negative(self) -> bool:
        return bool((self.gaps < 0).all())


def ndd_dnd_gap(spec: CrackedDiskSpec, epsilon_list, m: int,
                tol: float = 1e-8, jobs: int | None = None,
                method: str = "auto") -> GapScan:
    """Scan the NDD/DND ground-energy gap over epsilon (n = 2 geometry)."""
    if spec.n != 2:
        raise ValueError("the NDD/DND gap is defined for n = 2")
    eps_grid, by_case = sweep_quarter(spec, ("NDD", "DND"), epsilon_list, m, 1,
                                      tol=tol, jobs=jobs, method=method)
    return GapScan(epsilons=eps_grid, lam_ndd=by_case["NDD"][:, 0],
                   lam_dnd=by_case["DND"][:, 0])
