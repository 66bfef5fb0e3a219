"""Lowest eigenpairs of an assembled operator, with residual certificates.

The discrete operator is real nonsymmetric but similar to a symmetric matrix
through diag(sqrt(w)) with the node weights carried by the operator.  The
sparse path therefore runs shift-invert Lanczos (ARPACK through
`scipy.sparse.linalg.eigsh`, shift 0, sparse LU inside) on the symmetrized
matrix and maps the eigenvectors back; if the symmetrization residual is ever
out of tolerance it falls back to nonsymmetric shift-invert Arnoldi (`eigs`).
Small problems use the dense QR path (LAPACK *geev*), which also serves as
the independent oracle in the tests.

Every reported pair carries the certificate  ||A v - lambda v|| / ||v||
computed on the original nonsymmetric matrix, and eigenvalues are accepted
only if their imaginary part is negligible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretize import AssembledOperator

__all__ = ["SolverError", "Spectrum", "lowest_eigenpairs", "group_multiplicities"]

DENSE_CUTOFF = 600          # n at or below which the dense path is the default
_IMAG_TOL = 1e-8            # |Im lambda| <= tol * max(1, |lambda|)
_ASYM_TOL = 1e-9            # relative symmetrization residual
_SEED = 20230921            # deterministic ARPACK start vector
_MAX_RESTARTS = 50


class SolverError(RuntimeError):
    """Eigensolver failure; carries the best residuals seen, if any."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class Spectrum:
    """Certified lowest eigenvalues of one sector operator."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    sector: object
    eps: float
    r1: float
    vectors: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _certify(matrix: sp.csr_matrix, lam: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vecs, axis=0)
    res = np.linalg.norm(matrix @ vecs - vecs * lam[np.newaxis, :], axis=0)
    return res / norms


def _accept_real(lam: np.ndarray, where: str) -> np.ndarray:
    bad = np.abs(lam.imag) > _IMAG_TOL * np.maximum(1.0, np.abs(lam))
    if bad.any():
        worst = np.abs(lam.imag)[bad].max()
        raise SolverError(
            f"{where}: complex eigenvalue pair beyond tolerance "
            f"(max |Im| = {worst:.3e}); this signals an assembly bug")
    return lam.real


def _dense_path(op: AssembledOperator, k: int):
    lam, vecs = sla.eig(op.matrix.toarray())
    lam = _accept_real(lam, "dense path")
    order = np.argsort(lam)[:k]
    return lam[order], np.real(vecs[:, order])


def _sparse_path(op: AssembledOperator, k: int):
    d = np.sqrt(op.row_weights)
    dinv = 1.0 / d
    s = sp.diags(d) @ op.matrix @ sp.diags(dinv)
    scale = abs(s).max()
    asym = abs(s - s.T).max() / scale
    rng = np.random.default_rng(_SEED)
    v0 = rng.standard_normal(op.n)
    ncv = min(op.n - 1, max(4 * k + 1, 24))
    maxiter = _MAX_RESTARTS * ncv
    try:
        if asym <= _ASYM_TOL:
            s_sym = (s + s.T) * 0.5
            lam, w = spla.eigsh(s_sym.tocsc(), k=k, sigma=0.0, which="LM",
                                v0=v0, ncv=ncv, maxiter=maxiter, tol=0)
            vecs = w * dinv[:, np.newaxis]
        else:
            lam, w = spla.eigs(op.matrix.tocsc(), k=k, sigma=0.0, which="LM",
                               v0=v0, ncv=ncv, maxiter=maxiter, tol=0)
            lam = _accept_real(lam, "sparse path")
            vecs = np.real(w)
    except spla.ArpackNoConvergence as exc:
        partial = getattr(exc, "eigenvalues", None)
        raise SolverError(f"shift-invert iteration did not converge: {exc}",
                          residuals=partial) from exc
    order = np.argsort(lam)
    return lam[order], vecs[:, order]


def lowest_eigenpairs(op: AssembledOperator, k: int, tol: float = 1e-8,
                      method: str = "auto") -> Spectrum:
    """k smallest eigenvalues of the assembled operator with eigenvectors and
    certified residuals.

    Parameters
    ----------
    op : AssembledOperator
    k : int
        Number of eigenpairs, 1 <= k <= n/4.
    tol : float
        Residual certificate bound ||A v - lam v|| / ||v|| per pair (>= 1e-12).
    method : str
        "auto" (dense below DENSE_CUTOFF), "dense", or "sparse".
    """
    n = op.n
    if not 1 <= k <= max(1, n // 4):
        raise ValueError(f"k={k} outside [1, n/4] for n={n}")
    if tol < 1e-12:
        raise ValueError(f"tol={tol} below the 1e-12 floor")
    if method not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dense" or (method == "auto" and n <= DENSE_CUTOFF):
        lam, vecs = _dense_path(op, k)
    else:
        lam, vecs = _sparse_path(op, k)
    residuals = _certify(op.matrix, lam, vecs)
    lamscale = np.maximum(1.0, np.abs(lam))
    if (residuals > tol * lamscale).any():
        raise SolverError(
            f"residual certificate failed: max {residuals.max():.3e} "
            f"against tol {tol:.1e}", residuals=residuals)
    vecs = vecs / np.linalg.norm(vecs, axis=0)[np.newaxis, :]
    return Spectrum(eigenvalues=lam, residuals=residuals, sector=op.sector,
                    eps=op.grid.eps, r1=op.grid.r1, vectors=vecs)


def group_multiplicities(values, cluster_tol: float,
                         weights=None) -> list[tuple[float, int]]:
    """Cluster adjacent eigenvalues within `cluster_tol` and report
    (mean value, total multiplicity) per cluster.  `values` may be a Spectrum
    (then its sector weight applies to every entry) or a sequence; `weights`
    supplies per-entry multiplicities otherwise (default 1)."""
    if cluster_tol <= 0:
        raise ValueError(f"cluster_tol must be positive, got {cluster_tol!r}")
    if isinstance(values, Spectrum):
        weight = getattr(values.sector, "weight", 1)
        weights = [weight] * len(values.eigenvalues)
        values = values.eigenvalues
    vals = np.asarray(values, dtype=float)
    if weights is None:
        weights = np.ones(len(vals), dtype=int)
    weights = np.asarray(weights, dtype=int)
    order = np.argsort(vals)
    vals = vals[order]
    weights = weights[order]
    out: list[tuple[float, int]] = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > cluster_tol:
            chunk = slice(start, i)
            out.append((float(vals[chunk].mean()), int(weights[chunk].sum())))
            start = i
    return out
