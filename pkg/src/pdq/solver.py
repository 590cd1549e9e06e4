"""Alternating block minimization for the three-factor model A ~ P D Q.

The objective is ||A - P D Q||_F^2 + penalty(P, D, Q). Each sweep solves
the convex block subproblems in the order P, D, Q:

* with ``orthonormalize`` on (the default), P and Q are kept orthonormal
  throughout: the P and Q blocks take the polar factor of the relevant
  cross product (the exact residual minimizer over orthonormal factors),
  and the D block is solved exactly in closed form through its proximal
  map. All scale lives in D, which fixes the gauge so D is comparable
  across runs. Ridge weights on P and Q are inert in this gauge (their
  Frobenius norms are constant) and l1 penalties on P and Q are not
  proxed, since thresholding would break orthonormality.
* with ``orthonormalize`` off, classic regularized least squares: each
  k x k normal system is solved by LU from :mod:`pdq.linalg`, ridge
  weights enter the Gram diagonals, and l1 parts are handled by a
  proximal pass after each block's smooth solve.

A descent guard makes the recorded objective history structurally
non-increasing: if a sweep would raise the objective (possible only at
the numerical floor or with l1-penalized non-exact blocks), the sweep is
rolled back and the solve stops, reported as converged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import flops as fl
from .exceptions import InvalidArgumentError, SingularMatrixError
from .flops import FlopCounts
from .linalg import eigh_psd, lu_solve_array, polar_orthonormal
from .matrices import DenseMatrix, SparseMatrix
from .regularization import RegularizerSpec, penalty_value, prox_step_array, soft_threshold

INITS = ("svd", "random")
# Largest sparse input implicitly densified for an svd initialization.
DENSIFY_CAP = 2000
_TINY = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    rank: int
    tol: float = 1e-10
    max_sweeps: int = 500
    seed: int = 0
    init: str = "svd"
    orthonormalize: bool = True
    symmetric: bool = False
    restarts: int = 1

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidArgumentError("rank must be >= 1")
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be > 0")
        if self.max_sweeps < 1:
            raise InvalidArgumentError("max_sweeps must be >= 1")
        if self.init not in INITS:
            raise InvalidArgumentError(f"init must be one of {INITS}")
        if self.restarts < 1:
            raise InvalidArgumentError("restarts must be >= 1")
        if self.symmetric and not self.orthonormalize:
            raise InvalidArgumentError("symmetric solves require orthonormalize=True")

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "tol": self.tol,
            "max_sweeps": self.max_sweeps,
            "seed": self.seed,
            "init": self.init,
            "orthonormalize": self.orthonormalize,
            "symmetric": self.symmetric,
            "restarts": self.restarts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(**d)


@dataclass(frozen=True)
class Factorization:
    """Solve result: factors, per-sweep objective history, and metadata."""

    p: DenseMatrix
    d: DenseMatrix
    q: DenseMatrix
    objective_history: list[float]
    sweeps_used: int
    converged: bool
    config: SolverConfig
    reg: RegularizerSpec
    sweep_flops: list[FlopCounts] = field(default_factory=list)

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1]

    def reconstruct(self) -> DenseMatrix:
        return DenseMatrix(self.p.data @ (self.d.data @ self.q.data))

    def total_flops(self) -> FlopCounts:
        out = FlopCounts()
        for c in self.sweep_flops:
            out = out.merged(c)
        return out


class _Problem:
    """Input matrix wrapped with the product kernels the sweeps need."""

    def __init__(self, a):
        if isinstance(a, SparseMatrix):
            self.sparse = True
            self.csr = a.to_csr()
            self.nnz = a.nnz
            self.fro2 = float(np.dot(a.values, a.values))
            self.arr = None
        elif isinstance(a, DenseMatrix):
            self.sparse = False
            self.arr = a.data
            self.fro2 = float(np.sum(a.data**2))
        else:
            raise InvalidArgumentError("input must be a DenseMatrix or SparseMatrix")
        self.n, self.m = a.rows, a.cols

    def right_multiply(self, x: np.ndarray, counts: FlopCounts, category: str) -> np.ndarray:
        """A @ x."""
        if self.sparse:
            counts.add(category, fl.spmm(self.nnz, x.shape[1]))
            return self.csr @ x
        counts.add(category, fl.gemm(self.n, self.m, x.shape[1]))
        return self.arr @ x

    def left_multiply(self, x: np.ndarray, counts: FlopCounts, category: str) -> np.ndarray:
        """x^T @ A for a tall x (n rows); returns shape (x.cols, m)."""
        if self.sparse:
            counts.add(category, fl.spmm(self.nnz, x.shape[1]))
            return (self.csr.T @ x).T
        counts.add(category, fl.gemm(x.shape[1], self.n, self.m))
        return x.T @ self.arr


def _check_factor_dims(prob: _Problem, p, d, q):
    k = d.shape[0]
    if d.shape != (k, k) or p.shape != (prob.n, k) or q.shape != (k, prob.m):
        raise InvalidArgumentError(
            f"factor shapes {p.shape} x {d.shape} x {q.shape} do not conform "
            f"to a {prob.n} x {prob.m} input"
        )


def _objective(prob: _Problem, p, d, q, spec: RegularizerSpec, counts: FlopCounts) -> float:
    """Data-fit plus penalty; the sparse path never densifies A."""
    k = d.shape[0]
    if prob.sparse:
        aqt = prob.right_multiply(q.T, counts, "norm")
        m_mat = p.T @ aqt
        gp = p.T @ p
        gq = q @ q.T
        counts.add("norm", fl.gemm(k, prob.n, k) * 2 + fl.gemm(k, prob.m, k))
        cross = float(np.sum(m_mat * d))
        pdq2 = float(np.sum((gp @ d @ gq) * d))
        counts.add("norm", 2 * fl.gemm(k, k, k) + fl.frob(k, k))
        resid2 = prob.fro2 - 2.0 * cross + pdq2
    else:
        rec = p @ (d @ q)
        counts.add("norm", fl.gemm(k, k, prob.m) + fl.gemm(prob.n, k, prob.m))
        resid2 = float(np.sum((prob.arr - rec) ** 2))
        counts.add("norm", fl.frob(prob.n, prob.m))
    return max(resid2, 0.0) + penalty_value(spec, p, d, q)


def evaluate_objective(a, p, d, q, spec: RegularizerSpec | None = None) -> float:
    """||A - P D Q||_F^2 + penalty, without densifying a sparse A."""
    spec = spec or RegularizerSpec()
    prob = _Problem(a)
    pd = p.data if isinstance(p, DenseMatrix) else np.asarray(p, dtype=np.float64)
    dd = d.data if isinstance(d, DenseMatrix) else np.asarray(d, dtype=np.float64)
    qd = q.data if isinstance(q, DenseMatrix) else np.asarray(q, dtype=np.float64)
    _check_factor_dims(prob, pd, dd, qd)
    return _objective(prob, pd, dd, qd, spec, FlopCounts())


def _polar(t: np.ndarray, counts: FlopCounts) -> np.ndarray:
    counts.add("block_solve", fl.thin_svd(*t.shape) + fl.gemm(t.shape[0], t.shape[1], t.shape[1]))
    return polar_orthonormal(t)


def _sweep_orthonormal(prob, p, d, q, spec, counts, symmetric):
    k = d.shape[0]
    if symmetric:
        t = prob.right_multiply(p @ d.T, counts, "product")
        counts.add("block_solve", fl.gemm(prob.n, k, k))
        p = _polar(t, counts)
        ap = prob.right_multiply(p, counts, "product")
        m_mat = p.T @ ap
        counts.add("block_solve", fl.gemm(k, prob.n, k))
        if spec.kind == "offdiag":
            d = np.diag(np.diag(m_mat)).copy()  # hard diagonal projection
        else:
            d = prox_step_array(spec, m_mat, 0.5, "D")
        counts.add("block_solve", fl.entrywise(k, k))
        return p, d, p.T

    w = d @ q
    counts.add("block_solve", fl.gemm(k, k, prob.m))
    t = prob.right_multiply(w.T, counts, "product")
    p = _polar(t, counts)

    aqt = prob.right_multiply(q.T, counts, "product")
    m_mat = p.T @ aqt
    counts.add("block_solve", fl.gemm(k, prob.n, k))
    d = prox_step_array(spec, m_mat, 0.5, "D")
    counts.add("block_solve", fl.entrywise(k, k))

    v = p @ d
    counts.add("block_solve", fl.gemm(prob.n, k, k))
    tq = prob.left_multiply(v, counts, "product")
    qt = _polar(tq.T, counts)
    return p, d, qt.T


def _ridge_gram_solve(g, rhs, weight, counts, sweep, block, regularized=False):
    """Solve (G + weight*I) X = rhs for symmetric G via LU.

    A singular Gram is an error only when the block carries no penalty at
    all; with a non-smooth penalty present the subproblem stays well posed,
    so the smooth part falls back to the minimum-norm solution.
    """
    k = g.shape[0]
    if weight > 0.0:
        g = g + weight * np.eye(k)
    counts.add("block_solve", fl.lu_factor(k) + fl.lu_substitute(k, rhs.shape[1]))
    try:
        return lu_solve_array(g, rhs)
    except SingularMatrixError as exc:
        if not regularized:
            raise SingularMatrixError(
                f"singular Gram matrix in the {block} block with zero regularization "
                f"at sweep {sweep}",
                column=exc.column,
                sweep=sweep,
            ) from exc
        w, v = eigh_psd(g)
        counts.add("block_solve", fl.eigh(k) + 2 * fl.gemm(k, k, rhs.shape[1]))
        inv = np.where(w > 1e-12 * max(w[-1], _TINY), 1.0 / np.maximum(w, _TINY), 0.0)
        return v @ (inv[:, None] * (v.T @ rhs))


def _sweep_general(prob, p, d, q, spec, counts, sweep):
    k = d.shape[0]
    # P block
    w = d @ q
    g = w @ w.T
    counts.add("block_solve", fl.gemm(k, k, prob.m) + fl.gemm(k, prob.m, k))
    t = prob.right_multiply(w.T, counts, "product")
    lw = spec.lasso_weight("P")
    p = _ridge_gram_solve(
        g, t.T, spec.ridge_weight("P"), counts, sweep, "P", regularized=lw > 0.0
    ).T
    if lw > 0.0:
        p = soft_threshold(p, 0.5 * lw)
        counts.add("block_solve", fl.entrywise(prob.n, k))

    # D block: Gp D Gq + mu D = P^T A Q^T
    gp = p.T @ p
    gq = q @ q.T
    counts.add("block_solve", fl.gemm(k, prob.n, k) + fl.gemm(k, prob.m, k))
    aqt = prob.right_multiply(q.T, counts, "product")
    m_mat = p.T @ aqt
    counts.add("block_solve", fl.gemm(k, prob.n, k))
    mu = spec.ridge_weight("D")
    d_regularized = spec.lasso_weight("D") > 0.0 or (spec.kind == "offdiag" and spec.mu > 0.0)
    if mu > 0.0:
        wp, up = eigh_psd(gp)
        wq, uq = eigh_psd(gq)
        mt = up.T @ m_mat @ uq
        d = up @ (mt / (np.outer(wp, wq) + mu)) @ uq.T
        counts.add("block_solve", 2 * fl.eigh(k) + 4 * fl.gemm(k, k, k) + fl.entrywise(k, k))
    else:
        d = _ridge_gram_solve(gp, m_mat, 0.0, counts, sweep, "D", regularized=d_regularized)
        d = _ridge_gram_solve(gq.T, d.T, 0.0, counts, sweep, "D", regularized=d_regularized).T
    lw = spec.lasso_weight("D")
    if lw > 0.0:
        d = soft_threshold(d, 0.5 * lw)
        counts.add("block_solve", fl.entrywise(k, k))
    if spec.kind == "offdiag" and spec.mu > 0.0:
        d = prox_step_array(spec, d, 0.5, "D")
        counts.add("block_solve", fl.entrywise(k, k))

    # Q block
    v = p @ d
    gv = v.T @ v
    counts.add("block_solve", fl.gemm(prob.n, k, k) + fl.gemm(k, prob.n, k))
    tq = prob.left_multiply(v, counts, "product")
    lw = spec.lasso_weight("Q")
    q = _ridge_gram_solve(
        gv, tq, spec.ridge_weight("Q"), counts, sweep, "Q", regularized=lw > 0.0
    )
    if lw > 0.0:
        q = soft_threshold(q, 0.5 * lw)
        counts.add("block_solve", fl.entrywise(k, prob.m))
    return p, d, q


def _init_factors(prob: _Problem, config: SolverConfig, trial: int):
    k = config.rank
    if config.init == "svd":
        if prob.sparse:
            if max(prob.n, prob.m) > DENSIFY_CAP:
                raise InvalidArgumentError(
                    f"svd init would densify a sparse input larger than "
                    f"{DENSIFY_CAP}x{DENSIFY_CAP}; use init='random'"
                )
            arr = prob.csr.toarray()
        else:
            arr = prob.arr
        u, s, vt = np.linalg.svd(arr, full_matrices=False)
        p, d, q = u[:, :k].copy(), np.diag(s[:k]).copy(), vt[:k].copy()
    else:
        rng = np.random.default_rng([config.seed & 0xFFFFFFFFFFFFFFFF, trial])
        scale = 1.0 / np.sqrt(k)
        p = rng.standard_normal((prob.n, k)) * scale
        d = rng.standard_normal((k, k)) * scale
        q = rng.standard_normal((k, prob.m)) * scale
        if config.orthonormalize:
            # the orthonormal sweep (and the result invariant) needs
            # orthonormal P and Q from the very first update
            p = np.linalg.qr(p)[0]
            q = np.linalg.qr(q.T)[0].T
    if config.symmetric:
        q = p.T.copy()
        d = (d + d.T) / 2.0
    return p, d, q


def _solve_single(prob, config, spec, trial):
    p, d, q = _init_factors(prob, config, trial)
    history = [_objective(prob, p, d, q, spec, FlopCounts())]
    sweep_flops: list[FlopCounts] = []
    converged = False
    for sweep in range(1, config.max_sweeps + 1):
        counts = FlopCounts()
        prev = (p, d, q)
        if config.orthonormalize:
            p, d, q = _sweep_orthonormal(prob, p, d, q, spec, counts, config.symmetric)
        else:
            p, d, q = _sweep_general(prob, p, d, q, spec, counts, sweep)
        f_new = _objective(prob, p, d, q, spec, counts)
        sweep_flops.append(counts)  # counts every executed sweep, rolled back or not
        if f_new > history[-1]:
            # descent guard: numerical floor (or a non-exact l1 block); roll back
            p, d, q = prev
            converged = True
            break
        rel = abs(f_new - history[-1]) / max(history[-1], _TINY)
        history.append(f_new)
        if rel < config.tol:
            converged = True
            break
    return p, d, q, history, converged, sweep_flops


def _zero_factorization(prob, config, spec):
    k = config.rank
    return Factorization(
        p=DenseMatrix(np.zeros((prob.n, k))),
        d=DenseMatrix(np.zeros((k, k))),
        q=DenseMatrix(np.zeros((k, prob.m))),
        objective_history=[0.0],
        sweeps_used=0,
        converged=True,
        config=config,
        reg=spec,
    )


def _check_symmetric(a):
    if not isinstance(a, DenseMatrix) or a.rows != a.cols:
        raise InvalidArgumentError("symmetric solves require a square dense matrix")
    arr = a.data
    asym = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if asym > 1e-12 * max(1.0, float(np.max(np.abs(arr))) if arr.size else 1.0):
        raise InvalidArgumentError(f"input is not symmetric (max asymmetry {asym:.3e})")


def solve(a, config: SolverConfig, spec: RegularizerSpec | None = None) -> Factorization:
    """Factor A into P (n x k), D (k x k), Q (k x m) minimizing the objective.

    Deterministic for a given (input, config, spec). With random init,
    ``config.restarts`` independent trials run and the best objective wins
    (ties broken by lowest trial index). A zero input returns zeroed
    factors immediately.
    """
    spec = spec or RegularizerSpec()
    prob = _Problem(a)
    if config.rank > min(prob.n, prob.m):
        raise InvalidArgumentError(
            f"rank {config.rank} exceeds min(rows, cols) = {min(prob.n, prob.m)}"
        )
    if config.symmetric:
        _check_symmetric(a)
    if prob.fro2 == 0.0:
        return _zero_factorization(prob, config, spec)

    trials = config.restarts if config.init == "random" else 1
    best = None
    for trial in range(trials):
        result = _solve_single(prob, config, spec, trial)
        if best is None or result[3][-1] < best[3][-1]:
            best = result
    p, d, q, history, converged, sweep_flops = best
    return Factorization(
        p=DenseMatrix(p),
        d=DenseMatrix(d),
        q=DenseMatrix(q),
        objective_history=history,
        sweeps_used=len(history) - 1,
        converged=converged,
        config=config,
        reg=spec,
        sweep_flops=sweep_flops,
    )


def solve_symmetric(a: DenseMatrix, config: SolverConfig, spec: RegularizerSpec | None = None):
    """Symmetric variant: Q is tied to P^T every sweep (requires symmetric A)."""
    if not config.symmetric:
        config = replace(config, symmetric=True)
    return solve(a, config, spec)


def solve_rank_restricted(a, r: int, config: SolverConfig, spec: RegularizerSpec | None = None):
    """Solve with all thin dimensions sized r (requires r <= config.rank).

    With r equal to config.rank this is bitwise-identical to :func:`solve`.
    Per-sweep flop counts are recorded in the result metadata either way.
    """
    if r < 1 or r > config.rank:
        raise InvalidArgumentError(f"restricted rank {r} must satisfy 1 <= r <= {config.rank}")
    return solve(a, replace(config, rank=r), spec)


def residual_norm(a, fact: Factorization) -> float:
    """||A - P D Q||_F, sparse-aware."""
    zero = RegularizerSpec()
    obj = evaluate_objective(a, fact.p, fact.d, fact.q, zero)
    return float(np.sqrt(max(obj, 0.0)))
