"""Experiment harness: perturbation response, conditioning, uniqueness,
complexity scaling, baseline comparison, and dimensionality reduction.

Every experiment is seeded and deterministic; trials aggregate in trial
order even when run on a thread pool. Reports serialize to JSON (schema
``pdq-report/1``) or flat CSV via :func:`write_report`.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from threadpoolctl import threadpool_limits

from .exceptions import InvalidArgumentError, NumericalFailureError
from .flops import FlopCounts
from .generators import gen_sparse
from .linalg import condition_number, frobenius_norm, lu, matmul, qr, svd
from .matrices import DenseMatrix, SparseMatrix
from .regularization import RegularizerSpec
from .solver import (
    DENSIFY_CAP,
    Factorization,
    SolverConfig,
    _init_factors,
    _objective,
    _Problem,
    _sweep_general,
    _sweep_orthonormal,
    residual_norm,
    solve,
)

SCHEMA = "pdq-report/1"


# ---------------------------------------------------------------------- reports


@dataclass(frozen=True)
class PerturbationReport:
    epsilons: list[float]
    d_errors: list[float]
    reconstruction_errors: list[float]
    fitted_slope: float
    beta_estimate: float

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "perturbation",
            "epsilons": self.epsilons,
            "d_errors": self.d_errors,
            "reconstruction_errors": self.reconstruction_errors,
            "fitted_slope": self.fitted_slope,
            "beta_estimate": self.beta_estimate,
        }


@dataclass(frozen=True)
class StabilityReport:
    kappa_a: float
    kappa_d: float
    alpha_estimate: float
    reg: RegularizerSpec

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "stability",
            "kappa_a": self.kappa_a,
            "kappa_d": self.kappa_d,
            "alpha_estimate": self.alpha_estimate,
            "reg": self.reg.to_dict(),
        }


@dataclass(frozen=True)
class UniquenessReport:
    aligned_distances: list[float]  # per non-reference run, max over P/D/Q
    max_aligned_distance: float
    objective_spread: float  # relative spread of final objectives
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "uniqueness",
            "aligned_distances": self.aligned_distances,
            "max_aligned_distance": self.max_aligned_distance,
            "objective_spread": self.objective_spread,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ScalingReport:
    sizes: list[int]
    per_sweep_times: list[float]
    per_sweep_flops: list[int]
    time_slope: float
    flop_slope: float
    flop_category: str = "total"

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "scaling",
            "sizes": self.sizes,
            "per_sweep_times": self.per_sweep_times,
            "per_sweep_flops": self.per_sweep_flops,
            "time_slope": self.time_slope,
            "flop_slope": self.flop_slope,
            "flop_category": self.flop_category,
        }


@dataclass(frozen=True)
class BaselineRow:
    method: str
    residual: float
    wall_time: float


@dataclass(frozen=True)
class BaselineReport:
    rows: list[BaselineRow]

    def residual(self, method: str) -> float:
        for row in self.rows:
            if row.method == method:
                return row.residual
        raise KeyError(method)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "baseline",
            "rows": [
                {"method": r.method, "residual": r.residual, "wall_time": r.wall_time}
                for r in self.rows
            ],
        }


@dataclass
class ReduceResult:
    factorization: Factorization
    column_means: np.ndarray
    captured_energy: float
    per_sweep_flops: list[FlopCounts] = field(default_factory=list)

    def transform(self, x: DenseMatrix) -> DenseMatrix:
        """Map n-row data to its k-dimensional representation."""
        arr = x.data if isinstance(x, DenseMatrix) else np.asarray(x, dtype=np.float64)
        if arr.shape[0] != self.column_means.shape[0]:
            raise InvalidArgumentError("new data must have the same number of rows")
        return DenseMatrix(self.factorization.p.data.T @ (arr - self.column_means[:, None]))


def _as_dense(a) -> DenseMatrix:
    if isinstance(a, DenseMatrix):
        return a
    if max(a.rows, a.cols) > DENSIFY_CAP:
        raise InvalidArgumentError(
            f"refusing to densify a sparse matrix larger than {DENSIFY_CAP}x{DENSIFY_CAP}"
        )
    return a.densify()


def _loglog_slope(x, y) -> float:
    if len(x) < 2:
        raise InvalidArgumentError("need at least two points to fit a slope")
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _map_trials(fn, args, n_jobs: int):
    if n_jobs <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, args))


# ------------------------------------------------------------------ experiments


def perturbation_experiment(
    a0: DenseMatrix,
    epsilons,
    config: SolverConfig,
    spec: RegularizerSpec | None = None,
    trials: int = 5,
    n_jobs: int = 1,
) -> PerturbationReport:
    """Response of D to additive Gaussian noise of prescribed Frobenius norm.

    Solves the clean problem once, then for each (epsilon, trial) solves on
    a0 + E with ||E||_F = epsilon and identical config, recording
    ||D - D0||_F and ||PDQ - a0||_F averaged over trials. The log-log slope
    of the mean D error against epsilon is fitted over positive epsilons.
    """
    spec = spec or RegularizerSpec()
    if not isinstance(a0, DenseMatrix):
        raise InvalidArgumentError("perturbation experiment needs a dense base matrix")
    if config.init != "svd" or not config.orthonormalize:
        raise InvalidArgumentError(
            "perturbation experiment requires svd init and orthonormalize=True (gauge control)"
        )
    eps = [float(e) for e in epsilons]
    if any(e < 0 for e in eps) or any(b <= a for a, b in zip(eps, eps[1:])):
        raise InvalidArgumentError("epsilons must be non-negative and strictly increasing")
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")

    base = solve(a0, config, spec)
    d0 = base.d.data
    arr0 = a0.data
    n, m = arr0.shape

    def one(job):
        i, t = job
        rng = np.random.default_rng([config.seed & 0xFFFFFFFFFFFFFFFF, 7001, i, t])
        e = rng.standard_normal((n, m))
        norm = np.linalg.norm(e)
        e = e * (eps[i] / norm) if eps[i] > 0 else np.zeros((n, m))
        fact = solve(DenseMatrix(arr0 + e), config, spec)
        d_err = float(np.linalg.norm(fact.d.data - d0))
        rec_err = float(np.linalg.norm(fact.reconstruct().data - arr0))
        return i, d_err, rec_err

    jobs = [(i, t) for i in range(len(eps)) for t in range(trials)]
    results = _map_trials(one, jobs, n_jobs)
    d_errors = [0.0] * len(eps)
    rec_errors = [0.0] * len(eps)
    for i, d_err, rec_err in results:
        d_errors[i] += d_err / trials
        rec_errors[i] += rec_err / trials

    positive = [(e, d) for e, d in zip(eps, d_errors) if e > 0]
    if positive:
        beta = max(d / e for e, d in positive)
        slope = (
            _loglog_slope([e for e, _ in positive], [max(d, 1e-300) for _, d in positive])
            if len(positive) >= 2
            else float("nan")
        )
    else:
        beta = float("nan")
        slope = float("nan")
    return PerturbationReport(eps, d_errors, rec_errors, slope, beta)


def stability_experiment(
    a, config: SolverConfig, spec: RegularizerSpec | None = None
) -> StabilityReport:
    """kappa(A), kappa(D) after a solve, and their ratio alpha."""
    spec = spec or RegularizerSpec()
    fact = solve(a, config, spec)
    kappa_a = condition_number(_as_dense(a))
    kappa_d = condition_number(fact.d)
    return StabilityReport(kappa_a, kappa_d, kappa_d / kappa_a, spec)


def _greedy_match(ref: np.ndarray, other: np.ndarray):
    """Column permutation and signs aligning `other` to `ref` by |correlation|."""
    k = ref.shape[1]
    rn = ref / np.maximum(np.linalg.norm(ref, axis=0), 1e-300)
    on = other / np.maximum(np.linalg.norm(other, axis=0), 1e-300)
    corr = rn.T @ on
    score = np.abs(corr).copy()
    perm = np.empty(k, dtype=int)
    signs = np.empty(k)
    for _ in range(k):
        a, b = np.unravel_index(np.argmax(score), score.shape)
        perm[a] = b
        signs[a] = 1.0 if corr[a, b] >= 0 else -1.0
        score[a, :] = -1.0
        score[:, b] = -1.0
    return perm, signs


def uniqueness_experiment(
    a, config: SolverConfig, spec: RegularizerSpec | None = None, runs: int = 5
) -> UniquenessReport:
    """Pairwise factor agreement across random restarts after permutation
    and sign alignment (greedy matching on absolute column correlation)."""
    spec = spec or RegularizerSpec()
    if runs < 2:
        raise InvalidArgumentError("uniqueness experiment needs runs >= 2")
    if config.init != "random":
        raise InvalidArgumentError("uniqueness experiment requires random init")

    facts = [solve(a, replace(config, seed=config.seed + i), spec) for i in range(runs)]
    ref = facts[0]
    distances = []
    for fact in facts[1:]:
        pp, sp = _greedy_match(ref.p.data, fact.p.data)
        pq, sq = _greedy_match(ref.q.data.T, fact.q.data.T)
        p_al = fact.p.data[:, pp] * sp
        q_al = (fact.q.data.T[:, pq] * sq).T
        d_al = (fact.d.data[np.ix_(pp, pq)] * sq[None, :]) * sp[:, None]
        distances.append(
            max(
                float(np.linalg.norm(p_al - ref.p.data)),
                float(np.linalg.norm(d_al - ref.d.data)),
                float(np.linalg.norm(q_al - ref.q.data)),
            )
        )
    objectives = [f.final_objective for f in facts]
    spread = (max(objectives) - min(objectives)) / max(min(objectives), 1e-300)

    sigma = svd(_as_dense(a)).singular_values
    k = config.rank
    gaps = np.diff(sigma[: k + 1]) if sigma.size > k else np.diff(sigma)
    degenerate = bool(
        sigma.size and (np.any(np.abs(gaps) <= 1e-8 * sigma[0]) or sigma[min(k, sigma.size) - 1] <= 1e-12 * sigma[0])
    )
    return UniquenessReport(distances, max(distances), float(spread), degenerate)


def _timed_sweeps(a, config: SolverConfig, spec: RegularizerSpec, repetitions: int):
    """(median per-sweep seconds, per-sweep FlopCounts) at a fixed sweep count."""
    prob = _Problem(a)
    p, d, q = _init_factors(prob, config, trial=0)
    counts = FlopCounts()
    sweep = 1

    def run_sweep(with_counts):
        nonlocal p, d, q, sweep
        c = counts if with_counts else FlopCounts()
        if config.orthonormalize:
            p, d, q = _sweep_orthonormal(prob, p, d, q, spec, c, config.symmetric)
        else:
            p, d, q = _sweep_general(prob, p, d, q, spec, c, sweep)
        _objective(prob, p, d, q, spec, c)
        sweep += 1

    run_sweep(with_counts=True)  # instrumented pass
    times = []
    with threadpool_limits(limits=1):
        for _ in range(config.max_sweeps):  # untimed warmup block
            run_sweep(with_counts=False)
        for _ in range(repetitions):
            t0 = time.perf_counter()
            for _ in range(config.max_sweeps):
                run_sweep(with_counts=False)
            times.append((time.perf_counter() - t0) / config.max_sweeps)
    return float(np.median(times)), counts


def scaling_experiment(
    sizes,
    k: int,
    config: SolverConfig | None = None,
    density: float | None = None,
    repetitions: int = 5,
    flop_category: str = "total",
) -> ScalingReport:
    """Per-sweep wall time and exact flop count across problem sizes.

    Matrices are seeded per size (dense Gaussian, or CSR with the given
    density); every size runs a fixed sweep count (``config.max_sweeps``)
    with no convergence exit, timing pinned to one BLAS thread and
    reported as the median of ``repetitions``. Slopes are least-squares
    fits on the log-log points.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2:
        raise InvalidArgumentError("scaling experiment needs at least two sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidArgumentError("sizes must be strictly increasing")
    if flop_category not in ("total", "product", "block_solve", "norm"):
        raise InvalidArgumentError(f"unknown flop category {flop_category!r}")
    config = config or SolverConfig(rank=k, init="random", max_sweeps=3)
    config = replace(config, rank=k)
    spec = RegularizerSpec()

    times = []
    flop_counts = []
    for n in sizes:
        if density is not None:
            a = gen_sparse(n, n, density, config.seed)
        else:
            rng = np.random.default_rng([config.seed & 0xFFFFFFFFFFFFFFFF, 11, n])
            a = DenseMatrix(rng.standard_normal((n, n)))
        sweep_time, counts = _timed_sweeps(a, config, spec, repetitions)
        times.append(sweep_time)
        flop_counts.append(
            counts.total if flop_category == "total" else getattr(counts, flop_category)
        )
    return ScalingReport(
        sizes,
        times,
        flop_counts,
        time_slope=_loglog_slope(sizes, times),
        flop_slope=_loglog_slope(sizes, flop_counts),
        flop_category=flop_category,
    )


def baseline_compare(
    a, k: int, config: SolverConfig | None = None, spec: RegularizerSpec | None = None
) -> BaselineReport:
    """Residual/time table for the solver against SVD, QR, and LU baselines."""
    spec = spec or RegularizerSpec()
    config = replace(config, rank=k) if config else SolverConfig(rank=k)
    dense = _as_dense(a)
    rows = []

    t0 = time.perf_counter()
    fact = solve(a, config, spec)
    rows.append(BaselineRow("d-decomposition", residual_norm(a, fact), time.perf_counter() - t0))

    t0 = time.perf_counter()
    sigma = svd(dense).singular_values
    svd_res = float(np.sqrt(max(np.sum(sigma[k:] ** 2), 0.0)))
    rows.append(BaselineRow("truncated-svd", svd_res, time.perf_counter() - t0))

    t0 = time.perf_counter()
    if dense.rows >= dense.cols:
        qres = qr(dense)
        approx = qres.q.data[:, :k] @ qres.r.data[:k, :]
        qr_res = float(np.linalg.norm(dense.data - approx))
    else:
        qres = qr(DenseMatrix(dense.data.T))
        approx = qres.q.data[:, :k] @ qres.r.data[:k, :]
        qr_res = float(np.linalg.norm(dense.data - approx.T))
    rows.append(BaselineRow("qr-rank-k", qr_res, time.perf_counter() - t0))

    t0 = time.perf_counter()
    lu_res = float("nan")
    if dense.rows == dense.cols:
        fac = lu(dense)
        rec = matmul(fac.lower, fac.upper).data
        lu_res = float(np.linalg.norm(dense.data[fac.perm] - rec))
    rows.append(BaselineRow("lu-full", lu_res, time.perf_counter() - t0))

    d_res = rows[0].residual
    if d_res < svd_res - 1e-9:
        raise NumericalFailureError(
            f"solver residual {d_res} undercuts the optimal rank-{k} residual {svd_res}"
        )
    return BaselineReport(rows)


def reduce(
    data: DenseMatrix, k: int, config: SolverConfig | None = None, spec: RegularizerSpec | None = None
) -> ReduceResult:
    """Rank-k representation of column-centered data plus the transform.

    The factorization runs on data minus its mean column; transform(x)
    projects new n-row data onto the k leading directions. Captured energy
    is ||D||_F^2 over the centered data's squared Frobenius norm.
    """
    spec = spec or RegularizerSpec()
    if not isinstance(data, DenseMatrix):
        raise InvalidArgumentError("reduce expects a dense data matrix")
    config = replace(config, rank=k) if config else SolverConfig(rank=k)
    if k > min(data.rows, data.cols):
        raise InvalidArgumentError("k exceeds min(rows, cols)")
    means = data.data.mean(axis=1)
    centered = DenseMatrix(data.data - means[:, None])
    fact = solve(centered, config, spec)
    total = float(np.sum(centered.data**2))
    captured = float(np.sum(fact.d.data**2) / max(total, 1e-300))
    return ReduceResult(fact, means, captured, fact.sweep_flops)


# ------------------------------------------------------------------- reporting


def write_report(report, path, fmt: str = "json") -> None:
    d = report.to_dict()
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(d, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    if fmt != "csv":
        raise InvalidArgumentError(f"unknown report format {fmt!r}")
    lists = {k: v for k, v in d.items() if isinstance(v, list)}
    scalars = {k: v for k, v in d.items() if not isinstance(v, (list, dict))}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if d.get("kind") == "baseline":
            writer.writerow(["method", "residual", "wall_time"])
            for row in d["rows"]:
                writer.writerow([row["method"], row["residual"], row["wall_time"]])
            return
        if lists:
            names = sorted(lists)
            length = max(len(v) for v in lists.values())
            writer.writerow(names + sorted(scalars))
            for i in range(length):
                writer.writerow(
                    [lists[n][i] if i < len(lists[n]) else "" for n in names]
                    + [scalars[s] for s in sorted(scalars)]
                )
        else:
            writer.writerow(sorted(scalars))
            writer.writerow([scalars[s] for s in sorted(scalars)])
