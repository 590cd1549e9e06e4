"""Command-line interface.

Commands: factor, factor-sym, tucker, perturb, stability, scaling,
compare, reduce, gen. Every run is seeded (--seed, falling back to the
PDQ_SEED environment variable) and writes its artifacts under --out.
Exit codes: 0 success, 1 numerical or file failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    baseline_compare,
    perturbation_experiment,
    reduce,
    scaling_experiment,
    stability_experiment,
    write_report,
)
from .exceptions import InvalidArgumentError, MatrixFormatError, NumericalFailureError
from .generators import KINDS as GEN_KINDS
from .generators import gen_matrix
from .io import (
    read_matrix,
    read_tensor,
    save_factorization,
    write_dense_csv,
    write_matrix_market,
    write_tensor,
)
from .matrices import DenseMatrix, SparseMatrix
from .regularization import KINDS as REG_KINDS
from .regularization import RegularizerSpec
from .solver import SolverConfig, residual_norm, solve
from .tensor import TuckerConfig, tucker_solve

REPORT_COMMANDS = ("perturb", "stability", "scaling", "compare")


@dataclass
class RunConfig:
    command: str
    out_dir: str
    reg: RegularizerSpec
    fmt: str
    input_path: str | None = None
    solver: SolverConfig | None = None
    tucker: TuckerConfig | None = None
    epsilons: list[float] = field(default_factory=list)
    sizes: list[int] = field(default_factory=list)
    density: float | None = None
    kappa: float | None = None
    tucker_ranks: list[int] = field(default_factory=list)
    flop_category: str = "total"
    trials: int = 5
    jobs: int = 1
    kind: str | None = None
    size: tuple[int, int] | None = None
    gen_rank: int | None = None
    seed: int = 0


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _add_solver_flags(p: argparse.ArgumentParser, init_default="svd", sweeps_default=500):
    p.add_argument("--rank", "-k", type=int, default=None, help="factor rank k")
    p.add_argument("--reg", choices=REG_KINDS, default="ridge", help="penalty kind")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="weight on P")
    p.add_argument("--mu", type=float, default=0.0, help="weight on D")
    p.add_argument("--nu", type=float, default=0.0, help="weight on Q")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=sweeps_default)
    p.add_argument("--seed", type=int, default=None, help="defaults to $PDQ_SEED or 0")
    p.add_argument("--init", choices=("svd", "random"), default=init_default)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--no-orthonormalize", action="store_true")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--out", default="pdq-out", help="output directory")
    p.add_argument("--format", dest="fmt", choices=("mtx", "csv", "json"), default=None)
    p.add_argument("--jobs", type=int, default=1, help="parallel experiment trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdq", description="Three-factor P D Q decomposition toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("factor", "factor-sym", "perturb", "stability", "compare", "reduce"):
        p = sub.add_parser(name)
        p.add_argument("input", help="matrix file (Matrix Market or CSV)")
        _add_solver_flags(p)
        if name == "perturb":
            p.add_argument("--epsilons", type=_floats, default=None, help="grid a,b,c")
            p.add_argument("--trials", type=int, default=5)

    p = sub.add_parser("scaling")
    _add_solver_flags(p, init_default="random", sweeps_default=3)
    p.add_argument("--sizes", type=_ints, default=None, help="sizes a,b,c")
    p.add_argument("--density", type=float, default=None)
    p.add_argument(
        "--flop-category",
        choices=("total", "product", "block_solve", "norm"),
        default="total",
    )

    p = sub.add_parser("tucker")
    p.add_argument("input", help="tensor file (JSON shape header plus values)")
    p.add_argument("--tucker-ranks", type=_ints, default=None, help="ranks a,b,c")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--init", choices=("svd", "random"), default="svd")
    p.add_argument("--out", default="pdq-out")

    p = sub.add_parser("gen")
    p.add_argument("--kind", choices=GEN_KINDS, required=True)
    p.add_argument("--size", required=True, help="n or rows,cols")
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--rank", "-k", dest="rank", type=int, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output matrix file")
    p.add_argument("--format", dest="fmt", choices=("mtx", "csv"), default="mtx")
    return parser


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("PDQ_SEED")
    return int(env) if env else 0


def parse_args(argv) -> RunConfig:
    """Parse and validate argv into a RunConfig; exits with code 2 on usage errors."""
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = _resolve_seed(getattr(args, "seed", None))
    cmd = args.command

    if cmd == "gen":
        size = _ints(args.size)
        if not 1 <= len(size) <= 2:
            parser.error("--size must be 'n' or 'rows,cols'")
        return RunConfig(
            command=cmd,
            out_dir=args.out,
            reg=RegularizerSpec(),
            fmt=args.fmt,
            density=args.density,
            kappa=args.kappa,
            gen_rank=args.rank,
            kind=args.kind,
            size=(size[0], size[-1]),
            seed=seed,
        )

    if cmd == "tucker":
        if not args.tucker_ranks:
            parser.error("the --tucker-ranks parameter is required for tucker")
        return RunConfig(
            command=cmd,
            input_path=args.input,
            out_dir=args.out,
            reg=RegularizerSpec(),
            fmt="mtx",
            tucker=TuckerConfig(
                tol=args.tol, max_sweeps=args.max_sweeps, seed=seed, init=args.init
            ),
            tucker_ranks=args.tucker_ranks,
            seed=seed,
        )

    if args.rank is None:
        parser.error(f"the --rank/-k parameter is required for {cmd}")
    try:
        solver = SolverConfig(
            rank=args.rank,
            tol=args.tol,
            max_sweeps=args.max_sweeps,
            seed=seed,
            init=args.init,
            orthonormalize=not args.no_orthonormalize,
            symmetric=args.symmetric or cmd == "factor-sym",
            restarts=args.restarts,
        )
        reg = RegularizerSpec(kind=args.reg, lam=args.lam, mu=args.mu, nu=args.nu)
    except InvalidArgumentError as exc:
        parser.error(str(exc))

    fmt = args.fmt
    if cmd in REPORT_COMMANDS:
        fmt = fmt or "json"
        if fmt == "mtx":
            parser.error(f"{cmd} reports support --format json or csv")
    else:
        fmt = fmt or "mtx"

    cfg = RunConfig(
        command=cmd,
        input_path=getattr(args, "input", None),
        out_dir=args.out,
        reg=reg,
        fmt=fmt,
        solver=solver,
        jobs=args.jobs,
        seed=seed,
    )
    if cmd == "perturb":
        if not args.epsilons:
            parser.error("the --epsilons parameter is required for perturb")
        cfg.epsilons = args.epsilons
        cfg.trials = args.trials
    if cmd == "scaling":
        if not args.sizes:
            parser.error("the --sizes parameter is required for scaling")
        cfg.sizes = args.sizes
        cfg.density = args.density
        cfg.flop_category = args.flop_category
    return cfg


def _require_dense(a, what: str) -> DenseMatrix:
    if isinstance(a, DenseMatrix):
        return a
    raise InvalidArgumentError(f"{what} needs a dense matrix input")


def _summline(fact, residual: float) -> str:
    return (
        f"objective={fact.final_objective:.6e} residual={residual:.6e} "
        f"sweeps={fact.sweeps_used} converged={fact.converged}"
    )


def _run_factor(cfg: RunConfig) -> str:
    a = read_matrix(cfg.input_path)
    fact = solve(a, cfg.solver, cfg.reg)
    residual = residual_norm(a, fact)
    save_factorization(fact, cfg.out_dir, extra_meta={"command": cfg.command, "residual": residual})
    return _summline(fact, residual)


def _run_tucker(cfg: RunConfig) -> str:
    t = read_tensor(cfg.input_path)
    tf = tucker_solve(t, cfg.tucker_ranks, cfg.tucker)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_tensor(tf.core, os.path.join(cfg.out_dir, "core.tns"))
    for i, f in enumerate(tf.factors, start=1):
        write_matrix_market(f, os.path.join(cfg.out_dir, f"factor_{i}.mtx"))
    residual = float(np.sqrt(max(tf.objective_history[-1], 0.0)))
    with open(os.path.join(cfg.out_dir, "meta.json"), "w") as fh:
        json.dump(
            {
                "ranks": cfg.tucker_ranks,
                "objective_history": tf.objective_history,
                "sweeps_used": tf.sweeps_used,
                "converged": tf.converged,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return f"objective={tf.objective_history[-1]:.6e} residual={residual:.6e} sweeps={tf.sweeps_used}"


def _report_path(cfg: RunConfig) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    ext = "json" if cfg.fmt == "json" else "csv"
    return os.path.join(cfg.out_dir, f"{cfg.command}-report.{ext}")


def _run_perturb(cfg: RunConfig) -> str:
    a = _require_dense(read_matrix(cfg.input_path), "perturb")
    report = perturbation_experiment(
        a, cfg.epsilons, cfg.solver, cfg.reg, trials=cfg.trials, n_jobs=cfg.jobs
    )
    write_report(report, _report_path(cfg), cfg.fmt)
    return f"fitted-slope={report.fitted_slope:.4f} beta-estimate={report.beta_estimate:.6e}"


def _run_stability(cfg: RunConfig) -> str:
    a = read_matrix(cfg.input_path)
    report = stability_experiment(a, cfg.solver, cfg.reg)
    write_report(report, _report_path(cfg), cfg.fmt)
    return (
        f"kappa-a={report.kappa_a:.6e} kappa-d={report.kappa_d:.6e} "
        f"alpha={report.alpha_estimate:.6e}"
    )


def _run_scaling(cfg: RunConfig) -> str:
    report = scaling_experiment(
        cfg.sizes,
        cfg.solver.rank,
        config=cfg.solver,
        density=cfg.density,
        flop_category=cfg.flop_category,
    )
    path = _report_path(cfg)
    write_report(report, path, cfg.fmt)
    line = f"flop-slope={report.flop_slope:.3f} time-slope={report.time_slope:.3f}"
    if cfg.density is not None:
        # classical dense LU work (n^3 / 3) against one measured sweep, per size
        ratios = [
            (n**3 / 3.0) / flops for n, flops in zip(report.sizes, report.per_sweep_flops)
        ]
        line += " lu-flop-ratios=" + ",".join(f"{r:.2f}" for r in ratios)
    return line


def _run_compare(cfg: RunConfig) -> str:
    a = read_matrix(cfg.input_path)
    report = baseline_compare(a, cfg.solver.rank, cfg.solver, cfg.reg)
    write_report(report, _report_path(cfg), cfg.fmt)
    return " ".join(f"{r.method}={r.residual:.6e}" for r in report.rows)


def _run_reduce(cfg: RunConfig) -> str:
    a = _require_dense(read_matrix(cfg.input_path), "reduce")
    result = reduce(a, cfg.solver.rank, cfg.solver, cfg.reg)
    save_factorization(
        result.factorization,
        cfg.out_dir,
        extra_meta={"command": "reduce", "captured_energy": result.captured_energy},
    )
    write_matrix_market(
        DenseMatrix(result.column_means[:, None]), os.path.join(cfg.out_dir, "column_means.mtx")
    )
    return f"captured-energy={result.captured_energy:.6f} rank={cfg.solver.rank}"


def _run_gen(cfg: RunConfig) -> str:
    a = gen_matrix(
        cfg.kind,
        cfg.size,
        seed=cfg.seed,
        density=cfg.density,
        rank=cfg.gen_rank,
        kappa=cfg.kappa,
    )
    out_parent = os.path.dirname(cfg.out_dir)
    if out_parent:
        os.makedirs(out_parent, exist_ok=True)
    if cfg.fmt == "csv":
        if isinstance(a, SparseMatrix):
            raise InvalidArgumentError("csv output supports dense matrices only")
        write_dense_csv(a, cfg.out_dir)
    else:
        write_matrix_market(a, cfg.out_dir)
    nnz = a.nnz if isinstance(a, SparseMatrix) else a.rows * a.cols
    return f"kind={cfg.kind} shape={a.rows}x{a.cols} stored={nnz} path={cfg.out_dir}"


_DISPATCH = {
    "factor": _run_factor,
    "factor-sym": _run_factor,
    "tucker": _run_tucker,
    "perturb": _run_perturb,
    "stability": _run_stability,
    "scaling": _run_scaling,
    "compare": _run_compare,
    "reduce": _run_reduce,
    "gen": _run_gen,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed command; returns the process exit code."""
    try:
        print(_DISPATCH[cfg.command](cfg))
        return 0
    except InvalidArgumentError as exc:
        print(f"pdq: usage error: {exc}", file=sys.stderr)
        return 2
    except (MatrixFormatError, NumericalFailureError) as exc:
        print(f"pdq: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"pdq: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(parse_args(sys.argv[1:])))
