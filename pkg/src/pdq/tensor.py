"""Dense tensors, mode operations, and Tucker decomposition by HOOI.

A d-way tensor is stored last-index-fastest (C order). Unfolding along a
mode uses the cyclic column ordering: mode i rows, remaining modes cycled
(i+1, ..., d, 1, ..., i-1) with the last cycled mode fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError
from .matrices import DenseMatrix, as_dense_array

MAX_ORDER = 6


class DenseTensor:
    """Immutable float64 tensor of order 1..6."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if not 1 <= arr.ndim <= MAX_ORDER:
            raise InvalidArgumentError(f"tensor order must be in [1, {MAX_ORDER}], got {arr.ndim}")
        self.data = arr
        self.data.setflags(write=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    def norm(self) -> float:
        return float(np.linalg.norm(self.data.ravel()))

    def require_finite(self) -> "DenseTensor":
        if not np.isfinite(self.data).all():
            raise InvalidArgumentError("tensor contains NaN or Inf entries")
        return self

    def __repr__(self):
        return f"DenseTensor{self.shape}"


@dataclass(frozen=True)
class TuckerConfig:
    tol: float = 1e-10
    max_sweeps: int = 200
    seed: int = 0
    init: str = "svd"

    def __post_init__(self):
        if not self.tol > 0 or self.max_sweeps < 1:
            raise InvalidArgumentError("tol must be > 0 and max_sweeps >= 1")
        if self.init not in ("svd", "random"):
            raise InvalidArgumentError("init must be 'svd' or 'random'")


@dataclass(frozen=True)
class TuckerFactorization:
    """Core tensor plus per-mode orthonormal factor matrices."""

    core: DenseTensor
    factors: list[DenseMatrix]
    objective_history: list[float]
    sweeps_used: int = 0
    converged: bool = False

    def reconstruct(self) -> DenseTensor:
        t = self.core
        for mode, f in enumerate(self.factors):
            t = mode_product(t, f, mode)
        return t


def _cycle(order: int, mode: int) -> list[int]:
    return [mode] + [(mode + j) % order for j in range(1, order)]


def unfold(t: DenseTensor, mode: int) -> DenseMatrix:
    """Mode-`mode` matricization (0-based mode), cyclic column order."""
    if not 0 <= mode < t.order:
        raise InvalidArgumentError(f"mode {mode} out of range for order-{t.order} tensor")
    perm = _cycle(t.order, mode)
    return DenseMatrix(np.transpose(t.data, perm).reshape(t.shape[mode], -1))


def fold(mat, mode: int, shape: tuple[int, ...]) -> DenseTensor:
    """Inverse of :func:`unfold` for the given full tensor shape."""
    arr = as_dense_array(mat)
    order = len(shape)
    if not 0 <= mode < order:
        raise InvalidArgumentError(f"mode {mode} out of range for order-{order} shape")
    perm = _cycle(order, mode)
    cycled_shape = tuple(shape[ax] for ax in perm)
    if arr.shape[0] != shape[mode] or arr.size != int(np.prod(shape)):
        raise InvalidArgumentError(f"matrix of shape {arr.shape} does not fold into {shape}")
    inverse = np.argsort(perm)
    return DenseTensor(np.transpose(arr.reshape(cycled_shape), inverse))


def mode_product(t: DenseTensor, m, mode: int) -> DenseTensor:
    """Multiply the mode-`mode` fibers of t by the matrix m."""
    md = as_dense_array(m)
    if not 0 <= mode < t.order:
        raise InvalidArgumentError(f"mode {mode} out of range for order-{t.order} tensor")
    if md.shape[1] != t.shape[mode]:
        raise InvalidArgumentError(
            f"matrix with {md.shape[1]} columns cannot act on mode of size {t.shape[mode]}"
        )
    new_shape = list(t.shape)
    new_shape[mode] = md.shape[0]
    return fold(DenseMatrix(md @ unfold(t, mode).data), mode, tuple(new_shape))


def _contract_others(t: DenseTensor, factors, skip: int) -> DenseTensor:
    out = t
    for mode, f in enumerate(factors):
        if mode != skip:
            out = mode_product(out, DenseMatrix(f.data.T), mode)
    return out


def _leading_left_vectors(mat: np.ndarray, k: int) -> np.ndarray:
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, :k].copy()


def tucker_solve(
    t: DenseTensor, ranks: list[int], config: TuckerConfig | None = None
) -> TuckerFactorization:
    """Higher-order orthogonal iteration for the multilinear model.

    Factors start from the leading left singular vectors of each mode
    unfolding (or seeded random orthonormal bases), then each sweep
    refreshes factor i from the SVD of the tensor contracted with all
    other factors. The recorded objective is the explicit reconstruction
    error ||t - core x_1 U_1 ... x_d U_d||_F^2, non-increasing per sweep.
    """
    config = config or TuckerConfig()
    ranks = [int(r) for r in ranks]
    if len(ranks) != t.order:
        raise InvalidArgumentError(f"need {t.order} ranks, got {len(ranks)}")
    for mode, (r, n) in enumerate(zip(ranks, t.shape)):
        if not 1 <= r <= n:
            raise InvalidArgumentError(f"rank {r} out of range for mode {mode} of size {n}")

    if config.init == "svd":
        factors = [
            DenseMatrix(_leading_left_vectors(unfold(t, mode).data, ranks[mode]))
            for mode in range(t.order)
        ]
    else:
        rng = np.random.default_rng([config.seed & 0xFFFFFFFFFFFFFFFF, 0])
        factors = []
        for mode in range(t.order):
            g = rng.standard_normal((t.shape[mode], ranks[mode]))
            qmat, _ = np.linalg.qr(g)
            factors.append(DenseMatrix(qmat))

    def objective(facs) -> float:
        core = _contract_others(t, facs, skip=-1)
        rec = core
        for mode, f in enumerate(facs):
            rec = mode_product(rec, f, mode)
        return float(np.sum((t.data - rec.data) ** 2))

    history = [objective(factors)]
    converged = False
    for _ in range(1, config.max_sweeps + 1):
        prev = list(factors)
        for mode in range(t.order):
            partial = _contract_others(t, factors, skip=mode)
            factors[mode] = DenseMatrix(
                _leading_left_vectors(unfold(partial, mode).data, ranks[mode])
            )
        f_new = objective(factors)
        if f_new > history[-1]:
            factors = prev
            converged = True
            break
        rel = abs(f_new - history[-1]) / max(history[-1], 1e-300)
        history.append(f_new)
        if rel < config.tol:
            converged = True
            break

    core = _contract_others(t, factors, skip=-1)
    return TuckerFactorization(
        core=core,
        factors=factors,
        objective_history=history,
        sweeps_used=len(history) - 1,
        converged=converged,
    )
