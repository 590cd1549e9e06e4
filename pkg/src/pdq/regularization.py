"""Penalty terms on the factor triple (P, D, Q) and their proximal maps.

Four kinds are supported:

* ``ridge``    lam*||P||_F^2 + mu*||D||_F^2 + nu*||Q||_F^2
* ``lasso``    entrywise l1 with the same three weights
* ``elastic``  ridge + lasso with shared weights
* ``offdiag``  mu * sum of squared off-diagonal entries of D, pulling the
               core toward diagonal form; P and Q are unpenalized
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .matrices import DenseMatrix, as_dense_array

KINDS = ("ridge", "lasso", "elastic", "offdiag")
FACTORS = ("P", "D", "Q")


@dataclass(frozen=True)
class RegularizerSpec:
    """Penalty kind plus non-negative weights for the P, D, Q blocks."""

    kind: str = "ridge"
    lam: float = 0.0
    mu: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown regularizer kind {self.kind!r}")
        if min(self.lam, self.mu, self.nu) < 0:
            raise InvalidArgumentError("regularizer weights must be >= 0")

    def weight(self, which: str) -> float:
        if which not in FACTORS:
            raise InvalidArgumentError(f"unknown factor {which!r}")
        return {"P": self.lam, "D": self.mu, "Q": self.nu}[which]

    def ridge_weight(self, which: str) -> float:
        """Smooth (quadratic) component seen by the block solvers."""
        if self.kind in ("ridge", "elastic"):
            return self.weight(which)
        return 0.0

    def lasso_weight(self, which: str) -> float:
        """Non-smooth (l1) component handled by proximal steps."""
        if self.kind in ("lasso", "elastic"):
            return self.weight(which)
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "mu": self.mu, "nu": self.nu}

    @classmethod
    def from_dict(cls, d: dict) -> "RegularizerSpec":
        return cls(d["kind"], d.get("lambda", 0.0), d.get("mu", 0.0), d.get("nu", 0.0))


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _offdiag_mask(d: np.ndarray) -> np.ndarray:
    mask = np.ones_like(d, dtype=bool)
    np.fill_diagonal(mask, False)
    return mask


def penalty_value(spec: RegularizerSpec, p, d, q) -> float:
    pd, dd, qd = as_dense_array(p), as_dense_array(d), as_dense_array(q)
    if spec.kind == "offdiag":
        return float(spec.mu * np.sum(dd[_offdiag_mask(dd)] ** 2))
    value = 0.0
    if spec.kind in ("ridge", "elastic"):
        value += spec.lam * np.sum(pd**2) + spec.mu * np.sum(dd**2) + spec.nu * np.sum(qd**2)
    if spec.kind in ("lasso", "elastic"):
        value += (
            spec.lam * np.sum(np.abs(pd))
            + spec.mu * np.sum(np.abs(dd))
            + spec.nu * np.sum(np.abs(qd))
        )
    return float(value)


def prox_step_array(spec: RegularizerSpec, x: np.ndarray, step: float, which: str) -> np.ndarray:
    """argmin_z 0.5*||z - x||_F^2 + step * penalty contribution of z. Internal."""
    if step <= 0:
        raise InvalidArgumentError("prox step must be positive")
    w = spec.weight(which)
    if w == 0.0:
        return x.copy()
    if spec.kind == "ridge":
        return x / (1.0 + 2.0 * w * step)
    if spec.kind == "lasso":
        return soft_threshold(x, w * step)
    if spec.kind == "elastic":
        return soft_threshold(x, w * step) / (1.0 + 2.0 * w * step)
    # offdiag: ridge shrink on off-diagonal entries of D, identity elsewhere
    if which != "D":
        return x.copy()
    out = x / (1.0 + 2.0 * w * step)
    np.fill_diagonal(out, np.diag(x))
    return out


def prox_step(spec: RegularizerSpec, x: DenseMatrix, step: float, which: str) -> DenseMatrix:
    return DenseMatrix(prox_step_array(spec, as_dense_array(x), step, which))
