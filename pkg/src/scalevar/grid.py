"""Uniform time grids and sampled boundary-value paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class StepMismatchError(ValueError):
    """Stencil step and grid step disagree."""


@dataclass(frozen=True)
class Grid:
    """Uniform sampling of [a, b] with M subdivisions.

    The step is always derived as (b - a) / M so that every shift t + l*eps
    lands exactly on a node.
    """

    a: float
    b: float
    M: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")
        if self.M < 1:
            raise ValueError(f"subdivision count must be positive, got {self.M}")

    @property
    def eps(self) -> float:
        return (self.b - self.a) / self.M

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.eps * np.arange(self.M + 1)

    def safety_interval(self, N: int) -> tuple[float, float] | None:
        """[a + 2N*eps, b - 2N*eps], or None when empty (4N*eps > b - a)."""
        lo = self.a + 2 * N * self.eps
        hi = self.b - 2 * N * self.eps
        if lo > hi:
            return None
        return lo, hi

    def safety_is_empty(self, N: int) -> bool:
        return self.safety_interval(N) is None

    def safety_slice(self, N: int) -> slice:
        """Node indices lying in the safety interval."""
        if self.safety_is_empty(N):
            return slice(0, 0)
        return slice(2 * N, self.M - 2 * N + 1)

    def margin_slice(self, delta: float) -> slice:
        """Node indices with a + delta <= t_k <= b - delta (closed)."""
        k_lo = int(np.ceil((delta - 1e-12 * self.eps) / self.eps))
        k_hi = self.M - k_lo
        return slice(max(k_lo, 0), max(k_hi + 1, 0))


def _as_values(values, M: int) -> np.ndarray:
    out = np.asarray(values, dtype=complex)
    if out.ndim == 1:
        out = out[:, None]
    if out.shape[0] != M + 1:
        raise ValueError(f"expected {M + 1} samples, got {out.shape[0]}")
    return out


@dataclass(frozen=True)
class Path:
    """Complex d-vector samples on a grid with Dirichlet endpoint data."""

    grid: Grid
    values: np.ndarray  # shape (M+1, d)
    alpha: np.ndarray = field(default=None)
    beta: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = _as_values(self.values, self.grid.M)
        object.__setattr__(self, "values", vals)
        alpha = vals[0].copy() if self.alpha is None else np.atleast_1d(np.asarray(self.alpha, dtype=complex))
        beta = vals[-1].copy() if self.beta is None else np.atleast_1d(np.asarray(self.beta, dtype=complex))
        if not (np.array_equal(vals[0], alpha) and np.array_equal(vals[-1], beta)):
            raise ValueError("endpoint samples must equal the boundary data exactly")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "Path":
        vals = np.array([np.atleast_1d(fn(t)) for t in grid.nodes], dtype=complex)
        return cls(grid, vals)

    def reversed(self) -> "Path":
        """Node-reversed path t -> x(a + b - t)."""
        return Path(self.grid, self.values[::-1].copy())
