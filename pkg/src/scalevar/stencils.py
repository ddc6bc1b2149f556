"""Generalized scale-derivative operators with characteristic-function windows.

An operator is a windowed linear combination of shifted samples,

    (D x)(t) = sum_l c_l x(t + l*eps) chi_{-l}(t),      c_l = gamma_l / eps,

where chi_l is the indicator of [max(a, a + l*eps), min(b, b + l*eps)].  On a
grid aligned with eps the windows reduce to pure index-range checks, so no
out-of-bounds sample is ever read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, Path, StepMismatchError

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Stencil:
    """Coefficients gamma_{-N}..gamma_N and the step eps."""

    gamma: tuple
    eps: float

    def __post_init__(self):
        g = tuple(complex(v) for v in self.gamma)
        if len(g) % 2 != 1 or len(g) < 3:
            raise ValueError(f"gamma must have odd length 2N+1 >= 3, got {len(g)}")
        if not self.eps > 0:
            raise ValueError(f"step must be positive, got {self.eps}")
        object.__setattr__(self, "gamma", g)

    @property
    def N(self) -> int:
        return (len(self.gamma) - 1) // 2

    @property
    def c(self) -> np.ndarray:
        """Scaled coefficients c_l = gamma_l / eps, indexed -N..N."""
        return np.asarray(self.gamma, dtype=complex) / self.eps

    def gamma_at(self, l: int) -> complex:
        return self.gamma[l + self.N]

    def with_eps(self, eps: float) -> "Stencil":
        return Stencil(self.gamma, eps)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "gamma": [[v.real, v.imag] for v in self.gamma],
            "eps": self.eps,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Stencil":
        gamma = tuple(complex(re, im) for re, im in obj["gamma"])
        s = cls(gamma, float(obj["eps"]))
        if s.N != int(obj["N"]):
            raise ValueError(f"inconsistent half-width: N={obj['N']} but {len(gamma)} coefficients")
        return s


@dataclass(frozen=True)
class StencilDecomposition:
    """Coefficients k_1..k_{2N-1} of the forward-plus-shifted-second-difference form."""

    k: np.ndarray
    residual: float


@dataclass(frozen=True)
class Classification:
    in_o_tilde: bool
    defect: tuple


def window(grid: Grid, l: int, k: int) -> int:
    """chi_l(t_k): 1 iff t_k lies in [max(a, a+l*eps), min(b, b+l*eps)]."""
    if not 0 <= k <= grid.M:
        raise ValueError(f"node index {k} outside 0..{grid.M}")
    return 1 if 0 <= k - l <= grid.M else 0


def two_point(r: complex, s: complex, eps: float) -> Stencil:
    """The N=1 family with coefficients (-s, s-r, r) / eps."""
    return Stencil((-s, s - r, r), eps)


_NAMED = {
    "forward": lambda eps: two_point(1, 0, eps),
    "backward": lambda eps: two_point(0, 1, eps),
    "symmetric": lambda eps: two_point(0.5, 0.5, eps),
    "cresson": lambda eps: two_point((1 - 1j) / 2, (1 + 1j) / 2, eps),
}

NAMED_KEYS = tuple(_NAMED)


def named_stencil(key: str, eps: float) -> Stencil:
    try:
        return _NAMED[key](eps)
    except KeyError:
        raise KeyError(f"unknown stencil key {key!r}; known: {', '.join(_NAMED)}") from None


def apply(s: Stencil, x, direction: int = +1) -> np.ndarray:
    """Apply the operator (direction=+1) or its -eps counterpart (direction=-1).

    With +eps the output at node k is sum_l c_l x_{k+l} over 0 <= k+l <= M;
    with -eps it is sum_l c_l x_{k-l} over 0 <= k-l <= M.  Out-of-range terms
    vanish through the windows, never through out-of-bounds access.
    """
    if isinstance(x, Path):
        if not np.isclose(x.grid.eps, s.eps, rtol=1e-12, atol=0.0):
            raise StepMismatchError(f"stencil step {s.eps} != grid step {x.grid.eps}")
        vals = x.values
    else:
        vals = np.asarray(x, dtype=complex)
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    M = vals.shape[0] - 1
    out = np.zeros_like(vals)
    c = s.c
    for l in range(-s.N, s.N + 1):
        shift = l * direction
        # contributes c_l * vals[k + shift] at nodes k with 0 <= k+shift <= M
        lo = max(0, -shift)
        hi = min(M, M - shift)
        if lo > hi:
            continue
        out[lo:hi + 1] += c[l + s.N] * vals[lo + shift:hi + shift + 1]
    return out


def classify(s: Stencil, tol: float = DEFAULT_TOL) -> Classification:
    """Membership test for the consistent (derivative-approximating) class.

    The two defining linear equations are sum(gamma_l) = 0 and
    (1/2) sum l*(gamma_l - gamma_{-l}) = 1.
    """
    g = np.asarray(s.gamma, dtype=complex)
    ls = np.arange(-s.N, s.N + 1)
    d0 = g.sum()
    d1 = 0.5 * (ls * (g - g[::-1])).sum() - 1.0
    return Classification(bool(abs(d0) <= tol and abs(d1) <= tol), (complex(d0), complex(d1)))


def _decomposition_system(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix and forward-difference offset for the canonical form."""
    ncols = 2 * N - 1
    A = np.zeros((2 * N + 1, ncols))
    for idx, l in enumerate(range(-(N - 1), N)):
        # shifted second-difference stencil (1, -2, 1) centred at offset -l
        for off, w in ((-l - 1, 1.0), (-l, -2.0), (-l + 1, 1.0)):
            A[off + N, idx] += w
    fwd = np.zeros(2 * N + 1, dtype=complex)
    fwd[N] = -1.0
    fwd[N + 1] = 1.0
    return A, fwd


def decompose(s: Stencil, tol: float = DEFAULT_TOL) -> StencilDecomposition:
    """Least-squares fit of the forward-difference-plus-second-differences form.

    The fit is exact (zero residual) precisely for consistent operators; the
    residual is returned as a quantitative membership measure.
    """
    A, fwd = _decomposition_system(s.N)
    rhs = np.asarray(s.gamma, dtype=complex) - fwd
    k, *_ = np.linalg.lstsq(A.astype(complex), rhs, rcond=None)
    residual = float(np.linalg.norm(A @ k - rhs))
    return StencilDecomposition(k, residual)


def unit_circle_family_member(s: Stencil, tol: float = DEFAULT_TOL):
    """Real k such that s is the symmetric operator plus i*k times the
    second-difference stencil, or None if no such k fits within tol."""
    if s.N != 1:
        raise ValueError("family test is defined for N=1 stencils only")
    g_m1, g_0, g_1 = s.gamma
    k = -1j * (g_1 - 0.5)
    if abs(k.imag) > tol:
        return None
    kr = k.real
    if abs(g_m1 - (-0.5 + 1j * kr)) > tol or abs(g_0 - (-2j * kr)) > tol:
        return None
    return kr
