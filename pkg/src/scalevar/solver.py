"""Discrete Euler-Lagrange boundary-value solves and oscillatory-root analysis.

The discrete residual Theta is affine in the path, so the boundary-value
problem Theta(x)(t_k) = 0, k = 1..M-1, with x(a), x(b) prescribed is a banded
linear system in the interior node values.  For the constant-coefficient
oscillator the interior rows reduce to a five-term recurrence whose quartic
characteristic polynomial is symmetric and reduces, through mu = lambda +
1/lambda, to a quadratic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grid import Grid, Path
from .lagrangian import QuadraticLagrangian, del_residual_quadratic
from .stencils import Stencil, apply

_COND_LIMIT = 1e12


class SingularSystemError(RuntimeError):
    def __init__(self, cond_estimate: float):
        super().__init__(f"discrete Euler-Lagrange system is numerically singular "
                         f"(condition estimate {cond_estimate:.3e})")
        self.cond_estimate = cond_estimate


@dataclass
class BandedSystem:
    """Interior-node linear system: matrix row k*d+i is component i of Theta(t_k)."""

    grid: Grid
    d: int
    N: int
    matrix: np.ndarray   # dense (n, n), zero outside the band
    rhs: np.ndarray      # (n,)

    @property
    def n(self) -> int:
        return (self.grid.M - 1) * self.d

    @property
    def bandwidth(self) -> int:
        return 2 * self.N * self.d + self.d - 1

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u


def _theta_block_coefficients(L: QuadraticLagrangian, s: Stencil, grid: Grid, k: int):
    """Block coefficient of x_{k+l} in Theta(x)(t_k), for |l| <= 2N."""
    N, d, M, eps = s.N, L.d, grid.M, grid.eps
    c = s.c
    t = grid.nodes
    blocks = {}
    _, Qk, Rk = L.coeffs_at(t[k])
    for l in range(-2 * N, 2 * N + 1):
        if not 0 <= k + l <= M:
            continue
        B = np.zeros((d, d), dtype=complex)
        for j in range(max(-N, -l - N), min(N, -l + N) + 1):
            if not 0 <= k - j <= M:
                continue
            P, _, _ = L.coeffs_at(t[k] - j * eps)
            B += c[l + j + N] * c[j + N] * P
        if abs(l) <= N:
            _, _, Rkl = L.coeffs_at(t[k] + l * eps)
            B += c[l + N] * Rk - c[-l + N] * Rkl
        if l == 0:
            B += Qk
        blocks[l] = B
    return blocks


def assemble(L: QuadraticLagrangian, s: Stencil, grid: Grid, alpha, beta) -> BandedSystem:
    """Build the interior system for Theta(x) = 0 with Dirichlet data."""
    d, M, N = L.d, grid.M, s.N
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    n = (M - 1) * d
    A = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    # constant part: Box_{-eps} J1 + J2 on interior nodes
    j1 = np.array([np.asarray(L.J1(t), dtype=complex).reshape(d) for t in grid.nodes])
    const = apply(s, j1, direction=-1)
    t = grid.nodes
    for k in range(1, M):
        row = (k - 1) * d
        rhs[row:row + d] = -(const[k] + np.asarray(L.J2(t[k]), dtype=complex).reshape(d))
        for l, B in _theta_block_coefficients(L, s, grid, k).items():
            kk = k + l
            if 1 <= kk <= M - 1:
                col = (kk - 1) * d
                A[row:row + d, col:col + d] += B
            elif kk == 0:
                rhs[row:row + d] -= B @ alpha
            else:  # kk == M
                rhs[row:row + d] -= B @ beta
    return BandedSystem(grid, d, N, A, rhs)


def _to_banded(A: np.ndarray, band: int) -> np.ndarray:
    n = A.shape[0]
    ab = np.zeros((2 * band + 1, n), dtype=complex)
    for i in range(n):
        for j in range(max(0, i - band), min(n, i + band + 1)):
            ab[band + i - j, j] = A[i, j]
    return ab


def solve_bvp(L: QuadraticLagrangian, s: Stencil, grid: Grid, alpha, beta,
              residual_tol: float = 1e-9) -> Path:
    """Critical path of the discrete action with x(a) = alpha, x(b) = beta.

    Near-boundary rows keep their window-truncated stencils, so the interior
    system is square.  Raises SingularSystemError when the banded LU solve
    fails or the post-solve residual check does.
    """
    sys = assemble(L, s, grid, alpha, beta)
    band = sys.bandwidth
    try:
        u = solve_banded((band, band), _to_banded(sys.matrix, band), sys.rhs)
    except np.linalg.LinAlgError:
        raise SingularSystemError(float(np.linalg.cond(sys.matrix))) from None
    vals = np.empty((grid.M + 1, L.d), dtype=complex)
    vals[0] = np.atleast_1d(np.asarray(alpha, dtype=complex))
    vals[-1] = np.atleast_1d(np.asarray(beta, dtype=complex))
    vals[1:-1] = u.reshape(grid.M - 1, L.d)
    path = Path(grid, vals)
    theta = del_residual_quadratic(L, s, path)
    scale = max(1.0, float(np.max(np.abs(sys.matrix))) * float(np.max(np.abs(vals))),
                float(np.max(np.abs(sys.rhs))) if sys.rhs.size else 1.0)
    if float(np.max(np.abs(theta[1:-1]))) > residual_tol * scale:
        cond = float(np.linalg.cond(sys.matrix))
        if cond > _COND_LIMIT or not np.isfinite(cond):
            raise SingularSystemError(cond)
        raise SingularSystemError(cond)
    return path


# -- oscillatory-root analysis --------------------------------------------

@dataclass(frozen=True)
class CharPolynomial:
    """Symmetric quartic of the constant-oscillator recurrence and its reduction."""

    quartic: np.ndarray   # coefficients of D, degree 4 down to 0 (gamma-normalized)
    quadratic: np.ndarray  # coefficients of E(mu), degree 2 down to 0
    p: float
    q: float
    gamma: tuple
    eps: float

    def D(self, lam):
        return np.polyval(self.quartic, lam)

    def E(self, mu):
        return np.polyval(self.quadratic, mu)


def oscillator_char_poly(s: Stencil, p: float, q: float, eps: float | None = None) -> CharPolynomial:
    """Characteristic polynomial of the oscillator recurrence for an N=1 stencil."""
    if s.N != 1:
        raise ValueError("the oscillator recurrence analysis needs an N=1 stencil")
    if p == 0:
        raise ValueError("p must be nonzero")
    if eps is None:
        eps = s.eps
    g_m1, g_0, g_1 = s.gamma
    ratio = (q / p) * eps ** 2
    a4 = g_1 * g_m1
    a3 = g_0 * (g_1 + g_m1)
    a2 = g_m1 ** 2 + g_0 ** 2 + g_1 ** 2 + ratio
    quartic = np.array([a4, a3, a2, a3, a4], dtype=complex)
    quadratic = np.array([a4, a3, a2 - 2 * a4], dtype=complex)
    return CharPolynomial(quartic, quadratic, p, q, s.gamma, eps)


def unit_modulus_roots(cp: CharPolynomial, tol: float = 1e-9) -> dict:
    """Root moduli of the quartic, via the mu-reduction when non-degenerate."""
    a4 = cp.quartic[0]
    if abs(a4) > 1e-14 * max(1.0, float(np.max(np.abs(cp.quartic)))):
        mus = np.roots(cp.quadratic)
        lams = []
        for mu in mus:
            lams.extend(np.roots([1.0, -mu, 1.0]))
        lams = np.asarray(lams, dtype=complex)
    else:
        coeffs = np.trim_zeros(cp.quartic, "f")
        coeffs = np.trim_zeros(coeffs, "b")  # drop lambda = 0 factors
        lams = np.roots(coeffs) if coeffs.size > 1 else np.array([], dtype=complex)
    moduli = np.sort(np.abs(lams))
    all_unit = bool(moduli.size and np.max(np.abs(moduli - 1.0)) <= tol)
    return {"roots": lams, "moduli": moduli, "all_unit": all_unit}


def general_oscillation_test(g_m1, g_0, g_1, tol: float = 1e-9) -> bool:
    """Whether all recurrence roots stay on the unit circle as eps -> 0.

    Requires the reduced-quadratic coefficients to be real and to satisfy the
    four inequalities characterizing roots in [-2, 2]; the last inequality
    carries the sign of the leading coefficient.
    """
    g_m1, g_0, g_1 = complex(g_m1), complex(g_0), complex(g_1)
    alpha = g_1 * g_m1
    beta = g_0 * (g_1 + g_m1)
    const = g_0 ** 2 + g_1 ** 2 + g_m1 ** 2 - 2 * g_1 * g_m1
    scale = max(1.0, abs(alpha), abs(beta), abs(const))
    if max(abs(alpha.imag), abs(beta.imag), abs(const.imag)) > tol * scale:
        return False
    a, b, c = alpha.real, beta.real, const.real
    checks = (
        4 * abs(a) - abs(b),
        4 * abs(a) - abs(c),
        b ** 2 - 4 * a * c,
        16 * abs(a) + 4 * c * np.sign(a) - 8 * abs(b),
    )
    return all(v >= -tol * scale for v in checks)
