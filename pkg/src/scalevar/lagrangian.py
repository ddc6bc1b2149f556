"""Quadratic and general lagrangians with classical and discrete residuals.

The quadratic density is

    L(t, x, v) = 1/2 v^T P v + 1/2 x^T Q x + x^T R v + J1^T v + J2^T x + J3,

with P, Q symmetric and R skew-symmetric at every queried time.  The discrete
Euler-Lagrange residual Theta replaces d/dt by a scale-derivative operator and
its -eps counterpart; on grid nodes Theta is evaluated either through the
explicit double-sum formula or through the operator-composition route, and the
two agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import Grid, Path, StepMismatchError
from .stencils import Stencil, apply

_SYM_TOL = 1e-12


class SymmetryError(ValueError):
    """A coefficient matrix violates its required (skew-)symmetry."""


class MissingDerivativesError(ValueError):
    """The operation needs dP, dR, dJ1 callables that were not supplied."""


def _const(value):
    arr = np.asarray(value, dtype=complex)
    return lambda t: arr


def _coerce_matrix(spec, d):
    if callable(spec):
        return spec
    if np.isscalar(spec):
        return _const(np.eye(d) * complex(spec))
    return _const(np.asarray(spec, dtype=complex).reshape(d, d))


def _coerce_vector(spec, d):
    if spec is None:
        return _const(np.zeros(d))
    if callable(spec):
        return spec
    return _const(np.asarray(spec, dtype=complex).reshape(d))


def _coerce_scalar(spec):
    if spec is None:
        return lambda t: 0.0
    if callable(spec):
        return spec
    return lambda t: complex(spec)


@dataclass
class QuadraticLagrangian:
    """Time-callable coefficients of the quadratic density."""

    d: int
    P: Callable
    Q: Callable
    R: Callable
    J1: Callable
    J2: Callable
    J3: Callable
    dP: Optional[Callable] = None
    dR: Optional[Callable] = None
    dJ1: Optional[Callable] = None

    @classmethod
    def build(cls, d, P, Q, R=None, J1=None, J2=None, J3=None, dP=None, dR=None, dJ1=None):
        R = R if R is not None else np.zeros((d, d))
        lag = cls(
            d=d,
            P=_coerce_matrix(P, d),
            Q=_coerce_matrix(Q, d),
            R=_coerce_matrix(R, d),
            J1=_coerce_vector(J1, d),
            J2=_coerce_vector(J2, d),
            J3=_coerce_scalar(J3),
            dP=_coerce_matrix(dP, d) if dP is not None else None,
            dR=_coerce_matrix(dR, d) if dR is not None else None,
            dJ1=_coerce_vector(dJ1, d) if dJ1 is not None else None,
        )
        lag.coeffs_at(0.0)  # reject bad symmetry early
        return lag

    @property
    def has_derivatives(self) -> bool:
        return self.dP is not None and self.dR is not None and self.dJ1 is not None

    def coeffs_at(self, t):
        """(P, Q, R) at time t, with symmetry checks."""
        P = np.asarray(self.P(t), dtype=complex).reshape(self.d, self.d)
        Q = np.asarray(self.Q(t), dtype=complex).reshape(self.d, self.d)
        R = np.asarray(self.R(t), dtype=complex).reshape(self.d, self.d)
        for name, mat in (("P", P), ("Q", Q)):
            if np.max(np.abs(mat - mat.T)) > _SYM_TOL * max(1.0, np.max(np.abs(mat))):
                raise SymmetryError(f"{name}({t}) is not symmetric")
        if np.max(np.abs(R + R.T)) > _SYM_TOL * max(1.0, np.max(np.abs(R))):
            raise SymmetryError(f"R({t}) is not skew-symmetric")
        return P, Q, R

    def _require_derivatives(self):
        if not self.has_derivatives:
            raise MissingDerivativesError("dP, dR and dJ1 callables are required here")


@dataclass
class GeneralLagrangian:
    """Arbitrary density with supplied gradients."""

    d: int
    L: Callable    # L(t, x, v) -> scalar
    dLdx: Callable
    dLdv: Callable

    @classmethod
    def from_quadratic(cls, quad: QuadraticLagrangian) -> "GeneralLagrangian":
        def L(t, x, v):
            return evaluate(quad, t, x, v)

        def dLdx(t, x, v):
            P, Q, R = quad.coeffs_at(t)
            return Q @ x + R @ v + np.asarray(quad.J2(t), dtype=complex)

        def dLdv(t, x, v):
            P, Q, R = quad.coeffs_at(t)
            return P @ v - R @ x + np.asarray(quad.J1(t), dtype=complex)

        return cls(quad.d, L, dLdx, dLdv)

    def gradient_check(self, rng, n_probes: int = 20, h: float = 1e-6, t_range=(0.0, 1.0)) -> float:
        """Max relative deviation of gradients from central differences."""
        worst = 0.0
        for _ in range(n_probes):
            t = rng.uniform(*t_range)
            x = rng.standard_normal(self.d)
            v = rng.standard_normal(self.d)
            for grad, point in ((self.dLdx, "x"), (self.dLdv, "v")):
                g = np.asarray(grad(t, x, v), dtype=complex)
                fd = np.zeros(self.d, dtype=complex)
                for i in range(self.d):
                    e = np.zeros(self.d)
                    e[i] = h
                    if point == "x":
                        fd[i] = (self.L(t, x + e, v) - self.L(t, x - e, v)) / (2 * h)
                    else:
                        fd[i] = (self.L(t, x, v + e) - self.L(t, x, v - e)) / (2 * h)
                worst = max(worst, float(np.max(np.abs(g - fd))) / max(1.0, float(np.max(np.abs(g)))))
        return worst


def evaluate(L: QuadraticLagrangian, t, x, v):
    """Density value at (t, x, v)."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    P, Q, R = L.coeffs_at(t)
    J1 = np.asarray(L.J1(t), dtype=complex)
    J2 = np.asarray(L.J2(t), dtype=complex)
    return (0.5 * v @ (P @ v) + 0.5 * x @ (Q @ x) + x @ (R @ v)
            + J1 @ v + J2 @ x + complex(L.J3(t)))


def cel_residual(L: QuadraticLagrangian, x, dx, ddx, t):
    """Classical Euler-Lagrange residual -P x'' + (-P'+2R) x' + (R'+Q) x - J1' + J2."""
    L._require_derivatives()
    P, Q, R = L.coeffs_at(t)
    dP = np.asarray(L.dP(t), dtype=complex).reshape(L.d, L.d)
    dR = np.asarray(L.dR(t), dtype=complex).reshape(L.d, L.d)
    dJ1 = np.asarray(L.dJ1(t), dtype=complex)
    J2 = np.asarray(L.J2(t), dtype=complex)
    xv = np.atleast_1d(np.asarray(x(t), dtype=complex))
    dxv = np.atleast_1d(np.asarray(dx(t), dtype=complex))
    ddxv = np.atleast_1d(np.asarray(ddx(t), dtype=complex))
    return -P @ ddxv + (-dP + 2 * R) @ dxv + (dR + Q) @ xv - dJ1 + J2


def _check_step(s: Stencil, grid: Grid):
    if not np.isclose(grid.eps, s.eps, rtol=1e-12, atol=0.0):
        raise StepMismatchError(f"stencil step {s.eps} != grid step {grid.eps}")


def _sample_vector(fn, grid: Grid, d: int) -> np.ndarray:
    return np.array([np.asarray(fn(t), dtype=complex).reshape(d) for t in grid.nodes])


def del_residual_quadratic(L: QuadraticLagrangian, s: Stencil, x: Path) -> np.ndarray:
    """Discrete Euler-Lagrange residual Theta(x) at every node (double-sum form)."""
    _check_step(s, x.grid)
    grid, N, d, M = x.grid, s.N, L.d, x.grid.M
    c = s.c
    t = grid.nodes
    eps = grid.eps
    out = np.zeros((M + 1, d), dtype=complex)
    ks = np.arange(M + 1)
    # P term: sum over |l| <= 2N, |j| <= N, |l+j| <= N of
    # c_{l+j} c_j chi_j(t) chi_{-l}(t) P(t - j*eps) x(t + l*eps)
    for l in range(-2 * N, 2 * N + 1):
        mask_l = (ks + l >= 0) & (ks + l <= M)
        if not mask_l.any():
            continue
        kk = ks[mask_l]
        contrib = np.zeros((kk.size, d), dtype=complex)
        for j in range(max(-N, -l - N), min(N, -l + N) + 1):
            mask_j = (kk - j >= 0) & (kk - j <= M)
            if not mask_j.any():
                continue
            w = c[l + j + N] * c[j + N]
            for idx in np.nonzero(mask_j)[0]:
                k = kk[idx]
                P, _, _ = L.coeffs_at(t[k] - j * eps)
                contrib[idx] += w * (P @ x.values[k + l])
        out[kk] += contrib
    # Q term and sources
    for k in range(M + 1):
        _, Q, _ = L.coeffs_at(t[k])
        out[k] += Q @ x.values[k] + np.asarray(L.J2(t[k]), dtype=complex).reshape(d)
    # R term: sum over |l| <= N of chi_{-l}(t) (c_l R(t) - c_{-l} R(t + l*eps)) x(t + l*eps)
    for k in range(M + 1):
        _, _, Rk = L.coeffs_at(t[k])
        acc = np.zeros(d, dtype=complex)
        for l in range(-N, N + 1):
            if not 0 <= k + l <= M:
                continue
            _, _, Rkl = L.coeffs_at(t[k] + l * eps)
            acc += (c[l + N] * Rk - c[-l + N] * Rkl) @ x.values[k + l]
        out[k] += acc
    out += apply(s, _sample_vector(L.J1, grid, d), direction=-1)
    return out


def del_residual_composed(L: QuadraticLagrangian, s: Stencil, x: Path) -> np.ndarray:
    """Theta(x) via the operator-composition route (independent of the double sum).

    Applies the -eps operator to the sampled momentum P*Dx - R*x + J1 and adds
    Q*x + R*Dx + J2; agrees with del_residual_quadratic to rounding.
    """
    _check_step(s, x.grid)
    grid, d = x.grid, L.d
    v = apply(s, x.values, direction=+1)
    t = grid.nodes
    momentum = np.zeros_like(v)
    force = np.zeros_like(v)
    for k in range(grid.M + 1):
        P, Q, R = L.coeffs_at(t[k])
        momentum[k] = P @ v[k] - R @ x.values[k] + np.asarray(L.J1(t[k]), dtype=complex).reshape(d)
        force[k] = Q @ x.values[k] + R @ v[k] + np.asarray(L.J2(t[k]), dtype=complex).reshape(d)
    return apply(s, momentum, direction=-1) + force


def cel_discretized_residual(L: QuadraticLagrangian, s: Stencil, x: Path) -> np.ndarray:
    """A-posteriori discretization of the classical residual.

    Replaces x' and x'' by Dx and D(Dx) in the classical Euler-Lagrange
    expression; the time-derivative callables of the coefficients are needed.
    """
    L._require_derivatives()
    _check_step(s, x.grid)
    grid, d = x.grid, L.d
    v = apply(s, x.values, direction=+1)
    vv = apply(s, v, direction=+1)
    t = grid.nodes
    out = np.zeros_like(v)
    for k in range(grid.M + 1):
        P, Q, R = L.coeffs_at(t[k])
        dP = np.asarray(L.dP(t[k]), dtype=complex).reshape(d, d)
        dR = np.asarray(L.dR(t[k]), dtype=complex).reshape(d, d)
        out[k] = (-P @ vv[k] + (-dP + 2 * R) @ v[k] + (dR + Q) @ x.values[k]
                  - np.asarray(L.dJ1(t[k]), dtype=complex).reshape(d)
                  + np.asarray(L.J2(t[k]), dtype=complex).reshape(d))
    return out


def del_residual_general(L: GeneralLagrangian, s: Stencil, x: Path) -> np.ndarray:
    """Intrinsic discrete residual D_{-eps}[dL/dv(t, x, Dx)] + dL/dx(t, x, Dx)."""
    _check_step(s, x.grid)
    grid, d = x.grid, L.d
    v = apply(s, x.values, direction=+1)
    t = grid.nodes
    grad_v = np.array([np.asarray(L.dLdv(t[k], x.values[k], v[k]), dtype=complex).reshape(d)
                       for k in range(grid.M + 1)])
    grad_x = np.array([np.asarray(L.dLdx(t[k], x.values[k], v[k]), dtype=complex).reshape(d)
                       for k in range(grid.M + 1)])
    return apply(s, grad_v, direction=-1) + grad_x


def discrete_action(L: QuadraticLagrangian, s: Stencil, x: Path):
    """Left-rectangle quadrature of the sampled density over [a, b]."""
    _check_step(s, x.grid)
    grid = x.grid
    v = apply(s, x.values, direction=+1)
    t = grid.nodes
    total = 0.0 + 0.0j
    for k in range(grid.M):
        total += evaluate(L, t[k], x.values[k], v[k])
    return grid.eps * total


# -- presets ---------------------------------------------------------------

def harmonic(p: float = 1.0, q: float = -1.0) -> QuadraticLagrangian:
    """1-d oscillator density p/2 v^2 + q/2 x^2."""
    return QuadraticLagrangian.build(1, P=p, Q=q, dP=0.0, dR=0.0, dJ1=[0.0])


def free_particle() -> QuadraticLagrangian:
    return QuadraticLagrangian.build(1, P=1.0, Q=0.0, dP=0.0, dR=0.0, dJ1=[0.0])


def lq2d() -> QuadraticLagrangian:
    """2-d example with constant P = Q = I and rotational coupling R."""
    R = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return QuadraticLagrangian.build(2, P=np.eye(2), Q=np.eye(2), R=R,
                                     dP=np.zeros((2, 2)), dR=np.zeros((2, 2)), dJ1=np.zeros(2))


PRESETS = {"harmonic": harmonic, "free": free_particle, "lq2d": lq2d}


def preset(key: str, **kwargs) -> QuadraticLagrangian:
    try:
        return PRESETS[key](**kwargs)
    except KeyError:
        raise KeyError(f"unknown lagrangian preset {key!r}; known: {', '.join(PRESETS)}") from None


def lagrangian_from_json(obj: dict) -> QuadraticLagrangian:
    """Constant-coefficient lagrangian from {"P": [[..]], "Q": [[..]], ...}."""
    P = np.asarray(obj["P"], dtype=float)
    d = P.shape[0]
    Q = np.asarray(obj.get("Q", np.zeros((d, d))), dtype=float)
    R = np.asarray(obj.get("R", np.zeros((d, d))), dtype=float)
    J1 = np.asarray(obj.get("J1", np.zeros(d)), dtype=float)
    J2 = np.asarray(obj.get("J2", np.zeros(d)), dtype=float)
    J3 = float(obj.get("J3", 0.0))
    return QuadraticLagrangian.build(d, P=P, Q=Q, R=R, J1=J1, J2=J2, J3=J3,
                                     dP=np.zeros((d, d)), dR=np.zeros((d, d)), dJ1=np.zeros(d))
