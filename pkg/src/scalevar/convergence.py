"""Empirical convergence checks: operator consistency, residual convergence,
Taylor-remainder kernel bound, and log-log order fits.

"Locally uniformly" is operationalized as the sup over grid nodes in
[a + delta, b - delta]; step lists are of the form (b - a) / M with M doubling
so that every grid aligns with its stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, Path
from .lagrangian import QuadraticLagrangian, cel_residual, del_residual_quadratic
from .stencils import Stencil, apply

EXACT_THRESHOLD = 1e-14


@dataclass
class SweepReport:
    eps: np.ndarray
    errors: np.ndarray
    delta: float
    order: float | None
    verdict: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        errors = np.asarray(self.errors, dtype=float)
        if np.any(errors < 0):
            raise ValueError("errors must be nonnegative")
        if np.any(np.diff(eps) >= 0):
            raise ValueError("eps values must be strictly decreasing")
        self.eps, self.errors = eps, errors


def estimate_order(eps, errors) -> float | str:
    """Least-squares slope of log(error) against log(eps), or "exact"."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.all(errors <= EXACT_THRESHOLD):
        return "exact"
    usable = errors > 0
    if usable.sum() < 3:
        raise ValueError("need at least 3 positive (eps, error) pairs for an order fit")
    slope = np.polyfit(np.log(eps[usable]), np.log(errors[usable]), 1)[0]
    return float(slope)


def _finish_report(eps_list, errors, delta, meta) -> SweepReport:
    fit = estimate_order(eps_list, errors)
    if fit == "exact":
        order, verdict = None, "exact"
    else:
        order = fit
        # non-convergence proxy: error at the smallest step exceeds the largest-step error
        verdict = "converges" if errors[-1] < errors[0] else "diverges"
    return SweepReport(np.asarray(eps_list), np.asarray(errors), delta, order, verdict, meta)


def _check_margin(a, b, M_list, delta, N):
    eps_max = (b - a) / min(M_list)
    if 2 * N * eps_max >= delta:
        raise ValueError(f"margin delta={delta} too small for stencil width at M={min(M_list)}")


def operator_consistency_sweep(stencil_for, fn, dfn, a, b, M_list, delta,
                               direction: int = +1) -> SweepReport:
    """Sup error of the applied operator against the derivative, per step.

    stencil_for maps eps to a Stencil; fn and dfn are smooth callables.  With
    direction=-1 the comparison target is -dfn (the -eps operator limit).
    """
    M_list = sorted(M_list)
    eps_list, errors = [], []
    sample = stencil_for((b - a) / M_list[0])
    _check_margin(a, b, M_list, delta, sample.N)
    sign = 1.0 if direction == +1 else -1.0
    for M in M_list:
        grid = Grid(a, b, M)
        s = stencil_for(grid.eps)
        vals = np.array([fn(t) for t in grid.nodes], dtype=complex)
        approx = apply(s, vals.reshape(M + 1, -1), direction=direction)[:, 0]
        target = sign * np.array([dfn(t) for t in grid.nodes], dtype=complex)
        sl = grid.margin_slice(delta)
        eps_list.append(grid.eps)
        errors.append(float(np.max(np.abs(approx[sl] - target[sl]))))
    return _finish_report(eps_list, errors, delta,
                          {"kind": "operator_consistency", "direction": direction})


def del_convergence_sweep(L_for, stencil_for, fn, dfn, ddfn, a, b, M_list, delta) -> SweepReport:
    """Sup error of Theta(x) against the classical residual, per step.

    L_for maps eps (or None) to a QuadraticLagrangian carrying derivative
    callables; a plain QuadraticLagrangian is accepted as well.
    """
    M_list = sorted(M_list)
    make_L = L_for if callable(L_for) and not isinstance(L_for, QuadraticLagrangian) else (lambda eps: L_for)
    eps_list, errors = [], []
    sample = stencil_for((b - a) / M_list[0])
    _check_margin(a, b, M_list, delta, sample.N)
    for M in M_list:
        grid = Grid(a, b, M)
        s = stencil_for(grid.eps)
        L = make_L(grid.eps)
        x = Path.from_callable(grid, fn)
        theta = del_residual_quadratic(L, s, x)
        sl = grid.margin_slice(delta)
        cel = np.array([cel_residual(L, lambda t: fn(t), lambda t: dfn(t), lambda t: ddfn(t), t)
                        for t in grid.nodes[sl]])
        eps_list.append(grid.eps)
        errors.append(float(np.max(np.abs(theta[sl] - cel))))
    return _finish_report(eps_list, errors, delta, {"kind": "del_convergence"})


def kernel_bound_check(s: Stencil, grid: Grid, delta: float) -> dict:
    """Taylor-remainder kernel sup against its printed upper bound.

    G(s, t) = sum_l (t + l*eps - s) c_l chi_{-l}(t) 1_{[0, l*eps]}(s - t) over
    grid points s in [a, b], t in [a + delta, b - delta]; the bound is
    2 max(|b-a|, 2|a|, 2|b|) ||D 1|| + N eps sum|c_l| + eps sum|l c_l|.
    """
    a, b, M = grid.a, grid.b, grid.M
    eps = grid.eps
    c = s.c
    nodes = grid.nodes
    sl = grid.margin_slice(delta)
    t_nodes = nodes[sl]
    k_t = np.arange(M + 1)[sl]
    sup_g = 0.0
    for kt, t in zip(k_t, t_nodes):
        for ks, sv in enumerate(nodes):
            val = 0.0 + 0.0j
            u = sv - t
            for l in range(-s.N, s.N + 1):
                if not 0 <= kt + l <= M:
                    continue
                lo, hi = min(0.0, l * eps), max(0.0, l * eps)
                if lo - 1e-15 <= u <= hi + 1e-15:
                    val += (t + l * eps - sv) * c[l + s.N]
            sup_g = max(sup_g, abs(val))
    box1 = apply(s, np.ones((M + 1, 1)), direction=+1)[:, 0]
    box1_sup = float(np.max(np.abs(box1[sl])))
    abs_c = np.abs(c)
    ls = np.abs(np.arange(-s.N, s.N + 1))
    bound = (2 * max(abs(b - a), 2 * abs(a), 2 * abs(b)) * box1_sup
             + s.N * eps * float(abs_c.sum()) + eps * float((ls * abs_c).sum()))
    return {"sup_G": sup_g, "bound": float(bound), "holds": bool(sup_g <= bound + 1e-12)}
