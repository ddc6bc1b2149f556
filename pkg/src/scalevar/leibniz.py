"""Product-rule coefficients and identity checks for two-point operators.

For W = r*fwd + s*bwd and Wt = r'*fwd + s'*bwd (fwd/bwd the Euler difference
operators), the product rule

    W(fg) = W(f) g + f W(g) + d1 W(f)W(g) + d2 Wt(f)W(g)
            + d3 W(f)Wt(g) + d4 Wt(f)Wt(g)

holds with closed-form d coefficients whenever r s' - s r' != 0.  Choosing
the conjugate pair r' = conj(r), s' = conj(s) gives the identity in the form
used for complex scale derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stencils import apply, two_point


class SingularParametersError(ValueError):
    """r s' - s r' vanishes; the coefficient system is singular."""


@dataclass(frozen=True)
class LeibnizCoefficients:
    d1: complex
    d2: complex
    d3: complex
    d4: complex
    r: complex
    s: complex
    rp: complex
    sp: complex
    eps: float

    @property
    def det(self) -> complex:
        """Determinant of the defining 4x4 system, -(r s' - s r')^4."""
        return -((self.r * self.sp - self.s * self.rp) ** 4)

    def system_matrix(self) -> np.ndarray:
        r, s, rp, sp = self.r, self.s, self.rp, self.sp
        return np.array([
            [r * r, r * rp, r * rp, rp * rp],
            [r * s, s * rp, r * sp, rp * sp],
            [r * s, r * sp, s * rp, rp * sp],
            [s * s, s * sp, s * sp, sp * sp],
        ], dtype=complex)

    def system_rhs(self) -> np.ndarray:
        return np.array([self.r * self.eps, 0.0, 0.0, -self.s * self.eps], dtype=complex)

    def system_residual(self) -> float:
        d = np.array([self.d1, self.d2, self.d3, self.d4], dtype=complex)
        return float(np.linalg.norm(self.system_matrix() @ d - self.system_rhs()))


def coefficients(r, s, rp, sp, eps: float) -> LeibnizCoefficients:
    """Closed-form product-rule coefficients for the (r, s), (r', s') pair."""
    r, s, rp, sp = complex(r), complex(s), complex(rp), complex(sp)
    disc = r * sp - s * rp
    if abs(disc) <= 1e-14 * max(1.0, abs(r * sp), abs(s * rp)):
        raise SingularParametersError(f"r*s' - s*r' = {disc} is (numerically) zero")
    delta = disc ** 2
    d1 = eps * (r * sp ** 2 - s * rp ** 2) / delta
    d23 = eps * r * s * (rp - sp) / delta
    d4 = eps * r * s * (s - r) / delta
    return LeibnizCoefficients(d1, d23, d23, d4, r, s, rp, sp, eps)


def product_rule_residual(r, s, rp, sp, f, g, eps: float) -> float:
    """Max deviation of the general product-rule identity on interior nodes.

    f and g are real scalar samples on a shared grid of step eps; the
    maximum runs over nodes where every window of both operators equals 1.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError("f and g must share a grid")
    co = coefficients(r, s, rp, sp, eps)
    W = two_point(co.r, co.s, eps)
    Wt = two_point(co.rp, co.sp, eps)
    wf, wg = apply(W, f), apply(W, g)
    wtf, wtg = apply(Wt, f), apply(Wt, g)
    lhs = apply(W, f * g)
    rhs = wf * g + f * wg + co.d1 * wf * wg + co.d2 * wtf * wg + co.d3 * wf * wtg + co.d4 * wtf * wtg
    M = f.shape[0] - 1
    interior = slice(1, M)
    return float(np.max(np.abs(lhs[interior] - rhs[interior]))) if M > 1 else 0.0


def leibniz_residual(r, s, f, g, conj_pair: bool = True, rp=None, sp=None) -> float:
    """Residual of the product-rule identity with the conjugate companion.

    With conj_pair the companion operator uses (conj(r), conj(s)), which
    requires s/r to be non-real; otherwise explicit (rp, sp) must be given.
    f and g are Path objects or sample arrays over the same grid.
    """
    from .grid import Path

    if isinstance(f, Path):
        eps = f.grid.eps
        f = f.values[:, 0].real
    else:
        raise TypeError("f must be a Path (carries the grid step)")
    g = g.values[:, 0].real if isinstance(g, Path) else np.asarray(g, dtype=float)
    r, s = complex(r), complex(s)
    if conj_pair:
        ratio = s / r
        if abs(ratio.imag) <= 1e-14 * max(1.0, abs(ratio)):
            raise SingularParametersError("s/r is real; the conjugate-pair identity needs s/r not in R")
        rp, sp = np.conj(r), np.conj(s)
    elif rp is None or sp is None:
        raise ValueError("conj_pair=False requires explicit rp and sp")
    return product_rule_residual(r, s, rp, sp, f, g, eps)


def residual_scale(f, g) -> float:
    """max(1, max node |f|*|g|), the relative-residual denominator."""
    fv = f.values if hasattr(f, "values") else np.asarray(f)
    gv = g.values if hasattr(g, "values") else np.asarray(g)
    return float(max(1.0, np.max(np.abs(fv) * np.abs(gv))))
