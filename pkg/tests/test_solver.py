import numpy as np
import pytest

import scalevar as sv
from scalevar.lagrangian import QuadraticLagrangian, free_particle, harmonic, lq2d
from scalevar.solver import (
    SingularSystemError,
    assemble,
    general_oscillation_test,
    oscillator_char_poly,
    solve_bvp,
    unit_modulus_roots,
)


def family_stencil(k, eps):
    return sv.Stencil((-0.5 + 1j * k, -2j * k, 0.5 + 1j * k), eps)


class TestAssembly:
    @pytest.mark.parametrize("name,L", [("symmetric", harmonic(1.0, -1.0)),
                                        ("cresson", harmonic(1.0, -1.0)),
                                        ("symmetric", lq2d())])
    def test_matvec_reproduces_theta(self, name, L):
        rng = np.random.default_rng(0)
        grid = sv.Grid(0, 1, 20)
        s = sv.named_stencil(name, grid.eps)
        alpha = rng.standard_normal(L.d)
        beta = rng.standard_normal(L.d)
        system = assemble(L, s, grid, alpha, beta)
        vals = rng.standard_normal((21, L.d)).astype(complex)
        vals[0], vals[-1] = alpha, beta
        theta = sv.del_residual_quadratic(L, s, sv.Path(grid, vals))
        residual = system.matvec(vals[1:-1].ravel()) - system.rhs
        assert np.max(np.abs(residual - theta[1:-1].ravel())) <= 1e-10

    def test_bandwidth(self):
        grid = sv.Grid(0, 1, 20)
        system = assemble(lq2d(), sv.named_stencil("symmetric", grid.eps), grid,
                          np.zeros(2), np.zeros(2))
        assert system.n == 19 * 2
        assert system.bandwidth == 2 * 1 * 2 + 2 - 1
        # no entries outside the declared band
        for i in range(system.n):
            for j in range(system.n):
                if abs(i - j) > system.bandwidth:
                    assert system.matrix[i, j] == 0


class TestBoundaryValueSolve:
    def test_interior_residual_vanishes(self):
        grid = sv.Grid(0, 1, 40)
        s = sv.named_stencil("symmetric", grid.eps)
        path = solve_bvp(harmonic(1.0, -1.0), s, grid, [0.0], [1.0])
        theta = sv.del_residual_quadratic(harmonic(1.0, -1.0), s, path)
        assert np.max(np.abs(theta[1:-1])) <= 1e-8
        assert path.values[0, 0] == 0.0 and path.values[-1, 0] == 1.0

    def test_free_particle_forward_difference_exact(self):
        # the composed forward/backward pair gives the standard second
        # difference, so the straight line solves the system exactly
        grid = sv.Grid(0, 1, 50)
        s = sv.named_stencil("forward", grid.eps)
        path = solve_bvp(free_particle(), s, grid, [0.0], [1.0])
        assert np.max(np.abs(path.values[:, 0] - grid.nodes)) <= 1e-10

    def test_forced_parabola_forward_difference_exact(self):
        L = QuadraticLagrangian.build(1, P=1.0, Q=0.0, J2=[2.0],
                                      dP=0.0, dR=0.0, dJ1=[0.0])
        grid = sv.Grid(0, 1, 40)
        s = sv.named_stencil("forward", grid.eps)
        path = solve_bvp(L, s, grid, [0.0], [0.0])
        np.testing.assert_allclose(path.values[:, 0], grid.nodes * (grid.nodes - 1),
                                   atol=1e-12)

    def test_harmonic_forward_difference_second_order(self):
        errs = []
        for M in (50, 100, 200):
            grid = sv.Grid(0, 1, M)
            s = sv.named_stencil("forward", grid.eps)
            path = solve_bvp(harmonic(1.0, -1.0), s, grid, [0.0], [np.sin(1)])
            errs.append(float(np.max(np.abs(path.values[:, 0] - np.sin(grid.nodes)))))
        assert 3.5 <= errs[0] / errs[1] <= 4.5
        assert 3.5 <= errs[1] / errs[2] <= 4.5

    def test_complex_stencil_solve(self):
        grid = sv.Grid(0, 1, 30)
        s = sv.named_stencil("cresson", grid.eps)
        path = solve_bvp(harmonic(1.0, -1.0), s, grid, [0.0], [1.0])
        theta = sv.del_residual_quadratic(harmonic(1.0, -1.0), s, path)
        assert np.max(np.abs(theta[1:-1])) <= 1e-8

    def test_dimension_mismatch(self):
        grid = sv.Grid(0, 1, 10)
        with pytest.raises(ValueError):
            solve_bvp(lq2d(), sv.named_stencil("symmetric", grid.eps), grid,
                      np.zeros(2), np.zeros(3))

    def test_singular_system_reported(self):
        L = QuadraticLagrangian.build(1, P=0.0, Q=0.0)
        grid = sv.Grid(0, 1, 10)
        with pytest.raises(SingularSystemError):
            solve_bvp(L, sv.named_stencil("forward", grid.eps), grid, [0.0], [0.0])


class TestCharPolynomial:
    def test_symmetry(self):
        # lambda^4 D(1/lambda) = D(lambda)
        rng = np.random.default_rng(2)
        s = sv.named_stencil("cresson", 0.3)
        cp = oscillator_char_poly(s, 1.0, -2.0, 0.3)
        for _ in range(20):
            lam = complex(rng.standard_normal(), rng.standard_normal())
            assert lam ** 4 * cp.D(1 / lam) == pytest.approx(cp.D(lam), rel=1e-10)

    def test_mu_reduction(self):
        # lambda^2 E(lambda + 1/lambda) = D(lambda)
        rng = np.random.default_rng(5)
        s = family_stencil(0.8, 0.2)
        cp = oscillator_char_poly(s, 2.0, -1.0, 0.2)
        for _ in range(20):
            lam = complex(rng.standard_normal(), rng.standard_normal())
            lhs = lam ** 2 * cp.E(lam + 1 / lam)
            assert lhs == pytest.approx(cp.D(lam), rel=1e-10)

    def test_symmetric_stencil_coefficients(self):
        # omega = 1, eps = 1/2: quartic (-1/4, 0, 1/4, 0, -1/4), E roots +-sqrt(3)
        cp = oscillator_char_poly(sv.named_stencil("symmetric", 0.5), 1.0, -1.0, 0.5)
        np.testing.assert_allclose(cp.quartic, [-0.25, 0.0, 0.25, 0.0, -0.25], atol=1e-14)
        mus = np.sort(np.roots(cp.quadratic))
        np.testing.assert_allclose(mus, [-np.sqrt(3), np.sqrt(3)], atol=1e-12)

    def test_wide_stencil_rejected(self):
        with pytest.raises(ValueError):
            oscillator_char_poly(sv.Stencil((0, 0, 0, 0, 1), 0.1), 1.0, -1.0, 0.1)

    def test_zero_mass_rejected(self):
        with pytest.raises(ValueError):
            oscillator_char_poly(sv.named_stencil("symmetric", 0.1), 0.0, -1.0, 0.1)


class TestRootModuli:
    def test_symmetric_at_half(self):
        cp = oscillator_char_poly(sv.named_stencil("symmetric", 0.5), 1.0, -1.0, 0.5)
        res = unit_modulus_roots(cp)
        assert res["all_unit"]
        np.testing.assert_allclose(res["moduli"], 1.0, atol=1e-12)

    def test_cresson_under_threshold(self):
        # member k = -1/2 is stable up to eps = 1/(omega*sqrt(2))
        eps = 0.9 / np.sqrt(2)
        cp = oscillator_char_poly(sv.named_stencil("cresson", eps), 1.0, -1.0, eps)
        res = unit_modulus_roots(cp)
        assert res["all_unit"]
        assert np.max(np.abs(res["moduli"] - 1.0)) <= 1e-9

    def test_cresson_above_threshold(self):
        eps = 1.3 / np.sqrt(2)
        cp = oscillator_char_poly(sv.named_stencil("cresson", eps), 1.0, -1.0, eps)
        res = unit_modulus_roots(cp)
        assert not res["all_unit"]

    def test_family_random(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            k = rng.uniform(-3, 3)
            p = rng.uniform(0.2, 2.0)
            q = -rng.uniform(0.2, 2.0)
            omega = np.sqrt(-q / p)
            eps = 0.9 / (omega * np.sqrt(1 + 4 * k * k))
            cp = oscillator_char_poly(family_stencil(k, eps), p, q, eps)
            res = unit_modulus_roots(cp)
            assert len(res["moduli"]) == 4
            assert np.max(np.abs(res["moduli"] - 1.0)) <= 1e-9

    def test_degenerate_forward_quartic(self):
        # gamma_{-1} = 0 kills the quartic's leading term; two finite roots remain
        cp = oscillator_char_poly(sv.named_stencil("forward", 0.1), 1.0, -1.0, 0.1)
        res = unit_modulus_roots(cp)
        assert len(res["roots"]) == 2


class TestOscillationInequalities:
    def test_symmetric_passes(self):
        assert general_oscillation_test(-0.5, 0.0, 0.5)

    def test_family_passes(self):
        for k in (-2.0, -0.5, 0.7, 3.0):
            assert general_oscillation_test(-0.5 + 1j * k, -2j * k, 0.5 + 1j * k)

    def test_forward_fails(self):
        assert not general_oscillation_test(0.0, -1.0, 1.0)

    def test_complex_coefficients_fail(self):
        # non-family complex stencils give a non-real reduced quadratic
        assert not general_oscillation_test(0.3 + 0.2j, -1.1, 0.8 - 0.2j)

    def test_real_off_family_fails(self):
        assert not general_oscillation_test(-0.3, -0.4, 0.7)
