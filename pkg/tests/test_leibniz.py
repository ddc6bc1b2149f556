import numpy as np
import pytest

import scalevar as sv
from scalevar.leibniz import (
    SingularParametersError,
    coefficients,
    leibniz_residual,
    product_rule_residual,
    residual_scale,
)

CRESSON = ((1 - 1j) / 2, (1 + 1j) / 2)


def random_quadruple(rng):
    while True:
        r, s, rp, sp = (complex(a, b) for a, b in rng.standard_normal((4, 2)))
        if abs(r * sp - s * rp) > 0.1:
            return r, s, rp, sp


class TestClosedForm:
    def test_cresson_values(self):
        eps = 0.1
        r, s = CRESSON
        co = coefficients(r, s, np.conj(r), np.conj(s), eps)
        assert co.d1 == pytest.approx(0.5j * eps)
        assert co.d2 == pytest.approx(-0.5j * eps)
        assert co.d3 == pytest.approx(-0.5j * eps)
        assert co.d4 == pytest.approx(-0.5j * eps)

    def test_cresson_det(self):
        r, s = CRESSON
        co = coefficients(r, s, np.conj(r), np.conj(s), 0.1)
        assert co.det == pytest.approx(-1.0)

    def test_matches_direct_solve(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            r, s, rp, sp = random_quadruple(rng)
            co = coefficients(r, s, rp, sp, 0.07)
            d = np.linalg.solve(co.system_matrix(), co.system_rhs())
            np.testing.assert_allclose([co.d1, co.d2, co.d3, co.d4], d, atol=1e-9)

    def test_system_residual_small(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            r, s, rp, sp = random_quadruple(rng)
            co = coefficients(r, s, rp, sp, 0.2)
            assert co.system_residual() <= 1e-10

    def test_singular_parameters(self):
        with pytest.raises(SingularParametersError):
            coefficients(1.0, 2.0, 2.0, 4.0, 0.1)


class TestDeterminant:
    def test_identity_random(self):
        # det of the 4x4 system equals -(r s' - s r')^4
        rng = np.random.default_rng(9)
        for _ in range(100):
            r, s, rp, sp = random_quadruple(rng)
            co = coefficients(r, s, rp, sp, 0.1)
            disc = r * sp - s * rp
            det = np.linalg.det(co.system_matrix())
            assert abs(det + disc ** 4) <= 1e-9 * abs(disc) ** 4


class TestProductRule:
    def test_residual_tiny_random(self):
        rng = np.random.default_rng(14)
        grid = sv.Grid(0, 1, 64)
        for params in (CRESSON, (1 + 1j, 1 - 2j)):
            for _ in range(25):
                f = sv.Path(grid, rng.standard_normal(65))
                g = sv.Path(grid, rng.standard_normal(65))
                res = leibniz_residual(params[0], params[1], f, g)
                assert res <= 1e-12 * residual_scale(f, g)

    def test_explicit_companion_route_agrees(self):
        rng = np.random.default_rng(21)
        grid = sv.Grid(0, 1, 32)
        f = sv.Path(grid, rng.standard_normal(33))
        g = sv.Path(grid, rng.standard_normal(33))
        r, s = CRESSON
        implicit = leibniz_residual(r, s, f, g, conj_pair=True)
        explicit = leibniz_residual(r, s, f, g, conj_pair=False,
                                    rp=np.conj(r), sp=np.conj(s))
        assert implicit == pytest.approx(explicit)

    def test_general_pair_residual(self):
        rng = np.random.default_rng(33)
        r, s, rp, sp = random_quadruple(rng)
        f = rng.standard_normal(41)
        g = rng.standard_normal(41)
        scale = float(max(1.0, np.max(np.abs(f) * np.abs(g))))
        assert product_rule_residual(r, s, rp, sp, f, g, 1 / 40) <= 1e-11 * scale

    def test_real_ratio_rejected(self):
        grid = sv.Grid(0, 1, 8)
        f = sv.Path(grid, np.ones(9))
        with pytest.raises(SingularParametersError):
            leibniz_residual(0.5, 0.5, f, f, conj_pair=True)

    def test_missing_companion_rejected(self):
        grid = sv.Grid(0, 1, 8)
        f = sv.Path(grid, np.ones(9))
        with pytest.raises(ValueError):
            leibniz_residual(*CRESSON, f, f, conj_pair=False)

    def test_requires_path_for_step(self):
        with pytest.raises(TypeError):
            leibniz_residual(*CRESSON, np.ones(9), np.ones(9))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            product_rule_residual(1 + 1j, 1 - 2j, 1 - 1j, 1 + 2j,
                                  np.ones(9), np.ones(8), 0.1)
