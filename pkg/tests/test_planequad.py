import math
import unittest

import numpy as np
from scipy.integrate import quad

from focklab.planequad import (
    AnnulusProfile,
    QuadratureError,
    decays_to_zero,
    envelope_radius,
    integrate_weighted,
    littlewood_paley_ratio,
    log_abs,
    log_integrate_weighted,
    make_grid,
    refine,
    sup_on_annuli,
)
from focklab.symbols import monomial, polynomial


class GridTestCase(unittest.TestCase):
    def test_envelope_closed_form(self) -> None:
        radius = envelope_radius(2.0, 0, 1e-10)

        self.assertAlmostEqual(radius, math.sqrt(math.log(1e10)), places=12)

    def test_envelope_with_growth_reaches_eps(self) -> None:
        p, d, eps = 2.0, 6.0, 1e-8
        radius = envelope_radius(p, d, eps)
        peak = math.sqrt(d / p)

        def log_envelope(r: float) -> float:
            return d * math.log(r) - p * r**2 / 2

        self.assertGreater(radius, peak)
        self.assertAlmostEqual(log_envelope(radius) - log_envelope(peak), math.log(eps), places=8)

    def test_invalid_parameters(self) -> None:
        with self.assertRaises(ValueError):
            make_grid(0, 0)
        with self.assertRaises(ValueError):
            make_grid(2, 0, eps=0.5)
        with self.assertRaises(ValueError):
            make_grid(2, -1)

    def test_refine_doubles_nodes(self) -> None:
        grid = make_grid(2.0, 0)
        finer = refine(grid)

        self.assertEqual(finer.radial_count, 2 * grid.radial_count)
        self.assertEqual(finer.angular_count, 2 * grid.angular_count)
        self.assertEqual(finer.outer_radius, grid.outer_radius)
        self.assertEqual(grid.points().shape, grid.log_weights().shape)

    def test_refine_leaves_gaussian_integrals_unchanged(self) -> None:
        for p, degree in ((1.0, 0), (2.0, 0), (4.0, 0), (2.0, 10)):
            grid = make_grid(p, degree)

            def log_f(z: np.ndarray, p: float = p, degree: int = degree) -> np.ndarray:
                return degree * log_abs(z) - p * np.abs(z) ** 2 / 2

            coarse = integrate_weighted(log_f, grid)
            fine = integrate_weighted(log_f, refine(grid))
            self.assertLess(abs(fine - coarse) / coarse, 1e-10)

    def test_shift_extends_radius(self) -> None:
        self.assertAlmostEqual(
            make_grid(2.0, 0, shift=3.0).outer_radius,
            make_grid(2.0, 0).outer_radius + 3.0,
        )


class IntegrationTestCase(unittest.TestCase):
    def test_log_abs(self) -> None:
        values = log_abs(np.array([0, 1, math.e * 1j], dtype=np.complex128))

        self.assertEqual(values[0], -math.inf)
        np.testing.assert_allclose(values[1:], [0.0, 1.0])

    def test_gaussian_mass(self) -> None:
        # ∫ e^{−p|z|²/2} dA = 2π/p
        for p in (1.0, 2.0, 4.0):
            grid = make_grid(p, 0)
            value = integrate_weighted(lambda z, p=p: -p * np.abs(z) ** 2 / 2, grid)
            self.assertAlmostEqual(value / (2 * math.pi / p), 1.0, places=8)

    def test_polynomial_moment(self) -> None:
        # ∫ |z|^{2n} e^{−|z|²} dA = π·n!
        grid = make_grid(2.0, 10)
        value = integrate_weighted(lambda z: 10 * np.log(np.abs(z)) - np.abs(z) ** 2, grid)

        self.assertAlmostEqual(value / (math.pi * math.factorial(5)), 1.0, places=8)

    def test_zero_integrand(self) -> None:
        grid = make_grid(2.0, 0)

        self.assertEqual(log_integrate_weighted(lambda z: np.full(z.shape, -np.inf), grid), -math.inf)
        self.assertEqual(integrate_weighted(lambda z: np.full(z.shape, -np.inf), grid), 0.0)

    def test_non_finite_integrand_raises(self) -> None:
        grid = make_grid(2.0, 0)

        with self.assertRaises(QuadratureError):
            integrate_weighted(lambda z: np.full(z.shape, np.nan), grid)
        with self.assertRaises(QuadratureError):
            integrate_weighted(lambda z: np.full(z.shape, np.inf), grid)


class AnnulusTestCase(unittest.TestCase):
    def test_sup_on_circles(self) -> None:
        profile = sup_on_annuli(lambda z: np.real(z), [1.0, 2.0, 3.0])

        np.testing.assert_allclose(profile.sup_values, [1.0, 2.0, 3.0])
        self.assertEqual(profile.to_dict()["radii"], [1.0, 2.0, 3.0])

    def test_radii_must_increase(self) -> None:
        with self.assertRaises(ValueError):
            sup_on_annuli(lambda z: np.abs(z), [1.0, 3.0, 2.0])

    def test_decay(self) -> None:
        radii = np.array([2.0, 4.0, 8.0, 16.0])

        self.assertTrue(decays_to_zero(AnnulusProfile(radii, 1 / (1 + radii)), 0.2))
        self.assertFalse(decays_to_zero(AnnulusProfile(radii, np.ones(4)), 0.2))
        self.assertFalse(decays_to_zero(AnnulusProfile(radii, 1 / (1 + radii)), 0.01))


class LittlewoodPaleyTestCase(unittest.TestCase):
    def test_linear_ratio_closed_form(self) -> None:
        # f = z, p = 2: LHS = π, RHS = 2π∫ r(1+r)^{−2} e^{−r²} dr
        radial, _ = quad(lambda r: r / (1 + r) ** 2 * math.exp(-r * r), 0, np.inf, epsrel=1e-12)
        expected = math.pi / (2 * math.pi * radial)
        ratio = littlewood_paley_ratio(monomial(1), 2.0, make_grid(2.0, 2.0))

        self.assertAlmostEqual(ratio / expected, 1.0, places=7)

    def test_ratio_stays_bounded(self) -> None:
        for n in (1, 10, 30):
            ratio = littlewood_paley_ratio(monomial(n), 2.0, make_grid(2.0, 2.0 * n))
            self.assertGreater(ratio, 1 / 50)
            self.assertLess(ratio, 50)

    def test_zero_polynomial_rejected(self) -> None:
        with self.assertRaises(ValueError):
            littlewood_paley_ratio(polynomial([]), 2.0, make_grid(2.0, 0))


if __name__ == "__main__":
    unittest.main()
