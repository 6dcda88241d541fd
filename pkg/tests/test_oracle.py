"""
Test cases for the closed-form Couette and constant-coefficient solutions
"""
import unittest

import numpy as np

from shearlab.diagnostics import fit_power_law
from shearlab.oracle import (
    FourierDatum,
    cc_evolve,
    cc_propagator,
    couette_velocity_multipliers,
    couette_velocity_norms,
    couette_vorticity,
    gaussian_spectrum,
)


class TestCouetteOracle(unittest.TestCase):
    """Couette characteristics Tests"""

    def test_vorticity_is_transported(self):
        """It should evaluate the initial spectrum at eta + k t"""
        value = couette_vorticity(lambda _k, eta: eta**2, 2.0, 1.0, 3.0)
        self.assertEqual(value, 49.0)

    def test_multiplier_at_the_critical_layer(self):
        """It should give |m2| = 1/|k| where eta = k t"""
        _, m2 = couette_velocity_multipliers(1.0, 5.0, 5.0)
        self.assertAlmostEqual(abs(m2), 1.0, places=14)
        m1, _ = couette_velocity_multipliers(2.0, 6.0, 3.0)
        self.assertEqual(m1, 0.0)

    def test_decay_rates(self):
        """It should decay like t^-1 for v1 and t^-2 for v2"""
        spectrum = gaussian_spectrum(1.0)
        eta_grid = np.linspace(-12.0, 12.0, 4001)
        times = np.linspace(10.0, 100.0, 200)
        norms = [couette_velocity_norms(spectrum, 1.0, t, eta_grid) for t in times]
        v1 = fit_power_law([(t, pair[0]) for t, pair in zip(times, norms)], (10.0, 100.0))
        v2 = fit_power_law([(t, pair[1]) for t, pair in zip(times, norms)], (10.0, 100.0))
        self.assertAlmostEqual(v1.exponent, -1.0, delta=0.1)
        self.assertAlmostEqual(v2.exponent, -2.0, delta=0.1)
        self.assertGreater(v2.r_squared, 0.99)

    def test_multiplier_identity(self):
        """It should satisfy |m2| (k^2 + (eta - k t)^2) = |k| off the critical layer"""
        for k, eta, t in ((1.0, 0.3, 2.0), (-2.0, 1.0, 4.5), (3.0, -7.0, 0.5)):
            _, m2 = couette_velocity_multipliers(k, eta, t)
            self.assertAlmostEqual(abs(m2) * (k**2 + (eta - k * t) ** 2), abs(k), places=12)


class TestConstantCoefficientOracle(unittest.TestCase):
    """Arctan propagator Tests"""

    def test_identity_at_time_zero(self):
        """It should be the identity at t = 0"""
        values = cc_propagator(0.7 + 0.2j, 1.5, np.linspace(-3.0, 3.0, 7), 0.0)
        np.testing.assert_allclose(values, 1.0)

    def test_unit_modulus(self):
        """It should preserve the modulus for imaginary strength"""
        values = cc_propagator(0.3j, 2.0, np.linspace(-10.0, 10.0, 41), 7.5)
        np.testing.assert_allclose(np.abs(values), 1.0, atol=1e-14)

    def test_known_value(self):
        """It should give exp(-pi/4) for c = 1, eta = 0, k = 1, t = 1"""
        self.assertAlmostEqual(float(cc_propagator(1.0, 1.0, 0.0, 1.0)), np.exp(-np.pi / 4), places=14)

    def test_evolve_keeps_frequencies(self):
        """It should multiply values and keep (k, eta)"""
        spectrum = [FourierDatum(1.0, 0.0, 2.0 + 0j), FourierDatum(2.0, -1.0, 1j)]
        evolved = cc_evolve(spectrum, 1.0, 1.0)
        self.assertEqual([(d.k, d.eta) for d in evolved], [(1.0, 0.0), (2.0, -1.0)])
        self.assertAlmostEqual(evolved[0].value, 2.0 * np.exp(-np.pi / 4), places=14)
        expected = 1j * np.exp(np.arctan(-1.5) - np.arctan(-0.5))
        self.assertAlmostEqual(evolved[1].value, expected, places=14)

    def test_propagator_solves_its_equation(self):
        """It should satisfy d/dt P = -c P / (1 + (eta/k - t)^2)"""
        c, k, eta, h = 0.7 + 0.4j, 1.5, 2.0, 1.0e-5
        for t in (0.0, 1.3, 7.0):
            slope = (cc_propagator(c, k, eta, t + h) - cc_propagator(c, k, eta, t - h)) / (2.0 * h)
            expected = -c / (1.0 + (eta / k - t) ** 2) * cc_propagator(c, k, eta, t)
            self.assertLess(abs(slope - expected), 1.0e-7 * max(1.0, abs(expected)))
