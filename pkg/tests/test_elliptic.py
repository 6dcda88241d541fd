"""
Test cases for the shifted elliptic solvers
"""
import logging
import unittest

import numpy as np

from shearlab import app
from shearlab.elliptic import (
    ComplexField,
    apply_operator,
    boundary_d2y_phi,
    boundary_dy_phi,
    h_correction,
    homogeneous_pair,
    oscillatory_integral,
    shifted_derivative,
    solve_phi,
    solve_psi,
    split_derivative,
    tilde_h1_norm,
)
from shearlab.exceptions import DataValidationError, GridMismatch, UnsupportedGeometry
from shearlab.profiles import ChannelGeometry, Grid, ShearFlow, ShearProfile, build_profile

FINITE = ChannelGeometry.finite()


def couette(n_points: int = 1025) -> ShearProfile:
    return build_profile(ShearFlow.couette(), Grid(n_points))


def sine_field(grid: Grid) -> ComplexField:
    return ComplexField(np.sin(np.pi * grid.nodes), grid)


class TestSolvers(unittest.TestCase):
    """Dirichlet and periodic solver Tests"""

    @classmethod
    def setUpClass(cls):
        app.logger.setLevel(logging.CRITICAL)
        cls.profile = couette()
        cls.grid = cls.profile.grid
        cls.middle = cls.grid.n_points // 2

    def test_couette_sine_closed_form(self):
        """It should solve Phi = -sin(pi y) / (1 + pi^2) at k = 1, t = 0"""
        phi = solve_phi(sine_field(self.grid), 1.0, 0.0, self.profile, FINITE)
        self.assertAlmostEqual(phi.values[self.middle].real, -1.0 / (1.0 + np.pi**2), places=6)
        self.assertEqual(phi.values[0], 0.0)
        self.assertEqual(phi.values[-1], 0.0)

    def test_couette_constant_closed_form(self):
        """It should solve w == 1 with cosh profile"""
        w = ComplexField(np.ones(self.grid.n_points), self.grid)
        phi = solve_phi(w, 1.0, 0.0, self.profile, FINITE)
        expected = -1.0 + 1.0 / np.cosh(0.5)
        self.assertAlmostEqual(phi.values[self.middle].real, expected, places=6)

    def test_discrete_residual(self):
        """It should satisfy the discrete equation at interior nodes"""
        profile = build_profile(ShearFlow.sine_perturbed(0.05), Grid(1025))
        w = sine_field(profile.grid)
        phi = solve_phi(w, 4.0 * np.pi, 3.0, profile, FINITE)
        residual = apply_operator(phi, 4.0 * np.pi, 3.0, profile).values - w.values
        self.assertLess(np.max(np.abs(residual[1:-1])), 1e-8)

    def test_second_order_convergence(self):
        """It should converge with order two in the spacing"""
        errors = []
        for n_points in (129, 257):
            profile = couette(n_points)
            phi = solve_phi(sine_field(profile.grid), 1.0, 0.0, profile, FINITE)
            exact = -np.sin(np.pi * profile.grid.nodes) / (1.0 + np.pi**2)
            errors.append(np.max(np.abs(phi.values - exact)))
        order = np.log2(errors[0] / errors[1])
        self.assertGreater(order, 1.8)
        self.assertLess(order, 2.2)

    def test_zero_mode(self):
        """It should refuse k = 0"""
        self.assertRaises(DataValidationError, solve_phi, sine_field(self.grid), 0.0, 0.0, self.profile, FINITE)

    def test_grid_mismatch(self):
        """It should refuse fields from another grid"""
        self.assertRaises(GridMismatch, solve_phi, sine_field(Grid(65)), 1.0, 0.0, self.profile, FINITE)

    def test_linearity(self):
        """It should be linear in w"""
        w = sine_field(self.grid)
        single = solve_phi(w, 2.0, 1.5, self.profile, FINITE).values
        double = solve_phi(w * (2.0 - 1.0j), 2.0, 1.5, self.profile, FINITE).values
        np.testing.assert_allclose(double, (2.0 - 1.0j) * single, atol=1e-12)

    def test_psi_matches_couette_phi(self):
        """It should make Psi coincide with Phi for Couette flow"""
        w = sine_field(self.grid)
        np.testing.assert_allclose(
            solve_psi(w, 1.0, 2.0, FINITE).values,
            solve_phi(w, 1.0, 2.0, self.profile, FINITE).values,
            atol=1e-14,
        )

    def test_periodic_multiplier(self):
        """It should invert a single Fourier mode exactly on the periodic channel"""
        geometry = ChannelGeometry.infinite_periodic(np.pi)
        grid = geometry.grid(64)
        profile = ShearProfile.constant_coefficient(0.0, grid)
        w = ComplexField(np.exp(3j * grid.nodes), grid)
        phi = solve_phi(w, 1.0, 0.5, profile, geometry)
        np.testing.assert_allclose(phi.values, -w.values / (1.0 + 2.5**2), atol=1e-12)

    def test_periodic_needs_constant_g(self):
        """It should refuse a variable g on the periodic channel"""
        geometry = ChannelGeometry.infinite_periodic(np.pi)
        grid = geometry.grid(64)
        base = ShearProfile.constant_coefficient(0.0, grid)
        varying = ShearProfile(
            grid=grid,
            f_values=base.f_values,
            g_values=np.linspace(1.0, 2.0, grid.n_points),
            g_prime_values=base.g_prime_values,
            c_bound=0.5,
            f_sup_norms=base.f_sup_norms,
            y_nodes=base.y_nodes,
        )
        w = ComplexField(np.exp(1j * grid.nodes), grid)
        self.assertRaises(UnsupportedGeometry, solve_phi, w, 1.0, 0.0, varying, geometry)


class TestBoundaryTraces(unittest.TestCase):
    """Homogeneous solutions and boundary derivative Tests"""

    @classmethod
    def setUpClass(cls):
        app.logger.setLevel(logging.CRITICAL)
        cls.profile = couette()
        cls.grid = cls.profile.grid

    def test_homogeneous_pair(self):
        """It should build u1, u2 with unit and zero wall values"""
        pair = homogeneous_pair(1.0, 0.0, self.profile)
        self.assertAlmostEqual(abs(pair.u1.values[0]), 1.0, places=12)
        self.assertAlmostEqual(abs(pair.u1.values[-1]), 0.0, places=12)
        self.assertAlmostEqual(abs(pair.u2.values[0]), 0.0, places=12)
        self.assertAlmostEqual(abs(pair.u2.values[-1]), 1.0, places=12)
        middle = self.grid.n_points // 2
        self.assertAlmostEqual(pair.u1.values[middle].real, np.sinh(0.5) / np.sinh(1.0), places=10)

    def test_homogeneous_phase(self):
        """It should carry the phase exp(i k t (y - y0)) on a t-independent envelope"""
        still = homogeneous_pair(2.0, 0.0, self.profile)
        moving = homogeneous_pair(2.0, 3.0, self.profile)
        np.testing.assert_allclose(np.abs(moving.u1.values), np.abs(still.u1.values), atol=1e-14)
        np.testing.assert_allclose(moving.envelope2, still.envelope2)

    def test_homogeneous_pair_needs_walls(self):
        """It should refuse periodic grids"""
        grid = ChannelGeometry.infinite_periodic(np.pi).grid(64)
        profile = ShearProfile.constant_coefficient(0.0, grid)
        self.assertRaises(UnsupportedGeometry, homogeneous_pair, 1.0, 0.0, profile)

    def test_boundary_dy_phi(self):
        """It should give dy Phi(0) = -pi / (1 + pi^2) for sin(pi y)"""
        pair = homogeneous_pair(1.0, 0.0, self.profile)
        lower, upper = boundary_dy_phi(sine_field(self.grid), 1.0, self.profile, pair)
        self.assertAlmostEqual(lower.real, -np.pi / (1.0 + np.pi**2), places=5)
        self.assertAlmostEqual(upper.real, np.pi / (1.0 + np.pi**2), places=5)

    def test_filon_matches_trapezoid(self):
        """It should agree with the trapezoid rule when nothing oscillates"""
        pair = homogeneous_pair(1.0, 0.0, self.profile)
        w = sine_field(self.grid)
        trapezoid = boundary_dy_phi(w, 1.0, self.profile, pair)
        filon = boundary_dy_phi(w, 1.0, self.profile, pair, quadrature="filon")
        np.testing.assert_allclose(filon, trapezoid, atol=1e-12)
        self.assertRaises(ValueError, boundary_dy_phi, w, 1.0, self.profile, pair, "simpson")

    def test_filon_late_times(self):
        """It should match the finite-difference derivative of the solved Phi at moderate kt"""
        w = sine_field(self.grid)
        pair = homogeneous_pair(1.0, 10.0, self.profile)
        lower, _ = boundary_dy_phi(w, 1.0, self.profile, pair, quadrature="filon")
        phi = solve_phi(w, 1.0, 10.0, self.profile, FINITE)
        slope = self.grid.derivative(phi.values)[0]
        self.assertLess(abs(lower - slope), 5e-3 * abs(lower))

    def test_oscillatory_integral(self):
        """It should integrate exp(-i omega y) exactly for linear amplitudes"""
        grid = Grid(33)
        omega = 50.0
        value = oscillatory_integral(grid.nodes.astype(complex), omega, grid)
        exact = (1j * omega * np.exp(-1j * omega) + np.exp(-1j * omega) - 1.0) / omega**2
        self.assertAlmostEqual(value, exact, places=12)

    def test_second_boundary_derivative(self):
        """It should recover Phi'' = w at the walls for w == 1, t = 0"""
        w = ComplexField(np.ones(self.grid.n_points), self.grid)
        pair = homogeneous_pair(1.0, 0.0, self.profile)
        dy_values = boundary_dy_phi(w, 1.0, self.profile, pair)
        lower, upper = boundary_d2y_phi(w, 1.0, 0.0, self.profile, dy_values)
        self.assertAlmostEqual(lower.real, 1.0, places=10)
        self.assertAlmostEqual(upper.real, 1.0, places=10)

    def test_split_derivative(self):
        """It should leave zero wall data after subtracting H^(1)"""
        w = sine_field(self.grid)
        pair = homogeneous_pair(1.0, 0.0, self.profile)
        phi = solve_phi(w, 1.0, 0.0, self.profile, FINITE)
        dy_values = boundary_dy_phi(w, 1.0, self.profile, pair)
        part, correction = split_derivative(phi, 1, pair, dy_values)
        self.assertLess(abs(part.values[0]), 1e-4)
        self.assertLess(abs(part.values[-1]), 1e-4)
        self.assertAlmostEqual(correction.values[0], dy_values[0], places=12)
        self.assertRaises(ValueError, h_correction, 3, dy_values, pair)

    def test_tilde_h1_norm(self):
        """It should give sqrt(1/2 + pi^2/2) for sin(pi y) at t = 0"""
        self.assertAlmostEqual(
            tilde_h1_norm(sine_field(self.grid), 1.0, 0.0), np.sqrt(0.5 + 0.5 * np.pi**2), places=4
        )


class TestVariableCoefficient(unittest.TestCase):
    """Solver identities for a sheared profile with nonconstant g"""

    @classmethod
    def setUpClass(cls):
        app.logger.setLevel(logging.CRITICAL)
        cls.flow = ShearFlow.sine_perturbed(0.05)
        cls.profile = build_profile(cls.flow, Grid(1025))
        cls.grid = cls.profile.grid

    def _vorticity(self, grid: Grid) -> ComplexField:
        return ComplexField(np.sin(np.pi * grid.nodes) * np.exp(grid.nodes), grid)

    def test_energy_identity(self):
        """It should give Re<-w, Phi/g> = integral of |Phi|^2/g + g |(d/dy / k - i t) Phi|^2"""
        k, t = 2.0, 1.0
        g = self.profile.g_values
        phi = solve_phi(self._vorticity(self.grid), k, t, self.profile, FINITE)
        left = -self.grid.inner(self._vorticity(self.grid).values, phi.values / g).real
        shifted = shifted_derivative(phi, k, t)
        right = self.grid.integrate(np.abs(phi.values) ** 2 / g + g * np.abs(shifted) ** 2).real
        self.assertAlmostEqual(left / right, 1.0, delta=1e-4)

    def test_comparison_with_constant_coefficients(self):
        """It should bound the H1-tilde norm of Phi by that of Psi with a grid-independent constant"""
        k, t = 2.0, 3.0
        ratios = []
        for n_points in (257, 513):
            profile = build_profile(self.flow, Grid(n_points))
            w = self._vorticity(profile.grid)
            phi = solve_phi(w, k, t, profile, FINITE)
            psi = solve_psi(w, k, t, FINITE)
            ratios.append(tilde_h1_norm(phi, k, t) / tilde_h1_norm(psi, k, t))
        self.assertLess(abs(ratios[0] - ratios[1]), 1e-3 * ratios[1])
        self.assertGreater(ratios[1], 1.0 / 3.0)
        self.assertLess(ratios[1], 3.0)

    def test_homogeneous_solutions(self):
        """It should make apply_operator vanish on u1, u2 and H^(1) up to O(h^2)"""
        k, t = 2.0, 1.5
        residuals = []
        for n_points in (257, 513):
            profile = build_profile(self.flow, Grid(n_points))
            pair = homogeneous_pair(k, t, profile)
            self.assertAlmostEqual(abs(pair.u1.values[0]), 1.0, places=12)
            self.assertAlmostEqual(abs(pair.u2.values[-1]), 1.0, places=12)
            correction = h_correction(1, (0.3 + 0.2j, -1.1), pair)
            residuals.append(
                max(
                    np.max(np.abs(apply_operator(field, k, t, profile).values[1:-1]))
                    for field in (pair.u1, pair.u2, correction)
                )
            )
        self.assertLess(residuals[1], 1e-3)
        self.assertGreater(residuals[0] / residuals[1], 3.0)

    def test_boundary_traces(self):
        """It should match the wall slopes of the solved Phi when g varies"""
        k, t = 2.0, 1.0
        w = self._vorticity(self.grid)
        pair = homogeneous_pair(k, t, self.profile)
        phi = solve_phi(w, k, t, self.profile, FINITE)
        slopes = self.grid.derivative(phi.values)[[0, -1]]
        for quadrature in ("trapezoid", "filon"):
            traces = boundary_dy_phi(w, k, self.profile, pair, quadrature=quadrature)
            for trace, slope in zip(traces, slopes):
                self.assertLess(abs(trace - slope), 1e-3 * abs(trace))
