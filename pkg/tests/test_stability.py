"""
Tests for the stability factors and stability circles.

The N420 values are the 3 GHz datasheet point used throughout the design
examples: S11 0.499<151.5, S21 4.426<51.4, S12 0.084<37.3, S22 0.161<-120.6.
"""
import math
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from lnakit.core import angle_deg
from lnakit.errors import DegenerateCircle, DegenerateDenominator
from lnakit.gain import gamma_in, gamma_out
from lnakit.stability import (
    Port,
    Region,
    determinant,
    mu_factor,
    mu_prime,
    rollett_k,
    stability_circle,
    stability_report,
    stable_region,
)
from lnakit.touchstone import TwoPortS

N420 = TwoPortS.from_polar(
    s11=(0.499, 151.5), s21=(4.426, 51.4), s12=(0.084, 37.3), s22=(0.161, -120.6)
)


class TestDeterminant(unittest.TestCase):

    def test_zero(self):
        self.assertEqual(determinant(TwoPortS(0, 0, 0, 0)), 0)

    def test_diagonal(self):
        self.assertAlmostEqual(determinant(TwoPortS(0.5, 0, 0, 0.5)), 0.25)

    def test_n420(self):
        delta = determinant(N420)
        self.assertAlmostEqual(abs(delta), 0.336, delta=0.002)
        self.assertAlmostEqual(angle_deg(delta), -79.6, delta=0.3)


class TestRollettK(unittest.TestCase):

    def test_n420(self):
        self.assertAlmostEqual(rollett_k(N420), 1.127, delta=0.005)

    def test_unilateral_sentinel(self):
        self.assertEqual(rollett_k(TwoPortS(0.5, 0, 2.0, 0.3)), math.inf)

    def test_lossless_through(self):
        self.assertEqual(rollett_k(TwoPortS(0, 1, 1, 0)), 1.0)


class TestMu(unittest.TestCase):

    def test_n420_is_stable(self):
        self.assertGreater(mu_factor(N420), 1.0)
        self.assertGreater(mu_prime(N420), 1.0)

    def test_zero_matrix_degenerate(self):
        with self.assertRaises(DegenerateDenominator):
            mu_factor(TwoPortS(0, 0, 0, 0))

    def test_criterion_equivalence(self):
        """mu > 1 exactly when K > 1 and |Delta| < 1, away from the margin."""
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(10_000):
            mags = rng.uniform(0.0, 1.5, 4)
            phases = rng.uniform(-np.pi, np.pi, 4)
            s11, s12, s21, s22 = mags * np.exp(1j * phases)
            s = TwoPortS(s11, s12, s21, s22)
            k = rollett_k(s)
            delta = abs(determinant(s))
            mu = mu_factor(s)
            if min(abs(k - 1.0), abs(delta - 1.0), abs(mu - 1.0)) < 1e-9:
                continue
            self.assertEqual(mu > 1.0, k > 1.0 and delta < 1.0, msg=f"S={s}")
            checked += 1
        self.assertGreater(checked, 9_000)


class TestStabilityCircles(unittest.TestCase):

    def test_n420_circles_clear_of_chart(self):
        for port in (Port.LOAD, Port.SOURCE):
            circle = stability_circle(N420, port)
            self.assertTrue(circle.clear_of_unit_disc(), msg=port)

    def test_n420_load_circle_encloses_chart(self):
        circle = stability_circle(N420, Port.LOAD)
        self.assertAlmostEqual(abs(circle.center), 3.108, delta=0.005)
        self.assertAlmostEqual(circle.radius, 4.278, delta=0.005)
        self.assertGreater(circle.radius - abs(circle.center), 1.0)
        self.assertEqual(stable_region(N420, Port.LOAD), Region.INSIDE)

    def test_n420_source_circle_excludes_chart(self):
        circle = stability_circle(N420, Port.SOURCE)
        self.assertAlmostEqual(circle.radius, 2.7305, delta=0.005)
        self.assertGreater(abs(circle.center) - circle.radius, 1.0)
        self.assertEqual(stable_region(N420, Port.SOURCE), Region.OUTSIDE)

    def test_boundary_law(self):
        """Loads on the load circle give |Gamma_in| = 1; sources on the source circle give |Gamma_out| = 1."""
        load = stability_circle(N420, Port.LOAD)
        for gamma_l in load.boundary_points(360):
            self.assertAlmostEqual(abs(gamma_in(N420, gamma_l)), 1.0, delta=1e-9)
        source = stability_circle(N420, Port.SOURCE)
        for gamma_s in source.boundary_points(360):
            self.assertAlmostEqual(abs(gamma_out(N420, gamma_s)), 1.0, delta=1e-9)

    def test_boundary_law_random_devices(self):
        rng = np.random.default_rng(19)
        checked = 0
        while checked < 100:
            s11, s22 = rng.uniform(0.05, 0.95, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi, 2))
            s21 = rng.uniform(0.5, 6.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            s12 = rng.uniform(0.01, 0.3) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            s = TwoPortS(s11, s12, s21, s22)
            delta_sq = abs(determinant(s)) ** 2
            # near-degenerate circles are lines to working precision
            if min(abs(abs(s22) ** 2 - delta_sq), abs(abs(s11) ** 2 - delta_sq)) < 0.05:
                continue
            load = stability_circle(s, Port.LOAD)
            source = stability_circle(s, Port.SOURCE)
            in_mag = np.abs(gamma_in(s, load.boundary_points(180)))
            out_mag = np.abs(gamma_out(s, source.boundary_points(180)))
            self.assertLess(float(np.max(np.abs(in_mag - 1.0))), 1e-9)
            self.assertLess(float(np.max(np.abs(out_mag - 1.0))), 1e-9)
            checked += 1

    def test_unilateral_radius_zero(self):
        s = TwoPortS(0.5, 0, 2.0, 0.3)
        circle = stability_circle(s, Port.LOAD)
        self.assertEqual(circle.radius, 0.0)
        self.assertEqual(stable_region(s, Port.LOAD), Region.OUTSIDE)

    def test_active_input_origin_outside(self):
        """|S11| > 1 and the origin outside the circle: the stable loads are inside."""
        s = TwoPortS(s11=1.2, s12=0.01, s21=1.0, s22=0.5)
        circle = stability_circle(s, Port.LOAD)
        self.assertFalse(circle.encloses_origin())
        self.assertEqual(stable_region(s, Port.LOAD), Region.INSIDE)
        self.assertLess(abs(gamma_in(s, circle.center)), 1.0)

    def test_degenerate_circle(self):
        # |S22|^2 == |Delta|^2
        s = TwoPortS(s11=1.2, s12=0.1, s21=1.0, s22=0.5)
        with self.assertRaises(DegenerateCircle):
            stability_circle(s, Port.LOAD)


class TestStabilityReport(unittest.TestCase):

    def test_n420_unconditional(self):
        report = stability_report(N420)
        self.assertTrue(report.unconditional)
        self.assertTrue(report.geometry_consistent)
        self.assertEqual(report.load_stable_region, Region.INSIDE)
        self.assertEqual(report.source_stable_region, Region.OUTSIDE)

    def test_potentially_unstable(self):
        report = stability_report(TwoPortS(s11=0.9, s12=0.5, s21=10.0, s22=0.9))
        self.assertFalse(report.unconditional)
        self.assertLess(report.mu, 1.0)

    def test_zero_matrix(self):
        report = stability_report(TwoPortS(0, 0, 0, 0))
        self.assertEqual(report.k, math.inf)
        self.assertTrue(report.unconditional)
        self.assertEqual(report.mu, math.inf)
        self.assertIsNone(report.load_circle)
        self.assertIsNone(report.source_circle)


if __name__ == "__main__":
    unittest.main()
