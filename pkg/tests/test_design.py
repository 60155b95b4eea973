"""
Tests for source / load selection and the end-to-end amplifier design.
"""
import os
import sys
import unittest

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from lnakit import settings
from lnakit.core import PolarForm, angle_deg, db10, undb10
from lnakit.design import (
    DesignSpec,
    Objective,
    conjugate_load,
    design_amplifier,
    load_design_spec,
    load_is_stable,
    mismatch_factor,
    select_source_gamma,
    simultaneous_conjugate_match,
    source_is_stable,
    transducer_gain_grid,
)
from lnakit.errors import (
    ConfigError,
    InfeasibleSpec,
    NoStableLoad,
    NotUnconditionallyStable,
)
from lnakit.gain import (
    available_gain,
    gamma_in,
    gamma_out,
    max_available_gain,
    transducer_gain,
)
from lnakit.matching import StubKind, Topology
from lnakit.noise import NoiseParameters, noise_circle, noise_figure
from lnakit.stability import rollett_k, determinant
from lnakit.touchstone import SweepTable, TwoPortS

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

N420 = TwoPortS.from_polar(
    s11=(0.499, 151.5), s21=(4.426, 51.4), s12=(0.084, 37.3), s22=(0.161, -120.6)
)
N420_SWEEP = SweepTable.from_points([(3e9, N420)])
NOISE = NoiseParameters(f_min=1.5, r_n=0.2, gamma_opt=0.3)
# Potentially unstable: K > 1 but |Delta| > 1
UNSTABLE = TwoPortS(s11=0.9, s12=0.5, s21=10.0, s22=0.9)
# K < 1; the unstable sources lie near the chart edge around 130 deg
CONDITIONAL = TwoPortS.from_polar(s11=(0.6, -60.0), s21=(5.0, 80.0), s12=(0.12, 20.0), s22=(0.6, -40.0))


def polar_close(z, mag, deg, mag_tol, deg_tol):
    diff = (angle_deg(z) - deg + 180.0) % 360.0 - 180.0
    return abs(abs(z) - mag) <= mag_tol and abs(diff) <= deg_tol


class TestConjugateMatch(unittest.TestCase):

    def test_n420_source(self):
        gamma_ms, _ = simultaneous_conjugate_match(N420)
        self.assertTrue(polar_close(gamma_ms, 0.697, -157.0, 0.005, 1.0), msg=str(gamma_ms))

    def test_n420_load(self):
        _, gamma_ml = simultaneous_conjugate_match(N420)
        self.assertTrue(polar_close(gamma_ml, 0.516, 85.0, 0.005, 1.0), msg=str(gamma_ml))

    def test_fixed_point(self):
        """Gamma_in(Gamma_ML) = Gamma_MS* and Gamma_out(Gamma_MS) = Gamma_ML*."""
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 1000:
            s11, s22 = rng.uniform(0.0, 0.8, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi, 2))
            s21 = rng.uniform(1.0, 5.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            s12 = rng.uniform(0.005, 0.05) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            s = TwoPortS(s11, s12, s21, s22)
            if not (rollett_k(s) > 1.05 and abs(determinant(s)) < 0.95):
                continue
            gamma_ms, gamma_ml = simultaneous_conjugate_match(s)
            self.assertLess(abs(gamma_ms), 1.0)
            self.assertLess(abs(gamma_ml), 1.0)
            self.assertLess(abs(gamma_in(s, gamma_ml) - gamma_ms.conjugate()), 1e-9)
            self.assertLess(abs(gamma_out(s, gamma_ms) - gamma_ml.conjugate()), 1e-9)
            checked += 1

    def test_requires_unconditional_stability(self):
        with self.assertRaises(NotUnconditionallyStable) as ctx:
            simultaneous_conjugate_match(UNSTABLE)
        self.assertIn("|Delta|", str(ctx.exception))


class TestSourceSelection(unittest.TestCase):

    def test_max_gain(self):
        spec = DesignSpec(frequency_hz=3e9)
        self.assertEqual(select_source_gamma(N420, None, spec), simultaneous_conjugate_match(N420)[0])

    def test_min_noise(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.MIN_NOISE)
        self.assertEqual(select_source_gamma(N420, NOISE, spec), NOISE.gamma_opt)

    def test_noise_parameters_required(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.MIN_NOISE)
        with self.assertRaises(InfeasibleSpec) as ctx:
            select_source_gamma(N420, None, spec)
        self.assertIn("noise parameters required", str(ctx.exception))

    def test_cap_below_minimum(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=1.45)
        with self.assertRaises(InfeasibleSpec):
            select_source_gamma(N420, NOISE, spec)

    def test_cap_at_minimum_gives_optimum(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=NOISE.f_min)
        self.assertEqual(select_source_gamma(N420, NOISE, spec), NOISE.gamma_opt)

    def test_inactive_cap_gives_conjugate_match(self):
        gamma_ms = simultaneous_conjugate_match(N420)[0]
        self.assertGreater(3.0, noise_figure(NOISE, gamma_ms))
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=3.0)
        self.assertEqual(select_source_gamma(N420, NOISE, spec), gamma_ms)

    def test_binding_cap_lands_on_noise_circle(self):
        nf_max = 1.8
        gamma_ms = simultaneous_conjugate_match(N420)[0]
        self.assertGreater(noise_figure(NOISE, gamma_ms), nf_max)
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=nf_max)
        gamma_s = select_source_gamma(N420, NOISE, spec)
        self.assertAlmostEqual(noise_figure(NOISE, gamma_s), nf_max, delta=1e-6)
        self.assertTrue(source_is_stable(N420, gamma_s))

    def test_noise_cap_on_conditionally_stable_device(self):
        self.assertLess(rollett_k(CONDITIONAL), 1.0)
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=1.6)
        gamma_s = select_source_gamma(CONDITIONAL, NOISE, spec)
        self.assertAlmostEqual(noise_figure(NOISE, gamma_s), 1.6, delta=1e-6)
        self.assertTrue(source_is_stable(CONDITIONAL, gamma_s))

        ring = noise_circle(NOISE, 1.6).boundary_points(20_000)
        ring = ring[np.abs(gamma_out(CONDITIONAL, ring)) < 1.0]
        best_on_ring = float(np.max(available_gain(CONDITIONAL, ring)))
        self.assertLessEqual(best_on_ring, available_gain(CONDITIONAL, gamma_s) * (1 + 1e-9))

    def test_noise_cap_crossing_source_stability_circle(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=10.0)
        with self.assertRaises(InfeasibleSpec) as ctx:
            select_source_gamma(CONDITIONAL, NOISE, spec)
        self.assertIn("crosses the source stability circle", str(ctx.exception))

    def test_max_gain_still_needs_unconditional_stability(self):
        with self.assertRaises(NotUnconditionallyStable):
            select_source_gamma(CONDITIONAL, NOISE, DesignSpec(frequency_hz=3e9))


def random_stable_devices(count, seed):
    """Unconditionally stable devices with margin on K and |Delta|."""
    rng = np.random.default_rng(seed)
    devices = []
    while len(devices) < count:
        s11, s22 = rng.uniform(0.1, 0.8, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi, 2))
        s21 = rng.uniform(1.5, 5.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        s12 = rng.uniform(0.01, 0.08) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        s = TwoPortS(s11, s12, s21, s22)
        if rollett_k(s) > 1.05 and abs(determinant(s)) < 0.95:
            devices.append(s)
    return devices


def test_noise_cap_against_polar_grid():
    """On ten devices no feasible source in the capped noise disc beats the boundary search."""
    rng = np.random.default_rng(2024)
    rho = np.linspace(0.0, 1.0, 50)
    theta = np.arange(2000) * (2.0 * np.pi / 2000)
    unit = rho[:, np.newaxis] * np.exp(1j * theta[np.newaxis, :])
    for device in random_stable_devices(10, seed=11):
        noise = NoiseParameters(
            f_min=rng.uniform(1.1, 2.0),
            r_n=rng.uniform(0.1, 0.5),
            gamma_opt=complex(rng.uniform(0.0, 0.6) * np.exp(1j * rng.uniform(-np.pi, np.pi))),
        )
        gamma_ms = simultaneous_conjugate_match(device)[0]
        nf_ms = noise_figure(noise, gamma_ms)
        nf_max = noise.f_min + 0.5 * (nf_ms - noise.f_min)
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=nf_max)

        gamma_s = select_source_gamma(device, noise, spec)
        assert abs(noise_figure(noise, gamma_s) - nf_max) < 1e-6
        best = available_gain(device, gamma_s)

        circle = noise_circle(noise, nf_max)
        disc = (circle.center + circle.radius * unit).ravel()
        disc = disc[np.abs(disc) < 1.0]
        assert disc.size > 90_000
        disc = disc[np.abs(gamma_out(device, disc)) < 1.0]
        grid_best = float(np.max(available_gain(device, disc)))

        assert grid_best <= best * (1 + 1e-9)
        assert db10(best) - db10(grid_best) < 1e-3


class TestLoadSelection(unittest.TestCase):

    def test_conjugate_of_output(self):
        gamma_ms, gamma_ml = simultaneous_conjugate_match(N420)
        self.assertLess(abs(conjugate_load(N420, gamma_ms) - gamma_ml), 1e-9)

    def test_datasheet_source(self):
        gamma_s = PolarForm(0.697, -157.0).to_complex()
        self.assertTrue(polar_close(conjugate_load(N420, gamma_s), 0.516, 85.0, 0.01, 1.0))

    def test_fallback_scan_picks_stable_load(self):
        self.assertFalse(load_is_stable(UNSTABLE, complex(gamma_out(UNSTABLE, 0)).conjugate()))
        gamma_l = conjugate_load(UNSTABLE, 0j)
        self.assertLess(abs(gamma_l), 1.0)
        self.assertTrue(load_is_stable(UNSTABLE, gamma_l))
        _, g_t = transducer_gain_grid(UNSTABLE, 0j, settings.LOAD_SCAN_ANGLES, settings.LOAD_SCAN_RADII)
        self.assertAlmostEqual(transducer_gain(UNSTABLE, 0j, gamma_l), float(np.nanmax(g_t)))

    def test_no_stable_load(self):
        s = TwoPortS(s11=3.0, s12=0.01, s21=1.0, s22=0.5)
        with self.assertRaises(NoStableLoad):
            conjugate_load(s, 0j)

    def test_passive_source_required(self):
        with self.assertRaises(InfeasibleSpec):
            conjugate_load(N420, 1.0)

    def test_grid_shape(self):
        grid, g_t = transducer_gain_grid(N420, 0j, 36, 5)
        self.assertEqual(grid.shape, (36, 5))
        self.assertAlmostEqual(abs(grid[0, 0]), 0.99)
        self.assertFalse(np.any(np.isnan(g_t)))

    def test_grid_reaches_matched_load(self):
        grid, g_t = transducer_gain_grid(N420, 0j, 36, 5)
        self.assertTrue(np.all(grid[:, -1] == 0))
        self.assertAlmostEqual(g_t[0, -1], transducer_gain(N420, 0j, 0j))

    def test_fallback_can_pick_matched_load(self):
        # every load but the centre of the chart is unstable
        s = TwoPortS(s11=0.5, s12=10.0, s21=10.0, s22=0.5)
        grid, g_t = transducer_gain_grid(s, 0j, 36, 5)
        self.assertEqual(int(np.count_nonzero(~np.isnan(g_t))), 36)
        self.assertEqual(conjugate_load(s, 0j), 0j)


class TestMismatch(unittest.TestCase):

    def test_conjugate_is_unity(self):
        g = 0.4 - 0.3j
        self.assertAlmostEqual(mismatch_factor(g, g.conjugate()), 1.0)

    def test_matched_termination(self):
        self.assertAlmostEqual(mismatch_factor(0, 0.5), 0.75)


class TestDesignSpec(unittest.TestCase):

    def test_defaults(self):
        spec = DesignSpec(frequency_hz=3e9)
        self.assertEqual(spec.objective, Objective.MAX_GAIN)
        self.assertEqual(spec.z0, 50.0)
        self.assertEqual(spec.stub_kind, StubKind.OPEN)

    def test_string_enums_coerced(self):
        spec = DesignSpec(frequency_hz=3e9, objective="min_noise", stub_kind="short")
        self.assertIs(spec.objective, Objective.MIN_NOISE)
        self.assertIs(spec.stub_kind, StubKind.SHORT)

    def test_validation(self):
        with self.assertRaises(ConfigError):
            DesignSpec(frequency_hz=0)
        with self.assertRaises(ConfigError):
            DesignSpec(frequency_hz=3e9, nf_max=0.5)
        with self.assertRaises(ConfigError):
            DesignSpec(frequency_hz=3e9, gain_min=0)
        with self.assertRaises(ConfigError):
            DesignSpec(frequency_hz=3e9, z0=-50)
        with self.assertRaises(ConfigError):
            DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP)

    def test_bundled_config(self):
        spec = load_design_spec(os.path.join(REPO_ROOT, "config", "n420_max_gain.cfg"))
        self.assertEqual(spec.frequency_hz, 3e9)
        self.assertEqual(spec.objective, Objective.MAX_GAIN)
        self.assertIsNone(spec.nf_max)
        self.assertAlmostEqual(spec.gain_min, undb10(14.0))


def test_config_file_variants(tmp_path):
    path = tmp_path / "lna.cfg"
    path.write_text("freq=2400MHz\nobjective=gain_at_nf_cap\nnf_max_db=1.2\nstub_kind=short\neps_r=3.38\nh_mm=0.508\n")
    spec = load_design_spec(path)
    assert spec.frequency_hz == 2.4e9
    assert spec.objective is Objective.GAIN_AT_NF_CAP
    assert spec.nf_max == pytest.approx(undb10(1.2))
    assert spec.stub_kind is StubKind.SHORT
    assert spec.eps_r == 3.38
    assert spec.h_mm == 0.508


@pytest.mark.parametrize("body", [
    "objective=max_gain\n",
    "freq=3GHz\ncolour=blue\n",
    "freq=fast\n",
    "freq=3GHz\nobjective=loudest\n",
    "freq=3GHz\nobjective=gain_at_nf_cap\n",
])
def test_config_file_errors(tmp_path, body):
    path = tmp_path / "bad.cfg"
    path.write_text(body)
    with pytest.raises(ConfigError):
        load_design_spec(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_design_spec(tmp_path / "missing.cfg")


class TestDesignAmplifier(unittest.TestCase):

    def test_max_gain_reaches_mag(self):
        report = design_amplifier(N420_SWEEP, None, DesignSpec(frequency_hz=3e9))
        mag = max_available_gain(N420)
        self.assertAlmostEqual(report.gt / mag, 1.0, delta=1e-6)
        self.assertAlmostEqual(report.ga / mag, 1.0, delta=1e-6)
        self.assertAlmostEqual(report.mag, mag)
        self.assertIsNone(report.nf)
        self.assertAlmostEqual(report.input_mismatch, 1.0, delta=1e-9)
        self.assertAlmostEqual(report.output_mismatch, 1.0, delta=1e-9)
        self.assertTrue(report.stability.unconditional)

    def test_networks_present_the_chosen_terminations(self):
        report = design_amplifier(N420_SWEEP, None, DesignSpec(frequency_hz=3e9))
        self.assertEqual(report.source_network.topology, Topology.SERIES_LINE_SHUNT_STUB)
        self.assertLess(abs(report.source_network.achieved_gamma - report.gamma_s), 1e-6)
        self.assertLess(abs(report.load_network.achieved_gamma - report.gamma_l), 1e-6)
        self.assertEqual(set(report.source_lines), {"series_line", "stub"})
        self.assertEqual(report.bias.line.z0, 100.0)

    def test_min_noise_design(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.MIN_NOISE)
        report = design_amplifier(N420_SWEEP, NOISE, spec)
        self.assertEqual(report.gamma_s, NOISE.gamma_opt)
        self.assertAlmostEqual(report.nf, NOISE.f_min)
        self.assertLess(report.gt, max_available_gain(N420))

    def test_noise_cap_design(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=1.8)
        report = design_amplifier(N420_SWEEP, NOISE, spec)
        self.assertAlmostEqual(report.nf, 1.8, delta=1e-6)

    def test_gain_floor(self):
        spec = DesignSpec(frequency_hz=3e9, gain_min=undb10(16.0))
        with self.assertRaises(InfeasibleSpec) as ctx:
            design_amplifier(N420_SWEEP, None, spec)
        self.assertEqual(ctx.exception.stage, "gain")

    def test_noise_cap_violated_by_max_gain(self):
        spec = DesignSpec(frequency_hz=3e9, nf_max=1.8)
        with self.assertRaises(InfeasibleSpec) as ctx:
            design_amplifier(N420_SWEEP, NOISE, spec)
        self.assertEqual(ctx.exception.stage, "noise")
        self.assertIn("gain_at_nf_cap", str(ctx.exception))

    def test_reference_impedance_mismatch(self):
        with self.assertRaises(ConfigError) as ctx:
            design_amplifier(N420_SWEEP, None, DesignSpec(frequency_hz=3e9, z0=75.0))
        self.assertEqual(ctx.exception.stage, "sample")

    def test_unstable_device(self):
        sweep = SweepTable.from_points([(3e9, UNSTABLE)])
        with self.assertRaises(NotUnconditionallyStable) as ctx:
            design_amplifier(sweep, None, DesignSpec(frequency_hz=3e9))
        self.assertEqual(ctx.exception.stage, "source")
        self.assertTrue(str(ctx.exception).startswith("[source]"))

    def assert_terminations_stable(self, report):
        self.assertLess(abs(report.gamma_s), 1.0)
        self.assertLess(abs(report.gamma_l), 1.0)
        self.assertTrue(source_is_stable(report.s, report.gamma_s))
        self.assertTrue(load_is_stable(report.s, report.gamma_l))
        self.assertLess(abs(report.gamma_in), 1.0)
        self.assertLess(abs(report.gamma_out), 1.0)

    def test_min_noise_terminations_are_stable(self):
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.MIN_NOISE)
        self.assert_terminations_stable(design_amplifier(N420_SWEEP, NOISE, spec))

    def test_fallback_load_terminations_are_stable(self):
        sweep = SweepTable.from_points([(3e9, UNSTABLE)])
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.MIN_NOISE)
        with self.assertLogs("lnakit.design", level="WARNING") as logs:
            report = design_amplifier(sweep, NoiseParameters(1.5, 0.2, 0), spec)
        self.assertTrue(any("not a stable load" in line for line in logs.output))
        self.assertIsNone(report.mag)
        self.assert_terminations_stable(report)

    def test_noise_cap_design_on_conditionally_stable_device(self):
        sweep = SweepTable.from_points([(3e9, CONDITIONAL)])
        spec = DesignSpec(frequency_hz=3e9, objective=Objective.GAIN_AT_NF_CAP, nf_max=1.6)
        report = design_amplifier(sweep, NOISE, spec)
        self.assertFalse(report.stability.unconditional)
        self.assertAlmostEqual(report.nf, 1.6, delta=1e-6)
        self.assert_terminations_stable(report)

    def test_max_gain_dominates_random_terminations(self):
        report = design_amplifier(N420_SWEEP, None, DesignSpec(frequency_hz=3e9))
        rng = np.random.default_rng(17)
        gamma_s = rng.uniform(0, 0.99, 1000) ** 0.5 * np.exp(1j * rng.uniform(-np.pi, np.pi, 1000))
        gamma_l = rng.uniform(0, 0.99, 1000) ** 0.5 * np.exp(1j * rng.uniform(-np.pi, np.pi, 1000))
        self.assertTrue(np.all(np.abs(gamma_out(N420, gamma_s)) < 1.0))
        self.assertTrue(np.all(np.abs(gamma_in(N420, gamma_l)) < 1.0))
        self.assertLessEqual(float(np.max(transducer_gain(N420, gamma_s, gamma_l))), report.gt * (1 + 1e-9))


if __name__ == "__main__":
    unittest.main()
