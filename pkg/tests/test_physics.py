"""Physics oracle tests: formula structure, closed-form values, monotonicity."""

import math

import numpy as np
import pytest

from coilscope.physics import (COPPER_RESISTIVITY, MU0, CoilGeometry,
                               GeometryError, oracle_inductance,
                               oracle_quality, series_resistance, skin_depth)


def make_coil(**overrides):
    base = dict(shape="circular", turns=10, outer_diameter_m=30e-3,
                inner_diameter_m=10e-3, wire_radius_m=0.3e-3)
    base.update(overrides)
    return CoilGeometry(**base)


class TestInductance:
    def test_turns_squared_law(self):
        l1 = oracle_inductance(make_coil(turns=1))
        l2 = oracle_inductance(make_coil(turns=2))
        assert l2 / l1 == pytest.approx(4.0, rel=1e-12)

    def test_circular_closed_form_fixture(self):
        # frozen from direct evaluation of the current-sheet formula:
        # d_avg = 20 mm, rho = 0.5, L = mu0*100*0.02/2 * (ln(4.92) + 0.05)
        g = make_coil()
        expected = (MU0 * 100 * 0.02 / 2.0) * (math.log(2.46 / 0.5) + 0.20 * 0.25)
        assert oracle_inductance(g) == pytest.approx(expected, rel=1e-12)
        assert oracle_inductance(g) == pytest.approx(2.065042402805395e-06, rel=1e-9)

    def test_square_wheeler_form(self):
        g = make_coil(shape="square")
        expected = 2.34 * MU0 * 100 * 0.02 / (1.0 + 2.75 * 0.5)
        assert oracle_inductance(g) == pytest.approx(expected, rel=1e-12)

    def test_core_multiplier(self):
        bare = oracle_inductance(make_coil())
        cored = oracle_inductance(make_coil(has_core=True, core_mu_eff=5.0))
        assert cored == pytest.approx(5.0 * bare, rel=1e-12)

    def test_frequency_independent(self):
        g = make_coil()
        assert oracle_inductance(g) == oracle_inductance(g)


class TestQuality:
    def test_copper_skin_depth_at_6_78_mhz(self):
        delta = skin_depth(COPPER_RESISTIVITY, 6.78e6)
        assert delta == pytest.approx(25e-6, rel=0.02)

    def test_q_scales_sqrt_f_in_skin_regime(self):
        # thick wire so r >> 2*delta at both frequencies
        g = make_coil(wire_radius_m=1.0e-3, turns=4, outer_diameter_m=40e-3,
                      inner_diameter_m=20e-3)
        f = 10e6
        assert g.wire_radius_m > 2 * skin_depth(g.resistivity, f)
        q1 = oracle_quality(g, f)
        q4 = oracle_quality(g, 4 * f)
        assert q4 / q1 == pytest.approx(2.0, rel=1e-9)

    def test_dc_regime_clamps(self):
        g = make_coil(wire_radius_m=0.12e-3, turns=3, outer_diameter_m=20e-3,
                      inner_diameter_m=8e-3)
        f = 50e3
        assert g.wire_radius_m <= 2 * skin_depth(g.resistivity, f)
        r_dc = g.resistivity * (g.turns * math.pi * g.avg_diameter_m) \
            / (math.pi * g.wire_radius_m ** 2)
        assert series_resistance(g, f) == pytest.approx(r_dc, rel=1e-12)

    def test_q_strictly_increasing_in_f(self):
        g = make_coil()
        freqs = np.logspace(4, 8, 30)
        qs = [oracle_quality(g, f) for f in freqs]
        assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_core_loss_penalty(self):
        bare = make_coil()
        cored = make_coil(has_core=True, core_mu_eff=3.0)
        f = 1e6
        assert series_resistance(cored, f) == pytest.approx(
            1.2 * series_resistance(bare, f), rel=1e-12)

    def test_nonpositive_frequency_rejected(self):
        with pytest.raises(GeometryError):
            oracle_quality(make_coil(), 0.0)


class TestGeometryInvariants:
    def test_inverted_diameters_rejected(self):
        with pytest.raises(GeometryError, match="d_in"):
            make_coil(inner_diameter_m=40e-3)

    def test_turns_do_not_fit_rejected(self):
        with pytest.raises(GeometryError, match="fit"):
            make_coil(turns=50, wire_radius_m=0.5e-3)

    def test_zero_turns_rejected(self):
        with pytest.raises(GeometryError, match="turns"):
            make_coil(turns=0)

    def test_bad_shape_rejected(self):
        with pytest.raises(GeometryError, match="shape"):
            make_coil(shape="hexagonal")
