import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from siaflow.errors import (InvalidGas, InvalidGeometry, InvalidPlateCount,
                            InvalidRatio)
from siaflow.resistor import (FlowLaw, ResistorSpec, default_activation_drop,
                              edge_flow, effective_xi, orifice_area,
                              orifice_coefficient,
                              orifice_coefficient_from_ratio, orifice_xi,
                              plate_scaling, resistor_flow, signed_sqrt,
                              single_orifice_flow)

REF = dict(n_plates=1, tube_inner_diameter=4e-3, orifice_diameter=0.98e-3,
           plate_thickness=0.5e-3, tube_length=40e-3)


def ref_spec(**overrides):
    return ResistorSpec(**{**REF, **overrides})


class TestSignedSqrt:
    def test_positive(self):
        assert signed_sqrt(4.0) == 2.0

    def test_negative(self):
        assert signed_sqrt(-4.0) == -2.0

    def test_zero(self):
        assert signed_sqrt(0.0) == 0.0

    @given(st.floats(min_value=1e-12, max_value=1e12))
    def test_odd(self, x):
        assert signed_sqrt(-x) == -signed_sqrt(x)


class TestOrificeXi:
    def test_area_hand_value(self):
        # pi * (0.98 mm)^2 / 4, hand arithmetic
        assert orifice_area(0.98e-3) == pytest.approx(7.543e-7, rel=1e-3)

    def test_xi_hand_value(self):
        spec = ref_spec(discharge_coeff=0.61, gas_density=1.2)
        assert orifice_xi(spec) == pytest.approx(5.94e-7, rel=1e-3)

    def test_density_scaling(self):
        lo = orifice_xi(ref_spec(gas_density=1.2))
        hi = orifice_xi(ref_spec(gas_density=4.8))
        assert hi == pytest.approx(lo / 2.0, rel=1e-12)


class TestSingleOrificeFlow:
    def test_zero_drop(self):
        assert single_orifice_flow(5.94e-7, 0.0) == 0.0

    def test_odd(self):
        assert single_orifice_flow(5.94e-7, -5e4) == -single_orifice_flow(5.94e-7, 5e4)

    def test_hand_value(self):
        assert single_orifice_flow(5.94e-7, 5e4) == pytest.approx(1.33e-4, rel=2e-3)


class TestPlateScaling:
    @pytest.mark.parametrize("n,expected", [(1, 1.0), (4, 2.0), (7, 2.6458)])
    def test_values(self, n, expected):
        assert plate_scaling(n) == pytest.approx(expected, rel=1e-4)

    @pytest.mark.parametrize("n", [0, -1])
    def test_rejects_nonpositive(self, n):
        with pytest.raises(InvalidPlateCount):
            plate_scaling(n)


class TestOrificeCoefficient:
    def test_reference_build(self):
        assert orifice_coefficient_from_ratio(0.245, 0.61) == pytest.approx(14.6, rel=1e-3)
        assert orifice_coefficient(ref_spec()) == pytest.approx(14.6, rel=1e-3)

    def test_half_ratio(self):
        expected = math.sqrt(0.75 * 15.0 / 1.22)
        assert orifice_coefficient_from_ratio(0.5, 0.61) == pytest.approx(expected, rel=1e-12)

    def test_vanishes_at_unity(self):
        assert orifice_coefficient_from_ratio(0.999999, 0.61) < 1e-2

    def test_brute_force_grid(self):
        # same quantity assembled step by step, term by term
        for i in range(1, 90):
            beta = 0.05 + i * 0.01
            if beta >= 0.95:
                break
            term1 = 1.0 - beta * beta
            term2 = 1.0 / beta ** 4 - 1.0
            expected = math.sqrt(term1 * term2 / (2.0 * 0.61))
            got = orifice_coefficient_from_ratio(beta, 0.61)
            assert got == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("beta", [0.0, -0.1, 1.0, 1.5])
    def test_rejects_bad_ratio(self, beta):
        with pytest.raises(InvalidRatio):
            orifice_coefficient_from_ratio(beta)


class TestResistorFlow:
    def test_no_drop_no_flow(self):
        spec = ref_spec(activation_drop=1e3)
        for law in FlowLaw:
            assert resistor_flow(spec, 5e4, 5e4, law) == 0.0

    def test_threshold_blocks_small_drops(self):
        spec = ref_spec(activation_drop=2e3)
        law = FlowLaw.ACTIVATION_THRESHOLD
        assert resistor_flow(spec, 1e3, 0.0, law) == 0.0
        assert resistor_flow(spec, 0.0, 2e3, law) == 0.0
        assert resistor_flow(spec, 2.1e3, 0.0, law) > 0.0

    def test_plate_count_halves_flow(self):
        q1 = resistor_flow(ref_spec(n_plates=1), 5e4, 0.0)
        q4 = resistor_flow(ref_spec(n_plates=4), 5e4, 0.0)
        assert q4 == pytest.approx(q1 / 2.0, rel=1e-12)

    @pytest.mark.parametrize("law", list(FlowLaw))
    def test_odd_in_differential(self, law):
        spec = ref_spec(n_plates=3, activation_drop=1.5e3)
        for d in (10.0, 1e3, 2e3, 5e4):
            fwd = resistor_flow(spec, d, 0.0, law)
            rev = resistor_flow(spec, 0.0, d, law)
            assert rev == -fwd

    @pytest.mark.parametrize("law", list(FlowLaw))
    def test_monotone_in_differential(self, law):
        spec = ref_spec(n_plates=2, activation_drop=1e3)
        drops = [-5e4 + 1e3 * i for i in range(101)]
        flows = [resistor_flow(spec, d, 0.0, law) for d in drops]
        assert all(b >= a for a, b in zip(flows, flows[1:]))

    def test_steady_drop_scales_linearly_with_plates(self):
        # for a fixed flow, the drop solving Q = (xi/sqrt(N)) sqrt(dp)
        # is N * (Q/xi)^2
        q_target = 5e-5
        xi1 = effective_xi(ref_spec(n_plates=1), FlowLaw.SCALED_ORIFICE)
        dp1 = (q_target / xi1) ** 2
        for n in range(1, 8):
            spec = ref_spec(n_plates=n)
            dp = n * (q_target / xi1) ** 2
            assert resistor_flow(spec, dp, 0.0) == pytest.approx(q_target, rel=1e-12)
            assert dp / dp1 == pytest.approx(n, rel=1e-12)

    def test_plain_tube_uses_bore(self):
        tube = ref_spec(n_plates=0)
        xi_tube = effective_xi(tube, FlowLaw.SCALED_ORIFICE)
        ratio = (REF["tube_inner_diameter"] / REF["orifice_diameter"]) ** 2
        assert xi_tube == pytest.approx(orifice_xi(tube) * ratio, rel=1e-12)

    def test_edge_flow_threshold_shift(self):
        assert edge_flow(1.0, 100.0, 164.0) == pytest.approx(8.0)
        assert edge_flow(1.0, 100.0, -164.0) == pytest.approx(-8.0)


class TestSpecValidation:
    def test_orifice_too_wide(self):
        with pytest.raises(InvalidGeometry):
            ref_spec(orifice_diameter=2.5e-3)

    def test_plate_too_thick(self):
        with pytest.raises(InvalidGeometry):
            ref_spec(plate_thickness=4e-3)

    def test_plates_do_not_fit(self):
        # 9 plates need 9 * 4.5 mm = 40.5 mm > 40 mm
        with pytest.raises(InvalidGeometry):
            ref_spec(n_plates=9)

    def test_bad_density(self):
        with pytest.raises(InvalidGas):
            ref_spec(gas_density=0.0)

    def test_negative_plate_count(self):
        with pytest.raises(InvalidGeometry):
            ref_spec(n_plates=-1)

    def test_reference_family_fits(self):
        for n in range(8):
            ref_spec(n_plates=n)


class TestDefaultActivationDrop:
    def test_plain_tube_has_none(self):
        assert default_activation_drop(0, 5e4) == 0.0

    def test_sqrt_scaling_at_rated_input(self):
        assert default_activation_drop(1, 5e4) == pytest.approx(12.95e3)
        assert default_activation_drop(4, 5e4) == pytest.approx(2 * 12.95e3)

    def test_input_pressure_scaling(self):
        assert default_activation_drop(1, 1e5) == pytest.approx(2 * 12.95e3)
