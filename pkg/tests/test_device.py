import math

import pytest
from hypothesis import given, strategies as st

from xbarsim.device import (
    CellRecord,
    DeviceParams,
    accessed_current,
    calibrate_access_resistance,
    cell_current,
)
from xbarsim.errors import InfeasibleCalibrationError, InvalidParameterError

V_BL = 0.1
R_LRS = 10e3
R_HRS = 3e9
LRS_TARGET = 7.87e-6


@pytest.fixture
def params():
    return DeviceParams()


def test_calibration_matches_direct_arithmetic():
    # independent recomputation of the series resistance
    expected = V_BL / LRS_TARGET - R_LRS
    got = calibrate_access_resistance(LRS_TARGET, V_BL, R_LRS)
    assert got == pytest.approx(expected, rel=1e-15)
    assert got == pytest.approx(2706.48, rel=1e-4)


def test_calibration_halving_current_doubles_total_resistance():
    assert calibrate_access_resistance(5e-6, V_BL, R_LRS) == pytest.approx(R_LRS)


def test_calibration_infeasible_at_ohmic_limit():
    # 100 mV / 10 kohm is already 10 uA; asking for 10 uA leaves no series room
    with pytest.raises(InfeasibleCalibrationError):
        calibrate_access_resistance(10e-6, V_BL, R_LRS)
    with pytest.raises(InfeasibleCalibrationError):
        calibrate_access_resistance(20e-6, V_BL, R_LRS)


def test_calibration_rejects_nonpositive_inputs():
    for args in [(0.0, V_BL, R_LRS), (1e-6, 0.0, R_LRS), (1e-6, V_BL, -1.0)]:
        with pytest.raises(InvalidParameterError):
            calibrate_access_resistance(*args)


def test_accessed_lrs_current_hits_calibration_target(params):
    cell = CellRecord.for_bit(1, params)
    assert cell_current(cell, params, accessed=True) == pytest.approx(
        LRS_TARGET, rel=1e-12
    )


def test_accessed_hrs_current(params):
    cell = CellRecord.for_bit(0, params)
    expected = V_BL / (R_HRS + params.r_on_access)
    got = cell_current(cell, params, accessed=True)
    assert got == pytest.approx(expected, rel=1e-15)
    assert got == pytest.approx(33.3e-12, rel=0.01)


def test_unaccessed_currents_are_the_calibrated_constants(params):
    assert cell_current(CellRecord.for_bit(0, params), params, accessed=False) == 28e-12
    assert cell_current(CellRecord.for_bit(1, params), params, accessed=False) == 774e-12


def test_unaccessed_current_independent_of_access_resistance():
    for r_on in (0.0, 1e3, 1e6):
        p = DeviceParams(r_on_access=r_on)
        assert cell_current(CellRecord.for_bit(1, p), p, accessed=False) == 774e-12
        assert cell_current(CellRecord.for_bit(0, p), p, accessed=False) == 28e-12


def test_zero_bias_gives_zero_current():
    p = DeviceParams(v_bl_precharge=0.0, r_on_access=2706.48)
    for bit in (0, 1):
        assert cell_current(CellRecord.for_bit(bit, p), p, accessed=True) == 0.0


@given(
    r_lo=st.floats(min_value=1.0, max_value=1e10),
    factor=st.floats(min_value=1.000001, max_value=1e6),
)
def test_accessed_current_strictly_decreasing_in_resistance(r_lo, factor):
    p = DeviceParams()
    r_hi = r_lo * factor
    assert accessed_current(r_lo, p) > accessed_current(r_hi, p)


def test_cell_record_invariants(params):
    with pytest.raises(InvalidParameterError):
        CellRecord(bit=1, resistance=0.0)
    with pytest.raises(InvalidParameterError):
        CellRecord(bit=2, resistance=1e4)
    assert CellRecord.for_bit(1, params).resistance == R_LRS
    assert CellRecord.for_bit(0, params).resistance == R_HRS


def test_param_invariants_enforced():
    with pytest.raises(InvalidParameterError):
        DeviceParams(r_lrs=1e9, r_hrs=1e4)  # ordering flipped
    with pytest.raises(InvalidParameterError):
        DeviceParams(leak_unaccessed_lrs=1e-12, leak_unaccessed_hrs=2e-12)
    with pytest.raises(InvalidParameterError):
        DeviceParams(v_write_reset=0.05)  # reset must be negative
    with pytest.raises(InvalidParameterError):
        DeviceParams(v_write_set=0.05)  # set must exceed the precharge level


def test_default_leakage_far_below_signal(params):
    # six orders of magnitude between signal and leakage keeps doubles safe
    signal = cell_current(CellRecord.for_bit(1, params), params, accessed=True)
    leak = cell_current(CellRecord.for_bit(1, params), params, accessed=False)
    assert signal / leak > 1e3
    assert math.isfinite(signal / leak)
