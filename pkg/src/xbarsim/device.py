"""Single-cell conduction and leakage model.

A cell stores one bit as a resistance: low-resistance state (LRS) for '1',
high-resistance state (HRS) for '0'.  Current reaches the cell through an
access device whose on-resistance is a calibrated scalar: it is chosen so
that an accessed LRS cell conducts exactly the configured target current
at the bit-line precharge voltage.

Leakage of unaccessed cells is subthreshold conduction and therefore
nonlinear; no single linear off-resistance reproduces the observed values
for both states at once.  It is modeled as one calibrated constant per
state instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InfeasibleCalibrationError, InvalidParameterError


def calibrate_access_resistance(target_current: float, v_bl: float, r_lrs: float) -> float:
    """Series access-device resistance that makes an accessed LRS cell
    conduct exactly ``target_current`` at bit-line voltage ``v_bl``.

    Raises:
        InvalidParameterError: non-positive inputs.
        InfeasibleCalibrationError: the target would need a non-positive
            series resistance (``v_bl / target_current <= r_lrs``).
    """
    if target_current <= 0.0 or v_bl <= 0.0 or r_lrs <= 0.0:
        raise InvalidParameterError(
            "target_current, v_bl and r_lrs must all be positive"
        )
    r_total = v_bl / target_current
    if r_total <= r_lrs:
        raise InfeasibleCalibrationError(
            f"target {target_current:.4g} A at {v_bl:.4g} V needs total "
            f"resistance {r_total:.6g} ohm <= r_lrs {r_lrs:.6g} ohm"
        )
    return r_total - r_lrs


@dataclass(frozen=True)
class DeviceParams:
    """Calibration constants for cells, access devices and write biasing.

    ``r_on_access`` defaults to None, which calibrates it from
    ``lrs_read_target`` so that the accessed-LRS current hits the target
    exactly.  Pass it explicitly to bypass calibration.
    """

    r_lrs: float = 10e3
    r_hrs: float = 3e9
    r_on_access: float | None = None
    leak_unaccessed_lrs: float = 774e-12
    leak_unaccessed_hrs: float = 28e-12
    v_bl_precharge: float = 0.1
    v_write_set: float = 0.4
    v_write_reset: float = -0.15
    lrs_read_target: float = 7.87e-6

    def __post_init__(self):
        if not (self.r_hrs > self.r_lrs > 0.0):
            raise InvalidParameterError("expected r_hrs > r_lrs > 0")
        if self.r_on_access is None:
            object.__setattr__(
                self,
                "r_on_access",
                calibrate_access_resistance(
                    self.lrs_read_target, self.v_bl_precharge, self.r_lrs
                ),
            )
        if self.r_on_access < 0.0:
            raise InvalidParameterError("r_on_access must be >= 0")
        # >= admits the degenerate zero-leakage operating point
        if not (self.leak_unaccessed_lrs >= self.leak_unaccessed_hrs >= 0.0):
            raise InvalidParameterError(
                "expected leak_unaccessed_lrs >= leak_unaccessed_hrs >= 0"
            )
        # v_bl_precharge = 0 is a degenerate but harmless operating point
        # (zero read current); writes still need a real window around it.
        if not (self.v_write_set > self.v_bl_precharge >= 0.0 > self.v_write_reset):
            raise InvalidParameterError(
                "expected v_write_set > v_bl_precharge >= 0 > v_write_reset"
            )

    def resistance_for_bit(self, bit: int) -> float:
        return self.r_lrs if bit else self.r_hrs


@dataclass(frozen=True)
class CellRecord:
    """One crossbar cell: the stored bit plus its resistive state."""

    bit: int
    resistance: float

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise InvalidParameterError(f"bit must be 0 or 1, got {self.bit!r}")
        if self.resistance <= 0.0:
            raise InvalidParameterError("cell resistance must be positive")

    @classmethod
    def for_bit(cls, bit: int, params: DeviceParams) -> "CellRecord":
        return cls(bit=bit, resistance=params.resistance_for_bit(bit))


def cell_current(cell: CellRecord, params: DeviceParams, accessed: bool) -> float:
    """Current drawn by one cell.

    Accessed (word line asserted): ohmic conduction of the cell in series
    with the access device at the precharge voltage.  Unaccessed: the
    calibrated per-state leakage constant, independent of the access
    device.
    """
    if cell.resistance <= 0.0:
        raise InvalidParameterError("cell resistance must be positive")
    if accessed:
        return params.v_bl_precharge / (cell.resistance + params.r_on_access)
    return params.leak_unaccessed_lrs if cell.bit else params.leak_unaccessed_hrs


def accessed_current(resistance: float, params: DeviceParams) -> float:
    """Conduction current of an accessed cell with the given resistance."""
    if resistance <= 0.0:
        raise InvalidParameterError("resistance must be positive")
    return params.v_bl_precharge / (resistance + params.r_on_access)
