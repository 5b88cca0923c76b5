"""Pydantic request/response models for the simulation service."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class DeviceSection(BaseModel):
    r_lrs: float = 10e3
    r_hrs: float = 3e9
    r_on_access: Optional[float] = None
    leak_unaccessed_lrs: float = 774e-12
    leak_unaccessed_hrs: float = 28e-12
    v_bl_precharge: float = 0.1
    v_write_set: float = 0.4
    v_write_reset: float = -0.15
    lrs_read_target: float = 7.87e-6


class ArraySection(BaseModel):
    rows: Optional[int] = None
    cols: Optional[int] = None
    bits: Optional[list[str]] = None
    compute_rows: list[int] = Field(default_factory=lambda: [0, 1])
    read_row: int = 0


class SenseSection(BaseModel):
    op: str = "XOR"
    i_ref1: Optional[float] = None
    i_ref2: Optional[float] = None
    offset1: Optional[float] = None
    offset2: Optional[float] = None
    invert_a: Optional[bool] = None
    invert_b: Optional[bool] = None
    gate: Optional[str] = None
    invert_out: Optional[bool] = None
    read_ref: Optional[float] = None
    placement: Optional[float] = None


class VariationSection(BaseModel):
    r_sigma_fraction: float = 0.10
    vth_sigma: float = 25e-3
    gm_eff: float = 20e-6
    n_trials: int = 5000
    seed: int = 0


class ScenarioPayload(BaseModel):
    device: DeviceSection = Field(default_factory=DeviceSection)
    array: ArraySection = Field(default_factory=ArraySection)
    sense: SenseSection = Field(default_factory=SenseSection)
    variation: VariationSection = Field(default_factory=VariationSection)

    def to_scenario_dict(self) -> dict[str, dict[str, Any]]:
        """Nested dict form consumed by the scenario runners, with unset
        optional keys dropped."""
        return {
            "device": self.device.model_dump(exclude_none=True),
            "array": self.array.model_dump(exclude_none=True),
            "sense": self.sense.model_dump(exclude_none=True),
            "variation": self.variation.model_dump(exclude_none=True),
        }


class SimRequest(BaseModel):
    scenario: ScenarioPayload = Field(default_factory=ScenarioPayload)
    op: Optional[str] = None


class ColumnOut(BaseModel):
    column: int
    pair: str
    current_a: float
    output: int


class SimResponse(BaseModel):
    op: str
    columns: list[ColumnOut]
    truth_table: Optional[dict[str, int]] = None
    compute_cycles: int


class ScaleRequest(BaseModel):
    device: DeviceSection = Field(default_factory=DeviceSection)
    ratios: list[float]
    vary: Literal["LRS", "HRS"] = "LRS"
    margin: float = 0.0


class ScalePoint(BaseModel):
    ratio: float
    # None encodes "no leakage limit" (unbounded row count).
    max_rows: Optional[int] = None


class ScaleResponse(BaseModel):
    vary: str
    points: list[ScalePoint]


class McRequest(BaseModel):
    scenario: ScenarioPayload = Field(default_factory=ScenarioPayload)
    seed: Optional[int] = None


class McResponse(BaseModel):
    report: dict[str, Any]
    summary: dict[str, Any]


class SpeedupRequest(BaseModel):
    c: int = 256
    n_w: int = 196
    n_i: int = 9
    n_o: list[int] = Field(default_factory=lambda: [64])
    latency_cycles: list[int] = Field(default_factory=lambda: [1])
    baseline_n_o: int = 64


class SpeedupPoint(BaseModel):
    n_o: int
    latency_cycles: int
    ops_per_cycle: float
    speedup: float
    relative_speedup: float
    xornet_speedup: float
    xornet_relative: float


class SpeedupResponse(BaseModel):
    baseline_n_o: int
    baseline_speedup: float
    points: list[SpeedupPoint]


class TensorPayload(BaseModel):
    dims: list[int]
    values: list[float]


class BnnRequest(BaseModel):
    input: TensorPayload
    filters: TensorPayload
    array_cols: int = 64
    device: DeviceSection = Field(default_factory=DeviceSection)


class BnnResponse(BaseModel):
    output_dims: list[int]
    output: list[float]
    oracle_output: list[float]
    raw_equal: bool
    max_rel_diff: float
    compute_cycles: int
    write_pulses: int
