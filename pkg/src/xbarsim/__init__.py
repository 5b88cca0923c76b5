"""Behavioral simulator of a resistive crossbar memory whose modified
current-sense periphery computes XOR/XNOR (and other two-reference
threshold logic) in a single cycle, with robustness and throughput
analytics."""

__version__ = "0.1.0"

from .analysis import (
    McReport,
    VariationSpec,
    max_rows,
    monte_carlo,
    node_voltages,
    sense_margin,
    sweep_on_off_ratio,
)
from .array import BiasVector, CrossbarArray
from .bnn import (
    BinaryTensor,
    ConvSpec,
    ScaleFactors,
    binarize,
    relative_speedup,
    speedup,
    xnor_conv2d_oracle,
    xnor_conv2d_sim,
    xornet_adjusted_speedup,
)
from .device import CellRecord, DeviceParams, calibrate_access_resistance, cell_current
from .sense import (
    CurrentLevels,
    SenseConfig,
    choose_references,
    comparator,
    logic_config,
    nominal_levels,
    sense,
    truth_table,
)

__all__ = [
    "__version__",
    "BiasVector",
    "BinaryTensor",
    "CellRecord",
    "ConvSpec",
    "CrossbarArray",
    "CurrentLevels",
    "DeviceParams",
    "McReport",
    "ScaleFactors",
    "SenseConfig",
    "VariationSpec",
    "binarize",
    "calibrate_access_resistance",
    "cell_current",
    "choose_references",
    "comparator",
    "logic_config",
    "max_rows",
    "monte_carlo",
    "node_voltages",
    "nominal_levels",
    "relative_speedup",
    "sense",
    "sense_margin",
    "speedup",
    "sweep_on_off_ratio",
    "truth_table",
    "xnor_conv2d_oracle",
    "xnor_conv2d_sim",
    "xornet_adjusted_speedup",
]
