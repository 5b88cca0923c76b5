"""Binary convolution on the simulated array, plus the speedup model.

A binary convolution reduces to XNOR + popcount: for {-1,+1} vectors of
length L encoded as bits, dot(a, b) = 2 * popcount(XNOR(a, b)) - L.  The
array executes the XNOR by writing the filter bits to one row and the
input-patch bits to another, chunked across the available columns, with
one single-cycle compute access per chunk.  A direct multiply-accumulate
oracle verifies the result.

The throughput model compares designs by ops-per-cycle: a design that
needs L cycles per XNOR batch of width n effectively sustains n / L ops
per cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .array import CrossbarArray
from .device import DeviceParams
from .errors import InvalidParameterError
from .sense import logic_config, nominal_levels

# Fraction of a layer's full-precision work removed by the XOR-based
# binary-convolution pipeline variant, for the layer geometry used in the
# comparison plots.
XORNET_FP_REDUCTION = 0.3984

CPU_BASELINE_OPS_PER_CYCLE = 64


@dataclass(frozen=True)
class BinaryTensor:
    """Bit-encoded {-1,+1} tensor; bit 1 means +1."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.size == 0:
            raise InvalidParameterError("binary tensor must be nonempty")
        if not np.isin(bits, (0, 1)).all():
            raise InvalidParameterError("binary tensor entries must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(np.uint8))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.bits.shape

    def to_pm1(self) -> np.ndarray:
        return self.bits.astype(np.int64) * 2 - 1


@dataclass(frozen=True)
class ScaleFactors:
    """Per-filter magnitude scalars and the per-output-position input
    magnitude map."""

    alpha: float | np.ndarray
    k_map: np.ndarray | None = None

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if np.any(alpha < 0.0):
            raise InvalidParameterError("alpha must be >= 0")
        if self.k_map is not None:
            k_map = np.asarray(self.k_map, dtype=float)
            if np.any(k_map < 0.0):
                raise InvalidParameterError("k_map entries must be >= 0")
            object.__setattr__(self, "k_map", k_map)

    def alpha_for(self, n_filters: int) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if alpha.size == 1:
            return np.full(n_filters, float(alpha[0]))
        if alpha.size != n_filters:
            raise InvalidParameterError(
                f"{alpha.size} alphas for {n_filters} filters"
            )
        return alpha


def binarize(values, window: tuple[int, int] | None = None) -> tuple[BinaryTensor, ScaleFactors]:
    """Binarize a real tensor and derive its scaling factors.

    Bits are the sign (zero maps to +1).  alpha is the mean absolute
    value, per filter when given a stacked 4-D filter tensor.  When
    ``window`` (filter height, width) is given the tensor is treated as a
    layer input and the per-position magnitude map is computed: channel
    mean of |values|, box-filtered over every valid window position.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise InvalidParameterError("cannot binarize an empty tensor")
    bits = BinaryTensor((arr >= 0.0).astype(np.uint8))
    if arr.ndim == 4:
        alpha = np.abs(arr).mean(axis=(1, 2, 3))
    else:
        alpha = float(np.abs(arr).mean())
    k_map = None
    if window is not None:
        if arr.ndim != 3:
            raise InvalidParameterError("k_map needs a (h, w, c) input tensor")
        kh, kw = window
        channel_mean = np.abs(arr).mean(axis=2)
        if kh > arr.shape[0] or kw > arr.shape[1]:
            raise InvalidParameterError("window larger than the input")
        k_map = sliding_window_view(channel_mean, (kh, kw)).mean(axis=(2, 3))
    return bits, ScaleFactors(alpha=alpha, k_map=k_map)


class ConvResult(NamedTuple):
    output: np.ndarray
    raw: np.ndarray
    compute_cycles: int
    write_pulses: int


def _conv_geometry(input_bits: BinaryTensor, filters: Sequence[BinaryTensor]):
    if not filters:
        raise InvalidParameterError("need at least one filter")
    in_shape = input_bits.dims
    f_shape = filters[0].dims
    if len(in_shape) != 3 or len(f_shape) != 3:
        raise InvalidParameterError("input and filters must be (h, w, c) tensors")
    if any(f.dims != f_shape for f in filters):
        raise InvalidParameterError("all filters must share one shape")
    if f_shape[2] != in_shape[2]:
        raise InvalidParameterError(
            f"filter channels {f_shape[2]} do not match input channels {in_shape[2]}"
        )
    out_h = in_shape[0] - f_shape[0] + 1
    out_w = in_shape[1] - f_shape[1] + 1
    if out_h < 1 or out_w < 1:
        raise InvalidParameterError("filter does not fit the input")
    return out_h, out_w, f_shape


def _scaled(raw: np.ndarray, scales: ScaleFactors, out_h: int, out_w: int,
            n_filters: int) -> np.ndarray:
    alpha = scales.alpha_for(n_filters)
    if scales.k_map is None:
        k_map = np.ones((out_h, out_w))
    else:
        k_map = scales.k_map
        if k_map.shape != (out_h, out_w):
            raise InvalidParameterError(
                f"k_map shape {k_map.shape} does not match output {(out_h, out_w)}"
            )
    return raw.astype(float) * alpha[None, None, :] * k_map[:, :, None]


def xnor_conv2d_sim(
    input_bits: BinaryTensor,
    filters: Sequence[BinaryTensor],
    scales: ScaleFactors,
    array_cols: int,
    params: DeviceParams | None = None,
) -> ConvResult:
    """Valid 2-D binary convolution executed through the array.

    Per output position and filter the flattened operands are written to
    two physical rows in ceil(L / array_cols) column chunks, each sensed
    with the XNOR preset in one compute cycle; the popcount of the sensed
    match bits gives the raw +/-1 dot product 2m - L.  Compute cycles are
    counted separately from the operand-loading write pulses.
    """
    if array_cols < 1:
        raise InvalidParameterError("array_cols must be >= 1")
    out_h, out_w, f_shape = _conv_geometry(input_bits, filters)
    kh, kw, _ = f_shape
    length = int(np.prod(f_shape))

    params = params if params is not None else DeviceParams()
    cfg = logic_config("XNOR", nominal_levels(params))
    array = CrossbarArray(rows=2, cols=array_cols, params=params)

    flat_filters = [f.bits.reshape(-1) for f in filters]
    raw = np.empty((out_h, out_w, len(filters)), dtype=np.int64)
    for y in range(out_h):
        for x in range(out_w):
            patch = input_bits.bits[y:y + kh, x:x + kw, :].reshape(-1)
            for fi, fbits in enumerate(flat_filters):
                matches = 0
                for start in range(0, length, array_cols):
                    stop = min(start + array_cols, length)
                    array.write_row(0, fbits[start:stop])
                    array.write_row(1, patch[start:stop])
                    sensed = array.compute_cycle(0, 1, cfg)
                    matches += sum(sensed[: stop - start])
                raw[y, x, fi] = 2 * matches - length
    output = _scaled(raw, scales, out_h, out_w, len(filters))
    return ConvResult(output, raw, array.compute_cycles, array.write_pulses)


def xnor_conv2d_oracle(
    input_bits: BinaryTensor,
    filters: Sequence[BinaryTensor],
    scales: ScaleFactors,
) -> ConvResult:
    """Same numerical contract as xnor_conv2d_sim, computed by plain
    multiply-accumulate over {-1,+1} values, without the array."""
    out_h, out_w, f_shape = _conv_geometry(input_bits, filters)
    kh, kw, _ = f_shape
    pm_input = input_bits.to_pm1()
    pm_filters = [f.to_pm1() for f in filters]
    raw = np.empty((out_h, out_w, len(filters)), dtype=np.int64)
    for y in range(out_h):
        for x in range(out_w):
            patch = pm_input[y:y + kh, x:x + kw, :]
            for fi, pm_f in enumerate(pm_filters):
                raw[y, x, fi] = int(np.sum(patch * pm_f))
    output = _scaled(raw, scales, out_h, out_w, len(filters))
    return ConvResult(output, raw, 0, 0)


@dataclass(frozen=True)
class ConvSpec:
    """Layer geometry feeding the throughput model: channel count, filter
    area, input area, XNOR ops per clock cycle, and the design's cycles
    per op."""

    c: int
    n_w: int
    n_i: int
    n_o: int
    latency_cycles: int = 1

    def __post_init__(self):
        for name in ("c", "n_w", "n_i", "n_o", "latency_cycles"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise InvalidParameterError(f"{name} must be a positive integer")


def _speedup_formula(c: float, n_w: float, n_i: float, ops_per_cycle: float) -> float:
    work = c * n_w * n_i
    return work / (work / ops_per_cycle + n_i)


def speedup(spec: ConvSpec) -> float:
    """Speedup of XNOR convolution over full-precision convolution for a
    design sustaining spec.n_o XNOR ops per cycle."""
    return _speedup_formula(spec.c, spec.n_w, spec.n_i, spec.n_o)


def relative_speedup(
    n_o: int,
    latency_cycles: int,
    spec: ConvSpec,
    baseline_n_o: int = CPU_BASELINE_OPS_PER_CYCLE,
) -> float:
    """Speedup relative to the fixed-width baseline.

    A design needing ``latency_cycles`` per batch of ``n_o`` XNOR ops
    sustains n_o / latency_cycles ops per cycle; that effective throughput
    enters the speedup formula.
    """
    if n_o < 1 or latency_cycles < 1 or baseline_n_o < 1:
        raise InvalidParameterError("n_o, latency_cycles, baseline_n_o must be >= 1")
    ours = _speedup_formula(spec.c, spec.n_w, spec.n_i, n_o / latency_cycles)
    base = _speedup_formula(spec.c, spec.n_w, spec.n_i, baseline_n_o)
    return ours / base


def xornet_adjusted_speedup(
    spec: ConvSpec, fp_reduction: float = XORNET_FP_REDUCTION
) -> float:
    """Speedup with the layer's full-precision work scaled down by
    ``fp_reduction`` (the XOR-based pipeline removes that fraction)."""
    if not (0.0 <= fp_reduction <= 1.0):
        raise InvalidParameterError("fp_reduction must be in [0, 1]")
    work = spec.c * spec.n_w * spec.n_i
    return work / (work / spec.n_o + spec.n_i * (1.0 - fp_reduction))


def conv_cycle_count(
    out_positions: int, n_filters: int, c: int, n_w: int, array_cols: int,
    latency_cycles: int = 1,
) -> int:
    """Compute cycles needed by the chunked array execution."""
    return out_positions * n_filters * math.ceil(c * n_w / array_cols) * latency_cycles


def load_tensor(path: str | Path) -> np.ndarray:
    """Read the dimensioned text tensor format: first non-comment line is
    the whitespace-separated shape, the rest are row-major values."""
    tokens: list[str] = []
    dims: list[int] | None = None
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if dims is None:
            dims = [int(tok) for tok in line.replace(",", " ").split()]
            continue
        tokens.extend(line.replace(",", " ").split())
    if dims is None or not dims:
        raise InvalidParameterError(f"{path}: missing shape line")
    values = np.array([float(tok) for tok in tokens])
    if values.size != int(np.prod(dims)):
        raise InvalidParameterError(
            f"{path}: expected {int(np.prod(dims))} values for shape {dims}, "
            f"got {values.size}"
        )
    return values.reshape(dims)


def save_tensor(path: str | Path, values: np.ndarray) -> None:
    arr = np.asarray(values, dtype=float)
    with open(path, "w") as stream:
        stream.write(" ".join(str(d) for d in arr.shape) + "\n")
        for value in arr.reshape(-1):
            stream.write(repr(float(value)) + "\n")


@dataclass
class BinaryConvRun:
    """Outcome of one end-to-end binary-convolution run: array-simulated
    and oracle outputs plus agreement metrics."""

    output: np.ndarray
    oracle_output: np.ndarray
    raw_equal: bool
    max_rel_diff: float
    compute_cycles: int
    write_pulses: int


def run_binary_conv(
    input_values: np.ndarray,
    filter_values: np.ndarray,
    array_cols: int,
    params: DeviceParams | None = None,
) -> BinaryConvRun:
    """Binarize real input/filter tensors, convolve through the array,
    and verify against the direct oracle."""
    filt = np.asarray(filter_values, dtype=float)
    if filt.ndim == 3:
        filt = filt[None, ...]
    if filt.ndim != 4:
        raise InvalidParameterError("filters must be a (n, kh, kw, c) tensor")
    filter_bits, filter_scales = binarize(filt)
    input_bits, input_scales = binarize(
        np.asarray(input_values, dtype=float), window=(filt.shape[1], filt.shape[2])
    )
    scales = ScaleFactors(alpha=filter_scales.alpha, k_map=input_scales.k_map)
    filters = [BinaryTensor(filter_bits.bits[i]) for i in range(filt.shape[0])]
    sim = xnor_conv2d_sim(input_bits, filters, scales, array_cols, params)
    oracle = xnor_conv2d_oracle(input_bits, filters, scales)
    denom = np.maximum(np.abs(oracle.output), 1e-300)
    max_rel = float(np.max(np.abs(sim.output - oracle.output) / denom))
    return BinaryConvRun(
        output=sim.output,
        oracle_output=oracle.output,
        raw_equal=bool(np.array_equal(sim.raw, oracle.raw)),
        max_rel_diff=max_rel,
        compute_cycles=sim.compute_cycles,
        write_pulses=sim.write_pulses,
    )
