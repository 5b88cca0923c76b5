"""Crossbar array state, bias scheme, and memory/compute accesses.

Writes are threshold-triggered and instantaneous: a cell changes state iff
its word line is asserted AND its bit line carries a write-level voltage.
Half-accessed cells (bit line driven, word line low) and unaccessed cells
are untouched by construction.  Compute mode asserts exactly two word
lines and senses every column in a single cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .device import CellRecord, DeviceParams, cell_current
from .errors import AmbiguousReferenceError, InvalidParameterError
from .sense import SenseConfig, sense

MODE_MEMORY_WRITE = "MemoryWrite"
MODE_MEMORY_READ = "MemoryRead"
MODE_COMPUTE = "Compute"

DEFAULT_READ_REF = 2e-6  # sits between accessed-HRS and accessed-LRS currents


@dataclass(frozen=True)
class BiasVector:
    """Word-line assertion flags plus per-column bit-line voltages."""

    wl_asserted: tuple[bool, ...]
    v_bl: tuple[float, ...]
    mode: str

    def validate(self, params: DeviceParams) -> None:
        n_asserted = sum(self.wl_asserted)
        if self.mode in (MODE_MEMORY_WRITE, MODE_MEMORY_READ):
            if n_asserted != 1:
                raise InvalidParameterError(
                    f"{self.mode} asserts exactly one row, got {n_asserted}"
                )
        elif self.mode == MODE_COMPUTE:
            if n_asserted != 2:
                raise InvalidParameterError(
                    f"compute mode asserts exactly two rows, got {n_asserted}"
                )
        else:
            raise InvalidParameterError(f"unknown bias mode {self.mode!r}")
        if self.mode in (MODE_MEMORY_READ, MODE_COMPUTE):
            if any(v != params.v_bl_precharge for v in self.v_bl):
                raise InvalidParameterError(
                    f"{self.mode} requires every bit line at the precharge "
                    f"voltage {params.v_bl_precharge!r} V"
                )

    @classmethod
    def compute(cls, rows: int, cols: int, row_a: int, row_b: int,
                params: DeviceParams) -> "BiasVector":
        wl = tuple(r in (row_a, row_b) for r in range(rows))
        return cls(wl, (params.v_bl_precharge,) * cols, MODE_COMPUTE)

    @classmethod
    def memory_read(cls, rows: int, cols: int, row: int,
                    params: DeviceParams) -> "BiasVector":
        wl = tuple(r == row for r in range(rows))
        return cls(wl, (params.v_bl_precharge,) * cols, MODE_MEMORY_READ)

    @classmethod
    def memory_write(cls, rows: int, row: int,
                     col_voltages: Sequence[float]) -> "BiasVector":
        wl = tuple(r == row for r in range(rows))
        return cls(wl, tuple(col_voltages), MODE_MEMORY_WRITE)


def parse_bit_matrix(text: str) -> list[list[int]]:
    """Parse the plain-text bit-matrix format: one row of '0'/'1'
    characters per line, all rows the same width."""
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise InvalidParameterError("bit matrix is empty")
    width = len(rows[0])
    matrix = []
    for line in rows:
        if len(line) != width:
            raise InvalidParameterError("bit matrix rows have unequal widths")
        if any(ch not in "01" for ch in line):
            raise InvalidParameterError(f"bit matrix contains non-binary row {line!r}")
        matrix.append([int(ch) for ch in line])
    return matrix


def format_bit_matrix(bits: Iterable[Iterable[int]]) -> str:
    return "\n".join("".join(str(b) for b in row) for row in bits) + "\n"


class CrossbarArray:
    """Mutable crossbar state.

    Mutation happens only through write pulses; reads and compute cycles
    are side-effect-free apart from the cycle counters.
    """

    def __init__(self, rows: int, cols: int, params: DeviceParams | None = None,
                 bits: Sequence[Sequence[int]] | None = None):
        if rows < 1 or cols < 1:
            raise InvalidParameterError("array needs at least one row and column")
        self.params = params if params is not None else DeviceParams()
        self.rows = rows
        self.cols = cols
        if bits is None:
            bits = [[0] * cols for _ in range(rows)]
        bits = [list(row) for row in bits]
        if len(bits) != rows or any(len(row) != cols for row in bits):
            raise InvalidParameterError(
                f"bit matrix shape does not match {rows}x{cols}"
            )
        self.cells = [
            [CellRecord.for_bit(b, self.params) for b in row] for row in bits
        ]
        self.compute_cycles = 0
        self.write_pulses = 0

    @classmethod
    def from_bit_text(cls, text: str, params: DeviceParams | None = None) -> "CrossbarArray":
        bits = parse_bit_matrix(text)
        return cls(rows=len(bits), cols=len(bits[0]), params=params, bits=bits)

    def to_bit_text(self) -> str:
        return format_bit_matrix(
            [[cell.bit for cell in row] for row in self.cells]
        )

    def bit(self, row: int, col: int) -> int:
        return self.cells[row][col].bit

    def _check_bounds(self, row: int, col: int | None = None) -> None:
        if not (0 <= row < self.rows):
            raise IndexError(f"row {row} out of range for {self.rows} rows")
        if col is not None and not (0 <= col < self.cols):
            raise IndexError(f"col {col} out of range for {self.cols} cols")

    def _apply_write_pulse(self, row: int, col_voltages: Sequence[float]) -> None:
        """One write pulse: assert ``row``, drive every bit line.

        The state-change rule is evaluated only along the asserted row;
        cells on other rows have no word line and cannot switch regardless
        of their bit-line voltage.
        """
        bias = BiasVector.memory_write(self.rows, row, col_voltages)
        bias.validate(self.params)
        p = self.params
        for col, v in enumerate(bias.v_bl):
            if v >= p.v_write_set:
                self.cells[row][col] = CellRecord.for_bit(1, p)
            elif v <= p.v_write_reset:
                self.cells[row][col] = CellRecord.for_bit(0, p)
        self.write_pulses += 1

    def write_bit(self, row: int, col: int, bit: int) -> None:
        """Write one bit: target column at the set/reset voltage, all other
        bit lines held at the precharge level (below both thresholds)."""
        self._check_bounds(row, col)
        if bit not in (0, 1):
            raise InvalidParameterError(f"bit must be 0 or 1, got {bit!r}")
        p = self.params
        voltages = [p.v_bl_precharge] * self.cols
        voltages[col] = p.v_write_set if bit else p.v_write_reset
        self._apply_write_pulse(row, voltages)

    def write_row(self, row: int, bits: Sequence[int]) -> None:
        """Write a row in one pulse; ``bits`` may cover a prefix of the
        columns, remaining bit lines stay at the precharge level."""
        self._check_bounds(row)
        if len(bits) > self.cols:
            raise InvalidParameterError(
                f"{len(bits)} bits do not fit {self.cols} columns"
            )
        p = self.params
        voltages = [p.v_bl_precharge] * self.cols
        for col, b in enumerate(bits):
            if b not in (0, 1):
                raise InvalidParameterError(f"bit must be 0 or 1, got {b!r}")
            voltages[col] = p.v_write_set if b else p.v_write_reset
        self._apply_write_pulse(row, voltages)

    def column_current(self, bias: BiasVector, col: int) -> float:
        """Total sense-line current of one column: conduction of accessed
        rows plus leakage of every unaccessed row."""
        if len(bias.wl_asserted) != self.rows or len(bias.v_bl) != self.cols:
            raise InvalidParameterError("bias vector shape does not match array")
        self._check_bounds(0, col)
        bias.validate(self.params)
        p = self.params
        total = 0.0
        v = bias.v_bl[col]
        for row in range(self.rows):
            cell = self.cells[row][col]
            if bias.wl_asserted[row]:
                total += v / (cell.resistance + p.r_on_access)
            else:
                total += cell_current(cell, p, accessed=False)
        return total

    def read_window(self, read_ref: float) -> tuple[float, float]:
        """Worst-case '0' ceiling and '1' floor for a memory read, used to
        validate the read reference."""
        p = self.params
        others = self.rows - 1
        hi_zero = p.v_bl_precharge / (p.r_hrs + p.r_on_access) + others * p.leak_unaccessed_lrs
        lo_one = p.v_bl_precharge / (p.r_lrs + p.r_on_access) + others * p.leak_unaccessed_hrs
        if not (hi_zero < read_ref < lo_one):
            raise AmbiguousReferenceError(
                f"read reference {read_ref:.4g} A outside the separable window "
                f"({hi_zero:.4g}, {lo_one:.4g}) A"
            )
        return hi_zero, lo_one

    def read_bit(self, row: int, col: int, read_ref: float = DEFAULT_READ_REF) -> int:
        """Memory-mode read: assert one row, compare the column current to
        the read reference.  Never mutates state (read bias is below the
        write thresholds)."""
        self._check_bounds(row, col)
        self.read_window(read_ref)
        bias = BiasVector.memory_read(self.rows, self.cols, row, self.params)
        return 1 if self.column_current(bias, col) > read_ref else 0

    def compute_cycle(self, row_a: int, row_b: int, cfg: SenseConfig) -> tuple[int, ...]:
        """Single-cycle compute access: assert two rows, sense every
        column once, bump the cycle counter by one."""
        self._check_bounds(row_a)
        self._check_bounds(row_b)
        if row_a == row_b:
            raise InvalidParameterError("compute mode needs two distinct rows")
        if self.rows < 2:
            raise InvalidParameterError("compute mode needs at least two rows")
        bias = BiasVector.compute(self.rows, self.cols, row_a, row_b, self.params)
        outputs = tuple(
            sense(self.column_current(bias, col), cfg) for col in range(self.cols)
        )
        self.compute_cycles += 1
        return outputs
