"""Modified sense amplifier: two current comparators and a two-input gate.

The sense-line current is compared against two reference currents.  The
two binary comparator outputs, after configurable inversions and a gate,
realize XOR/XNOR of the two accessed bits; other reference placements
give AND/NAND/OR/NOR.  Comparators are modeled in the current domain;
threshold-voltage mismatch enters as an additive current offset per
comparator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import IO

from .device import DeviceParams, accessed_current
from .errors import InvalidParameterError, NoValidReferenceError

GATES = ("AND", "OR", "NAND", "NOR")
LOGIC_OPS = ("XOR", "XNOR", "AND", "NAND", "OR", "NOR")

# Canonical accessed-pair patterns; '10' shares the '01' current level.
PAIR_PATTERNS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class CurrentLevels:
    """Nominal column currents of the three distinguishable accessed-pair
    patterns ('01' and '10' coincide)."""

    i00: float
    i01: float
    i11: float

    def __post_init__(self):
        if not (self.i00 < self.i01 < self.i11):
            raise InvalidParameterError(
                f"levels must be strictly ordered, got "
                f"{self.i00!r} / {self.i01!r} / {self.i11!r}"
            )


@dataclass(frozen=True)
class SenseConfig:
    """Two reference currents, per-comparator offsets, and the Boolean
    composition applied to the comparator outputs."""

    i_ref1: float
    i_ref2: float
    offset1: float = 0.0
    offset2: float = 0.0
    invert_a: bool = False
    invert_b: bool = False
    gate: str = "AND"
    invert_out: bool = False

    def __post_init__(self):
        if self.i_ref1 <= 0.0 or self.i_ref2 <= 0.0:
            raise InvalidParameterError("reference currents must be positive")
        if self.gate not in GATES:
            raise InvalidParameterError(f"gate must be one of {GATES}, got {self.gate!r}")


def comparator(i_sl: float, i_ref: float, offset: float = 0.0) -> int:
    """1 iff the sense-line current strictly exceeds the offset-shifted
    reference.  Ties resolve to 0."""
    return 1 if i_sl > i_ref + offset else 0


def compose(a, b, cfg: SenseConfig):
    """Apply the configured inversions and gate to two comparator outputs.

    Works elementwise on 0/1 integers or integer arrays, so the Monte
    Carlo path shares the exact composition semantics of sense().
    """
    if cfg.invert_a:
        a = 1 - a
    if cfg.invert_b:
        b = 1 - b
    if cfg.gate == "AND":
        out = a & b
    elif cfg.gate == "OR":
        out = a | b
    elif cfg.gate == "NAND":
        out = 1 - (a & b)
    else:  # NOR
        out = 1 - (a | b)
    if cfg.invert_out:
        out = 1 - out
    return out


def sense(i_sl: float, cfg: SenseConfig) -> int:
    """Binary output of the modified sense amplifier for one column."""
    a = comparator(i_sl, cfg.i_ref1, cfg.offset1)
    b = comparator(i_sl, cfg.i_ref2, cfg.offset2)
    return int(compose(a, b, cfg))


def choose_references(
    levels: CurrentLevels,
    placement: float = 0.5,
    worst_case_leak_span: float = 0.0,
) -> tuple[float, float]:
    """Place the two references inside the level gaps.

    Each reference sits at ``placement`` of the way across its gap, after
    raising the gap floor by ``worst_case_leak_span`` (the maximum extra
    current unaccessed rows can contribute to the pattern that must stay
    below the reference).

    Raises:
        NoValidReferenceError: the leak span closes either gap.
    """
    if not (0.0 < placement < 1.0):
        raise InvalidParameterError("placement must be in (0, 1)")
    if worst_case_leak_span < 0.0:
        raise InvalidParameterError("worst_case_leak_span must be >= 0")
    lo1 = levels.i00 + worst_case_leak_span
    lo2 = levels.i01 + worst_case_leak_span
    if lo1 >= levels.i01 or lo2 >= levels.i11:
        raise NoValidReferenceError(
            f"leak span {worst_case_leak_span:.4g} A closes a reference gap"
        )
    i_ref1 = lo1 + placement * (levels.i01 - lo1)
    i_ref2 = lo2 + placement * (levels.i11 - lo2)
    return i_ref1, i_ref2


def logic_config(op: str, levels: CurrentLevels, placement: float = 0.5) -> SenseConfig:
    """SenseConfig whose output realizes ``op`` on the two accessed bits.

    XOR/XNOR straddle both gaps (invert one comparator, AND them); AND/OR
    collapse both references into a single gap; NAND/NOR add an output
    inversion.  XNOR uses output inversion of the XOR composition: with
    comparators defined as "1 iff current exceeds reference", swapping the
    references in the same topology is a constant-0 function.
    """
    if op not in LOGIC_OPS:
        raise InvalidParameterError(f"op must be one of {LOGIC_OPS}, got {op!r}")
    if op in ("XOR", "XNOR"):
        r1, r2 = choose_references(levels, placement)
        cfg = SenseConfig(i_ref1=r1, i_ref2=r2, invert_b=True, gate="AND")
        return replace(cfg, invert_out=True) if op == "XNOR" else cfg
    if op in ("AND", "NAND"):
        ref = levels.i01 + placement * (levels.i11 - levels.i01)
    else:  # OR / NOR
        ref = levels.i00 + placement * (levels.i01 - levels.i00)
    return SenseConfig(
        i_ref1=ref, i_ref2=ref, gate="AND", invert_out=op in ("NAND", "NOR")
    )


def truth_table(cfg: SenseConfig, levels: CurrentLevels) -> dict[str, int]:
    """Map every accessed bit pair to the sensed output at its nominal
    current level."""
    at = {"00": levels.i00, "01": levels.i01, "10": levels.i01, "11": levels.i11}
    return {pair: sense(current, cfg) for pair, current in at.items()}


def write_truth_table_csv(table: dict[str, int], stream: IO[str]) -> None:
    writer = csv.writer(stream)
    writer.writerow(["pair", "output"])
    for pair in PAIR_PATTERNS:
        writer.writerow([pair, table[pair]])


def nominal_levels(
    params: DeviceParams,
    unaccessed_lrs_rows: int = 0,
    unaccessed_hrs_rows: int = 0,
) -> CurrentLevels:
    """Nominal column current levels for two accessed cells plus the
    leakage of the given unaccessed-row composition."""
    i_h = accessed_current(params.r_hrs, params)
    i_l = accessed_current(params.r_lrs, params)
    leak = (
        unaccessed_lrs_rows * params.leak_unaccessed_lrs
        + unaccessed_hrs_rows * params.leak_unaccessed_hrs
    )
    return CurrentLevels(
        i00=2.0 * i_h + leak, i01=i_h + i_l + leak, i11=2.0 * i_l + leak
    )
