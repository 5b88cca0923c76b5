"""Scenario configuration: a flat key-value text format plus the runners
that turn a resolved scenario into simulation results.

The format is one ``section.key = value`` assignment per line, ``#``
comments, values parsed as int/float/bool/string, comma-separated values
as lists.  The array's initial contents come inline (``array.bits``, rows
separated by commas) or from a plain-text bit-matrix file
(``array.bits_file``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any

from . import analysis
from .array import BiasVector, CrossbarArray, parse_bit_matrix
from .device import DeviceParams
from .errors import ConfigError, InvalidParameterError
from .sense import (
    LOGIC_OPS,
    CurrentLevels,
    SenseConfig,
    logic_config,
    nominal_levels,
    truth_table,
)

SCENARIO_OPS = LOGIC_OPS + ("READ",)

_KNOWN_KEYS = {
    "device": {
        "r_lrs", "r_hrs", "r_on_access", "leak_unaccessed_lrs",
        "leak_unaccessed_hrs", "v_bl_precharge", "v_write_set",
        "v_write_reset", "lrs_read_target",
    },
    "array": {"rows", "cols", "bits", "bits_file", "compute_rows", "read_row"},
    "sense": {
        "op", "i_ref1", "i_ref2", "offset1", "offset2", "invert_a",
        "invert_b", "gate", "invert_out", "read_ref", "placement",
    },
    "variation": {"r_sigma_fraction", "vth_sigma", "gm_eff", "n_trials", "seed"},
    "output": {"dir", "format", "bins"},
}


def _parse_atom(token: str) -> Any:
    token = token.strip()
    lowered = token.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def parse_scenario_text(text: str) -> dict[str, dict[str, Any]]:
    """Parse scenario text into nested {section: {key: value}} dicts."""
    scenario: dict[str, dict[str, Any]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key_part, value_part = line.split("=", 1)
        key_part = key_part.strip()
        if "." not in key_part:
            raise ConfigError(f"line {lineno}: key {key_part!r} needs a section prefix")
        section, key = key_part.split(".", 1)
        known = _KNOWN_KEYS.get(section)
        if known is None:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {section}.{key}")
        value_part = value_part.strip()
        if section == "array" and key == "bits":
            # Bit rows stay strings; integer parsing would eat leading zeros.
            value: Any = [tok.strip() for tok in value_part.split(",")]
        elif "," in value_part:
            value = [_parse_atom(tok) for tok in value_part.split(",")]
        else:
            value = _parse_atom(value_part)
        scenario.setdefault(section, {})[key] = value
    return scenario


def format_scenario(scenario: dict[str, dict[str, Any]]) -> str:
    """Inverse of parse_scenario_text (stable ordering for diffing)."""
    lines = []
    for section in sorted(scenario):
        for key in sorted(scenario[section]):
            value = scenario[section][key]
            if isinstance(value, list):
                rendered = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            else:
                rendered = str(value)
            lines.append(f"{section}.{key} = {rendered}")
    return "\n".join(lines) + "\n"


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (no extension needed)."""
    filename = name if name.endswith(".scenario") else f"{name}.scenario"
    ref = resources.files("xbarsim").joinpath("data", filename)
    with resources.as_file(ref) as path:
        if not path.exists():
            raise ConfigError(f"no bundled scenario named {name!r}")
        return Path(path)


def load_scenario_file(path: str | Path) -> dict[str, dict[str, Any]]:
    """Load a scenario file, falling back to the bundled scenarios when the
    path does not exist, and resolve any referenced files inline."""
    candidate = Path(path)
    if not candidate.exists():
        try:
            candidate = bundled_scenario_path(str(path))
        except ConfigError:
            raise ConfigError(f"scenario file {path!r} does not exist") from None
    scenario = parse_scenario_text(candidate.read_text())
    return resolve_files(scenario, candidate.parent)


def resolve_files(scenario: dict, base_dir: str | Path) -> dict:
    """Inline any array.bits_file so the scenario is self-contained."""
    array_cfg = scenario.get("array", {})
    bits_file = array_cfg.pop("bits_file", None)
    if bits_file is not None:
        bits_path = Path(base_dir) / str(bits_file)
        if not bits_path.exists():
            raise ConfigError(f"array.bits_file {str(bits_path)!r} does not exist")
        matrix = parse_bit_matrix(bits_path.read_text())
        array_cfg["bits"] = ["".join(str(b) for b in row) for row in matrix]
        array_cfg.setdefault("rows", len(matrix))
        array_cfg.setdefault("cols", len(matrix[0]))
    return scenario


def build_device(scenario: dict) -> DeviceParams:
    cfg = dict(scenario.get("device", {}))
    try:
        return DeviceParams(**cfg)
    except TypeError as exc:
        raise ConfigError(f"bad device section: {exc}") from exc


def _as_bit_rows(bits: Any) -> list[list[int]]:
    if isinstance(bits, (int, str)):
        bits = [bits]
    rows = []
    for row in bits:
        text = str(row)
        if any(ch not in "01" for ch in text):
            raise ConfigError(f"array.bits row {text!r} is not binary")
        rows.append([int(ch) for ch in text])
    return rows


def build_array(scenario: dict, params: DeviceParams) -> CrossbarArray:
    cfg = scenario.get("array", {})
    bits = cfg.get("bits")
    rows = cfg.get("rows")
    cols = cfg.get("cols")
    try:
        if bits is not None:
            matrix = _as_bit_rows(bits)
            rows = rows if rows is not None else len(matrix)
            cols = cols if cols is not None else len(matrix[0])
            return CrossbarArray(rows=rows, cols=cols, params=params, bits=matrix)
        if rows is None or cols is None:
            raise ConfigError("array section needs rows and cols (or bits)")
        return CrossbarArray(rows=rows, cols=cols, params=params)
    except InvalidParameterError as exc:
        raise ConfigError(f"bad array section: {exc}") from exc


def compute_rows(scenario: dict, array: CrossbarArray) -> tuple[int, int]:
    pair = scenario.get("array", {}).get("compute_rows", [0, 1])
    if isinstance(pair, int):
        raise ConfigError("array.compute_rows needs two row indices")
    pair = list(pair)
    if len(pair) != 2 or any(not isinstance(r, int) for r in pair):
        raise ConfigError("array.compute_rows needs two integer row indices")
    row_a, row_b = pair
    if not (0 <= row_a < array.rows and 0 <= row_b < array.rows) or row_a == row_b:
        raise ConfigError(
            f"compute rows {pair} invalid for a {array.rows}-row array "
            "(need two distinct in-range rows)"
        )
    return row_a, row_b


def scenario_levels(scenario: dict, params: DeviceParams,
                    array: CrossbarArray) -> CurrentLevels:
    """Canonical current levels for this scenario: two accessed cells plus
    the leakage of the unaccessed rows (composition taken from column 0)."""
    row_a, row_b = compute_rows(scenario, array)
    n_lrs = n_hrs = 0
    for row in range(array.rows):
        if row in (row_a, row_b):
            continue
        if array.bit(row, 0):
            n_lrs += 1
        else:
            n_hrs += 1
    return nominal_levels(params, n_lrs, n_hrs)


def build_sense(scenario: dict, params: DeviceParams,
                array: CrossbarArray) -> tuple[str, SenseConfig | None]:
    """Resolve the sense section into (op name, SenseConfig).

    An op name derives references from the scenario's nominal levels;
    explicit keys override individual fields.  READ returns no config.
    """
    cfg = dict(scenario.get("sense", {}))
    op = str(cfg.pop("op", "XOR")).upper()
    if op not in SCENARIO_OPS:
        raise ConfigError(f"sense.op must be one of {SCENARIO_OPS}, got {op!r}")
    cfg.pop("read_ref", None)
    placement = cfg.pop("placement", 0.5)
    if op == "READ":
        # leftover keys configure the logic path; harmless for a read
        return op, None
    try:
        base = logic_config(op, scenario_levels(scenario, params, array),
                            placement=placement)
        if cfg:
            base = replace(base, **cfg)
        return op, base
    except (InvalidParameterError, TypeError) as exc:
        raise ConfigError(f"bad sense section: {exc}") from exc


def build_variation(scenario: dict, seed_override: int | None = None) -> analysis.VariationSpec:
    cfg = dict(scenario.get("variation", {}))
    if seed_override is not None:
        cfg["seed"] = seed_override
    try:
        return analysis.VariationSpec(**cfg)
    except TypeError as exc:
        raise ConfigError(f"bad variation section: {exc}") from exc


@dataclass
class ColumnResult:
    column: int
    pair: str
    current_a: float
    output: int


@dataclass
class SimResult:
    op: str
    columns: list[ColumnResult]
    truth_table: dict[str, int] | None
    compute_cycles: int


def run_sim(scenario: dict, op_override: str | None = None) -> SimResult:
    """Compute (or read) every column of the scenario array once."""
    if op_override is not None:
        scenario = {**scenario, "sense": {**scenario.get("sense", {}), "op": op_override}}
    params = build_device(scenario)
    array = build_array(scenario, params)
    op, cfg = build_sense(scenario, params, array)

    if op == "READ":
        read_row = scenario.get("array", {}).get("read_row", 0)
        read_ref = scenario.get("sense", {}).get("read_ref", 2e-6)
        bias = BiasVector.memory_read(array.rows, array.cols, read_row, params)
        columns = []
        for col in range(array.cols):
            current = array.column_current(bias, col)
            columns.append(
                ColumnResult(col, str(array.bit(read_row, col)), current,
                             array.read_bit(read_row, col, read_ref))
            )
        return SimResult(op=op, columns=columns, truth_table=None, compute_cycles=0)

    row_a, row_b = compute_rows(scenario, array)
    bias = BiasVector.compute(array.rows, array.cols, row_a, row_b, params)
    currents = [array.column_current(bias, col) for col in range(array.cols)]
    outputs = array.compute_cycle(row_a, row_b, cfg)
    columns = [
        ColumnResult(
            col,
            f"{array.bit(row_a, col)}{array.bit(row_b, col)}",
            currents[col],
            outputs[col],
        )
        for col in range(array.cols)
    ]
    table = truth_table(cfg, scenario_levels(scenario, params, array))
    return SimResult(op=op, columns=columns, truth_table=table,
                     compute_cycles=array.compute_cycles)


def run_scale(scenario: dict, ratios, vary: str = "LRS",
              margin: float = 0.0) -> list[tuple[float, float]]:
    params = build_device(scenario)
    return analysis.sweep_on_off_ratio(ratios, params, vary=vary, margin=margin)


def run_mc(scenario: dict, seed_override: int | None = None) -> analysis.McReport:
    """Monte Carlo over the scenario's compute configuration."""
    params = build_device(scenario)
    array = build_array(scenario, params)
    op, cfg = build_sense(scenario, params, array)
    if cfg is None:
        raise ConfigError("Monte Carlo needs a logic op, not READ")
    row_a, row_b = compute_rows(scenario, array)
    spec = build_variation(scenario, seed_override)
    pattern = [
        f"{array.bit(row_a, col)}{array.bit(row_b, col)}" for col in range(array.cols)
    ]
    unaccessed = [
        [array.bit(row, col) for col in range(array.cols)]
        for row in range(array.rows)
        if row not in (row_a, row_b)
    ]
    return analysis.monte_carlo(
        array.rows, array.cols, pattern, spec, params, cfg,
        unaccessed_bits=unaccessed,
    )
