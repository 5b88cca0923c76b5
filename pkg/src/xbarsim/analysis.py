"""Robustness analytics: array-size limits, sense margins, Monte Carlo.

Leakage of unaccessed rows accumulates on the sense line and eventually
pushes a pattern across a reference; max_rows() solves that bound in
closed form, classify_worst_case() checks it by direct simulation.  The
Monte Carlo engine samples cell resistances and comparator offsets with a
per-trial RNG stream derived from (seed, trial index), so reports are
bit-identical regardless of execution order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import IO, Sequence

import numpy as np

from .array import CrossbarArray
from .device import DeviceParams, accessed_current
from .errors import InvalidParameterError, NoValidReferenceError
from .sense import CurrentLevels, SenseConfig, compose, logic_config, sense

# Load line used for the node-voltage view of the sense amplifier.
DEFAULT_V_DD = 0.8
DEFAULT_R_LOAD = 40e3

RESISTANCE_FLOOR_OHM = 1.0
TRUNCATION_SIGMA = 4.0


@dataclass(frozen=True)
class VariationSpec:
    """Gaussian variation parameters.

    ``r_sigma_fraction`` is the 3-sigma fraction of the mean resistance
    (0.10 means sigma = mean / 30).  Threshold-voltage mismatch maps to a
    comparator current offset through the effective transconductance
    ``gm_eff``.
    """

    r_sigma_fraction: float = 0.10
    vth_sigma: float = 25e-3
    gm_eff: float = 20e-6
    n_trials: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.r_sigma_fraction < 0.0 or self.vth_sigma < 0.0 or self.gm_eff < 0.0:
            raise InvalidParameterError("variation sigmas must be >= 0")
        if self.n_trials < 1:
            raise InvalidParameterError("n_trials must be >= 1")


@dataclass
class McReport:
    """Per-pattern current samples, node-voltage samples, and the failure
    tally of one Monte Carlo run."""

    currents: dict[str, np.ndarray]
    v_ncell: np.ndarray
    v_nref: np.ndarray
    failure_count: int
    failure_rate: float
    n_trials: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "currents": {k: v.tolist() for k, v in self.currents.items()},
            "v_ncell": self.v_ncell.tolist(),
            "v_nref": self.v_nref.tolist(),
            "failure_count": self.failure_count,
            "failure_rate": self.failure_rate,
            "n_trials": self.n_trials,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "McReport":
        return cls(
            currents={k: np.asarray(v, dtype=float) for k, v in data["currents"].items()},
            v_ncell=np.asarray(data["v_ncell"], dtype=float),
            v_nref=np.asarray(data["v_nref"], dtype=float),
            failure_count=int(data["failure_count"]),
            failure_rate=float(data["failure_rate"]),
            n_trials=int(data["n_trials"]),
            seed=int(data["seed"]),
        )


def _xor_boundaries(params: DeviceParams, cfg: SenseConfig, margin: float):
    """Nominal accessed-pair levels and effective references, with the
    two-sided classification checks at the minimum array size."""
    i_h = accessed_current(params.r_hrs, params)
    i_l = accessed_current(params.r_lrs, params)
    i00, i01, i11 = 2.0 * i_h, i_h + i_l, 2.0 * i_l
    r1 = cfg.i_ref1 + cfg.offset1
    r2 = cfg.i_ref2 + cfg.offset2
    nominal_ok = (
        r1 < r2
        and i00 + margin <= r1
        and i01 - margin > r1
        and i01 + margin <= r2
        and i11 - margin > r2
    )
    return (i00, i01, i11), (r1, r2), nominal_ok


def max_rows(params: DeviceParams, cfg: SenseConfig, margin: float = 0.0) -> float:
    """Largest row count that still classifies every pattern correctly.

    Two accessed rows carry the pattern; the remaining rows contribute
    worst-case leakage (all-LRS for patterns that must stay below a
    reference, all-HRS for patterns that must stay above).  Only the
    below-reference checks tighten as rows are added, so the bound is the
    smaller of the '00'-vs-ref1 and '01'-vs-ref2 leak budgets.

    Returns math.inf when the leakage constants are zero.
    """
    if margin < 0.0:
        raise InvalidParameterError("margin must be >= 0")
    (i00, i01, _), (r1, r2), nominal_ok = _xor_boundaries(params, cfg, margin)
    if not nominal_ok:
        raise NoValidReferenceError(
            "nominal levels already violate the references at two rows"
        )
    leak = max(params.leak_unaccessed_lrs, params.leak_unaccessed_hrs)
    if leak == 0.0:
        return math.inf
    budget_00 = (r1 - i00 - margin) / leak
    budget_01 = (r2 - i01 - margin) / leak
    return 2 + math.floor(min(budget_00, budget_01))


def classify_worst_case(
    params: DeviceParams,
    cfg: SenseConfig,
    n_rows: int,
    pattern: str,
    unaccessed_bit: int,
) -> bool:
    """Direct simulation check for one worst-case array.

    Builds an n_rows x 1 array whose two accessed rows hold ``pattern``
    and whose remaining rows all hold ``unaccessed_bit``, runs one compute
    cycle, and compares the sensed output against the nominal
    classification of the pattern.
    """
    if n_rows < 2:
        raise InvalidParameterError("worst-case arrays need at least two rows")
    bit_a, bit_b = (int(ch) for ch in pattern)
    bits = [[bit_a], [bit_b]] + [[unaccessed_bit]] * (n_rows - 2)
    array = CrossbarArray(rows=n_rows, cols=1, params=params, bits=bits)
    i_nominal = accessed_current(params.resistance_for_bit(bit_a), params) + \
        accessed_current(params.resistance_for_bit(bit_b), params)
    expected = sense(i_nominal, cfg)
    return array.compute_cycle(0, 1, cfg)[0] == expected


def sense_margin(levels: CurrentLevels, cfg: SenseConfig) -> tuple[float, float]:
    """Smallest current gap on each side of each reference."""
    low = min(cfg.i_ref1 - levels.i00, levels.i01 - cfg.i_ref1)
    high = min(cfg.i_ref2 - levels.i01, levels.i11 - cfg.i_ref2)
    return low, high


def _leak_path_resistance(leak: float, state_resistance: float, v_bl: float) -> float:
    """Series resistance of the unaccessed leak path implied by a
    calibrated leakage constant, so leakage can be rescaled when the cell
    resistance changes: leak(R) = v_bl / (r_path + R)."""
    if leak <= 0.0 or v_bl <= 0.0:
        raise InvalidParameterError(
            "leak rescaling needs positive leakage and bias voltage"
        )
    r_path = v_bl / leak - state_resistance
    if r_path < 0.0:
        raise InvalidParameterError(
            "calibrated leakage exceeds the ohmic limit of the cell resistance"
        )
    return r_path


def sweep_on_off_ratio(
    ratios: Sequence[float],
    params: DeviceParams,
    vary: str = "LRS",
    margin: float = 0.0,
    placement: float = 0.5,
) -> list[tuple[float, float]]:
    """max_rows as a function of the on/off resistance ratio.

    For each ratio the chosen state resistance is rescaled (the other held
    fixed), its leakage constant is rescaled through the implied series
    leak path, nominal levels are recomputed, and fresh references are
    placed with choose_references before evaluating max_rows.
    """
    if vary not in ("LRS", "HRS"):
        raise InvalidParameterError(f"vary must be 'LRS' or 'HRS', got {vary!r}")
    ratios = list(ratios)
    if not ratios or any(r <= 0.0 for r in ratios):
        raise InvalidParameterError("ratios must be positive")
    if any(b < a for a, b in zip(ratios, ratios[1:])):
        raise InvalidParameterError("ratios must be sorted ascending")
    if vary == "LRS":
        r_path = _leak_path_resistance(
            params.leak_unaccessed_lrs, params.r_lrs, params.v_bl_precharge
        )
    else:
        r_path = _leak_path_resistance(
            params.leak_unaccessed_hrs, params.r_hrs, params.v_bl_precharge
        )
    results = []
    for ratio in ratios:
        if vary == "LRS":
            r_lrs = params.r_hrs / ratio
            swept = replace(
                params,
                r_lrs=r_lrs,
                r_on_access=params.r_on_access,
                leak_unaccessed_lrs=params.v_bl_precharge / (r_path + r_lrs),
            )
        else:
            r_hrs = params.r_lrs * ratio
            swept = replace(
                params,
                r_hrs=r_hrs,
                r_on_access=params.r_on_access,
                leak_unaccessed_hrs=params.v_bl_precharge / (r_path + r_hrs),
            )
        i_h = accessed_current(swept.r_hrs, swept)
        i_l = accessed_current(swept.r_lrs, swept)
        levels = CurrentLevels(i00=2.0 * i_h, i01=i_h + i_l, i11=2.0 * i_l)
        cfg = logic_config("XOR", levels, placement=placement)
        results.append((ratio, max_rows(swept, cfg, margin)))
    return results


def node_voltages(
    i_sl: float,
    i_ref: float,
    v_dd: float = DEFAULT_V_DD,
    r_load: float = DEFAULT_R_LOAD,
) -> tuple[float, float]:
    """Node-voltage view of one comparator: the cell-side and reference-
    side nodes sit at v_dd minus the IR drop of their currents, clamped to
    the rails.  v_ncell < v_nref exactly when the current-domain
    comparator fires."""
    if v_dd <= 0.0 or r_load <= 0.0:
        raise InvalidParameterError("v_dd and r_load must be positive")
    v_ncell = min(max(v_dd - i_sl * r_load, 0.0), v_dd)
    v_nref = min(max(v_dd - i_ref * r_load, 0.0), v_dd)
    return v_ncell, v_nref


def _canonical_pair(pattern: str) -> str:
    """'10' shares the '01' current level."""
    return "01" if pattern == "10" else pattern


def monte_carlo(
    rows: int,
    cols: int,
    accessed_pattern: Sequence[str],
    spec: VariationSpec,
    params: DeviceParams,
    cfg: SenseConfig,
    unaccessed_bits: Sequence[Sequence[int]] | None = None,
    v_dd: float = DEFAULT_V_DD,
    r_load: float = DEFAULT_R_LOAD,
) -> McReport:
    """Seeded Monte Carlo over cell resistance and comparator offsets.

    Per trial: every cell resistance is drawn from a Gaussian around its
    state mean (sigma = mean * r_sigma_fraction / 3, truncated at +/-4
    sigma, floored at 1 ohm) and each column's two comparators get an
    offset gm_eff * N(0, vth_sigma).  Column currents and sensed outputs
    are recomputed; a failure is any column whose output differs from its
    nominal classification.  Unaccessed rows contribute their calibrated
    leakage constants, which variation does not move.

    The current samples record, per canonical pattern, the first column
    carrying it.  Node voltages are recorded for the '01' column (or
    column 0 when absent) against the first comparator's effective
    reference.  Trial i draws from a stream spawned as (seed, i), so the
    report is bit-identical for a fixed seed regardless of scheduling.
    """
    if rows < 2 or cols < 1:
        raise InvalidParameterError("compute-mode Monte Carlo needs >= 2 rows "
                                    "and >= 1 column")
    if len(accessed_pattern) != cols:
        raise InvalidParameterError("accessed_pattern must give one pair per column")
    patterns = [str(p) for p in accessed_pattern]
    for p in patterns:
        if len(p) != 2 or any(ch not in "01" for ch in p):
            raise InvalidParameterError(f"bad accessed pair {p!r}")
    if unaccessed_bits is None:
        unaccessed_bits = [[0] * cols for _ in range(rows - 2)]
    unaccessed_bits = [list(r) for r in unaccessed_bits]
    if len(unaccessed_bits) != rows - 2 or any(len(r) != cols for r in unaccessed_bits):
        raise InvalidParameterError("unaccessed_bits must be (rows-2) x cols")

    # Mean resistance per cell; accessed rows first, mirroring the draw order.
    bits = np.array(
        [[int(p[0]) for p in patterns], [int(p[1]) for p in patterns]]
        + unaccessed_bits,
        dtype=np.int8,
    )
    r_mean = np.where(bits == 1, params.r_lrs, params.r_hrs)
    sigma_frac = spec.r_sigma_fraction / 3.0

    leak_per_col = np.array(
        [
            sum(
                params.leak_unaccessed_lrs if bits[r, c] else params.leak_unaccessed_hrs
                for r in range(2, rows)
            )
            for c in range(cols)
        ]
    )

    # Nominal classification per column, at nominal currents and the
    # configured (unsampled) offsets.
    i_nominal = (
        params.v_bl_precharge / (r_mean[0] + params.r_on_access)
        + params.v_bl_precharge / (r_mean[1] + params.r_on_access)
        + leak_per_col
    )
    expected = np.array([sense(i, cfg) for i in i_nominal], dtype=np.int8)

    keys = []
    key_col = {}
    for col, p in enumerate(patterns):
        key = _canonical_pair(p)
        if key not in key_col:
            key_col[key] = col
            keys.append(key)
    volt_col = key_col.get("01", 0)

    n = spec.n_trials
    samples = {k: np.empty(n) for k in keys}
    v_ncell = np.empty(n)
    v_nref = np.empty(n)
    failures = 0

    for trial in range(n):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=spec.seed, spawn_key=(trial,))
        )
        z = np.clip(
            rng.standard_normal(size=(rows, cols)),
            -TRUNCATION_SIGMA,
            TRUNCATION_SIGMA,
        )
        r = np.maximum(r_mean * (1.0 + z * sigma_frac), RESISTANCE_FLOOR_OHM)
        offsets = spec.gm_eff * spec.vth_sigma * rng.standard_normal(size=(cols, 2))

        i_col = (
            params.v_bl_precharge / (r[0] + params.r_on_access)
            + params.v_bl_precharge / (r[1] + params.r_on_access)
            + leak_per_col
        )
        a = (i_col > cfg.i_ref1 + cfg.offset1 + offsets[:, 0]).astype(np.int8)
        b = (i_col > cfg.i_ref2 + cfg.offset2 + offsets[:, 1]).astype(np.int8)
        out = compose(a, b, cfg)
        failures += int(np.count_nonzero(out != expected))

        for key in keys:
            samples[key][trial] = i_col[key_col[key]]
        ref_eff = cfg.i_ref1 + cfg.offset1 + offsets[volt_col, 0]
        v_ncell[trial], v_nref[trial] = node_voltages(
            i_col[volt_col], ref_eff, v_dd, r_load
        )

    return McReport(
        currents=samples,
        v_ncell=v_ncell,
        v_nref=v_nref,
        failure_count=failures,
        failure_rate=failures / (n * cols),
        n_trials=n,
        seed=spec.seed,
    )


def _report_series(report: McReport) -> dict[str, np.ndarray]:
    series = {f"i{k}": v for k, v in sorted(report.currents.items())}
    series["v_ncell"] = report.v_ncell
    series["v_nref"] = report.v_nref
    return series


def write_mc_samples_csv(report: McReport, stream: IO[str]) -> None:
    series = _report_series(report)
    writer = csv.writer(stream)
    names = list(series)
    writer.writerow(["trial"] + names)
    for trial in range(report.n_trials):
        writer.writerow([trial] + [repr(float(series[n][trial])) for n in names])


def write_mc_histogram_csv(report: McReport, stream: IO[str], bins: int = 100) -> None:
    if bins < 1:
        raise InvalidParameterError("bins must be >= 1")
    writer = csv.writer(stream)
    writer.writerow(["series", "bin", "lower", "upper", "count"])
    for name, values in _report_series(report).items():
        counts, edges = np.histogram(values, bins=bins)
        for i, count in enumerate(counts):
            writer.writerow(
                [name, i, repr(float(edges[i])), repr(float(edges[i + 1])), int(count)]
            )


def mc_summary(report: McReport) -> dict:
    def stats(values: np.ndarray) -> dict:
        return {
            "mean": float(np.mean(values)),
            "std": float(np.std(values)),
            "min": float(np.min(values)),
            "max": float(np.max(values)),
        }

    return {
        "n_trials": report.n_trials,
        "seed": report.seed,
        "failure_count": report.failure_count,
        "failure_rate": report.failure_rate,
        "clusters": {k: stats(v) for k, v in sorted(report.currents.items())},
        "node_voltages": {
            "v_ncell": stats(report.v_ncell),
            "v_nref": stats(report.v_nref),
        },
    }


def write_mc_summary_json(report: McReport, stream: IO[str]) -> None:
    json.dump(mc_summary(report), stream, indent=2, sort_keys=True)
    stream.write("\n")
