import io
import json
import math

import numpy as np
import pytest

from xbarsim.analysis import (
    McReport,
    VariationSpec,
    classify_worst_case,
    max_rows,
    mc_summary,
    monte_carlo,
    node_voltages,
    sense_margin,
    sweep_on_off_ratio,
    write_mc_histogram_csv,
    write_mc_samples_csv,
    write_mc_summary_json,
)
from xbarsim.device import DeviceParams, accessed_current
from xbarsim.errors import InvalidParameterError, NoValidReferenceError
from xbarsim.sense import CurrentLevels, SenseConfig, comparator, logic_config, nominal_levels


@pytest.fixture
def params():
    return DeviceParams()


@pytest.fixture
def xor_cfg():
    return SenseConfig(i_ref1=4e-6, i_ref2=12e-6, invert_b=True, gate="AND")


PAPER_PATTERN = ("11", "10", "00")


def closed_form_max_rows(params, r1, r2, margin=0.0):
    # independent recomputation of the scaling bound
    i_h = accessed_current(params.r_hrs, params)
    i_l = accessed_current(params.r_lrs, params)
    leak = params.leak_unaccessed_lrs
    n1 = 2 + math.floor((r1 - 2 * i_h - margin) / leak)
    n2 = 2 + math.floor((r2 - (i_h + i_l) - margin) / leak)
    return min(n1, n2)


# ------------------------------------------------------------- max_rows


def test_max_rows_matches_independent_closed_form(params, xor_cfg):
    expected = closed_form_max_rows(params, 4e-6, 12e-6)
    assert expected == 5169  # frozen from the arithmetic above
    assert max_rows(params, xor_cfg) == expected


def test_max_rows_boundary_confirmed_by_direct_simulation(params, xor_cfg):
    n = max_rows(params, xor_cfg)
    # the binding boundary is '00' with all-LRS unaccessed rows vs ref1
    assert classify_worst_case(params, xor_cfg, n, "00", unaccessed_bit=1)
    assert not classify_worst_case(params, xor_cfg, n + 1, "00", unaccessed_bit=1)


def test_max_rows_zero_leakage_is_unbounded(xor_cfg):
    p = DeviceParams(leak_unaccessed_lrs=0.0, leak_unaccessed_hrs=0.0)
    assert max_rows(p, xor_cfg) == math.inf  # sentinel: no leakage limit


def test_doubling_lrs_leak_halves_the_bound(params, xor_cfg):
    n = max_rows(params, xor_cfg)
    doubled = DeviceParams(leak_unaccessed_lrs=2 * 774e-12)
    n2 = max_rows(doubled, xor_cfg)
    assert abs((n2 - 2) - (n - 2) / 2) <= 1


def test_max_rows_errors_when_nominal_levels_violate_refs(params):
    bad = SenseConfig(i_ref1=1e-6, i_ref2=2e-6, invert_b=True, gate="AND")
    with pytest.raises(NoValidReferenceError):
        max_rows(params, bad)  # '01' at 7.87 uA already exceeds ref2


def test_max_rows_margin_reduces_the_bound(params, xor_cfg):
    n = max_rows(params, xor_cfg)
    n_margined = max_rows(params, xor_cfg, margin=1e-6)
    assert n_margined < n
    assert n_margined == closed_form_max_rows(params, 4e-6, 12e-6, margin=1e-6)


def test_brute_force_agreement_across_the_boundary(xor_cfg):
    # inflate leakage so the boundary lands inside the brute-force range
    p = DeviceParams(leak_unaccessed_lrs=0.1e-6, leak_unaccessed_hrs=20e-9)
    bound = max_rows(p, xor_cfg)
    assert 2 < bound < 64
    for n in range(2, 65):
        simulated_ok = all(
            [
                classify_worst_case(p, xor_cfg, n, "00", unaccessed_bit=1),
                classify_worst_case(p, xor_cfg, n, "01", unaccessed_bit=1),
                classify_worst_case(p, xor_cfg, n, "01", unaccessed_bit=0),
                classify_worst_case(p, xor_cfg, n, "11", unaccessed_bit=0),
            ]
        )
        assert simulated_ok == (n <= bound), f"disagreement at N={n}"


# ---------------------------------------------------------------- sweep


def test_sweep_monotone_nondecreasing_both_ways(params):
    ratios = [10.0, 100.0, 1e3, 1e4, 1e5, 1e6]
    for vary in ("LRS", "HRS"):
        values = [rows for _, rows in sweep_on_off_ratio(ratios, params, vary=vary)]
        assert all(b >= a for a, b in zip(values, values[1:])), (vary, values)


def test_sweep_lrs_sensitivity_exceeds_hrs(params):
    ratios = [10.0, 100.0, 1e3, 1e4, 1e5, 1e6]
    lrs = [rows for _, rows in sweep_on_off_ratio(ratios, params, vary="LRS")]
    hrs = [rows for _, rows in sweep_on_off_ratio(ratios, params, vary="HRS")]
    assert lrs[-1] - lrs[0] > hrs[-1] - hrs[0]


def test_sweep_identity_at_the_nominal_ratio(params):
    nominal_ratio = params.r_hrs / params.r_lrs
    (ratio, rows), = sweep_on_off_ratio([nominal_ratio], params, vary="LRS")
    i_h = accessed_current(params.r_hrs, params)
    i_l = accessed_current(params.r_lrs, params)
    cfg = logic_config("XOR", CurrentLevels(2 * i_h, i_h + i_l, 2 * i_l))
    assert rows == max_rows(params, cfg)
    (_, rows_hrs), = sweep_on_off_ratio([nominal_ratio], params, vary="HRS")
    assert rows_hrs == rows


def test_sweep_rejects_bad_ratio_lists(params):
    with pytest.raises(InvalidParameterError):
        sweep_on_off_ratio([100.0, 10.0], params)
    with pytest.raises(InvalidParameterError):
        sweep_on_off_ratio([-1.0], params)
    with pytest.raises(InvalidParameterError):
        sweep_on_off_ratio([10.0], params, vary="BOTH")


# --------------------------------------------------------- sense margin


def test_sense_margin_paper_operating_point(params, xor_cfg):
    levels = nominal_levels(params, 0, 1)
    low, high = sense_margin(levels, xor_cfg)
    assert low == pytest.approx(levels.i01 - 4e-6, rel=1e-12)   # 3.87 uA side
    assert high == pytest.approx(levels.i11 - 12e-6, rel=1e-12)  # 3.74 uA side
    assert low == pytest.approx(3.87e-6, rel=0.01)
    assert high == pytest.approx(3.74e-6, rel=0.01)


def test_sense_margin_midpoint_symmetry():
    levels = CurrentLevels(1.0, 3.0, 7.0)
    cfg = SenseConfig(i_ref1=2.0, i_ref2=5.0, invert_b=True, gate="AND")
    low, high = sense_margin(levels, cfg)
    assert low == pytest.approx(1.0)
    assert high == pytest.approx(2.0)


def test_sense_margin_boundary_case():
    levels = CurrentLevels(1.0, 3.0, 7.0)
    cfg = SenseConfig(i_ref1=1.0, i_ref2=5.0, invert_b=True, gate="AND")
    low, _ = sense_margin(levels, cfg)
    assert low == 0.0


# --------------------------------------------------------- node voltages


def test_node_voltages_example_point():
    v_ncell, v_nref = node_voltages(7.87e-6, 4e-6, v_dd=0.8, r_load=40e3)
    assert v_ncell == pytest.approx(0.8 - 7.87e-6 * 40e3, rel=1e-12)  # 0.4852 V
    assert v_nref == pytest.approx(0.8 - 4e-6 * 40e3, rel=1e-12)      # 0.64 V
    assert v_ncell < v_nref
    assert comparator(7.87e-6, 4e-6) == 1


def test_node_voltages_trivial_points():
    v_ncell, _ = node_voltages(0.0, 1e-6, v_dd=0.8, r_load=40e3)
    assert v_ncell == 0.8
    v_a, v_b = node_voltages(3e-6, 3e-6, v_dd=0.8, r_load=40e3)
    assert v_a == v_b


def test_node_voltages_clamp_to_rails():
    v_ncell, v_nref = node_voltages(1.0, 0.0, v_dd=0.8, r_load=40e3)
    assert v_ncell == 0.0
    assert v_nref == 0.8


def test_node_voltage_ordering_matches_comparator():
    rng = np.random.default_rng(5)
    for _ in range(200):
        i_sl, i_ref = rng.uniform(0, 19e-6, size=2)
        v_ncell, v_nref = node_voltages(i_sl, i_ref)
        if 0.0 < v_ncell < 0.8 and 0.0 < v_nref < 0.8:
            assert (v_ncell < v_nref) == bool(comparator(i_sl, i_ref))


# ----------------------------------------------------------- Monte Carlo


def mc_defaults(params, xor_cfg, **overrides):
    spec = VariationSpec(**({"seed": 42, "n_trials": 5000} | overrides))
    return monte_carlo(3, 3, PAPER_PATTERN, spec, params, xor_cfg)


def test_mc_deterministic_for_fixed_seed(params, xor_cfg):
    a = mc_defaults(params, xor_cfg, n_trials=500)
    b = mc_defaults(params, xor_cfg, n_trials=500)
    for key in a.currents:
        assert np.array_equal(a.currents[key], b.currents[key])
    assert np.array_equal(a.v_ncell, b.v_ncell)
    assert np.array_equal(a.v_nref, b.v_nref)
    assert a.failure_count == b.failure_count


def test_mc_seed_changes_the_samples(params, xor_cfg):
    a = mc_defaults(params, xor_cfg, n_trials=200, seed=1)
    b = mc_defaults(params, xor_cfg, n_trials=200, seed=2)
    assert not np.array_equal(a.currents["01"], b.currents["01"])


def test_mc_zero_sigma_collapses_to_nominal(params, xor_cfg):
    report = mc_defaults(params, xor_cfg, n_trials=50,
                         r_sigma_fraction=0.0, vth_sigma=0.0)
    i_h = accessed_current(params.r_hrs, params)
    i_l = accessed_current(params.r_lrs, params)
    leak = params.leak_unaccessed_hrs
    nominal = {"11": 2 * i_l + leak, "01": i_h + i_l + leak, "00": 2 * i_h + leak}
    for key, values in report.currents.items():
        assert np.all(values == values[0])
        assert values[0] == pytest.approx(nominal[key], rel=1e-12)


def test_mc_01_sigma_matches_first_order_propagation(params, xor_cfg):
    report = mc_defaults(params, xor_cfg, gm_eff=0.0)
    i_l = accessed_current(params.r_lrs, params)
    sigma_r = params.r_lrs * 0.10 / 3.0
    predicted = i_l * sigma_r / (params.r_lrs + params.r_on_access)
    sample_sigma = float(np.std(report.currents["01"]))
    assert sample_sigma == pytest.approx(predicted, rel=0.15)


def test_mc_clusters_fully_separated_and_failure_free(params, xor_cfg):
    report = mc_defaults(params, xor_cfg)
    assert report.failure_count == 0
    assert report.failure_rate == 0.0
    assert float(np.max(report.currents["00"])) < float(np.min(report.currents["01"]))
    assert float(np.max(report.currents["01"])) < float(np.min(report.currents["11"]))


def test_mc_sample_lengths_and_rate_bounds(params, xor_cfg):
    report = mc_defaults(params, xor_cfg, n_trials=123)
    for values in report.currents.values():
        assert len(values) == 123
    assert len(report.v_ncell) == len(report.v_nref) == 123
    assert 0.0 <= report.failure_rate <= 1.0


def test_mc_failures_counted_when_margins_collapse(params):
    # references jammed against the '01' level make misclassification common
    tight = SenseConfig(i_ref1=7.8e-6, i_ref2=7.95e-6, invert_b=True, gate="AND")
    spec = VariationSpec(seed=3, n_trials=300)
    report = monte_carlo(3, 3, PAPER_PATTERN, spec, DeviceParams(), tight)
    assert report.failure_count > 0
    assert report.failure_rate == report.failure_count / (300 * 3)


def test_mc_report_roundtrips_through_dict(params, xor_cfg):
    report = mc_defaults(params, xor_cfg, n_trials=50)
    clone = McReport.from_dict(report.to_dict())
    for key in report.currents:
        assert np.array_equal(clone.currents[key], report.currents[key])
    assert clone.seed == report.seed


def test_mc_validation(params, xor_cfg):
    spec = VariationSpec(n_trials=10)
    with pytest.raises(InvalidParameterError):
        monte_carlo(1, 1, ("01",), spec, params, xor_cfg)
    with pytest.raises(InvalidParameterError):
        monte_carlo(3, 2, ("01",), spec, params, xor_cfg)
    with pytest.raises(InvalidParameterError):
        monte_carlo(3, 1, ("0x",), spec, params, xor_cfg)
    with pytest.raises(InvalidParameterError):
        VariationSpec(n_trials=0)
    with pytest.raises(InvalidParameterError):
        VariationSpec(vth_sigma=-1.0)


# --------------------------------------------------------------- exports


def test_mc_export_files(params, xor_cfg):
    report = mc_defaults(params, xor_cfg, n_trials=40)

    samples = io.StringIO()
    write_mc_samples_csv(report, samples)
    lines = samples.getvalue().strip().splitlines()
    assert lines[0] == "trial,i00,i01,i11,v_ncell,v_nref"
    assert len(lines) == 41

    hist = io.StringIO()
    write_mc_histogram_csv(report, hist, bins=10)
    rows = hist.getvalue().strip().splitlines()[1:]
    per_series = {}
    for row in rows:
        series, _, _, _, count = row.split(",")
        per_series[series] = per_series.get(series, 0) + int(count)
    assert per_series == {name: 40 for name in
                          ("i00", "i01", "i11", "v_ncell", "v_nref")}

    summary_stream = io.StringIO()
    write_mc_summary_json(report, summary_stream)
    summary = json.loads(summary_stream.getvalue())
    assert summary["seed"] == 42
    assert summary["n_trials"] == 40
    assert set(summary["clusters"]) == {"00", "01", "11"}
    assert summary == mc_summary(report)
