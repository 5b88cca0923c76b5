import pytest

from xbarsim.errors import ConfigError
from xbarsim.scenario import (
    build_array,
    build_device,
    build_sense,
    bundled_scenario_path,
    format_scenario,
    load_scenario_file,
    parse_scenario_text,
    run_sim,
)

MINIMAL = """
# comment line
device.r_lrs = 10e3
array.rows = 3
array.cols = 3
array.bits = 110,100,000
sense.op = XOR
variation.seed = 7
"""


def test_parse_nested_sections_and_types():
    scn = parse_scenario_text(MINIMAL)
    assert scn["device"]["r_lrs"] == 10e3
    assert scn["array"]["bits"] == ["110", "100", "000"]  # width preserved
    assert scn["variation"]["seed"] == 7
    assert scn["sense"]["op"] == "XOR"


def test_format_parse_roundtrip():
    scn = parse_scenario_text(MINIMAL)
    assert parse_scenario_text(format_scenario(scn)) == scn


def test_roundtrip_produces_identical_simulation_output(tmp_path):
    original = load_scenario_file(bundled_scenario_path("paper_3x3"))
    rewritten = tmp_path / "copy.scenario"
    rewritten.write_text(format_scenario(original))
    reparsed = load_scenario_file(rewritten)
    a = run_sim(original)
    b = run_sim(reparsed)
    assert [(c.pair, c.current_a, c.output) for c in a.columns] == [
        (c.pair, c.current_a, c.output) for c in b.columns
    ]
    assert a.truth_table == b.truth_table


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        parse_scenario_text("device.r_weird = 1\n")
    with pytest.raises(ConfigError):
        parse_scenario_text("mystery.key = 1\n")
    with pytest.raises(ConfigError):
        parse_scenario_text("justakey = 1\n")
    with pytest.raises(ConfigError):
        parse_scenario_text("device.r_lrs 10e3\n")


def test_bundled_scenario_resolves_without_extension():
    assert bundled_scenario_path("paper_3x3").exists()
    with pytest.raises(ConfigError):
        bundled_scenario_path("missing_scenario")


def test_missing_scenario_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario_file(tmp_path / "nope.scenario")


def test_bits_file_resolution(tmp_path):
    (tmp_path / "bits.txt").write_text("10\n01\n")
    (tmp_path / "scn.scenario").write_text(
        "array.bits_file = bits.txt\nsense.op = XOR\n"
    )
    scn = load_scenario_file(tmp_path / "scn.scenario")
    assert scn["array"]["bits"] == ["10", "01"]
    assert scn["array"]["rows"] == 2

    (tmp_path / "dangling.scenario").write_text("array.bits_file = gone.txt\n")
    with pytest.raises(ConfigError):
        load_scenario_file(tmp_path / "dangling.scenario")


def test_bad_sense_op_rejected():
    scn = parse_scenario_text(MINIMAL)
    scn["sense"]["op"] = "MAJ"
    params = build_device(scn)
    array = build_array(scn, params)
    with pytest.raises(ConfigError):
        build_sense(scn, params, array)


def test_bad_compute_rows_rejected():
    scn = parse_scenario_text(MINIMAL)
    scn["array"]["compute_rows"] = [0, 0]
    with pytest.raises(ConfigError):
        run_sim(scn)
    scn["array"]["compute_rows"] = [0, 9]
    with pytest.raises(ConfigError):
        run_sim(scn)


def test_single_row_array_cannot_compute():
    scn = parse_scenario_text(
        "array.rows = 1\narray.cols = 2\narray.bits = 10\nsense.op = XOR\n"
    )
    with pytest.raises(ConfigError):
        run_sim(scn)


def test_read_op_returns_stored_bits():
    scn = parse_scenario_text(MINIMAL)
    result = run_sim(scn, op_override="READ")
    assert result.op == "READ"
    assert [c.output for c in result.columns] == [1, 1, 0]
    assert result.truth_table is None


def test_non_binary_bits_rejected():
    scn = parse_scenario_text(MINIMAL)
    scn["array"]["bits"] = ["1a0", "100", "000"]
    with pytest.raises(ConfigError):
        run_sim(scn)
