"""Command-line front end: a thin HTTP client of the simulation service.

Without --server the service runs in-process over an ASGI transport, so
the CLI works standalone; with --server URL the same requests go to a
remote instance.  Every run drops a manifest.json holding the tool
version and the exact resolved request, enough to reproduce the output
files byte for byte.

Subcommands map to the analysis products: sim (column currents and logic
outputs), scale (max rows vs on/off ratio), mc (Monte Carlo histograms),
bnn (binary convolution with oracle check), speedup (throughput model).
"""

from __future__ import annotations

import asyncio
import csv
import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__, scenario
from .analysis import (
    McReport,
    write_mc_histogram_csv,
    write_mc_samples_csv,
    write_mc_summary_json,
)
from .bnn import load_tensor
from .errors import ConfigError, XbarError
from .sense import PAIR_PATTERNS

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def human_amps(amps: float) -> str:
    magnitude = abs(amps)
    if magnitude >= 1e-3:
        return f"{amps * 1e3:.6g} mA"
    if magnitude >= 1e-6:
        return f"{amps * 1e6:.6g} µA"
    if magnitude >= 1e-9:
        return f"{amps * 1e9:.6g} nA"
    return f"{amps * 1e12:.6g} pA"


async def _request(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=300.0) as client:
            return await client.post(path, json=payload)
    # no server given: mount the service in-process over an ASGI transport
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://xbarsim.in-process", timeout=300.0
    ) as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict) -> dict:
    try:
        response = asyncio.run(_request(server, path, payload))
    except httpx.HTTPError as exc:
        click.echo(f"error: service request failed: {exc}", err=True)
        sys.exit(1)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    if response.status_code in (400, 422):
        click.echo(f"error: invalid configuration: {detail}", err=True)
        sys.exit(EXIT_CONFIG)
    if response.status_code == 409:
        click.echo(f"error: simulation infeasible: {detail}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    click.echo(f"error: service returned {response.status_code}: {detail}", err=True)
    sys.exit(1)


def _load_scenario_payload(path: str, seed: int | None = None) -> dict:
    try:
        scn = scenario.load_scenario_file(path)
    except ConfigError as exc:
        click.echo(f"error: invalid configuration: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if seed is not None:
        scn.setdefault("variation", {})["seed"] = seed
    scn.pop("output", None)
    return scn


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out_dir: Path, command: str, endpoint: str, payload: dict,
                    outputs: list[str], server: str | None, fmt: str) -> None:
    manifest = {
        "tool": "xbarsim",
        "version": __version__,
        "command": command,
        "endpoint": endpoint,
        "server": server or "in-process",
        "format": fmt,
        "request": payload,
        "outputs": sorted(outputs),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


server_option = click.option("--server", default=None, metavar="URL",
                             help="Remote service URL (default: run in-process).")
out_option = click.option("--out", default="xbarsim-out", show_default=True,
                          metavar="DIR", help="Output directory.")
format_option = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                             default="csv", show_default=True)


@click.group()
@click.version_option(version=__version__, prog_name="xbarsim")
def main() -> None:
    """Resistive-crossbar in-memory logic simulator.

    Subcommands reproduce the analysis products: sim (per-column currents
    and logic outputs), scale (max array rows vs on/off ratio), mc
    (Monte Carlo variation histograms), bnn (binary convolution through
    the array with an oracle check), speedup (throughput comparison).
    """


@main.command()
@click.option("--scenario", "scenario_path", required=True, metavar="PATH",
              help="Scenario file (bundled names like 'paper_3x3' also work).")
@click.option("--op", default=None,
              type=click.Choice(list(scenario.SCENARIO_OPS), case_sensitive=False),
              help="Override the scenario's sense operation.")
@click.option("--seed", default=None, type=int, help="Override variation.seed.")
@server_option
@out_option
@format_option
def sim(scenario_path: str, op: str | None, seed: int | None, server: str | None,
        out: str, fmt: str) -> None:
    """Run one compute (or read) access over every column."""
    payload = {
        "scenario": _load_scenario_payload(scenario_path, seed),
        "op": op.upper() if op else None,
    }
    data = _post(server, "/sim", payload)
    out_dir = _out_dir(out)
    outputs = []
    if fmt == "json":
        _write_json(out_dir / "sim_result.json", data)
        outputs.append("sim_result.json")
    else:
        with open(out_dir / "sim_columns.csv", "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["column", "pair", "current_a", "current_human", "output"])
            for col in data["columns"]:
                writer.writerow([
                    col["column"], col["pair"], repr(col["current_a"]),
                    human_amps(col["current_a"]), col["output"],
                ])
        outputs.append("sim_columns.csv")
        if data["truth_table"] is not None:
            with open(out_dir / "sim_truth_table.csv", "w", newline="") as stream:
                writer = csv.writer(stream)
                writer.writerow(["pair", "output"])
                for pair in PAIR_PATTERNS:
                    writer.writerow([pair, data["truth_table"][pair]])
            outputs.append("sim_truth_table.csv")
    _write_manifest(out_dir, "sim", "/sim", payload, outputs, server, fmt)

    click.echo(f"op: {data['op']}")
    if data["truth_table"] is not None:
        click.echo("truth table: " + "  ".join(
            f"{pair}->{data['truth_table'][pair]}" for pair in PAIR_PATTERNS))
    for col in data["columns"]:
        click.echo(
            f"column {col['column']}: pair {col['pair']}  "
            f"I_SL {human_amps(col['current_a'])}  out {col['output']}"
        )
    click.echo(f"wrote {', '.join(sorted(outputs))} to {out_dir}")


@main.command()
@click.option("--scenario", "scenario_path", default=None, metavar="PATH",
              help="Scenario supplying device parameters (defaults used otherwise).")
@click.option("--ratios", required=True, metavar="LIST",
              help="Comma-separated on/off ratios, ascending (e.g. 10,1e3,1e6).")
@click.option("--vary", type=click.Choice(["LRS", "HRS"]), default="LRS",
              show_default=True)
@click.option("--margin", default=0.0, show_default=True,
              help="Extra current margin required at every boundary (A).")
@server_option
@out_option
@format_option
def scale(scenario_path: str | None, ratios: str, vary: str, margin: float,
          server: str | None, out: str, fmt: str) -> None:
    """Sweep the on/off resistance ratio and report the max row count."""
    try:
        ratio_values = [float(tok) for tok in ratios.split(",") if tok.strip()]
    except ValueError:
        click.echo(f"error: invalid configuration: bad --ratios {ratios!r}", err=True)
        sys.exit(EXIT_CONFIG)
    device = {}
    if scenario_path is not None:
        device = _load_scenario_payload(scenario_path).get("device", {})
    payload = {"device": device, "ratios": ratio_values, "vary": vary, "margin": margin}
    data = _post(server, "/scale", payload)
    out_dir = _out_dir(out)
    if fmt == "json":
        _write_json(out_dir / "scale.json", data)
        outputs = ["scale.json"]
    else:
        with open(out_dir / "scale.csv", "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["ratio", "max_rows"])
            for point in data["points"]:
                rows = point["max_rows"]
                writer.writerow([repr(point["ratio"]), "inf" if rows is None else rows])
        outputs = ["scale.csv"]
    _write_manifest(out_dir, "scale", "/scale", payload, outputs, server, fmt)
    for point in data["points"]:
        click.echo(f"ratio {point['ratio']:g}: max_rows {point['max_rows']}")
    click.echo(f"wrote {', '.join(outputs)} to {out_dir}")


@main.command()
@click.option("--scenario", "scenario_path", required=True, metavar="PATH")
@click.option("--seed", default=None, type=int, help="Override variation.seed.")
@click.option("--bins", default=100, show_default=True,
              help="Histogram bin count.")
@server_option
@out_option
@format_option
def mc(scenario_path: str, seed: int | None, bins: int, server: str | None,
       out: str, fmt: str) -> None:
    """Monte Carlo variation analysis of the scenario's compute access."""
    payload = {"scenario": _load_scenario_payload(scenario_path, seed), "seed": seed}
    data = _post(server, "/mc", payload)
    report = McReport.from_dict(data["report"])
    out_dir = _out_dir(out)
    outputs = ["mc_summary.json"]
    with open(out_dir / "mc_summary.json", "w") as stream:
        write_mc_summary_json(report, stream)
    if fmt == "json":
        _write_json(out_dir / "mc_report.json", data["report"])
        outputs.append("mc_report.json")
    else:
        with open(out_dir / "mc_samples.csv", "w", newline="") as stream:
            write_mc_samples_csv(report, stream)
        with open(out_dir / "mc_histogram.csv", "w", newline="") as stream:
            write_mc_histogram_csv(report, stream, bins=bins)
        outputs += ["mc_samples.csv", "mc_histogram.csv"]
    _write_manifest(out_dir, "mc", "/mc", payload, outputs, server, fmt)
    summary = data["summary"]
    click.echo(
        f"trials {summary['n_trials']}  seed {summary['seed']}  "
        f"failures {summary['failure_count']} "
        f"(rate {summary['failure_rate']:.3g})"
    )
    for key, stats in summary["clusters"].items():
        click.echo(
            f"cluster {key}: mean {human_amps(stats['mean'])}  "
            f"sigma {human_amps(stats['std'])}"
        )
    click.echo(f"wrote {', '.join(sorted(outputs))} to {out_dir}")


@main.command()
@click.option("--scenario", "scenario_path", default=None, metavar="PATH",
              help="Scenario supplying device parameters (defaults used otherwise).")
@click.option("--input", "input_path", required=True, metavar="FILE",
              help="Input tensor file (shape line, then row-major values).")
@click.option("--filters", "filters_path", required=True, metavar="FILE",
              help="Filter tensor file, shape (n, kh, kw, c) or (kh, kw, c).")
@click.option("--array-cols", default=64, show_default=True,
              help="Columns available per compute chunk.")
@server_option
@out_option
@format_option
def bnn(scenario_path: str | None, input_path: str, filters_path: str,
        array_cols: int, server: str | None, out: str, fmt: str) -> None:
    """Binary convolution through the array, checked against the oracle."""
    try:
        input_values = load_tensor(input_path)
        filter_values = load_tensor(filters_path)
    except (OSError, ValueError, XbarError) as exc:
        click.echo(f"error: invalid configuration: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    device = {}
    if scenario_path is not None:
        device = _load_scenario_payload(scenario_path).get("device", {})
    payload = {
        "input": {"dims": list(input_values.shape),
                  "values": [float(v) for v in input_values.reshape(-1)]},
        "filters": {"dims": list(filter_values.shape),
                    "values": [float(v) for v in filter_values.reshape(-1)]},
        "array_cols": array_cols,
        "device": device,
    }
    data = _post(server, "/bnn", payload)
    out_dir = _out_dir(out)
    summary = {
        "output_dims": data["output_dims"],
        "raw_equal": data["raw_equal"],
        "max_rel_diff": data["max_rel_diff"],
        "compute_cycles": data["compute_cycles"],
        "write_pulses": data["write_pulses"],
    }
    _write_json(out_dir / "bnn_summary.json", summary)
    outputs = ["bnn_summary.json"]
    if fmt == "json":
        _write_json(out_dir / "bnn_result.json", data)
        outputs.append("bnn_result.json")
    else:
        oh, ow, nf = data["output_dims"]
        with open(out_dir / "bnn_output.csv", "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["y", "x", "filter", "value", "oracle_value"])
            flat = data["output"]
            oracle = data["oracle_output"]
            index = 0
            for y in range(oh):
                for x in range(ow):
                    for f in range(nf):
                        writer.writerow([y, x, f, repr(flat[index]),
                                         repr(oracle[index])])
                        index += 1
        outputs.append("bnn_output.csv")
    _write_manifest(out_dir, "bnn", "/bnn", payload, outputs, server, fmt)
    click.echo(
        f"output {tuple(data['output_dims'])}  raw_equal {data['raw_equal']}  "
        f"max_rel_diff {data['max_rel_diff']:.3g}  "
        f"compute_cycles {data['compute_cycles']}  "
        f"write_pulses {data['write_pulses']}"
    )
    click.echo(f"wrote {', '.join(sorted(outputs))} to {out_dir}")


@main.command()
@click.option("--c", "channels", default=256, show_default=True)
@click.option("--nw", default=196, show_default=True, help="Filter area.")
@click.option("--ni", default=9, show_default=True, help="Input area.")
@click.option("--no", "n_o_list", default="64,128,256,512,1024,2048,4096",
              show_default=True, metavar="LIST",
              help="Comma-separated XNOR-ops-per-cycle values.")
@click.option("--latency", "latency_list", default="1,2,3", show_default=True,
              metavar="LIST", help="Comma-separated cycles-per-op values.")
@click.option("--baseline-no", default=64, show_default=True)
@server_option
@out_option
@format_option
def speedup(channels: int, nw: int, ni: int, n_o_list: str, latency_list: str,
            baseline_no: int, server: str | None, out: str, fmt: str) -> None:
    """Throughput model: speedup vs ops-per-cycle, one series per latency."""
    try:
        n_o_values = [int(tok) for tok in n_o_list.split(",") if tok.strip()]
        latencies = [int(tok) for tok in latency_list.split(",") if tok.strip()]
    except ValueError:
        click.echo("error: invalid configuration: --no and --latency take "
                   "comma-separated integers", err=True)
        sys.exit(EXIT_CONFIG)
    payload = {
        "c": channels, "n_w": nw, "n_i": ni,
        "n_o": n_o_values, "latency_cycles": latencies,
        "baseline_n_o": baseline_no,
    }
    data = _post(server, "/speedup", payload)
    out_dir = _out_dir(out)
    if fmt == "json":
        _write_json(out_dir / "speedup.json", data)
        outputs = ["speedup.json"]
    else:
        with open(out_dir / "speedup.csv", "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow([
                "n_o", "latency_cycles", "ops_per_cycle", "speedup",
                "relative_speedup", "xornet_speedup", "xornet_relative",
            ])
            for point in data["points"]:
                writer.writerow([
                    point["n_o"], point["latency_cycles"],
                    repr(point["ops_per_cycle"]), repr(point["speedup"]),
                    repr(point["relative_speedup"]), repr(point["xornet_speedup"]),
                    repr(point["xornet_relative"]),
                ])
        outputs = ["speedup.csv"]
    _write_manifest(out_dir, "speedup", "/speedup", payload, outputs, server, fmt)
    click.echo(
        f"baseline n_o {data['baseline_n_o']}: speedup "
        f"{data['baseline_speedup']:.3f}"
    )
    click.echo(f"wrote {', '.join(outputs)} to {out_dir}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the simulation service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
