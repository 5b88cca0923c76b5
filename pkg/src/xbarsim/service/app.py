"""FastAPI service wrapping the simulator core.

Configuration mistakes map to 422, physically infeasible operating points
to 409; both carry a diagnostic detail string.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, analysis, bnn, scenario
from ..errors import ConfigError, InfeasibleError, InvalidParameterError
from .schemas import (
    BnnRequest,
    BnnResponse,
    ColumnOut,
    McRequest,
    McResponse,
    ScalePoint,
    ScaleRequest,
    ScaleResponse,
    SimRequest,
    SimResponse,
    SpeedupPoint,
    SpeedupRequest,
    SpeedupResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="xbarsim",
        version=__version__,
        description=(
            "Behavioral simulator of a resistive crossbar memory whose "
            "modified current-sense periphery computes XOR/XNOR and other "
            "two-reference threshold logic in a single cycle."
        ),
    )

    @app.exception_handler(ConfigError)
    @app.exception_handler(InvalidParameterError)
    async def _config_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(InfeasibleError)
    async def _infeasible(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/sim", response_model=SimResponse)
    def sim(request: SimRequest) -> SimResponse:
        result = scenario.run_sim(request.scenario.to_scenario_dict(), request.op)
        return SimResponse(
            op=result.op,
            columns=[
                ColumnOut(column=c.column, pair=c.pair, current_a=c.current_a,
                          output=c.output)
                for c in result.columns
            ],
            truth_table=result.truth_table,
            compute_cycles=result.compute_cycles,
        )

    @app.post("/scale", response_model=ScaleResponse)
    def scale(request: ScaleRequest) -> ScaleResponse:
        points = scenario.run_scale(
            {"device": request.device.model_dump(exclude_none=True)},
            request.ratios,
            vary=request.vary,
            margin=request.margin,
        )
        return ScaleResponse(
            vary=request.vary,
            points=[
                ScalePoint(
                    ratio=ratio,
                    max_rows=None if rows == float("inf") else int(rows),
                )
                for ratio, rows in points
            ],
        )

    @app.post("/mc", response_model=McResponse)
    def mc(request: McRequest) -> McResponse:
        report = scenario.run_mc(request.scenario.to_scenario_dict(), request.seed)
        return McResponse(report=report.to_dict(), summary=analysis.mc_summary(report))

    @app.post("/speedup", response_model=SpeedupResponse)
    def speedup_sweep(request: SpeedupRequest) -> SpeedupResponse:
        base_spec = bnn.ConvSpec(
            c=request.c, n_w=request.n_w, n_i=request.n_i, n_o=request.baseline_n_o
        )
        baseline = bnn.speedup(base_spec)
        points = []
        for latency in request.latency_cycles:
            for n_o in request.n_o:
                spec = bnn.ConvSpec(
                    c=request.c, n_w=request.n_w, n_i=request.n_i, n_o=n_o,
                    latency_cycles=latency,
                )
                absolute = bnn.speedup(spec)
                relative = bnn.relative_speedup(
                    n_o, latency, spec, baseline_n_o=request.baseline_n_o
                )
                adjusted = bnn.xornet_adjusted_speedup(spec)
                points.append(
                    SpeedupPoint(
                        n_o=n_o,
                        latency_cycles=latency,
                        ops_per_cycle=n_o / latency,
                        speedup=absolute,
                        relative_speedup=relative,
                        xornet_speedup=adjusted,
                        xornet_relative=adjusted / bnn.xornet_adjusted_speedup(base_spec),
                    )
                )
        return SpeedupResponse(
            baseline_n_o=request.baseline_n_o, baseline_speedup=baseline, points=points
        )

    @app.post("/bnn", response_model=BnnResponse)
    def binary_conv(request: BnnRequest) -> BnnResponse:
        def reshape(payload):
            values = np.asarray(payload.values, dtype=float)
            if values.size != int(np.prod(payload.dims)):
                raise ConfigError(
                    f"tensor has {values.size} values for dims {payload.dims}"
                )
            return values.reshape(payload.dims)

        params = scenario.build_device(
            {"device": request.device.model_dump(exclude_none=True)}
        )
        run = bnn.run_binary_conv(
            reshape(request.input), reshape(request.filters),
            request.array_cols, params,
        )
        return BnnResponse(
            output_dims=list(run.output.shape),
            output=[float(v) for v in run.output.reshape(-1)],
            oracle_output=[float(v) for v in run.oracle_output.reshape(-1)],
            raw_equal=run.raw_equal,
            max_rel_diff=run.max_rel_diff,
            compute_cycles=run.compute_cycles,
            write_pulses=run.write_pulses,
        )

    return app
