"""HTTP endpoints wrapping the planner, cost model, and simulator."""
from fastapi import APIRouter, HTTPException

from .. import planner, zoo
from ..errors import HyparError, ModelParseError, ValidationError
from ..netspec import NetworkModel, infer_shapes, parse_model
from ..simarray import HardwareConfig, simulate_training
from ..topology import Topology
from . import schemas

router = APIRouter()


def _load_model(source: schemas.ModelSource) -> NetworkModel:
    if (source.zoo is None) == (source.text is None):
        raise ValidationError("provide exactly one of model.zoo or model.text")
    model = zoo.get(source.zoo) if source.zoo is not None else parse_model(source.text)
    if source.batch is not None:
        model = model.with_batch(source.batch)
    return model


def _hardware(overrides: schemas.HardwareOverrides | None) -> HardwareConfig:
    hw = HardwareConfig()
    if overrides is not None:
        hw = hw.with_overrides(overrides.as_dict())
    return hw


def _plan_response(model: NetworkModel, matrix: planner.PlanMatrix) -> schemas.PlanResponse:
    return schemas.PlanResponse(**matrix.payload(model.name))


@router.get("/healthz")
def healthz():
    return {"status": "ok"}


@router.get("/zoo", response_model=schemas.ZooListResponse)
def zoo_list():
    entries = [schemas.ZooEntryInfo(name=n, weighted_layers=len(zoo.get(n).layers),
                                    batch=zoo.get(n).batch)
               for n in zoo.names()]
    return schemas.ZooListResponse(networks=entries)


@router.get("/zoo/{name}", response_model=schemas.ZooShowResponse)
def zoo_show(name: str):
    model = zoo.get(name)
    return schemas.ZooShowResponse(name=model.name,
                                   weighted_layers=len(model.layers),
                                   text=zoo.text(name))


@router.post("/shapes", response_model=schemas.ShapesResponse)
def shapes(req: schemas.ShapesRequest):
    model = _load_model(req.model)
    derived = infer_shapes(model)
    layers = [
        schemas.LayerShapeInfo(
            layer=i, kind=g.kind, in_channels=g.in_channels,
            out_channels=g.out_channels, elems_input=g.elems_input,
            elems_weight=g.elems_weight, elems_raw_output=g.elems_raw_output,
            elems_output=g.elems_output, flops_forward=g.flops_forward,
            flops_backward=g.flops_backward, flops_gradient=g.flops_gradient)
        for i, g in enumerate(derived.layers)
    ]
    return schemas.ShapesResponse(network=model.name, batch=model.batch,
                                  precision_bytes=derived.precision_bytes,
                                  layers=layers)


@router.post("/partition", response_model=schemas.PlanResponse)
def partition(req: schemas.PartitionRequest):
    model = _load_model(req.model)
    matrix = planner.hierarchical_partition(infer_shapes(model), req.levels, req.mode)
    return _plan_response(model, matrix)


@router.post("/brute-force", response_model=schemas.BruteForceResponse)
def brute_force(req: schemas.BruteForceRequest):
    model = _load_model(req.model)
    derived = infer_shapes(model)
    cost, plan = planner.brute_force(derived)
    dp_cost, _ = planner.partition_two(derived)
    return schemas.BruteForceResponse(
        network=model.name, plan=[p.label for p in plan],
        total_elements=cost.elements, total_bytes=cost.bytes,
        matches_linear_search=(dp_cost.elements == cost.elements))


def _matrix_for(req_plan: str, rows, derived, levels: int, mode: str) -> planner.PlanMatrix:
    if rows is not None:
        return planner.matrix_from_rows(derived, rows, mode)
    return planner.baseline_matrix(derived, levels, req_plan, mode)


@router.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest):
    model = _load_model(req.model)
    derived = infer_shapes(model)
    matrix = _matrix_for(req.plan, req.rows, derived, req.levels, req.mode)
    topo = Topology(req.topology, matrix.levels)
    report = simulate_training(model, matrix, _hardware(req.hardware), topo,
                               req.steps)
    return schemas.SimulateResponse(
        plan=_plan_response(model, matrix),
        **report.payload())


@router.post("/compare", response_model=schemas.CompareResponse)
def compare(req: schemas.CompareRequest):
    if len(req.baselines) < 2:
        raise ValidationError("compare needs at least two baselines")
    model = _load_model(req.model)
    derived = infer_shapes(model)
    hw = _hardware(req.hardware)
    topo = Topology(req.topology, req.levels)
    reports = {}
    for baseline in req.baselines:
        matrix = planner.baseline_matrix(derived, req.levels, baseline, req.mode)
        reports[baseline] = simulate_training(model, matrix, hw, topo, 1)
    # Ratios are normalized to Data Parallelism, simulating it if absent.
    if "dp" in reports:
        ref = reports["dp"]
    else:
        matrix = planner.baseline_matrix(derived, req.levels, "dp", req.mode)
        ref = simulate_training(model, matrix, hw, topo, 1)
    rows = [
        schemas.CompareRow(
            baseline=b, step_time=r.step_time, energy_joules=r.energy_joules,
            comm_bytes=r.comm_bytes,
            speedup_vs_dp=ref.step_time / r.step_time,
            energy_efficiency_vs_dp=ref.energy_joules / r.energy_joules)
        for b, r in reports.items()
    ]
    return schemas.CompareResponse(network=model.name, levels=req.levels,
                                   topology=req.topology, rows=rows)


def _sweep_point(model, derived, baseline, levels, mode, topology, hw):
    matrix = planner.baseline_matrix(derived, levels, baseline, mode)
    topo = Topology(topology, levels)
    return simulate_training(model, matrix, hw, topo, 1)


@router.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: schemas.SweepRequest):
    model = _load_model(req.model)
    hw = _hardware(req.hardware)
    if req.axis not in ("nodes", "batch", "topology"):
        raise ValidationError("axis must be one of: nodes, batch, topology")
    rows = []
    for value in req.values:
        if req.axis == "nodes":
            count = int(value)
            levels = count.bit_length() - 1
            if count < 1 or 2 ** levels != count:
                raise ValidationError(f"node count {value} is not a power of two")
            derived = infer_shapes(model)
            single = {}
            for baseline in req.baselines:
                report = _sweep_point(model, derived, baseline, levels,
                                      req.mode, req.topology, hw)
                base = _sweep_point(model, derived, baseline, 0, req.mode,
                                    req.topology, hw)
                single[baseline] = base.step_time
                rows.append(schemas.SweepRow(
                    axis=req.axis, value=value, baseline=baseline,
                    node_count=count, step_time=report.step_time,
                    energy_joules=report.energy_joules,
                    comm_bytes=report.comm_bytes,
                    speedup_vs_single=base.step_time / report.step_time))
        elif req.axis == "batch":
            varied = model.with_batch(int(value))
            derived = infer_shapes(varied)
            for baseline in req.baselines:
                report = _sweep_point(varied, derived, baseline, req.levels,
                                      req.mode, req.topology, hw)
                rows.append(schemas.SweepRow(
                    axis=req.axis, value=value, baseline=baseline,
                    node_count=2 ** req.levels, step_time=report.step_time,
                    energy_joules=report.energy_joules,
                    comm_bytes=report.comm_bytes))
        else:
            derived = infer_shapes(model)
            for baseline in req.baselines:
                report = _sweep_point(model, derived, baseline, req.levels,
                                      req.mode, value, hw)
                rows.append(schemas.SweepRow(
                    axis=req.axis, value=value, baseline=baseline,
                    node_count=2 ** req.levels, step_time=report.step_time,
                    energy_joules=report.energy_joules,
                    comm_bytes=report.comm_bytes))
    return schemas.SweepResponse(network=model.name, axis=req.axis, rows=rows)


def register_error_handlers(app):
    @app.exception_handler(ModelParseError)
    async def parse_error(request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=422, content={
            "detail": str(exc), "kind": "parse",
            "line": exc.line, "column": exc.column})

    @app.exception_handler(HyparError)
    async def domain_error(request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=422, content={
            "detail": str(exc), "kind": type(exc).__name__})
