"""Command-line client for the hypar service.

Every verb issues a request against the service API; by default an
in-process ASGI transport serves it (no network), while ``--server URL``
targets a running instance. Exit codes: 0 success, 1 usage, 2 validation,
3 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import httpx

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3

CSV_SCHEMA = "# hypar-csv v1"
HW_ENV_VAR = "HYPAR_HW"


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit 2; usage errors are 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class ServiceClient:
    def __init__(self, server: Optional[str] = None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/") + "/v1",
                                        timeout=600.0)
        else:
            import warnings

            from .service import create_app
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient
                self._client = TestClient(create_app(),
                                          base_url="http://hypar.local/v1",
                                          raise_server_exceptions=False)

    def get(self, path: str) -> dict:
        return self._handle(self._client.get(path))

    def post(self, path: str, payload: dict) -> dict:
        return self._handle(self._client.post(path, json=payload))

    @staticmethod
    def _handle(response: httpx.Response) -> dict:
        if response.status_code in (200, 201):
            return response.json()
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        if response.status_code in (400, 404, 422):
            raise CliValidationError(str(detail))
        raise RuntimeError(f"service error {response.status_code}: {detail}")


class CliValidationError(Exception):
    pass


class CliUsageError(Exception):
    pass


def _load_hw_overrides(path_arg: Optional[str]) -> Optional[dict]:
    path = path_arg or os.environ.get(HW_ENV_VAR)
    if not path:
        return None
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CliValidationError(f"cannot read hardware file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliValidationError(f"invalid hardware JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CliValidationError("hardware file must hold a JSON object")
    return data


def _model_source(args) -> dict:
    source: dict = {}
    if getattr(args, "zoo", None):
        source["zoo"] = args.zoo
    if getattr(args, "model", None):
        try:
            with open(args.model) as fh:
                source["text"] = fh.read()
        except OSError as exc:
            raise CliValidationError(f"cannot read model file: {exc}") from exc
    if ("zoo" in source) == ("text" in source):
        raise CliValidationError("provide exactly one of --zoo or --model")
    if getattr(args, "batch", None):
        source["batch"] = args.batch
    return source


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in cells]
    return "\n".join(lines) + "\n"


def _csv(headers: list[str], rows: list[list]) -> str:
    lines = [CSV_SCHEMA, ",".join(headers)]
    lines += [",".join(str(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------

def cmd_shapes(client: ServiceClient, args) -> None:
    payload = client.post("/shapes", {"model": _model_source(args)})
    if args.format == "json":
        _emit(args, _json_text(payload))
        return
    headers = ["layer", "kind", "cin", "cout", "in", "weight", "raw_out",
               "out", "fwd_flops"]
    rows = [[l["layer"], l["kind"], l["in_channels"], l["out_channels"],
             l["elems_input"], l["elems_weight"], l["elems_raw_output"],
             l["elems_output"], l["flops_forward"]]
            for l in payload["layers"]]
    text = (_csv if args.format == "csv" else _table)(headers, rows)
    if args.format == "text":
        text = f"network {payload['network']}  batch {payload['batch']}\n" + text
    _emit(args, text)


def cmd_partition(client: ServiceClient, args) -> None:
    payload = client.post("/partition", {
        "model": _model_source(args), "levels": args.levels, "mode": args.mode})
    if args.format == "text":
        lines = [f"network {payload['network']}  levels {payload['levels']}  "
                 f"mode {payload['mode']}"]
        for h, row in enumerate(payload["rows"], start=1):
            lines.append(f"H{h}: " + " ".join(row))
        lines.append(f"total elements {payload['total_elements']}  "
                     f"bytes {payload['total_bytes']}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _json_text(payload))


def cmd_brute_force(client: ServiceClient, args) -> None:
    payload = client.post("/brute-force", {"model": _model_source(args)})
    if args.format == "text":
        _emit(args, f"network {payload['network']}\n"
                    f"plan: {' '.join(payload['plan'])}\n"
                    f"total elements {payload['total_elements']}  "
                    f"bytes {payload['total_bytes']}\n")
    else:
        _emit(args, _json_text(payload))


def _simulate_request(args) -> dict:
    req = {"model": _model_source(args), "levels": args.levels,
           "plan": args.plan, "mode": args.mode, "topology": args.topology,
           "steps": args.steps}
    hw = _load_hw_overrides(getattr(args, "hw_file", None))
    if hw:
        req["hardware"] = hw
    return req


def cmd_simulate(client: ServiceClient, args) -> None:
    payload = client.post("/simulate", _simulate_request(args))
    if args.format == "json":
        _emit(args, _json_text(payload))
        return
    headers = ["layer", "phase", "compute_time", "comm_time", "comm_bytes"]
    rows = [[r["layer"], r["phase"], f"{r['compute_time']:.9f}",
             f"{r['comm_time']:.9f}", r["comm_bytes"]]
            for r in payload["per_layer"]]
    if args.format == "csv":
        _emit(args, _csv(headers, rows))
        return
    summary = (f"network {payload['network']}  topology {payload['topology']}  "
               f"nodes {payload['node_count']}  steps {payload['steps']}\n"
               f"step_time {payload['step_time']:.6f} s  "
               f"energy {payload['energy_joules']:.6f} J  "
               f"comm {payload['comm_bytes']} B\n")
    _emit(args, summary + _table(headers, rows))


def cmd_compare(client: ServiceClient, args) -> None:
    baselines = [b.strip() for b in args.baselines.split(",") if b.strip()]
    req = {"model": _model_source(args), "baselines": baselines,
           "levels": args.levels, "mode": args.mode, "topology": args.topology}
    hw = _load_hw_overrides(getattr(args, "hw_file", None))
    if hw:
        req["hardware"] = hw
    payload = client.post("/compare", req)
    if args.format == "json":
        _emit(args, _json_text(payload))
        return
    headers = ["baseline", "step_time", "energy_joules", "comm_bytes",
               "speedup_vs_dp", "energy_efficiency_vs_dp"]
    rows = [[r["baseline"], f"{r['step_time']:.6f}", f"{r['energy_joules']:.6f}",
             r["comm_bytes"], f"{r['speedup_vs_dp']:.4f}",
             f"{r['energy_efficiency_vs_dp']:.4f}"]
            for r in payload["rows"]]
    _emit(args, (_csv if args.format == "csv" else _table)(headers, rows))


def cmd_sweep(client: ServiceClient, args) -> None:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise CliUsageError("empty axis value list")
    baselines = [b.strip() for b in args.baselines.split(",") if b.strip()]
    req = {"model": _model_source(args), "axis": args.axis, "values": values,
           "baselines": baselines, "levels": args.levels, "mode": args.mode,
           "topology": args.topology}
    hw = _load_hw_overrides(getattr(args, "hw_file", None))
    if hw:
        req["hardware"] = hw
    payload = client.post("/sweep", req)
    if args.format == "json":
        _emit(args, _json_text(payload))
        return
    headers = ["axis", "value", "baseline", "node_count", "step_time",
               "energy_joules", "comm_bytes", "speedup_vs_single"]
    rows = [[r["axis"], r["value"], r["baseline"], r["node_count"],
             f"{r['step_time']:.6f}", f"{r['energy_joules']:.6f}",
             r["comm_bytes"],
             "" if r["speedup_vs_single"] is None
             else f"{r['speedup_vs_single']:.4f}"]
            for r in payload["rows"]]
    _emit(args, _csv(headers, rows))


def cmd_zoo(client: ServiceClient, args) -> None:
    if args.zoo_cmd == "list":
        payload = client.get("/zoo")
        text = _table(["name", "weighted_layers", "batch"],
                      [[n["name"], n["weighted_layers"], n["batch"]]
                       for n in payload["networks"]])
        _emit(args, text)
    else:
        payload = client.get(f"/zoo/{args.name}")
        _emit(args, payload["text"])


def cmd_serve(args) -> None:
    import uvicorn
    uvicorn.run("hypar.service:app", host=args.host, port=args.port)


# --------------------------------------------------------------------------

def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zoo", help="built-in network name")
    p.add_argument("--model", help="path to a model file")
    p.add_argument("--batch", type=int, help="override batch size")


def _add_common(p: argparse.ArgumentParser, default_format="text") -> None:
    p.add_argument("--format", choices=("text", "json", "csv"),
                   default=default_format)
    p.add_argument("--output", "-o", help="write output to a file")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=4,
                   help="hierarchy levels (2^levels accelerators)")
    p.add_argument("--mode", choices=("paper-literal", "shape-prop"),
                   default="paper-literal")
    p.add_argument("--topology", choices=("htree", "torus"), default="htree")
    p.add_argument("--hw-file", help=f"hardware override JSON "
                                     f"(or ${HW_ENV_VAR})")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="hypar",
                             description="layer-wise parallelism planner and "
                                         "accelerator-array simulator")
    parser.add_argument("--server", help="remote service URL "
                                         "(default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shapes", help="derived tensor shapes and FLOPs")
    _add_model_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_shapes)

    p = sub.add_parser("partition", help="communication-optimal plan matrix")
    _add_model_args(p)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--mode", choices=("paper-literal", "shape-prop"),
                   default="paper-literal")
    _add_common(p, default_format="json")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("brute-force", help="exhaustive single-split search")
    _add_model_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_brute_force)

    p = sub.add_parser("simulate", help="simulate training steps")
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--plan", choices=("dp", "mp", "trick", "hypar"),
                   default="hypar")
    p.add_argument("--steps", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="baselines normalized to dp")
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--baselines", default="dp,hypar",
                   help="comma list from dp,mp,trick,hypar")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="sweep nodes, batch, or topology")
    _add_model_args(p)
    _add_run_args(p)
    p.add_argument("--axis", choices=("nodes", "batch", "topology"),
                   required=True)
    p.add_argument("--values", required=True, help="comma-separated points")
    p.add_argument("--baselines", default="dp,hypar")
    _add_common(p, default_format="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("zoo", help="built-in networks")
    zoo_sub = p.add_subparsers(dest="zoo_cmd", required=True)
    lp = zoo_sub.add_parser("list")
    _add_common(lp)
    lp.set_defaults(func=cmd_zoo)
    sp = zoo_sub.add_parser("show")
    sp.add_argument("name")
    _add_common(sp)
    sp.set_defaults(func=cmd_zoo)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=None)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "serve":
            cmd_serve(args)
            return EXIT_OK
        client = ServiceClient(args.server)
        args.func(client, args)
        return EXIT_OK
    except CliUsageError as exc:
        print(f"hypar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CliValidationError as exc:
        print(f"hypar: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - report and map to exit code
        print(f"hypar: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
