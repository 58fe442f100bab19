"""Command-line client for the thirdeye service.

Every subcommand reads local files, sends their content to the HTTP API and
renders the response. By default the service app is mounted in-process, so
no daemon is needed; set THIRDEYE_SERVER (or --server) to talk to a running
instance instead. Exit codes: 0 clean, 1 violations/failures found, 2 input
or usage error.
"""

import argparse
import os
import socket
import sys
from pathlib import Path

import httpx

SERVER_ENV = "THIRDEYE_SERVER"
SINK_ENV = "THIRDEYE_SINK"
STATE_ENV = "THIRDEYE_STATE"

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


class ServiceClient:
    """httpx client for a remote server, or the app mounted in-process."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=120.0)
        else:
            from .service.client import in_process_client

            self._client = in_process_client()

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code == 422:
            detail = response.json()
            message = detail.get("message") or str(detail)
            raise ClientError(f"{detail.get('error', 'error')}: {message}")
        response.raise_for_status()
        return response.json()

    def close(self) -> None:
        self._client.close()


class ClientError(Exception):
    pass


def _read_file(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ClientError(f"cannot read {what} {path!r}: {exc.strerror}") from exc


def _deliver_trace(trace_text: str, sink_spec: str) -> None:
    """Route the service-produced trace bytes to the requested sink."""
    data = trace_text.encode("utf-8")
    if sink_spec == "memory":
        sys.stdout.write(trace_text)
        return
    if sink_spec.startswith("file:"):
        Path(sink_spec[len("file:"):]).write_bytes(data)
        return
    if sink_spec.startswith("tcp:"):
        target = sink_spec[len("tcp:"):]
        host, sep, port = target.rpartition(":")
        if not sep or not port.isdigit():
            raise ClientError(f"bad tcp sink spec {sink_spec!r}")
        with socket.create_connection((host, int(port)), timeout=10.0) as sock:
            sock.sendall(data)
        return
    raise ClientError(f"unknown sink spec {sink_spec!r}")


# --- subcommand handlers -----------------------------------------------------------


def _cmd_simulate(client: ServiceClient, args) -> int:
    payload = {
        "config_text": _read_file(args.config, "config"),
        "seed": args.seed,
        "count": args.count,
        "mutation": args.mutation,
        "state": args.state,
    }
    if args.hosts:
        payload["host_map_text"] = _read_file(args.hosts, "host map")
    data = client.post("/simulate", payload)
    sink_spec = f"file:{args.out}" if args.out else args.sink
    _deliver_trace(data["trace"], sink_spec)
    if args.hosts_out:
        Path(args.hosts_out).write_text(data["host_map"], encoding="utf-8")
    denied = sum(1 for code in data["access_codes"] if code != 0)
    print(
        f"requests={len(data['access_codes'])} granted={len(data['access_codes']) - denied} "
        f"denied={denied} emitted={data['emitted']} filtered={data['filtered']}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_validate(client: ServiceClient, args) -> int:
    payload = {
        "trace": _read_file(args.trace, "trace"),
        "host_map_text": _read_file(args.hosts, "host map"),
        "location": args.location,
    }
    data = client.post("/validate", payload)
    if args.format == "tsv":
        for violation in data["violations"]:
            expected = violation["expected"]
            matched = ",".join(
                f"{d['kind']}:{d['pattern']}" for d in expected["matched"]
            )
            print(
                "\t".join(
                    (
                        str(violation["request_seq"]),
                        violation["location"],
                        violation["host"],
                        violation["uri"],
                        "allowed" if expected["allowed"] else "denied",
                        "allowed" if violation["actual_allowed"] else "denied",
                        str(violation["access_code"]),
                        expected["ordering"],
                        expected["rule"],
                        matched,
                    )
                )
            )
    else:
        for violation in data["violations"]:
            print(violation["explanation"])
            print()
    print(f"checked={data['checked']} passed={data['passed']} failed={data['failed']}")
    return EXIT_FINDINGS if data["failed"] else EXIT_OK


def _cmd_query(client: ServiceClient, args) -> int:
    payload = {
        "trace": _read_file(args.trace, "trace"),
        "types": args.type or None,
        "where": args.where or [],
        "from_ns": getattr(args, "from"),
        "to_ns": args.to,
    }
    data = client.post("/query", payload)
    for event in data["events"]:
        props = ";".join(f"{k}={v}" for k, v in event["properties"].items())
        print(
            f"{event['seq']}\t{event['timestamp']}\t{event['type']}\t"
            f"{event['source_location']}\t{props}"
        )
    print(f"matched={data['count']}", file=sys.stderr)
    return EXIT_OK


def _cmd_report(client: ServiceClient, args) -> int:
    data = client.post("/report", {"trace": _read_file(args.trace, "trace")})
    if args.format == "kv":
        for line in data["kv_lines"]:
            print(line)
    else:
        print(data["text"])
    return EXIT_OK


def _cmd_mutants(client: ServiceClient, args) -> int:
    payload = {
        "config_text": _read_file(args.config, "config"),
        "seed": args.seed,
        "count": args.count,
    }
    data = client.post("/mutants", payload)
    for outcome in data["outcomes"]:
        status = "detected" if outcome["detected"] else "MISSED"
        print(
            f"{outcome['mutation']:<16} violations={outcome['violations']:<4} {status}"
        )
    return EXIT_OK if data["all_detected"] else EXIT_FINDINGS


def _cmd_schema_check(client: ServiceClient, args) -> int:
    data = client.post(
        "/schema/check", {"schema_text": _read_file(args.schema, "schema file")}
    )
    if not data["ok"]:
        for error in data["errors"]:
            print(error, file=sys.stderr)
        return EXIT_FINDINGS
    for type_info in data["types"]:
        parent = f" : {type_info['parent']}" if type_info["parent"] else ""
        props = ", ".join(type_info["resolved_properties"])
        print(f"{type_info['name']}{parent} {{ {props} }}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thirdeye",
        description="Trace, query and validate access-policy event traces.",
    )
    parser.add_argument(
        "--server",
        default=os.environ.get(SERVER_ENV),
        help=f"service base URL (default: in-process; env {SERVER_ENV})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the simulated server over a config")
    p.add_argument("--config", required=True, help="configuration file")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("-n", "--count", type=int, default=50, help="workload size")
    p.add_argument("--mutation", default=None, help="inject a named decision fault")
    p.add_argument(
        "--state",
        default=os.environ.get(STATE_ENV, "access"),
        help=f"tracing state: all|access|none|T1,T2,... (env {STATE_ENV})",
    )
    p.add_argument("--out", default=None, help="write the trace to this file")
    p.add_argument(
        "--sink",
        default=os.environ.get(SINK_ENV, "memory"),
        help=f"file:<path>|tcp:<host>:<port>|memory (env {SINK_ENV}; memory prints)",
    )
    p.add_argument("--hosts", default=None, help="use this host map file")
    p.add_argument("--hosts-out", default=None, help="write the host map used")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("validate", help="check logged decisions against the policy events")
    p.add_argument("trace", help="trace file")
    p.add_argument("--hosts", required=True, help="host map file (hostname ip per line)")
    p.add_argument("--location", default=None, help="only check this location")
    p.add_argument("--format", choices=("text", "tsv"), default="text")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("query", help="filter trace events")
    p.add_argument("trace", help="trace file")
    p.add_argument("--type", action="append", help="event type (repeatable)")
    p.add_argument(
        "--where",
        action="append",
        help="predicate 'prop OP literal'; OP in = != < <= > >= glob (repeatable)",
    )
    p.add_argument("--from", type=int, default=None, help="window start (ns)")
    p.add_argument("--to", type=int, default=None, help="window end (ns)")
    p.set_defaults(handler=_cmd_query)

    p = sub.add_parser("report", help="summary statistics for a trace")
    p.add_argument("trace", help="trace file")
    p.add_argument("--format", choices=("text", "kv"), default="text")
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("mutants", help="run every mutation and report detection")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("-n", "--count", type=int, default=50)
    p.set_defaults(handler=_cmd_mutants)

    p = sub.add_parser("schema", help="schema file tools")
    schema_sub = p.add_subparsers(dest="schema_command", required=True)
    pc = schema_sub.add_parser("check", help="parse and resolve a schema file")
    pc.add_argument("schema", help="schema definition file")
    pc.set_defaults(handler=_cmd_schema_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve, no_client=True)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "no_client", False):
        return args.handler(args)
    client = ServiceClient(args.server)
    try:
        return args.handler(client, args)
    except ClientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except httpx.HTTPError as exc:
        print(f"error: service request failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        client.close()


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
