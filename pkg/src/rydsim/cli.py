"""Command-line client of the experiment service.

The CLI never computes anything itself: it speaks HTTP to the FastAPI
app, by default through an in-process transport (no server needed) or
against a remote instance via --server.  Result files are written by the
client with all floating-point values at 9 significant digits, so an
identical config and seed reproduces byte-identical files; wall time is
printed to the console only.

Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 regression
failure.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_REGRESS = 4


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service import app
    return httpx.Client(transport=httpx.ASGITransport(app=app),
                        base_url="http://rydsim.internal", timeout=None)


def _fmt9(value) -> str:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return "" if value is None else str(value)
    if isinstance(value, int):
        return str(value)
    return format(value, ".9g")


def _round9(obj):
    if isinstance(obj, float):
        return float(format(obj, ".9g"))
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _fail(payload, default_exit: int) -> int:
    try:
        err = payload["error"]
        click.echo(f"error [{err['code']}]: {err['message']}", err=True)
        return EXIT_CONFIG if err["code"] in (
            "unknown_protocol", "schema_violation", "resource_limit") else default_exit
    except (KeyError, TypeError):
        click.echo(f"error: {payload}", err=True)
        return default_exit


@click.group()
def main():
    """Rydberg gate experiment runner."""


@main.command("run")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", default=None, help="service URL (default: in-process)")
def run_cmd(config_path, server):
    """Run the experiment described by a JSON config file."""
    try:
        config = json.loads(Path(config_path).read_text())
    except json.JSONDecodeError as exc:
        click.echo(f"error [schema_violation]: config is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    t0 = time.monotonic()
    with _client(server) as client:
        resp = client.post("/run", json=config)
    wall = time.monotonic() - t0
    if resp.status_code != 200:
        sys.exit(_fail(resp.json(), EXIT_NUMERICAL))
    out = resp.json()
    output = config.get("output") or {}
    written = []
    if output.get("csv"):
        path = Path(output["csv"])
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(out["columns"])
            for rec in out["records"]:
                writer.writerow([_fmt9(rec.get(col)) for col in out["columns"]])
        written.append(str(path))
    if output.get("json"):
        path = Path(output["json"])
        payload = {"protocol": out["protocol"], "columns": out["columns"],
                   "records": _round9(out["records"])}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        written.append(str(path))
    click.echo(f"{out['protocol']}: {len(out['records'])} record(s) "
               f"in {wall:.2f} s" + (f" -> {', '.join(written)}" if written else ""))
    if not written:
        for rec in out["records"]:
            click.echo("  " + "  ".join(f"{c}={_fmt9(rec.get(c))}"
                                        for c in out["columns"]))
    sys.exit(EXIT_OK)


@main.command("regress")
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
@click.option("--names", default=None, help="comma-separated check names")
@click.option("--server", default=None)
def regress_cmd(as_json, names, server):
    """Run the pinned-number regression suite and report per-check verdicts."""
    body = {"names": names.split(",") if names else None}
    with _client(server) as client:
        resp = client.post("/regress", json=body)
    if resp.status_code != 200:
        sys.exit(_fail(resp.json(), EXIT_NUMERICAL))
    report = resp.json()
    if as_json:
        click.echo(json.dumps(_round9(report), indent=2, sort_keys=True))
    else:
        for e in report["entries"]:
            verdict = "PASS" if e["passed"] else "FAIL"
            exp = e["expected"]
            obt = e["obtained"]
            click.echo(f"[{verdict}] {e['name']}: expected {_render(exp)}, "
                       f"obtained {_render(obt)} "
                       f"({e['comparison']}, tol {_fmt9(e['tolerance'])})")
            if "error" in e:
                click.echo(f"       {e['error']}")
        click.echo(f"{report['n_passed']}/{report['n_total']} checks passed")
    sys.exit(EXIT_OK if report["passed"] else EXIT_REGRESS)


def _render(value) -> str:
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(_fmt9(v) for v in value) + ")"
    return _fmt9(value)


@main.command("list-protocols")
@click.option("--server", default=None)
def list_cmd(server):
    """List the protocol catalog with parameter schemas."""
    with _client(server) as client:
        resp = client.get("/protocols")
    resp.raise_for_status()
    for entry in resp.json()["protocols"]:
        click.echo(f"{entry['name']}  [{entry['anchor']}]")
        click.echo(f"    {entry['description']}")
        for pname, p in entry["params"].items():
            default = "" if p["default"] is None else f" = {p['default']}"
            unit = {"mhz": "MHz", "rad": "rad", "int": "int", "float": ""}.get(p["kind"], "")
            note = f"  ({p['help']})" if p["help"] else ""
            click.echo(f"    - {pname}{default} {unit}{note}")
        click.echo(f"    metrics: {', '.join(entry['metrics'])}")
    sys.exit(EXIT_OK)


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve_cmd(host, port):
    """Serve the experiment API over HTTP."""
    import uvicorn

    from .service import app
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
