"""Thin command-line client for the service.

Every command talks HTTP to the service layer; with no ``--server`` the
requests are dispatched to an in-process application instance, so the CLI
works standalone while exercising exactly the endpoints a remote client
would.  Exit codes: 0 satisfied/success, 1 violated, 2 error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import httpx


@dataclass
class _Reply:
    status_code: int
    body: dict

    def json(self) -> dict:
        return self.body


def _post(server: str | None, path: str, payload: dict) -> _Reply:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            resp = client.post(path, json=payload)
            return _Reply(resp.status_code, resp.json())

    from .service import app  # imported lazily so --help stays snappy

    async def dispatch() -> _Reply:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://rou-falsify.local", timeout=None) as client:
            resp = await client.post(path, json=payload)
            return _Reply(resp.status_code, resp.json())

    return asyncio.run(dispatch())


def _fail(detail) -> int:
    if isinstance(detail, dict):
        msg = detail.get("message", str(detail))
        if "line" in detail:
            msg = f"{msg}"
        if detail.get("stage"):
            msg = f"stage {detail['stage']}: {msg}"
        print(f"error: {msg}", file=sys.stderr)
    else:
        print(f"error: {detail}", file=sys.stderr)
    return 2


def _write_files(out_dir: Path, files: dict[str, str]) -> int:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, content in files.items():
            (out_dir / name).write_text(content, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write to {out_dir}: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_monitor(args) -> int:
    try:
        trace_csv = Path(args.trace).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(str(exc))
    resp = _post(args.server, "/monitor", {
        "trace_csv": trace_csv, "formula": args.formula, "at": args.at,
    })
    if resp.status_code != 200:
        return _fail(resp.json().get("detail", resp.body))
    body = resp.json()
    print(f"robustness = {body['robustness']:.17g}")
    print("satisfied" if body["satisfied"] else "violated")
    return 0 if body["satisfied"] else 1


def _load_scenario_file(path: str, seed: int | None):
    scenario = json.loads(Path(path).read_text(encoding="utf-8"))
    if seed is not None:
        scenario["seed"] = seed
    return scenario


def cmd_analyze_ml(args) -> int:
    try:
        scenario = _load_scenario_file(args.scenario, args.seed)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    resp = _post(args.server, "/analyze-ml", {"scenario": scenario})
    if resp.status_code != 200:
        return _fail(resp.json().get("detail", resp.body))
    body = resp.json()
    out_dir = Path(args.out)
    rc = _write_files(out_dir, {
        "analysis.json": json.dumps(body["report"], indent=2, sort_keys=True) + "\n",
        "samples.csv": body["samples_csv"],
    })
    if rc:
        return rc
    print(f"wrote {out_dir / 'analysis.json'} and {out_dir / 'samples.csv'}")
    return 0


def cmd_falsify(args) -> int:
    try:
        scenario = _load_scenario_file(args.scenario, args.seed)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    resp = _post(args.server, "/falsify", {"scenario": scenario, "jobs": args.jobs})
    body = resp.json()
    if resp.status_code != 200:
        detail = body.get("detail", body)
        if isinstance(detail, dict) and detail.get("files"):
            _write_files(Path(args.out), detail["files"])
        return _fail(detail)
    out_dir = Path(args.out)
    rc = _write_files(out_dir, body["files"])
    if rc:
        return rc
    n_cex = len(body["report"]["counterexamples"])
    print(f"wrote {len(body['files'])} files to {out_dir} ({n_cex} counterexamples)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rou-falsify",
                                     description="Falsification toolkit client")
    parser.add_argument("--server", default=os.environ.get("ROU_FALSIFY_SERVER"),
                        help="service URL; default runs the service in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("monitor", help="evaluate a formula on a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--at", type=float, default=0.0)
    p.set_defaults(fn=cmd_monitor)

    p = sub.add_parser("analyze-ml", help="scene-space analysis of the classifier")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_analyze_ml)

    p = sub.add_parser("falsify", help="run the full falsification pipeline")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None,
                   help="grid evaluation workers (env ROU_FALSIFY_JOBS, default all cores)")
    p.set_defaults(fn=cmd_falsify)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except httpx.HTTPError as exc:
        return _fail(f"service request failed: {exc}")


if __name__ == "__main__":
    sys.exit(main())
