"""Command-line front end: `sim run`, `sim table1`, `sim bound`, `sim serve`.

Runs in-process by default; pass --server URL to delegate to a running
service instance instead.  Thread count comes from SIM_THREADS (default:
all cores).
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import SimulationError
from .montecarlo import THREADS_ENV_VAR, resolve_threads
from .scenarios import load_scenario, parse_scenario, run_scenario
from .service import apply_overrides


def _write_output(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)


def _run_remote(server: str, doc: dict, args) -> str:
    import httpx

    payload = {"scenario": doc, "seed": args.seed, "trials": args.trials,
               "format": args.format, "threads": args.threads}
    resp = httpx.post(server.rstrip("/") + "/run", json=payload, timeout=None)
    if resp.status_code != 200:
        raise SimulationError(f"server error {resp.status_code}: {resp.text}")
    return resp.json()["text"]


def cmd_run(args) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    doc = apply_overrides(doc, seed=args.seed, trials=args.trials,
                          fmt=args.format, output=args.output)
    scenario = parse_scenario(json.dumps(doc))
    if args.server:
        text = _run_remote(args.server, doc, args)
    else:
        text = run_scenario(scenario, threads=resolve_threads(args.threads))["text"]
    _write_output(text, scenario.output)
    return 0


def cmd_table1(args) -> int:
    scenario = parse_scenario(json.dumps({"name": "table1", "kind": "table1"}))
    text = run_scenario(scenario)["text"]
    _write_output(text, args.output)
    return 0


def cmd_bound(args) -> int:
    doc = {"name": "bound", "kind": "bound", "m_t": args.mt, "m_a": args.ma,
           "m_r": args.mr, "snr_db": args.snr_db, "gain": args.gain,
           "seed": args.seed if args.seed is not None else 0}
    scenario = parse_scenario(json.dumps(doc))
    text = run_scenario(scenario)["text"]
    _write_output(text, args.output)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("nomagssk.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Link-level NOMA-GSSK simulator and analysis toolkit "
                    f"(worker count: {THREADS_ENV_VAR}, default all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON document")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trials", type=int, default=None)
    p_run.add_argument("--output", default=None)
    p_run.add_argument("--format", choices=["csv", "json"], default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.add_argument("--server", default=None,
                       help="base URL of a running service instance")
    p_run.set_defaults(func=cmd_run)

    p_t1 = sub.add_parser("table1", help="print the complexity regression table")
    p_t1.add_argument("--output", default=None)
    p_t1.set_defaults(func=cmd_table1)

    p_b = sub.add_parser("bound", help="print the set-detection BER union bound")
    p_b.add_argument("--mt", type=int, required=True)
    p_b.add_argument("--ma", type=int, default=1)
    p_b.add_argument("--mr", type=int, default=4)
    p_b.add_argument("--snr-db", type=float, default=10.0)
    p_b.add_argument("--gain", type=float, default=0.4)
    p_b.add_argument("--seed", type=int, default=None)
    p_b.add_argument("--output", default=None)
    p_b.set_defaults(func=cmd_bound)

    p_s = sub.add_parser("serve", help="start the HTTP service")
    p_s.add_argument("--host", default="127.0.0.1")
    p_s.add_argument("--port", type=int, default=8000)
    p_s.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
