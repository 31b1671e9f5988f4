"""Command-line client.

Subcommands:
  run     one two-phase simulation -> report
  search  multiplier search only -> converged values and drift trace
  sweep   one run per (axis value, protocol) -> sweep report
  serve   start the HTTP service

run/search/sweep execute in-process by default; with --url they post the
same request to a running service and write its response. Output goes to
--out (format csv or json; "json-like" is accepted as an alias) or, when
no path is given, as JSON to stdout.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import load_config
from .engine import run_search, run_simulation, sweep
from .model import ConfigError
from .reports import render_csv, render_json, report_from_dict, write_report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaysim",
        description="Link-level simulator for two-way multiuser "
                    "buffer-aided relaying.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", help="output file (default: stdout, JSON)")
        p.add_argument("--format", default="json",
                       choices=["csv", "json", "json-like"],
                       help="output format")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--frames", type=int,
                       help="override the simulation horizon")
        p.add_argument("--url", help="base URL of a running service; "
                                     "execute remotely instead of in-process")

    add_common(sub.add_parser("run", help="single simulation run"))
    add_common(sub.add_parser("search", help="multiplier search only"))
    add_common(sub.add_parser("sweep", help="axis sweep over protocols"))

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _load_spec(args):
    spec = load_config(args.config)
    scenario = spec.scenario
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.frames is not None:
        scenario = replace(scenario, frames=args.frames)
    return replace(spec, scenario=scenario)


def _execute_remote(args, spec, endpoint):
    import httpx

    from .service.schemas import run_request_from_spec
    payload = run_request_from_spec(spec)
    url = args.url.rstrip("/") + endpoint
    response = httpx.post(url, json=payload, timeout=None)
    response.raise_for_status()
    return report_from_dict(response.json())


def _emit(args, report) -> None:
    fmt = "json" if args.format == "json-like" else args.format
    if args.out:
        write_report(report, args.out, fmt=fmt)
    else:
        sys.stdout.write(render_csv(report) if fmt == "csv"
                         else render_json(report))


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        spec = _load_spec(args)
        if args.command == "run":
            report = (_execute_remote(args, spec, "/run") if args.url
                      else run_simulation(spec))
        elif args.command == "search":
            report = (_execute_remote(args, spec, "/search") if args.url
                      else run_search(spec))
        else:
            if spec.sweep is None:
                raise ConfigError("sweep command needs a sweep block "
                                  "in the config")
            if args.url:
                report = _execute_remote(args, spec, "/sweep")
            else:
                report = sweep(spec, spec.sweep.axis, spec.sweep.values,
                               protocols=spec.sweep.protocols or None)
        _emit(args, report)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
