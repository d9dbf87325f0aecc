"""Command-line client for sweeps and the HTTP service.

The CLI never computes points itself: every subcommand loads a flat
key=value config, then sends each grid point through the HTTP service —
in-process over an ASGI transport by default, or to a remote server with
``--server`` — and writes CSV/SVG outputs.  One code path means local and
remote runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import asyncio
import math
import sys
from dataclasses import replace

import httpx

from .errors import ConfigParseError, ConfigValidationError, RlfeatError
from .sweep import MODES, load_config, run_sweep


class ServiceClient:
    """Evaluator that POSTs one sweep point per call to the service.

    With ``server=None`` requests are dispatched to the in-process app over
    an ASGI transport; otherwise they go over the network to ``server``.
    Instances are safe to share between worker threads.
    """

    def __init__(self, server=None):
        self._client = (
            httpx.Client(base_url=server, timeout=None) if server else None
        )

    def __call__(self, mode, payload):
        if self._client is not None:
            response = self._client.post(f"/{mode}", json=payload)
        else:
            response = asyncio.run(self._post_in_process(mode, payload))
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise RuntimeError(
                f"service error {response.status_code} on /{mode}: {detail}"
            )
        return _decode_point(response.json())

    async def _post_in_process(self, mode, payload):
        from .service.app import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://rlfeat.local", timeout=None
        ) as client:
            return await client.post(f"/{mode}", json=payload)

    def close(self):
        if self._client is not None:
            self._client.close()


def _decode_point(point):
    """Undo the JSON encoding of divergent values (null -> inf)."""
    for key in ("ridgeless", "finite_lambda", "theory"):
        if key in point:
            point[key] = {
                name: (math.inf if value is None else value)
                for name, value in point[key].items()
            }
    return point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rlfeat",
        description=(
            "Learning curves, bias/variance splits, and Gram-matrix spectra "
            "for ridge regression on random linear features."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_help = {
        "theory": "closed-form learning curves over a grid",
        "simulate": "Monte Carlo estimates alongside finite-ridge theory",
        "spectrum": "analytic eigenvalue density per grid point",
        "validate": "simulate and z-score against the closed forms",
    }
    for mode in MODES:
        cmd = sub.add_parser(mode, help=run_help[mode])
        cmd.add_argument(
            "--config", required=True, metavar="PATH",
            help="flat key=value config file",
        )
        cmd.add_argument(
            "--out", metavar="DIR", default=None,
            help="output directory (overrides out_dir from the config)",
        )
        cmd.add_argument(
            "--threads", type=int, default=1, metavar="N",
            help="worker threads for grid points (default 1)",
        )
        cmd.add_argument(
            "--seed", type=int, default=None, metavar="S",
            help="base RNG seed (overrides seed from the config)",
        )
        cmd.add_argument(
            "--server", metavar="URL", default=None,
            help="base URL of a running service (default: in-process)",
        )
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _run_serve(args):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _run_sweep_command(args):
    try:
        spec = load_config(args.config, mode=args.command)
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigValidationError as exc:
        print("config error:", file=sys.stderr)
        for violation in exc.violations:
            print(f"  - {violation}", file=sys.stderr)
        return 2
    if args.out is not None:
        spec = replace(spec, out_dir=args.out)
    if args.seed is not None:
        if args.seed < 0:
            print("config error: --seed must be >= 0", file=sys.stderr)
            return 2
        spec = replace(spec, seed=args.seed)
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 2
    client = ServiceClient(args.server)
    try:
        result = run_sweep(spec, evaluator=client, max_workers=args.threads)
    except (RlfeatError, RuntimeError, httpx.HTTPError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        client.close()
    print(result.report)
    for path in result.files:
        print(f"wrote {path}")
    return 0 if result.ok else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _run_serve(args)
    return _run_sweep_command(args)


if __name__ == "__main__":
    sys.exit(main())
