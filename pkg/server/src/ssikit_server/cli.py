"""Launch the answer service from the command line."""

import argparse
import sys

from .app import create_app
from .backends import ScriptedBackend, Seq2SeqBackend, load_script


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssikit-server",
        description="Serve POST /v1/answer from a scripted stub or a local "
        "seq2seq checkpoint.",
    )
    parser.add_argument(
        "--mode", choices=("stub", "model"), default="stub",
        help="stub answers from a script; model scores choices under a checkpoint",
    )
    parser.add_argument("--script", help="stub rule script JSON (stub mode)")
    parser.add_argument("--checkpoint", help="local model directory (model mode)")
    parser.add_argument(
        "--strict", action="store_true",
        help="stub mode: answer 422 instead of the default for unscripted requests",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    return parser


def make_backend(args):
    if args.mode == "stub":
        if not args.script:
            raise SystemExit("stub mode requires --script")
        return ScriptedBackend(load_script(args.script), strict=args.strict)
    if not args.checkpoint:
        raise SystemExit("model mode requires --checkpoint")
    try:
        return Seq2SeqBackend(args.checkpoint)
    except Exception as exc:  # model load failure aborts startup
        raise SystemExit(f"cannot load checkpoint {args.checkpoint}: {exc}")


def run(argv=None) -> int:
    import uvicorn

    args = build_parser().parse_args(argv)
    try:
        backend = make_backend(args)
    except SystemExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    app = create_app(backend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def entrypoint() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    entrypoint()
