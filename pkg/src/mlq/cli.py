"""Command-line entry point.

Subcommands: validate, simulate, generate, serve, fmt.  Exit codes are part
of the contract: 0 success, 1 invalid model (or failed run), 2 usage error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from mlq import __version__, codegen, simulator
from mlq.engine import EngineFault, UnknownConfiguration
from mlq.parser import parse
from mlq.printer import pretty_print
from mlq.validator import make_dataset_reader, validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _read_source(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_valid_model(path: str, data_dir: str | None, out):
    """Parse + validate; prints diagnostics and returns (model, exit_code)."""
    source = _read_source(path)
    name = os.path.splitext(os.path.basename(path))[0]
    model, diags = parse(source, name)
    if model is None:
        for d in diags:
            print(d.render(), file=out)
        return None, EXIT_INVALID
    base = data_dir if data_dir is not None else (os.path.dirname(path) or ".")
    report = validate(model, make_dataset_reader(base))
    for d in report.diagnostics:
        print(d.render(), file=out)
    if not report.valid:
        return None, EXIT_INVALID
    return model, EXIT_OK


def cmd_validate(args, out) -> int:
    _model, code = _load_valid_model(args.file, args.data_dir, out)
    return code


def cmd_simulate(args, out) -> int:
    model, code = _load_valid_model(args.file, args.data_dir, out)
    if model is None:
        return code
    base = args.data_dir if args.data_dir is not None else (
        os.path.dirname(args.file) or ".")
    try:
        events = simulator.run(model, args.config, args.ticks,
                               base_dir=base, workdir=os.getcwd())
    except UnknownConfiguration as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EngineFault as exc:
        print(f"runtime fault: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = simulator.trace_text(events)
    if args.trace:
        try:
            with open(args.trace, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        out.write(text)
    return EXIT_OK


def cmd_generate(args, out) -> int:
    model, code = _load_valid_model(args.file, args.data_dir, out)
    if model is None:
        return code
    base = args.data_dir if args.data_dir is not None else (
        os.path.dirname(args.file) or ".")
    try:
        bundle = codegen.generate(model, args.config, args.backend,
                                  codegen.make_dataset_resolver(base))
    except codegen.UnknownBackend as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownConfiguration as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except codegen.GenerationPreconditionFailed as exc:
        for d in exc.diagnostics:
            print(d.render(), file=out)
        return EXIT_INVALID
    try:
        codegen.write_bundle(bundle, args.out)
    except codegen.BundleIO as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"generated {len(bundle.files)} files under {args.out}", file=out)
    return EXIT_OK


def cmd_fmt(args, out) -> int:
    source = _read_source(args.file)
    name = os.path.splitext(os.path.basename(args.file))[0]
    model, diags = parse(source, name)
    if model is None:
        for d in diags:
            print(d.render(), file=out)
        return EXIT_INVALID
    formatted = pretty_print(model)
    try:
        with open(args.file, "w", encoding="utf-8", newline="") as fh:
            fh.write(formatted)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_serve(args) -> int:
    # imported lazily so validate/simulate/generate work without the
    # service dependencies installed
    from mlq.service import serve

    port = args.port
    env_port = os.environ.get("MLQ_PORT")
    if env_port:
        try:
            port = int(env_port)
        except ValueError:
            print(f"error: MLQ_PORT is not an integer: {env_port!r}",
                  file=sys.stderr)
            return EXIT_USAGE
    serve(port=port, examples_dir=args.examples, static_dir=args.static)
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlq",
        description="Toolchain for mlq models: validate, simulate, generate "
                    "runnable projects, serve the web editor API, format.")
    parser.add_argument("--version", action="version",
                        version=f"mlq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model; exit 0 iff valid")
    p.add_argument("file")
    p.add_argument("--data-dir", help="base directory for dataset paths "
                                      "(default: the model file's directory)")

    p = sub.add_parser("simulate", help="run a configuration deterministically")
    p.add_argument("file")
    p.add_argument("--config", required=True, help="configuration name")
    p.add_argument("--ticks", type=int, required=True,
                   help="number of logical ticks")
    p.add_argument("--trace", help="trace output file (default: stdout)")
    p.add_argument("--data-dir")

    p = sub.add_parser("generate", help="emit a complete runnable project")
    p.add_argument("file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--backend", default="self")
    p.add_argument("--data-dir")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000,
                   help="listen port (env MLQ_PORT overrides)")
    p.add_argument("--examples", help="directory of example models "
                                      "(default: the shipped corpus)")
    p.add_argument("--static", help="static files for the web editor")

    p = sub.add_parser("fmt", help="pretty-print a model file in place")
    p.add_argument("file")
    return parser


def cli_main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "simulate":
            return cmd_simulate(args, out)
        if args.command == "generate":
            return cmd_generate(args, out)
        if args.command == "fmt":
            return cmd_fmt(args, out)
        if args.command == "serve":
            return cmd_serve(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
