"""Model-to-text transformation: a validated model plus one configuration
becomes a complete, runnable project (sources, data, build script, manifest).

The reference backend ("self") emits Python: one module per thing with real
handler functions compiled from the statechart, a main module wiring the
configuration, and verbatim copies of the runtime kernel (`engine`) and ML
runtime (`mlrt`).  Because generated handlers perform the same operations in
the same order as the simulator's closure compiler, a generated project's
trace is byte-identical to the simulator's - which is the property the test
suite enforces.

Generation is deterministic: identical inputs produce byte-identical bundles.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import io
import os
import stat
import zipfile
from dataclasses import dataclass, field
from typing import Callable

from mlq import nodes as n
from mlq.engine import UnknownConfiguration
from mlq.resolve import ResolvedModel, resolve_references
from mlq.validator import static_expr_type, validate

MANIFEST_NAME = "manifest.txt"
ENTRYPOINT = "build.sh"

#: Maps a model-relative dataset path to the CSV bytes, None when the dataset
#: is not available to the generator (the file is then omitted from the
#: bundle), raising OSError when it should exist but cannot be read.
DatasetResolver = Callable[[str], "bytes | None"]


class CodegenError(Exception):
    pass


class UnknownBackend(CodegenError):
    pass


class GenerationPreconditionFailed(CodegenError):
    def __init__(self, diagnostics):
        super().__init__("model has validation errors")
        self.diagnostics = diagnostics


class BundleIO(CodegenError):
    pass


@dataclass(frozen=True)
class BackendId:
    name: str


@dataclass
class ProjectBundle:
    files: dict[str, bytes]
    manifest: list[tuple[str, int, str]]  # (path, byte length, sha256)
    entrypoint: str = ENTRYPOINT


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _finalize(files: dict[str, bytes]) -> ProjectBundle:
    """Compute the manifest over every file and add the rendered manifest
    file itself (which, to stay well-defined, is not self-listed)."""
    manifest = [(path, len(data), _sha256(data))
                for path, data in sorted(files.items())]
    rendered = "".join(f"{path}\t{length}\t{digest}\n"
                       for path, length, digest in manifest)
    files[MANIFEST_NAME] = rendered.encode()
    return ProjectBundle(files, manifest)


# -- python source emission (mirrors simulator's closure compiler) -------------


def _py_sub(expr: n.Expr, resolved: ResolvedModel) -> str:
    code = _py_expr(expr, resolved)
    if isinstance(expr, (n.Unary, n.Binary)):
        return f"({code})"
    return code


def _py_expr(expr: n.Expr, resolved: ResolvedModel) -> str:
    if isinstance(expr, n.Literal):
        return repr(expr.value)
    if isinstance(expr, n.NameRef):
        category, _decl = resolved.bindings[expr]
        if category == "local":
            return f"l_{expr.name}"
        if category == "param":
            return f"ctx.params[{expr.name!r}]"
        return f"ctx.props[{expr.name!r}]"
    if isinstance(expr, n.Unary):
        operand = _py_sub(expr.operand, resolved)
        return f"-{operand}" if expr.op == "-" else f"not {operand}"
    if isinstance(expr, n.Binary):
        return (f"{_py_sub(expr.left, resolved)} {expr.op} "
                f"{_py_sub(expr.right, resolved)}")
    raise TypeError(f"not an expression node: {expr!r}")


def _py_coerced(expr: n.Expr, target: n.Dtype, resolved: ResolvedModel) -> str:
    code = _py_expr(expr, resolved)
    if target is n.Dtype.REAL and static_expr_type(expr, resolved) is n.Dtype.INT:
        return f"float({code})"
    return code


def _py_real(expr: n.Expr, resolved: ResolvedModel) -> str:
    return f"float({_py_expr(expr, resolved)})"


def _py_target(name_ref: n.Name, resolved: ResolvedModel) -> str:
    category, _decl = resolved.bindings[name_ref]
    if category == "local":
        return f"l_{name_ref.text}"
    return f"ctx.props[{name_ref.text!r}]"


class _ThingEmitter:
    def __init__(self, thing: n.ThingDef, resolved: ResolvedModel,
                 dataset_paths: dict[str, str]):
        self.thing = thing
        self.resolved = resolved
        self.dataset_paths = dataset_paths
        self.lines: list[str] = []

    def emit(self, text: str = "", indent: int = 0):
        self.lines.append("    " * indent + text if text else "")

    def emit_action(self, act: n.Action, indent: int):
        r = self.resolved
        if isinstance(act, n.Assign):
            dtype = r.bindings[act.target][1].dtype
            self.emit(f"{_py_target(act.target, r)} = "
                      f"{_py_coerced(act.expr, dtype, r)}", indent)
        elif isinstance(act, n.Send):
            msg = r.bindings[act.message][1]
            args = ", ".join(_py_coerced(a, p.dtype, r)
                             for a, p in zip(act.args, msg.params))
            self.emit(f"ctx.send({act.port.text!r}, {act.message.text!r}, "
                      f"[{args}])", indent)
        elif isinstance(act, n.Print):
            self.emit(f"ctx.print_value({_py_expr(act.expr, r)})", indent)
        elif isinstance(act, n.VarDecl):
            self.emit(f"l_{act.name} = {_py_coerced(act.expr, act.dtype, r)}",
                      indent)
        elif isinstance(act, n.If):
            self.emit(f"if {_py_expr(act.cond, r)}:", indent)
            if act.then_actions:
                for sub in act.then_actions:
                    self.emit_action(sub, indent + 1)
            else:
                self.emit("pass", indent + 1)
            if act.else_actions:
                self.emit("else:", indent)
                for sub in act.else_actions:
                    self.emit_action(sub, indent + 1)
        elif isinstance(act, n.DaTrain):
            self.emit(f"ctx.da_train({act.da.text!r})", indent)
        elif isinstance(act, n.DaSave):
            self.emit(f"ctx.da_save({act.da.text!r})", indent)
        elif isinstance(act, n.DaPredict):
            feats = ", ".join(_py_real(f, r) for f in act.features)
            self.emit(f"{_py_target(act.result, r)} = "
                      f"ctx.da_predict({act.da.text!r}, [{feats}])", indent)
        elif isinstance(act, n.DaObserve):
            feats = ", ".join(_py_real(f, r) for f in act.features)
            self.emit(f"ctx.da_observe({act.da.text!r}, [{feats}], "
                      f"{_py_real(act.label, r)})", indent)
        else:
            raise TypeError(f"not an action node: {act!r}")

    def emit_handler(self, name: str, actions: list[n.Action]) -> str | None:
        if not actions:
            return None
        self.emit(f"def {name}(ctx):")
        for act in actions:
            self.emit_action(act, 1)
        self.emit()
        self.emit()
        return name

    def emit_guard(self, name: str, expr: n.Expr) -> str:
        self.emit(f"def {name}(ctx):")
        self.emit(f"return {_py_expr(expr, self.resolved)}", 1)
        self.emit()
        self.emit()
        return name

    def render(self) -> str:
        thing = self.thing
        self.emit(f'"""Thing {thing.name}: statechart handlers and '
                  'structural spec."""')
        self.emit()
        self.emit("import engine")
        self.emit("import mlrt")
        self.emit()
        self.emit()

        state_parts: list[tuple[str, str | None, str | None, list[str]]] = []
        for i, state in enumerate(thing.statechart.states):
            self.emit(f"# state {state.name}")
            entry = self.emit_handler(f"_s{i}_entry", state.entry_actions)
            exit_ = self.emit_handler(f"_s{i}_exit", state.exit_actions)
            transitions = []
            for j, tr in enumerate(state.transitions):
                guard = None
                if tr.guard is not None:
                    guard = self.emit_guard(f"_s{i}_t{j}_guard", tr.guard)
                actions = self.emit_handler(f"_s{i}_t{j}_actions", tr.actions)
                parts = [f"target={tr.target.text!r}"]
                if isinstance(tr.trigger, n.After):
                    parts.append(f"after={tr.trigger.ticks}")
                else:
                    parts.append(f"port={tr.trigger.port.text!r}")
                    parts.append(f"message={tr.trigger.message.text!r}")
                if guard:
                    parts.append(f"guard={guard}")
                if actions:
                    parts.append(f"actions={actions}")
                transitions.append(f"engine.TransitionSpec({', '.join(parts)})")
            state_parts.append((state.name, entry, exit_, transitions))

        self.emit("def build():")
        self.emit("return engine.ThingSpec(", 1)
        self.emit(f"name={thing.name!r},", 2)
        self.emit(f"initial={thing.statechart.initial.text!r},", 2)
        self.emit("states=[", 2)
        for name, entry, exit_, transitions in state_parts:
            head = f"engine.StateSpec({name!r}"
            if entry:
                head += f", entry={entry}"
            if exit_:
                head += f", exit={exit_}"
            if transitions:
                self.emit(head + ", transitions=[", 3)
                for tr_code in transitions:
                    self.emit(tr_code + ",", 4)
                self.emit("]),", 3)
            else:
                self.emit(head + "),", 3)
        self.emit("],", 2)
        props = ", ".join(
            f"({p.name!r}, "
            f"{repr(p.initial.value if p.initial is not None else n.zero_value(p.dtype))})"
            for p in thing.properties)
        self.emit(f"properties=[{props}],", 2)
        msgs = ", ".join(
            f"{m.name!r}: [{', '.join(repr(p.name) for p in m.params)}]"
            for m in thing.messages)
        self.emit(f"messages={{{msgs}}},", 2)
        if thing.analytics:
            self.emit("das=[", 2)
            for da in thing.analytics:
                algo = ("mlrt.KNN" if isinstance(da.algorithm, n.KnnRegression)
                        else "mlrt.LINEAR_REGRESSION")
                k = (da.algorithm.k
                     if isinstance(da.algorithm, n.KnnRegression) else None)
                self.emit(f"mlrt.DaConfig(name={da.name!r},", 3)
                self.emit(f"dataset_path={self.dataset_paths[da.dataset_path]!r},", 4)
                self.emit("feature_names=["
                          + ", ".join(repr(f.text) for f in da.features)
                          + f"], label_name={da.label.text!r},", 4)
                self.emit(f"algorithm={algo}, k={k!r},", 4)
                self.emit(f"model_path={da.model_path!r}),", 4)
            self.emit("],", 2)
        else:
            self.emit("das=[],", 2)
        self.emit(")", 1)
        return "\n".join(self.lines) + "\n"


def _emit_main(model: n.Model, config: n.ConfigurationDef) -> str:
    lines = [
        f'"""Entry point: runs configuration {config.name} and writes the '
        'event trace."""',
        "",
        "import argparse",
        "import os",
        "import sys",
        "",
        "sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))",
        "",
        "import engine",
        "import mlrt",
    ]
    for thing in model.things:
        lines.append(f"import thing_{thing.name}")
    lines += [
        "",
        "ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))",
        "",
        "",
        "def build_config():",
        "    return engine.ConfigSpec(",
        f"        name={config.name!r},",
        "        instances=[",
    ]
    for inst in config.instances:
        lines.append(f"            ({inst.name!r}, "
                     f"thing_{inst.thing.text}.build()),")
    lines.append("        ],")
    lines.append("        connectors=[")
    for conn in config.connectors:
        lines.append(f"            (({conn.a.instance.text!r}, "
                     f"{conn.a.port.text!r}), ({conn.b.instance.text!r}, "
                     f"{conn.b.port.text!r})),")
    lines += [
        "        ],",
        "    )",
        "",
        "",
        "def main(argv=None):",
        "    parser = argparse.ArgumentParser(",
        "        description='Run the generated event-driven service.')",
        "    parser.add_argument('--ticks', type=int, required=True,",
        "                        help='number of logical ticks to execute')",
        "    parser.add_argument('--trace',",
        "                        help='trace output file (default: stdout)')",
        "    args = parser.parse_args(argv)",
        "    events = engine.run(build_config(), args.ticks, ml=mlrt,",
        "                        base_dir=ROOT, workdir=ROOT)",
        "    text = engine.format_trace(events)",
        "    if args.trace:",
        "        with open(args.trace, 'w', encoding='utf-8', newline='') as fh:",
        "            fh.write(text)",
        "    else:",
        "        sys.stdout.write(text)",
        "    return 0",
        "",
        "",
        "if __name__ == '__main__':",
        "    raise SystemExit(main())",
    ]
    return "\n".join(lines) + "\n"


_BUILD_SH = """\
#!/bin/sh
# Build-and-run entry point for the generated project.
# Usage: ./build.sh --ticks N [--trace FILE]
# Requires: POSIX sh and Python 3.10+ (standard library only).
set -e
cd "$(dirname "$0")"
exec python3 src/main.py "$@"
"""


def _emit_readme(model: n.Model, config: n.ConfigurationDef,
                 missing_datasets: list[str]) -> str:
    thing_list = "\n".join(f"- `src/thing_{t.name}.py` - behavior of thing "
                           f"`{t.name}`" for t in model.things)
    missing = ""
    if missing_datasets:
        paths = "\n".join(f"- `{p}`" for p in missing_datasets)
        missing = (
            "\n## Missing datasets\n\n"
            "These datasets were not available at generation time; place the "
            "CSV files at the listed paths before running:\n\n" + paths + "\n")
    return f"""\
# Generated project: {model.source_name} / {config.name}

A self-contained, deterministic executable derived from the source model.
No hand-editing is required; regenerate instead of patching.

## Run

    ./build.sh --ticks 30 --trace trace.tsv

Requires POSIX sh and Python 3.10+ (standard library only).  Without
`--trace` the event trace goes to stdout.  Each trace line is
`tick<TAB>instance<TAB>kind<TAB>detail` with REAL values printed to 6
decimal places.

## Layout

- `build.sh` - build-and-run entry point
- `src/main.py` - wires configuration `{config.name}` and runs it
{thing_list}
- `src/engine.py` - deterministic tick engine (runtime kernel)
- `src/mlrt.py` - ML runtime (training, prediction, persistence)
- `data/` - datasets copied from the model's sources
- `manifest.txt` - `path<TAB>bytes<TAB>sha256` for every other file

Trained models referenced by `save_to` paths are written relative to this
directory when the run executes a `da_save` action.
{missing}"""


def _runtime_source(module: str) -> bytes:
    return (importlib.resources.files("mlq") / f"{module}.py").read_bytes()


def _self_backend(resolved: ResolvedModel, config: n.ConfigurationDef,
                  dataset_resolver: DatasetResolver | None) -> dict[str, bytes]:
    model = resolved.model
    files: dict[str, bytes] = {}

    # copy each referenced dataset under data/, deduplicating by source path
    dataset_paths: dict[str, str] = {}
    missing: list[str] = []
    used_names: set[str] = set()
    for thing in model.things:
        for da in thing.analytics:
            if da.dataset_path in dataset_paths:
                continue
            base = os.path.basename(da.dataset_path) or "dataset.csv"
            candidate = base
            suffix = 2
            while candidate in used_names:
                stem, dot, ext = base.partition(".")
                candidate = f"{stem}_{suffix}{dot}{ext}"
                suffix += 1
            used_names.add(candidate)
            bundle_path = f"data/{candidate}"
            dataset_paths[da.dataset_path] = bundle_path
            data = None if dataset_resolver is None else dataset_resolver(
                da.dataset_path)
            if data is None:
                missing.append(bundle_path)
            else:
                files[bundle_path] = data

    for thing in model.things:
        emitter = _ThingEmitter(thing, resolved, dataset_paths)
        files[f"src/thing_{thing.name}.py"] = emitter.render().encode()

    files["src/engine.py"] = _runtime_source("engine")
    files["src/mlrt.py"] = _runtime_source("ml")
    files["src/main.py"] = _emit_main(model, config).encode()
    files[ENTRYPOINT] = _BUILD_SH.encode()
    files["README.md"] = _emit_readme(model, config, missing).encode()
    return files


BACKENDS: dict[str, Callable] = {
    "self": _self_backend,
}


def register_backend(name: str, backend: Callable) -> None:
    if name in BACKENDS:
        raise UnknownBackend(f"backend {name!r} already registered")
    BACKENDS[name] = backend


def make_dataset_resolver(base_dir: str) -> DatasetResolver:
    """Resolver reading dataset files relative to `base_dir`; missing files
    raise FileNotFoundError (generation then fails validation first)."""

    def resolver(path: str) -> bytes:
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        with open(full, "rb") as fh:
            return fh.read()

    return resolver


def _header_reader(dataset_resolver: DatasetResolver | None):
    if dataset_resolver is None:
        return None

    def reader(path: str):
        data = dataset_resolver(path)
        if data is None:
            return None
        first = data.split(b"\n", 1)[0].decode("utf-8", "replace").strip("\r")
        return [c.strip() for c in first.split(",")] if first else []

    return reader


def generate(model: n.Model | ResolvedModel, config_name: str,
             backend: str | BackendId = "self",
             dataset_resolver: DatasetResolver | None = None) -> ProjectBundle:
    """Generate a complete project for `config_name` of `model`.

    The model must validate without errors (dataset-aware checks run when a
    resolver is supplied); the named configuration and backend must exist.
    """
    resolved = model if isinstance(model, ResolvedModel) else resolve_references(model)
    backend_name = backend.name if isinstance(backend, BackendId) else backend
    backend_fn = BACKENDS.get(backend_name)
    if backend_fn is None:
        raise UnknownBackend(f"unknown backend {backend_name!r} "
                             f"(registered: {', '.join(sorted(BACKENDS))})")
    report = validate(resolved, _header_reader(dataset_resolver))
    if not report.valid:
        raise GenerationPreconditionFailed(report.errors)
    config = next((c for c in resolved.model.configurations
                   if c.name == config_name), None)
    if config is None:
        raise UnknownConfiguration(f"model has no configuration {config_name!r}")
    files = backend_fn(resolved, config, dataset_resolver)
    return _finalize(files)


# -- bundle output -------------------------------------------------------------


def write_bundle(bundle: ProjectBundle, out_dir: str) -> None:
    """Materialize the bundle under `out_dir`; never overwrites a file."""
    for path in bundle.files:
        target = os.path.join(out_dir, path)
        if os.path.exists(target):
            raise BundleIO(f"refusing to overwrite existing file: {target}")
    try:
        for path, data in bundle.files.items():
            target = os.path.join(out_dir, path)
            parent = os.path.dirname(target)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(target, "wb") as fh:
                fh.write(data)
        entry = os.path.join(out_dir, bundle.entrypoint)
        os.chmod(entry, os.stat(entry).st_mode | stat.S_IXUSR | stat.S_IXGRP
                 | stat.S_IXOTH)
    except OSError as exc:
        raise BundleIO(str(exc)) from None


def zip_bundle(bundle: ProjectBundle) -> bytes:
    """Deterministic zip of the bundle (fixed timestamps, sorted entries)."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for path in sorted(bundle.files):
            info = zipfile.ZipInfo(path, date_time=(1980, 1, 1, 0, 0, 0))
            mode = 0o755 if path == bundle.entrypoint else 0o644
            info.external_attr = (stat.S_IFREG | mode) << 16
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, bundle.files[path])
    return buf.getvalue()
