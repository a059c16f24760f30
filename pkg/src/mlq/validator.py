"""Semantic analysis: name resolution, expression/action type checking, port
compatibility, statechart well-formedness, and DA-block/dataset consistency.

All problems come back as diagnostics in one report; validation never stops
at the first error.  Codes:

  VAL001 unresolved reference          VAL006 port incompatibility
  VAL002 duplicate name                VAL007 dataset column missing/unreadable
  VAL003 type mismatch                 VAL008 guard not boolean
  VAL004 send arity/type mismatch      VAL009 DA argument arity mismatch
  VAL005 unreachable state (warning)   VAL010 after(0) or knn(0)
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping

from mlq import nodes as n
from mlq.diagnostics import Diagnostic, Severity, error, warning
from mlq.resolve import ResolvedModel, resolve_references

#: Maps a dataset path to its CSV header, or None when the dataset is not
#: available for checking (the check is then skipped); raises OSError /
#: FileNotFoundError when the path should exist but cannot be read.
DatasetReader = Callable[[str], "list[str] | None"]

_NUMERIC = (n.Dtype.INT, n.Dtype.REAL)


class TypeMismatch(Exception):
    def __init__(self, line: int, col: int, expected: str, found: str):
        super().__init__(f"expected {expected}, found {found}")
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not any(d.severity is Severity.ERROR for d in self.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    def render(self) -> str:
        return "".join(d.render() + "\n" for d in self.diagnostics)


# -- expression typing -------------------------------------------------------


def _binary_type(op: str, lt: n.Dtype, rt: n.Dtype) -> n.Dtype | None:
    if op in ("+", "-", "*"):
        if lt in _NUMERIC and rt in _NUMERIC:
            return n.Dtype.REAL if n.Dtype.REAL in (lt, rt) else n.Dtype.INT
        return None
    if op == "/":
        # division is REAL-valued even on two INTs
        return n.Dtype.REAL if lt in _NUMERIC and rt in _NUMERIC else None
    if op in ("<", "<=", ">", ">="):
        return n.Dtype.BOOL if lt in _NUMERIC and rt in _NUMERIC else None
    if op in ("==", "!="):
        if lt in _NUMERIC and rt in _NUMERIC:
            return n.Dtype.BOOL
        return n.Dtype.BOOL if lt is rt else None
    if op in ("and", "or"):
        return n.Dtype.BOOL if lt is n.Dtype.BOOL and rt is n.Dtype.BOOL else None
    return None


def type_of(expr: n.Expr, scope: Mapping[str, n.Dtype]) -> n.Dtype:
    """Type of `expr` under a plain name-to-dtype environment.

    Raises TypeMismatch for ill-typed expressions and KeyError for names
    missing from the scope (callers are expected to have resolved names).
    """
    if isinstance(expr, n.Literal):
        return expr.dtype
    if isinstance(expr, n.NameRef):
        return scope[expr.name]
    if isinstance(expr, n.Unary):
        inner = type_of(expr.operand, scope)
        if expr.op == "-":
            if inner in _NUMERIC:
                return inner
            raise TypeMismatch(expr.line, expr.col, "int or real", str(inner))
        if inner is not n.Dtype.BOOL:
            raise TypeMismatch(expr.line, expr.col, "bool", str(inner))
        return n.Dtype.BOOL
    if isinstance(expr, n.Binary):
        lt = type_of(expr.left, scope)
        rt = type_of(expr.right, scope)
        result = _binary_type(expr.op, lt, rt)
        if result is None:
            raise TypeMismatch(expr.line, expr.col,
                               f"operands compatible with '{expr.op}'",
                               f"{lt} and {rt}")
        return result
    raise TypeError(f"not an expression node: {expr!r}")


def assignable(target: n.Dtype, value: n.Dtype) -> bool:
    """INT widens to REAL; no other implicit coercions."""
    return target is value or (target is n.Dtype.REAL and value is n.Dtype.INT)


def static_expr_type(expr: n.Expr, resolved: ResolvedModel) -> n.Dtype:
    """Type of an expression in an already-validated model.

    Both the simulator and the code generator use this to place the
    INT-to-REAL widening coercions identically; it must only be called on
    models that validate cleanly."""
    if isinstance(expr, n.Literal):
        return expr.dtype
    if isinstance(expr, n.NameRef):
        return resolved.bindings[expr][1].dtype
    if isinstance(expr, n.Unary):
        inner = static_expr_type(expr.operand, resolved)
        return inner if expr.op == "-" else n.Dtype.BOOL
    if isinstance(expr, n.Binary):
        result = _binary_type(expr.op,
                              static_expr_type(expr.left, resolved),
                              static_expr_type(expr.right, resolved))
        if result is None:
            raise TypeError(f"ill-typed expression survived validation: {expr!r}")
        return result
    raise TypeError(f"not an expression node: {expr!r}")


# -- the validator ------------------------------------------------------------


class _Validator:
    def __init__(self, resolved: ResolvedModel,
                 dataset_reader: DatasetReader | None):
        self.resolved = resolved
        self.model = resolved.model
        self.reader = dataset_reader
        self.diags: list[Diagnostic] = []

    def err(self, code: str, message: str, node: n.Node):
        self.diags.append(error(code, message, node.line, node.col))

    def warn(self, code: str, message: str, node: n.Node):
        self.diags.append(warning(code, message, node.line, node.col))

    def decl_of(self, ref: n.Node) -> n.Node | None:
        return self.resolved.target_of(ref)

    # expression type with diagnostics; None when a subexpression failed
    # (the cause is already reported, so None just stops the cascade).
    def expr_type(self, expr: n.Expr) -> n.Dtype | None:
        if isinstance(expr, n.Literal):
            return expr.dtype
        if isinstance(expr, n.NameRef):
            bound = self.resolved.binding(expr)
            return bound[1].dtype if bound else None
        if isinstance(expr, n.Unary):
            inner = self.expr_type(expr.operand)
            if inner is None:
                return None
            if expr.op == "-":
                if inner in _NUMERIC:
                    return inner
                self.err("VAL003", f"unary '-' needs int or real, found {inner}",
                         expr)
                return None
            if inner is not n.Dtype.BOOL:
                self.err("VAL003", f"'not' needs bool, found {inner}", expr)
                return None
            return n.Dtype.BOOL
        if isinstance(expr, n.Binary):
            lt = self.expr_type(expr.left)
            rt = self.expr_type(expr.right)
            if lt is None or rt is None:
                return None
            result = _binary_type(expr.op, lt, rt)
            if result is None:
                self.err("VAL003",
                         f"operator '{expr.op}' cannot combine {lt} and {rt}",
                         expr)
            return result
        raise TypeError(f"not an expression node: {expr!r}")

    def check_numeric(self, expr: n.Expr, what: str):
        dtype = self.expr_type(expr)
        if dtype is not None and dtype not in _NUMERIC:
            self.err("VAL003", f"{what} must be numeric, found {dtype}", expr)

    # -- driver ---------------------------------------------------------------

    def run(self) -> ValidationReport:
        for res_err in self.resolved.errors:
            code = "VAL002" if res_err.kind == "duplicate" else "VAL001"
            self.diags.append(error(code, res_err.describe(),
                                    res_err.line, res_err.col))
        for thing in self.model.things:
            self.check_thing(thing)
        for config in self.model.configurations:
            self.check_configuration(config)
        self.diags.sort(key=lambda d: (d.line, d.col, d.code, d.message))
        return ValidationReport(self.diags)

    # -- things ---------------------------------------------------------------

    def check_thing(self, thing: n.ThingDef):
        for prop in thing.properties:
            if prop.initial is not None and prop.initial.dtype is not prop.dtype:
                self.err("VAL003",
                         f"initial value of '{prop.name}' is "
                         f"{prop.initial.dtype}, declared {prop.dtype}",
                         prop.initial)
        for da in thing.analytics:
            if isinstance(da.algorithm, n.KnnRegression) and da.algorithm.k < 1:
                self.err("VAL010", "knn needs at least one neighbor (k >= 1)",
                         da.algorithm)
            self.check_dataset(da)
        chart = thing.statechart
        targeted = {tr.target.text
                    for state in chart.states for tr in state.transitions}
        for state in chart.states:
            if state.name != chart.initial.text and state.name not in targeted:
                self.warn("VAL005",
                          f"state '{state.name}' is unreachable "
                          "(no inbound transition and not initial)", state)
        for state in chart.states:
            self.check_block(thing, state.entry_actions, params=None)
            self.check_block(thing, state.exit_actions, params=None)
            for tr in state.transitions:
                self.check_transition(thing, tr)

    def check_dataset(self, da: n.DataAnalyticsDef):
        if self.reader is None:
            return
        try:
            header = self.reader(da.dataset_path)
        except OSError:
            self.err("VAL007", f"dataset '{da.dataset_path}' is not readable",
                     da)
            return
        if header is None:
            return
        for col in list(da.features) + [da.label]:
            if col.text not in header:
                self.err("VAL007",
                         f"column '{col.text}' missing from dataset "
                         f"'{da.dataset_path}' (header: {', '.join(header)})",
                         col)

    def check_transition(self, thing: n.ThingDef, tr: n.TransitionDef):
        params: dict[str, n.ParamDef] | None = None
        trig = tr.trigger
        if isinstance(trig, n.After):
            if trig.ticks < 1:
                self.err("VAL010", "after() needs a delay of at least 1 tick",
                         trig)
        else:
            port = self.decl_of(trig.port)
            msg = self.decl_of(trig.message)
            if msg is not None:
                params = {p.name: p for p in msg.params}
            if port is not None and msg is not None:
                if trig.message.text not in {r.text for r in port.receives}:
                    self.err("VAL001",
                             f"port '{port.name}' does not receive message "
                             f"'{msg.name}'", trig.message)
        if tr.guard is not None:
            guard_type = self.expr_type(tr.guard)
            if guard_type is not None and guard_type is not n.Dtype.BOOL:
                self.err("VAL008", f"guard must be bool, found {guard_type}",
                         tr.guard)
        self.check_block(thing, tr.actions, params)

    # -- actions ----------------------------------------------------------------

    def check_block(self, thing: n.ThingDef, actions: list[n.Action], params):
        self.check_actions(thing, actions)

    def check_actions(self, thing: n.ThingDef, actions: list[n.Action]):
        for act in actions:
            self.check_action(thing, act)

    def check_assign_target(self, ref: n.Name, value_type: n.Dtype | None,
                            what: str):
        bound = self.resolved.binding(ref)
        if bound is None:
            return
        category, decl = bound
        if category == "param":
            self.err("VAL003",
                     f"cannot assign to message parameter '{ref.text}'", ref)
            return
        if value_type is not None and not assignable(decl.dtype, value_type):
            self.err("VAL003",
                     f"{what} '{ref.text}' has type {decl.dtype}, "
                     f"cannot take {value_type}", ref)

    def check_action(self, thing: n.ThingDef, act: n.Action):
        if isinstance(act, n.Assign):
            self.check_assign_target(act.target, self.expr_type(act.expr),
                                     "assignment target")
        elif isinstance(act, n.Send):
            self.check_send(act)
        elif isinstance(act, n.Print):
            self.expr_type(act.expr)
        elif isinstance(act, n.VarDecl):
            value_type = self.expr_type(act.expr)
            if value_type is not None and not assignable(act.dtype, value_type):
                self.err("VAL003",
                         f"variable '{act.name}' declared {act.dtype}, "
                         f"initialized with {value_type}", act)
        elif isinstance(act, n.If):
            cond_type = self.expr_type(act.cond)
            if cond_type is not None and cond_type is not n.Dtype.BOOL:
                self.err("VAL003", f"if condition must be bool, found "
                                   f"{cond_type}", act.cond)
            self.check_actions(thing, act.then_actions)
            self.check_actions(thing, act.else_actions)
        elif isinstance(act, n.DaPredict):
            da = self.decl_of(act.da)
            if da is not None and len(act.features) != len(da.features):
                self.err("VAL009",
                         f"da_predict '{da.name}' needs {len(da.features)} "
                         f"feature values, got {len(act.features)}", act)
            for feat in act.features:
                self.check_numeric(feat, "feature value")
            bound = self.resolved.binding(act.result)
            if bound is not None:
                category, decl = bound
                if category == "param":
                    self.err("VAL003", "cannot assign a prediction to a "
                                       f"message parameter '{act.result.text}'",
                             act.result)
                elif decl.dtype is not n.Dtype.REAL:
                    self.err("VAL003",
                             f"prediction target '{act.result.text}' must be "
                             f"real, found {decl.dtype}", act.result)
        elif isinstance(act, n.DaObserve):
            da = self.decl_of(act.da)
            if da is not None and len(act.features) != len(da.features):
                self.err("VAL009",
                         f"da_observe '{da.name}' needs {len(da.features)} "
                         f"feature values, got {len(act.features)}", act)
            for feat in act.features:
                self.check_numeric(feat, "feature value")
            self.check_numeric(act.label, "observed label")
        elif isinstance(act, (n.DaTrain, n.DaSave)):
            pass  # the reference itself was resolved already
        else:
            raise TypeError(f"not an action node: {act!r}")

    def check_send(self, act: n.Send):
        port = self.decl_of(act.port)
        msg = self.decl_of(act.message)
        for arg in act.args:
            self.expr_type(arg)
        if port is None or msg is None:
            return
        if act.message.text not in {s.text for s in port.sends}:
            self.err("VAL001",
                     f"port '{port.name}' does not send message '{msg.name}'",
                     act.message)
        if len(act.args) != len(msg.params):
            self.err("VAL004",
                     f"message '{msg.name}' takes {len(msg.params)} "
                     f"argument(s), got {len(act.args)}", act)
            return
        for arg, param in zip(act.args, msg.params):
            arg_type = self.expr_type(arg)
            if arg_type is not None and not assignable(param.dtype, arg_type):
                self.err("VAL004",
                         f"argument for '{param.name}' of '{msg.name}' "
                         f"must be {param.dtype}, found {arg_type}", arg)

    # -- configurations ----------------------------------------------------------

    def check_configuration(self, config: n.ConfigurationDef):
        for conn in config.connectors:
            port_a = self.decl_of(conn.a.port)
            port_b = self.decl_of(conn.b.port)
            if port_a is None or port_b is None:
                continue
            if port_a.kind is port_b.kind:
                self.err("VAL006",
                         f"connector joins two {port_a.kind} ports "
                         f"('{conn.a.instance}.{conn.a.port}' and "
                         f"'{conn.b.instance}.{conn.b.port}'); kinds must be "
                         "provided<->required", conn)
            thing_a = self._thing_of(config, conn.a.instance.text)
            thing_b = self._thing_of(config, conn.b.instance.text)
            if thing_a is None or thing_b is None:
                continue
            self._check_message_flow(conn, port_a, thing_a, port_b, thing_b)
            self._check_message_flow(conn, port_b, thing_b, port_a, thing_a)

    def _thing_of(self, config: n.ConfigurationDef, inst_name: str):
        inst = next((i for i in config.instances if i.name == inst_name), None)
        if inst is None:
            return None
        return self.decl_of(inst.thing)

    def _check_message_flow(self, conn, sender_port, sender_thing,
                            receiver_port, receiver_thing):
        receivable = {r.text for r in receiver_port.receives}
        for sent in sender_port.sends:
            if sent.text not in receivable:
                self.err("VAL006",
                         f"message '{sent.text}' sent by port "
                         f"'{sender_port.name}' is not received by port "
                         f"'{receiver_port.name}'", conn)
                continue
            sig_s = self._message_signature(sender_thing, sent.text)
            sig_r = self._message_signature(receiver_thing, sent.text)
            if sig_s is not None and sig_r is not None and sig_s != sig_r:
                self.err("VAL006",
                         f"message '{sent.text}' has parameter types "
                         f"({', '.join(map(str, sig_s))}) on one side and "
                         f"({', '.join(map(str, sig_r))}) on the other", conn)

    @staticmethod
    def _message_signature(thing: n.ThingDef, msg_name: str):
        msg = next((m for m in thing.messages if m.name == msg_name), None)
        return None if msg is None else [p.dtype for p in msg.params]


def make_dataset_reader(base_dir: str) -> DatasetReader:
    """Reader that resolves dataset paths against `base_dir` and returns CSV
    headers; missing files raise FileNotFoundError (reported as VAL007)."""

    def reader(path: str) -> list[str] | None:
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        with open(full, newline="", encoding="utf-8") as fh:
            row = next(csv.reader(fh), None)
        return [c.strip() for c in row] if row else []

    return reader


def validate(model: n.Model | ResolvedModel,
             dataset_reader: DatasetReader | None = None) -> ValidationReport:
    """Run all semantic checks over `model`; diagnostics come back sorted by
    source position, deterministic for identical inputs."""
    resolved = model if isinstance(model, ResolvedModel) else resolve_references(model)
    return _Validator(resolved, dataset_reader).run()
