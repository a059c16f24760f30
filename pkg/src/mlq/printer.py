"""Canonical pretty-printer for mlq models.

Output re-parses to a `model_equals`-identical AST and is a fixed point:
pretty-printing the re-parsed output reproduces the same text.  Formatting is
2-space indents, one declaration per line.
"""

from __future__ import annotations

from mlq import nodes as n
from mlq.lexer import quote_string

# Binding strength per operator; parenthesize a child when it binds weaker
# than (or, for right operands, no stronger than) its parent.
_PRECEDENCE = {
    "or": 1, "and": 2, "not": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4, "==": 4, "!=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
    "neg": 7,
}


def format_literal(lit: n.Literal) -> str:
    if lit.dtype is n.Dtype.INT:
        return str(lit.value)
    if lit.dtype is n.Dtype.REAL:
        return repr(float(lit.value))
    if lit.dtype is n.Dtype.BOOL:
        return "true" if lit.value else "false"
    return quote_string(str(lit.value))


def format_expr(expr: n.Expr) -> str:
    return _expr(expr, 0)


def _expr(expr: n.Expr, parent_prec: int) -> str:
    if isinstance(expr, n.Literal):
        return format_literal(expr)
    if isinstance(expr, n.NameRef):
        return expr.name
    if isinstance(expr, n.Unary):
        prec = _PRECEDENCE["neg" if expr.op == "-" else expr.op]
        inner = _expr(expr.operand, prec)
        text = f"-{inner}" if expr.op == "-" else f"not {inner}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(expr, n.Binary):
        prec = _PRECEDENCE[expr.op]
        left = _expr(expr.left, prec)
        right = _expr(expr.right, prec + 1)  # left-associative
        text = f"{left} {expr.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression node: {expr!r}")


class _Printer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def emit(self, text: str):
        self.lines.append("  " * self.depth + text)

    def block(self, header: str, body, footer: str = "}"):
        self.emit(header)
        self.depth += 1
        body()
        self.depth -= 1
        self.emit(footer)

    # -- declarations -------------------------------------------------------

    def model(self, model: n.Model):
        for thing in model.things:
            self.thing(thing)
        for config in model.configurations:
            self.configuration(config)

    def thing(self, thing: n.ThingDef):
        def body():
            for prop in thing.properties:
                init = (f" = {format_literal(prop.initial)}"
                        if prop.initial is not None else "")
                self.emit(f"property {prop.name} : {prop.dtype}{init}")
            for msg in thing.messages:
                params = ", ".join(f"{p.name} : {p.dtype}" for p in msg.params)
                self.emit(f"message {msg.name}({params})")
            for port in thing.ports:
                self.port(port)
            for da in thing.analytics:
                self.analytics(da)
            self.statechart(thing.statechart)
        self.block(f"thing {thing.name} {{", body)

    def port(self, port: n.PortDef):
        def body():
            if port.receives:
                self.emit("receives " + ", ".join(str(s) for s in port.receives))
            if port.sends:
                self.emit("sends " + ", ".join(str(s) for s in port.sends))
        self.block(f"{port.kind} port {port.name} {{", body)

    def analytics(self, da: n.DataAnalyticsDef):
        def body():
            self.emit(f"dataset {quote_string(da.dataset_path)}")
            self.emit("features " + ", ".join(str(f) for f in da.features))
            self.emit(f"label {da.label}")
            if isinstance(da.algorithm, n.KnnRegression):
                self.emit(f"model knn({da.algorithm.k})")
            else:
                self.emit("model linear_regression")
            self.emit(f"save_to {quote_string(da.model_path)}")
        self.block(f"data_analytics {da.name} {{", body)

    def statechart(self, chart: n.StatechartDef):
        def body():
            for state in chart.states:
                self.state(state)
        self.block(f"statechart init {chart.initial} {{", body)

    def state(self, state: n.StateDef):
        def body():
            if state.entry_actions:
                self.action_block("on entry {", state.entry_actions)
            if state.exit_actions:
                self.action_block("on exit {", state.exit_actions)
            for tr in state.transitions:
                self.transition(tr)
        self.block(f"state {state.name} {{", body)

    def action_block(self, header: str, actions: list[n.Action]):
        self.block(header, lambda: self.actions(actions))

    def transition(self, tr: n.TransitionDef):
        if isinstance(tr.trigger, n.After):
            trigger = f"after({tr.trigger.ticks})"
        else:
            trigger = f"{tr.trigger.port}?{tr.trigger.message}"
        header = f"transition -> {tr.target} event {trigger}"
        if tr.guard is not None:
            header += f" guard {format_expr(tr.guard)}"
        if tr.actions:
            self.action_block(header + " action {", tr.actions)
        else:
            self.emit(header)

    def actions(self, actions: list[n.Action]):
        for act in actions:
            self.action(act)

    def action(self, act: n.Action):
        if isinstance(act, n.Assign):
            self.emit(f"{act.target} = {format_expr(act.expr)}")
        elif isinstance(act, n.Send):
            args = ", ".join(format_expr(a) for a in act.args)
            self.emit(f"{act.port}!{act.message}({args})")
        elif isinstance(act, n.Print):
            self.emit(f"print {format_expr(act.expr)}")
        elif isinstance(act, n.VarDecl):
            self.emit(f"var {act.name} : {act.dtype} = {format_expr(act.expr)}")
        elif isinstance(act, n.If):
            self.emit(f"if {format_expr(act.cond)} then")
            self.depth += 1
            self.actions(act.then_actions)
            self.depth -= 1
            if act.else_actions:
                self.emit("else")
                self.depth += 1
                self.actions(act.else_actions)
                self.depth -= 1
            self.emit("end")
        elif isinstance(act, n.DaTrain):
            self.emit(f"da_train {act.da}")
        elif isinstance(act, n.DaPredict):
            feats = ", ".join(format_expr(f) for f in act.features)
            self.emit(f"da_predict {act.da} -> {act.result} ({feats})")
        elif isinstance(act, n.DaSave):
            self.emit(f"da_save {act.da}")
        elif isinstance(act, n.DaObserve):
            feats = ", ".join(format_expr(f) for f in act.features)
            self.emit(f"da_observe {act.da} ({feats} ; {format_expr(act.label)})")
        else:
            raise TypeError(f"not an action node: {act!r}")

    def configuration(self, config: n.ConfigurationDef):
        def body():
            for inst in config.instances:
                self.emit(f"instance {inst.name} : {inst.thing}")
            for conn in config.connectors:
                self.emit(f"connector {conn.a.instance}.{conn.a.port} "
                          f"<-> {conn.b.instance}.{conn.b.port}")
        self.block(f"configuration {config.name} {{", body)


def pretty_print(model: n.Model) -> str:
    printer = _Printer()
    printer.model(model)
    return "\n".join(printer.lines) + "\n"
