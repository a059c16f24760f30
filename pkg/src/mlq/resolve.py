"""Name resolution over a parsed model.

Binds every reference (states, ports, messages, properties, locals, message
parameters, data-analytics blocks, things, instances) to its definition, or
collects an error; resolution never stops at the first problem.  The binding
table is keyed by reference-node identity, which is why AST nodes hash by
identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mlq import nodes as n


@dataclass(frozen=True)
class ResolutionError:
    kind: str  # "unresolved" | "duplicate"
    name: str
    category: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "duplicate":
            return f"duplicate {self.category} name '{self.name}'"
        return f"unresolved {self.category} '{self.name}'"


@dataclass
class ResolvedModel:
    model: n.Model
    bindings: dict[n.Node, tuple[str, n.Node]] = field(default_factory=dict)
    errors: list[ResolutionError] = field(default_factory=list)

    def binding(self, ref: n.Node) -> tuple[str, n.Node] | None:
        return self.bindings.get(ref)

    def target_of(self, ref: n.Node) -> n.Node | None:
        bound = self.bindings.get(ref)
        return bound[1] if bound else None


class _Resolver:
    def __init__(self, model: n.Model):
        self.model = model
        self.out = ResolvedModel(model)

    def bind(self, ref: n.Node, category: str, decl: n.Node):
        self.out.bindings[ref] = (category, decl)

    def unresolved(self, ref: n.Node, name: str, category: str):
        self.out.errors.append(ResolutionError(
            "unresolved", name, category, ref.line, ref.col))

    def duplicate(self, node: n.Node, name: str, category: str):
        self.out.errors.append(ResolutionError(
            "duplicate", name, category, node.line, node.col))

    def index_unique(self, decls, category: str) -> dict[str, n.Node]:
        table: dict[str, n.Node] = {}
        for decl in decls:
            if decl.name in table:
                self.duplicate(decl, decl.name, category)
            else:
                table[decl.name] = decl
        return table

    # -- whole model --------------------------------------------------------

    def run(self) -> ResolvedModel:
        things = self.index_unique(self.model.things, "thing")
        self.index_unique(self.model.configurations, "configuration")
        for thing in self.model.things:
            self.resolve_thing(thing)
        for config in self.model.configurations:
            self.resolve_configuration(config, things)
        return self.out

    # -- things --------------------------------------------------------------

    def resolve_thing(self, thing: n.ThingDef):
        props = self.index_unique(thing.properties, "property")
        messages = self.index_unique(thing.messages, "message")
        ports = self.index_unique(thing.ports, "port")
        das = self.index_unique(thing.analytics, "data-analytics block")
        for msg in thing.messages:
            self.index_unique(msg.params, "parameter")
        for da in thing.analytics:
            seen: set[str] = set()
            for feat in da.features:
                if feat.text in seen:
                    self.duplicate(feat, feat.text, "feature")
                seen.add(feat.text)
            if da.label.text in seen:
                self.duplicate(da.label, da.label.text, "feature (label also listed as a feature)")

        for port in thing.ports:
            for ref in list(port.receives) + list(port.sends):
                if ref.text in messages:
                    self.bind(ref, "message", messages[ref.text])
                else:
                    self.unresolved(ref, ref.text, "message")

        chart = thing.statechart
        states = self.index_unique(chart.states, "state")
        if chart.initial.text in states:
            self.bind(chart.initial, "state", states[chart.initial.text])
        else:
            self.unresolved(chart.initial, chart.initial.text, "state")

        scope = _ThingScope(self, thing, props, messages, ports, das, states)
        for state in chart.states:
            scope.resolve_state(state)

    def resolve_configuration(self, config: n.ConfigurationDef,
                              things: dict[str, n.Node]):
        instances: dict[str, n.InstanceDef] = {}
        for inst in config.instances:
            if inst.name in instances:
                self.duplicate(inst, inst.name, "instance")
            else:
                instances[inst.name] = inst
            if inst.thing.text in things:
                self.bind(inst.thing, "thing", things[inst.thing.text])
            else:
                self.unresolved(inst.thing, inst.thing.text, "thing")
        for conn in config.connectors:
            for end in (conn.a, conn.b):
                inst = instances.get(end.instance.text)
                if inst is None:
                    self.unresolved(end.instance, end.instance.text, "instance")
                    continue
                self.bind(end.instance, "instance", inst)
                thing = self.out.target_of(inst.thing)
                if thing is None:
                    continue
                port = next((p for p in thing.ports if p.name == end.port.text),
                            None)
                if port is None:
                    self.unresolved(end.port, end.port.text, "port")
                else:
                    self.bind(end.port, "port", port)


class _ThingScope:
    """Resolves statechart bodies: references to states, ports, messages,
    DA blocks, properties, trigger parameters, and block-scoped locals."""

    def __init__(self, resolver: _Resolver, thing: n.ThingDef, props, messages,
                 ports, das, states):
        self.r = resolver
        self.thing = thing
        self.props = props
        self.messages = messages
        self.ports = ports
        self.das = das
        self.states = states

    def resolve_state(self, state: n.StateDef):
        self.resolve_block(state.entry_actions, params=None)
        self.resolve_block(state.exit_actions, params=None)
        for tr in state.transitions:
            self.resolve_transition(tr)

    def resolve_transition(self, tr: n.TransitionDef):
        if tr.target.text in self.states:
            self.r.bind(tr.target, "state", self.states[tr.target.text])
        else:
            self.r.unresolved(tr.target, tr.target.text, "state")

        params: dict[str, n.ParamDef] | None = None
        trig = tr.trigger
        if isinstance(trig, n.MessageOn):
            port = self.ports.get(trig.port.text)
            if port is not None:
                self.r.bind(trig.port, "port", port)
            else:
                self.r.unresolved(trig.port, trig.port.text, "port")
            msg = self.messages.get(trig.message.text)
            if msg is not None:
                self.r.bind(trig.message, "message", msg)
                params = {p.name: p for p in msg.params}
            else:
                self.r.unresolved(trig.message, trig.message.text, "message")

        if tr.guard is not None:
            self.resolve_expr(tr.guard, [], params)
        self.resolve_block(tr.actions, params)

    # -- action blocks -------------------------------------------------------

    def resolve_block(self, actions: list[n.Action],
                      params: dict[str, n.ParamDef] | None):
        self.resolve_actions(actions, [{}], params)

    def resolve_actions(self, actions, scopes: list[dict[str, n.VarDecl]],
                        params):
        for act in actions:
            self.resolve_action(act, scopes, params)

    def lookup_value_name(self, name: str, scopes, params):
        for scope in reversed(scopes):
            if name in scope:
                return "local", scope[name]
        if params and name in params:
            return "param", params[name]
        if name in self.props:
            return "property", self.props[name]
        return None, None

    def resolve_value_ref(self, ref: n.Node, name: str, scopes, params,
                          category: str = "name"):
        kind, decl = self.lookup_value_name(name, scopes, params)
        if kind is None:
            self.r.unresolved(ref, name, category)
        else:
            self.r.bind(ref, kind, decl)

    def resolve_da_ref(self, ref: n.Name):
        da = self.das.get(ref.text)
        if da is None:
            self.r.unresolved(ref, ref.text, "data-analytics block")
        else:
            self.r.bind(ref, "da", da)

    def resolve_action(self, act: n.Action, scopes, params):
        if isinstance(act, n.Assign):
            self.resolve_value_ref(act.target, act.target.text, scopes, params,
                                   "assignment target")
            self.resolve_expr(act.expr, scopes, params)
        elif isinstance(act, n.Send):
            port = self.ports.get(act.port.text)
            if port is not None:
                self.r.bind(act.port, "port", port)
            else:
                self.r.unresolved(act.port, act.port.text, "port")
            msg = self.messages.get(act.message.text)
            if msg is not None:
                self.r.bind(act.message, "message", msg)
            else:
                self.r.unresolved(act.message, act.message.text, "message")
            for arg in act.args:
                self.resolve_expr(arg, scopes, params)
        elif isinstance(act, n.Print):
            self.resolve_expr(act.expr, scopes, params)
        elif isinstance(act, n.VarDecl):
            self.resolve_expr(act.expr, scopes, params)
            for scope in scopes:
                if act.name in scope:
                    # shadowing a live local would make block scoping ambiguous
                    self.r.duplicate(act, act.name, "local variable")
            scopes[-1][act.name] = act
        elif isinstance(act, n.If):
            self.resolve_expr(act.cond, scopes, params)
            scopes.append({})
            self.resolve_actions(act.then_actions, scopes, params)
            scopes.pop()
            scopes.append({})
            self.resolve_actions(act.else_actions, scopes, params)
            scopes.pop()
        elif isinstance(act, n.DaTrain):
            self.resolve_da_ref(act.da)
        elif isinstance(act, n.DaSave):
            self.resolve_da_ref(act.da)
        elif isinstance(act, n.DaPredict):
            self.resolve_da_ref(act.da)
            self.resolve_value_ref(act.result, act.result.text, scopes, params,
                                   "prediction target")
            for feat in act.features:
                self.resolve_expr(feat, scopes, params)
        elif isinstance(act, n.DaObserve):
            self.resolve_da_ref(act.da)
            for feat in act.features:
                self.resolve_expr(feat, scopes, params)
            self.resolve_expr(act.label, scopes, params)
        else:
            raise TypeError(f"not an action node: {act!r}")

    def resolve_expr(self, expr: n.Expr, scopes, params):
        if isinstance(expr, n.Literal):
            return
        if isinstance(expr, n.NameRef):
            self.resolve_value_ref(expr, expr.name, scopes, params)
        elif isinstance(expr, n.Unary):
            self.resolve_expr(expr.operand, scopes, params)
        elif isinstance(expr, n.Binary):
            self.resolve_expr(expr.left, scopes, params)
            self.resolve_expr(expr.right, scopes, params)
        else:
            raise TypeError(f"not an expression node: {expr!r}")


def resolve_references(model: n.Model | ResolvedModel) -> ResolvedModel:
    """Resolve every reference in `model`; total (collects all errors).

    Accepts an already-resolved model and re-resolves its AST, which yields
    an identical binding table (idempotence).
    """
    if isinstance(model, ResolvedModel):
        model = model.model
    return _Resolver(model).run()
