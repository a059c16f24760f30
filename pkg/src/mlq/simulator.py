"""Deterministic simulator: compiles a resolved model's things into the tick
engine's closure form and runs configurations.

The compilation here and the source emission in `codegen` are deliberate
mirror images; both feed the same engine, which is what makes simulator
traces and generated-project traces byte-identical.
"""

from __future__ import annotations

import operator
from typing import Callable

from mlq import engine, ml
from mlq import nodes as n
from mlq.engine import (EngineFault, Simulation, TraceEvent,
                        UnknownConfiguration, format_trace)
from mlq.resolve import ResolvedModel, resolve_references
from mlq.validator import static_expr_type

#: A fault during execution means a validated model misbehaved at runtime,
#: i.e. a validator soundness bug; runs abort rather than continue.
RuntimeTypeFault = EngineFault

_BINOPS: dict[str, Callable] = {
    "+": operator.add, "-": operator.sub, "*": operator.mul,
    "/": operator.truediv,
    "<": operator.lt, "<=": operator.le, ">": operator.gt,
    ">=": operator.ge, "==": operator.eq, "!=": operator.ne,
}

# expressions never write to local scopes, so guard evaluation can share one
_EMPTY_ENV: tuple = ({},)


def _compile_expr(expr: n.Expr, resolved: ResolvedModel):
    """AST expression -> (ctx, env) -> value, env being the local-scope chain."""
    if isinstance(expr, n.Literal):
        value = expr.value
        return lambda ctx, env: value
    if isinstance(expr, n.NameRef):
        category, _decl = resolved.bindings[expr]
        name = expr.name
        if category == "local":
            def read_local(ctx, env):
                for scope in reversed(env):
                    if name in scope:
                        return scope[name]
                raise EngineFault(f"local {name!r} read before declaration")
            return read_local
        if category == "param":
            return lambda ctx, env: ctx.params[name]
        return lambda ctx, env: ctx.props[name]
    if isinstance(expr, n.Unary):
        operand = _compile_expr(expr.operand, resolved)
        if expr.op == "-":
            return lambda ctx, env: -operand(ctx, env)
        return lambda ctx, env: not operand(ctx, env)
    if isinstance(expr, n.Binary):
        left = _compile_expr(expr.left, resolved)
        right = _compile_expr(expr.right, resolved)
        if expr.op == "and":
            return lambda ctx, env: left(ctx, env) and right(ctx, env)
        if expr.op == "or":
            return lambda ctx, env: left(ctx, env) or right(ctx, env)
        op = _BINOPS[expr.op]
        return lambda ctx, env: op(left(ctx, env), right(ctx, env))
    raise TypeError(f"not an expression node: {expr!r}")


def _compile_coerced(expr: n.Expr, target: n.Dtype, resolved: ResolvedModel):
    """Like _compile_expr, widening INT values into REAL slots."""
    inner = _compile_expr(expr, resolved)
    if target is n.Dtype.REAL and static_expr_type(expr, resolved) is n.Dtype.INT:
        return lambda ctx, env: float(inner(ctx, env))
    return inner


def _compile_real(expr: n.Expr, resolved: ResolvedModel):
    """DA feature/label slots are always REAL."""
    inner = _compile_expr(expr, resolved)
    return lambda ctx, env: float(inner(ctx, env))


def _assigner(target: n.Name, resolved: ResolvedModel):
    category, _decl = resolved.bindings[target]
    name = target.text
    if category == "local":
        def write_local(ctx, env, value):
            for scope in reversed(env):
                if name in scope:
                    scope[name] = value
                    return
            raise EngineFault(f"local {name!r} assigned before declaration")
        return write_local

    def write_prop(ctx, env, value):
        ctx.props[name] = value
    return write_prop


def _compile_action(act: n.Action, resolved: ResolvedModel):
    if isinstance(act, n.Assign):
        target_dtype = resolved.bindings[act.target][1].dtype
        value = _compile_coerced(act.expr, target_dtype, resolved)
        write = _assigner(act.target, resolved)
        return lambda ctx, env: write(ctx, env, value(ctx, env))
    if isinstance(act, n.Send):
        port = act.port.text
        message = act.message.text
        msg_decl = resolved.bindings[act.message][1]
        args = [_compile_coerced(arg, param.dtype, resolved)
                for arg, param in zip(act.args, msg_decl.params)]
        return lambda ctx, env: ctx.send(port, message,
                                         [a(ctx, env) for a in args])
    if isinstance(act, n.Print):
        value = _compile_expr(act.expr, resolved)
        return lambda ctx, env: ctx.print_value(value(ctx, env))
    if isinstance(act, n.VarDecl):
        name = act.name
        value = _compile_coerced(act.expr, act.dtype, resolved)
        def declare(ctx, env):
            env[-1][name] = value(ctx, env)
        return declare
    if isinstance(act, n.If):
        cond = _compile_expr(act.cond, resolved)
        then_steps = [_compile_action(a, resolved) for a in act.then_actions]
        else_steps = [_compile_action(a, resolved) for a in act.else_actions]
        def branch(ctx, env):
            steps = then_steps if cond(ctx, env) else else_steps
            env.append({})
            for step in steps:
                step(ctx, env)
            env.pop()
        return branch
    if isinstance(act, n.DaTrain):
        name = act.da.text
        return lambda ctx, env: ctx.da_train(name)
    if isinstance(act, n.DaSave):
        name = act.da.text
        return lambda ctx, env: ctx.da_save(name)
    if isinstance(act, n.DaPredict):
        name = act.da.text
        features = [_compile_real(f, resolved) for f in act.features]
        write = _assigner(act.result, resolved)
        def predict(ctx, env):
            value = ctx.da_predict(name, [f(ctx, env) for f in features])
            write(ctx, env, value)
        return predict
    if isinstance(act, n.DaObserve):
        name = act.da.text
        features = [_compile_real(f, resolved) for f in act.features]
        label = _compile_real(act.label, resolved)
        return lambda ctx, env: ctx.da_observe(
            name, [f(ctx, env) for f in features], label(ctx, env))
    raise TypeError(f"not an action node: {act!r}")


def _compile_block(actions: list[n.Action], resolved: ResolvedModel):
    """Action list -> ctx handler with a fresh local scope per invocation."""
    if not actions:
        return None
    steps = [_compile_action(a, resolved) for a in actions]
    def handler(ctx):
        env = [{}]
        for step in steps:
            step(ctx, env)
    return handler


def _compile_guard(expr: n.Expr | None, resolved: ResolvedModel):
    if expr is None:
        return None
    value = _compile_expr(expr, resolved)
    return lambda ctx: value(ctx, _EMPTY_ENV)


def compile_thing(thing: n.ThingDef, resolved: ResolvedModel) -> engine.ThingSpec:
    states = []
    for state in thing.statechart.states:
        transitions = []
        for tr in state.transitions:
            spec = engine.TransitionSpec(
                target=tr.target.text,
                guard=_compile_guard(tr.guard, resolved),
                actions=_compile_block(tr.actions, resolved))
            if isinstance(tr.trigger, n.After):
                spec.after = tr.trigger.ticks
            else:
                spec.port = tr.trigger.port.text
                spec.message = tr.trigger.message.text
            transitions.append(spec)
        states.append(engine.StateSpec(
            name=state.name,
            entry=_compile_block(state.entry_actions, resolved),
            exit=_compile_block(state.exit_actions, resolved),
            transitions=transitions))
    properties = [(p.name,
                   p.initial.value if p.initial is not None
                   else n.zero_value(p.dtype))
                  for p in thing.properties]
    messages = {m.name: [p.name for p in m.params] for m in thing.messages}
    das = [ml.DaConfig(
        name=da.name,
        dataset_path=da.dataset_path,
        feature_names=[f.text for f in da.features],
        label_name=da.label.text,
        algorithm=(ml.KNN if isinstance(da.algorithm, n.KnnRegression)
                   else ml.LINEAR_REGRESSION),
        k=da.algorithm.k if isinstance(da.algorithm, n.KnnRegression) else None,
        model_path=da.model_path) for da in thing.analytics]
    return engine.ThingSpec(name=thing.name, initial=thing.statechart.initial.text,
                            states=states, properties=properties,
                            messages=messages, das=das)


def compile_configuration(resolved: ResolvedModel,
                          config_name: str) -> engine.ConfigSpec:
    model = resolved.model
    config = next((c for c in model.configurations if c.name == config_name),
                  None)
    if config is None:
        raise UnknownConfiguration(
            f"model has no configuration {config_name!r}")
    thing_specs = {t.name: compile_thing(t, resolved) for t in model.things}
    instances = [(inst.name, thing_specs[inst.thing.text])
                 for inst in config.instances]
    connectors = [((c.a.instance.text, c.a.port.text),
                   (c.b.instance.text, c.b.port.text))
                  for c in config.connectors]
    return engine.ConfigSpec(config.name, instances, connectors)


def instantiate(model: n.Model | ResolvedModel, config_name: str,
                base_dir: str = ".", workdir: str = ".") -> Simulation:
    """Build the initial simulation state; entry actions of initial states
    run on the first step, not here."""
    resolved = model if isinstance(model, ResolvedModel) else resolve_references(model)
    config = compile_configuration(resolved, config_name)
    return engine.instantiate(config, ml, base_dir, workdir)


def step(sim: Simulation) -> tuple[Simulation, list[TraceEvent]]:
    """Advance one tick; returns the same (mutated) state plus new events."""
    return sim, sim.step()


def run(model: n.Model | ResolvedModel, config_name: str, max_ticks: int,
        base_dir: str = ".", workdir: str = ".") -> list[TraceEvent]:
    """Run until `max_ticks` or quiescence; returns the trace."""
    sim = instantiate(model, config_name, base_dir, workdir)
    while sim.tick < max_ticks:
        if sim.tick > 0 and sim.quiescent():
            break
        sim.step()
    return sim.events


def trace_text(events: list[TraceEvent]) -> str:
    return format_trace(events)
