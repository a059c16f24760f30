"""Deterministic tick engine for configurations of statechart things.

This module is deliberately self-contained (stdlib only, no package-relative
imports): generated projects embed it verbatim as their runtime kernel, so
the simulator and generated code share one implementation of the execution
semantics and produce byte-identical traces.

Semantics of one tick, in order:

  1. at tick 0 only: each instance, in declaration order, enters its
     statechart's initial state (STATE_ENTER traced) and runs its entry
     actions;
  2. each instance, in declaration order, fires at most one timer
     transition: eligible when `tick - stateEntryTick >= delay`, and among
     eligible ones the first in declaration order whose guard holds;
  3. each instance, in declaration order, drains its entire mailbox one
     event at a time, run-to-completion: the matching transition is the
     first declared one whose port+message match and whose guard holds; an
     event with no match is dropped with no trace;
  4. messages sent during this tick are delivered to peer mailboxes for the
     next tick, in send order; the tick counter then increments.

Firing a transition runs the source state's exit actions, the transition's
actions, then (STATE_ENTER traced) the target's entry actions; re-entering a
state via a self-transition resets its entry tick.

Trace format (normative, byte-comparable): one event per line,
`tick<TAB>instance<TAB>kind<TAB>detail`, newline `\\n`, REAL values printed
with 6 decimal places.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

STATE_ENTER = "STATE_ENTER"
SEND = "SEND"
RECEIVE = "RECEIVE"
PRINT = "PRINT"
DA_TRAIN = "DA_TRAIN"
DA_PREDICT = "DA_PREDICT"
DA_OBSERVE = "DA_OBSERVE"
DA_SAVE = "DA_SAVE"


class EngineFault(Exception):
    """A runtime fault (type confusion, division by zero, DA misuse).

    On a validated model this indicates a validator soundness bug; the run
    must abort rather than continue from an undefined state.
    """


class UnknownConfiguration(Exception):
    pass


# -- specs: what compiled/generated things look like to the engine -------------


@dataclass
class TransitionSpec:
    target: str
    after: int | None = None           # timer trigger: delay in ticks
    port: str | None = None            # message trigger: port + message
    message: str | None = None
    guard: Callable | None = None      # ctx -> bool
    actions: Callable | None = None    # ctx -> None


@dataclass
class StateSpec:
    name: str
    entry: Callable | None = None      # ctx -> None
    exit: Callable | None = None       # ctx -> None
    transitions: list[TransitionSpec] = field(default_factory=list)


@dataclass
class ThingSpec:
    name: str
    initial: str
    states: list[StateSpec] = field(default_factory=list)
    #: (name, python zero/initial value) pairs, declaration order
    properties: list[tuple[str, object]] = field(default_factory=list)
    #: message name -> ordered parameter names (for mailbox param binding)
    messages: dict[str, list[str]] = field(default_factory=dict)
    #: data-analytics configs (ml.DaConfig-compatible objects)
    das: list = field(default_factory=list)

    def state(self, name: str) -> StateSpec:
        for state in self.states:
            if state.name == name:
                return state
        raise EngineFault(f"thing {self.name} has no state {name!r}")


@dataclass
class ConfigSpec:
    name: str
    instances: list[tuple[str, ThingSpec]] = field(default_factory=list)
    #: ((instance, port), (instance, port)) pairs, declaration order
    connectors: list = field(default_factory=list)


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    instance: str
    kind: str
    detail: str


@dataclass(frozen=True)
class InEvent:
    port: str
    message: str
    values: tuple


# -- canonical value formatting --------------------------------------------------


def fmt_real(value: float) -> str:
    return f"{value:.6f}"


def fmt_value(value) -> str:
    """Canonical rendering of a runtime value inside event details."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_real(value)
    return _quote(str(value))


def _quote(text: str) -> str:
    out = ['"']
    for c in text:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        else:
            out.append(c)
    out.append('"')
    return "".join(out)


def format_event(event: TraceEvent) -> str:
    return f"{event.tick}\t{event.instance}\t{event.kind}\t{event.detail}"


def format_trace(events) -> str:
    return "".join(format_event(e) + "\n" for e in events)


# -- runtime state -----------------------------------------------------------------


class InstanceState:
    def __init__(self, name: str, spec: ThingSpec):
        self.name = name
        self.spec = spec
        self.current_state = spec.initial
        self.state_entry_tick = 0
        self.props = {pname: value for pname, value in spec.properties}
        self.mailbox: deque[InEvent] = deque()
        self.models: dict[str, object] = {}
        self.buffers: dict[str, object] = {}
        self.das = {da.name: da for da in spec.das}


class Ctx:
    """Handler-facing API: property storage, sends, prints, and DA actions."""

    __slots__ = ("_sim", "_inst", "params")

    def __init__(self, sim: "Simulation", inst: InstanceState, params):
        self._sim = sim
        self._inst = inst
        self.params = params or {}

    @property
    def props(self) -> dict:
        return self._inst.props

    def send(self, port: str, message: str, values: list) -> None:
        self._sim.emit_send(self._inst, port, message, values)

    def print_value(self, value) -> None:
        detail = value if isinstance(value, str) else fmt_value(value)
        self._sim.trace(self._inst, PRINT, detail)

    def da_train(self, name: str) -> None:
        self._sim.da_train(self._inst, name)

    def da_predict(self, name: str, features: list) -> float:
        return self._sim.da_predict(self._inst, name, features)

    def da_observe(self, name: str, features: list, label: float) -> None:
        self._sim.da_observe(self._inst, name, features, label)

    def da_save(self, name: str) -> None:
        self._sim.da_save(self._inst, name)


class Simulation:
    """Mutable run state of one configuration; single-threaded by contract."""

    def __init__(self, config: ConfigSpec, ml, base_dir: str = ".",
                 workdir: str = "."):
        self.config = config
        self.ml = ml
        self.base_dir = base_dir
        self.workdir = workdir
        self.tick = 0
        self.instances = [InstanceState(name, spec)
                          for name, spec in config.instances]
        self._by_name = {inst.name: inst for inst in self.instances}
        self._peers: dict[tuple[str, str], list[tuple[str, str]]] = {}
        for (a, b) in config.connectors:
            self._peers.setdefault(tuple(a), []).append(tuple(b))
            self._peers.setdefault(tuple(b), []).append(tuple(a))
        self._pending: list[tuple[str, InEvent]] = []
        self._events: list[TraceEvent] = []
        self._datasets: dict[str, object] = {}

    # -- tracing and messaging ----------------------------------------------

    def trace(self, inst: InstanceState, kind: str, detail: str) -> None:
        self._events.append(TraceEvent(self.tick, inst.name, kind, detail))

    def emit_send(self, inst: InstanceState, port: str, message: str,
                  values: list) -> None:
        rendered = ",".join(fmt_value(v) for v in values)
        self.trace(inst, SEND, f"{port}!{message}({rendered})")
        # unbound ports are traced but deliver nowhere
        for peer_name, peer_port in self._peers.get((inst.name, port), ()):
            self._pending.append(
                (peer_name, InEvent(peer_port, message, tuple(values))))

    # -- DA actions ------------------------------------------------------------

    def _da(self, inst: InstanceState, name: str):
        da = inst.das.get(name)
        if da is None:
            raise EngineFault(f"{inst.name}: unknown data-analytics block "
                              f"{name!r}")
        return da

    def _dataset(self, da):
        path = da.dataset_path
        if not os.path.isabs(path):
            path = os.path.join(self.base_dir, path)
        if path not in self._datasets:
            self._datasets[path] = self.ml.load_dataset(
                path, list(da.feature_names) + [da.label_name])
        return self._datasets[path]

    def da_train(self, inst: InstanceState, name: str) -> None:
        da = self._da(inst, name)
        buffer = inst.buffers.get(name)
        if buffer is None:
            buffer = inst.buffers[name] = self.ml.ObservationBuffer(name)
        model = self.ml.train(da, self._dataset(da), buffer)
        inst.models[name] = model
        self.trace(inst, DA_TRAIN, f"{name} rows={model.trained_on_rows}")

    def da_predict(self, inst: InstanceState, name: str,
                   features: list) -> float:
        self._da(inst, name)
        model = inst.models.get(name)
        if model is None:
            raise EngineFault(f"{inst.name}: da_predict {name!r} before "
                              "da_train")
        value = self.ml.predict(model, features)
        rendered = ",".join(fmt_real(f) for f in features)
        self.trace(inst, DA_PREDICT, f"{name}({rendered}) -> {fmt_real(value)}")
        return value

    def da_observe(self, inst: InstanceState, name: str, features: list,
                   label: float) -> None:
        da = self._da(inst, name)
        if len(features) != len(da.feature_names):
            raise EngineFault(f"{inst.name}: da_observe {name!r} arity "
                              "mismatch")
        buffer = inst.buffers.get(name)
        if buffer is None:
            buffer = inst.buffers[name] = self.ml.ObservationBuffer(name)
        self.ml.observe(buffer, features, label)
        rendered = ",".join(fmt_real(f) for f in features)
        self.trace(inst, DA_OBSERVE, f"{name}({rendered};{fmt_real(label)})")

    def da_save(self, inst: InstanceState, name: str) -> None:
        da = self._da(inst, name)
        model = inst.models.get(name)
        if model is None:
            raise EngineFault(f"{inst.name}: da_save {name!r} before da_train")
        path = da.model_path
        if not os.path.isabs(path):
            path = os.path.join(self.workdir, path)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self.ml.save_model(model, path)
        self.trace(inst, DA_SAVE, f"{name} -> {da.model_path}")

    # -- transition firing ---------------------------------------------------

    def _fire(self, inst: InstanceState, tr: TransitionSpec, params) -> None:
        ctx = Ctx(self, inst, params)
        source = inst.spec.state(inst.current_state)
        target = inst.spec.state(tr.target)
        try:
            if source.exit is not None:
                source.exit(ctx)
            if tr.actions is not None:
                tr.actions(ctx)
            self.trace(inst, STATE_ENTER, target.name)
            inst.current_state = target.name
            inst.state_entry_tick = self.tick
            if target.entry is not None:
                target.entry(ctx)
        except ZeroDivisionError:
            raise EngineFault(f"{inst.name}: division by zero") from None

    def _guard_holds(self, inst: InstanceState, tr: TransitionSpec,
                     params) -> bool:
        if tr.guard is None:
            return True
        try:
            return bool(tr.guard(Ctx(self, inst, params)))
        except ZeroDivisionError:
            raise EngineFault(f"{inst.name}: division by zero in guard") from None

    # -- the tick ----------------------------------------------------------------

    def step(self) -> list[TraceEvent]:
        """Execute one tick; returns the trace events it produced."""
        mark = len(self._events)

        if self.tick == 0:
            for inst in self.instances:
                ctx = Ctx(self, inst, None)
                initial = inst.spec.state(inst.spec.initial)
                self.trace(inst, STATE_ENTER, initial.name)
                inst.state_entry_tick = 0
                if initial.entry is not None:
                    try:
                        initial.entry(ctx)
                    except ZeroDivisionError:
                        raise EngineFault(
                            f"{inst.name}: division by zero") from None

        for inst in self.instances:
            state = inst.spec.state(inst.current_state)
            elapsed = self.tick - inst.state_entry_tick
            for tr in state.transitions:
                if tr.after is None or elapsed < tr.after:
                    continue
                if self._guard_holds(inst, tr, None):
                    self._fire(inst, tr, None)
                    break

        for inst in self.instances:
            while inst.mailbox:
                event = inst.mailbox.popleft()
                self._dispatch(inst, event)

        for name, event in self._pending:
            self._by_name[name].mailbox.append(event)
        self._pending.clear()

        self.tick += 1
        return self._events[mark:]

    def _dispatch(self, inst: InstanceState, event: InEvent) -> None:
        state = inst.spec.state(inst.current_state)
        param_names = inst.spec.messages.get(event.message)
        for tr in state.transitions:
            if tr.port != event.port or tr.message != event.message:
                continue
            if param_names is None or len(param_names) != len(event.values):
                raise EngineFault(f"{inst.name}: message {event.message!r} "
                                  "arity mismatch on delivery")
            params = dict(zip(param_names, event.values))
            if self._guard_holds(inst, tr, params):
                rendered = ",".join(fmt_value(v) for v in event.values)
                self.trace(inst, RECEIVE,
                           f"{event.port}?{event.message}({rendered})")
                self._fire(inst, tr, params)
                return
        # no matching transition: the event is dropped, no trace

    def quiescent(self) -> bool:
        """True when nothing can ever happen again: no queued or in-flight
        messages and no timer transition in any current state."""
        if self._pending or any(inst.mailbox for inst in self.instances):
            return False
        for inst in self.instances:
            state = inst.spec.state(inst.current_state)
            if any(tr.after is not None for tr in state.transitions):
                return False
        return True

    @property
    def events(self) -> list[TraceEvent]:
        return self._events


def instantiate(config: ConfigSpec, ml, base_dir: str = ".",
                workdir: str = ".") -> Simulation:
    return Simulation(config, ml, base_dir, workdir)


def run(config: ConfigSpec, max_ticks: int, ml, base_dir: str = ".",
        workdir: str = ".") -> list[TraceEvent]:
    """Step until `max_ticks` or quiescence; returns the full trace."""
    sim = Simulation(config, ml, base_dir, workdir)
    while sim.tick < max_ticks:
        if sim.tick > 0 and sim.quiescent():
            break
        sim.step()
    return sim.events
