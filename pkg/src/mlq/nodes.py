"""Abstract syntax for mlq models.

Every node is a plain dataclass with `eq=False`: nodes compare and hash by
identity, which lets resolution tables key on them directly.  Structural
comparison (ignoring source locations) goes through `model_equals`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields


class Dtype(enum.Enum):
    INT = "int"
    REAL = "real"
    BOOL = "bool"
    STRING = "string"

    def __str__(self) -> str:
        return self.value


def zero_value(dtype: Dtype):
    """Default value an uninitialized property of `dtype` starts with."""
    return {Dtype.INT: 0, Dtype.REAL: 0.0, Dtype.BOOL: False, Dtype.STRING: ""}[dtype]


@dataclass(eq=False)
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


@dataclass(eq=False)
class Name(Node):
    """An identifier occurrence that refers to something declared elsewhere."""

    text: str = ""

    def __str__(self) -> str:
        return self.text


# --- expressions ---------------------------------------------------------


@dataclass(eq=False)
class Expr(Node):
    pass


@dataclass(eq=False)
class Literal(Expr):
    value: object = None
    dtype: Dtype = Dtype.INT


@dataclass(eq=False)
class NameRef(Expr):
    """Reference to a property, local variable, or message parameter.

    Which of the three it is gets decided during resolution; the parser
    cannot tell them apart.
    """

    name: str = ""


@dataclass(eq=False)
class Unary(Expr):
    op: str = ""  # "-" | "not"
    operand: Expr = None


@dataclass(eq=False)
class Binary(Expr):
    op: str = ""  # + - * / < <= > >= == != and or
    left: Expr = None
    right: Expr = None


# --- actions --------------------------------------------------------------


@dataclass(eq=False)
class Action(Node):
    pass


@dataclass(eq=False)
class Assign(Action):
    target: Name = None
    expr: Expr = None


@dataclass(eq=False)
class Send(Action):
    port: Name = None
    message: Name = None
    args: list[Expr] = field(default_factory=list)


@dataclass(eq=False)
class Print(Action):
    expr: Expr = None


@dataclass(eq=False)
class VarDecl(Action):
    name: str = ""
    dtype: Dtype = Dtype.INT
    expr: Expr = None


@dataclass(eq=False)
class If(Action):
    cond: Expr = None
    then_actions: list[Action] = field(default_factory=list)
    else_actions: list[Action] = field(default_factory=list)


@dataclass(eq=False)
class DaTrain(Action):
    da: Name = None


@dataclass(eq=False)
class DaPredict(Action):
    da: Name = None
    result: Name = None
    features: list[Expr] = field(default_factory=list)


@dataclass(eq=False)
class DaSave(Action):
    da: Name = None


@dataclass(eq=False)
class DaObserve(Action):
    da: Name = None
    features: list[Expr] = field(default_factory=list)
    label: Expr = None


# --- statecharts ----------------------------------------------------------


@dataclass(eq=False)
class EventTrigger(Node):
    pass


@dataclass(eq=False)
class MessageOn(EventTrigger):
    port: Name = None
    message: Name = None


@dataclass(eq=False)
class After(EventTrigger):
    ticks: int = 1


@dataclass(eq=False)
class TransitionDef(Node):
    target: Name = None
    trigger: EventTrigger = None
    guard: Expr | None = None
    actions: list[Action] = field(default_factory=list)


@dataclass(eq=False)
class StateDef(Node):
    name: str = ""
    entry_actions: list[Action] = field(default_factory=list)
    exit_actions: list[Action] = field(default_factory=list)
    transitions: list[TransitionDef] = field(default_factory=list)


@dataclass(eq=False)
class StatechartDef(Node):
    initial: Name = None
    states: list[StateDef] = field(default_factory=list)


# --- thing members --------------------------------------------------------


@dataclass(eq=False)
class PropertyDef(Node):
    name: str = ""
    dtype: Dtype = Dtype.INT
    initial: Literal | None = None


@dataclass(eq=False)
class ParamDef(Node):
    name: str = ""
    dtype: Dtype = Dtype.INT


@dataclass(eq=False)
class MessageDef(Node):
    name: str = ""
    params: list[ParamDef] = field(default_factory=list)


class PortKind(enum.Enum):
    PROVIDED = "provided"
    REQUIRED = "required"

    def __str__(self) -> str:
        return self.value


@dataclass(eq=False)
class PortDef(Node):
    name: str = ""
    kind: PortKind = PortKind.PROVIDED
    receives: list[Name] = field(default_factory=list)
    sends: list[Name] = field(default_factory=list)


@dataclass(eq=False)
class AlgorithmSpec(Node):
    pass


@dataclass(eq=False)
class LinearRegression(AlgorithmSpec):
    pass


@dataclass(eq=False)
class KnnRegression(AlgorithmSpec):
    k: int = 1


@dataclass(eq=False)
class DataAnalyticsDef(Node):
    name: str = ""
    dataset_path: str = ""
    features: list[Name] = field(default_factory=list)
    label: Name = None
    algorithm: AlgorithmSpec = None
    model_path: str = ""


@dataclass(eq=False)
class ThingDef(Node):
    name: str = ""
    properties: list[PropertyDef] = field(default_factory=list)
    messages: list[MessageDef] = field(default_factory=list)
    ports: list[PortDef] = field(default_factory=list)
    analytics: list[DataAnalyticsDef] = field(default_factory=list)
    statechart: StatechartDef = None


# --- configurations -------------------------------------------------------


@dataclass(eq=False)
class InstanceDef(Node):
    name: str = ""
    thing: Name = None


@dataclass(eq=False)
class ConnectorEnd(Node):
    instance: Name = None
    port: Name = None


@dataclass(eq=False)
class ConnectorDef(Node):
    a: ConnectorEnd = None
    b: ConnectorEnd = None


@dataclass(eq=False)
class ConfigurationDef(Node):
    name: str = ""
    instances: list[InstanceDef] = field(default_factory=list)
    connectors: list[ConnectorDef] = field(default_factory=list)


@dataclass(eq=False)
class Model(Node):
    things: list[ThingDef] = field(default_factory=list)
    configurations: list[ConfigurationDef] = field(default_factory=list)
    source_name: str = "model"


# --- structural equality --------------------------------------------------

_IGNORED_FIELDS = {"line", "col"}


def _comparable(value):
    """Recursively strip source locations; `source_name` is also ignored at
    the Model level since it derives from the file name, not the text."""
    if isinstance(value, Model):
        return (
            "Model",
            _comparable(value.things),
            _comparable(value.configurations),
        )
    if isinstance(value, Node):
        items = [type(value).__name__]
        for f in fields(value):
            if f.name in _IGNORED_FIELDS:
                continue
            items.append(_comparable(getattr(value, f.name)))
        return tuple(items)
    if isinstance(value, list):
        return tuple(_comparable(v) for v in value)
    if isinstance(value, (Dtype, PortKind)):
        return value.value
    return value


def model_equals(a: Model, b: Model) -> bool:
    """Structural equality of two models, ignoring source locations."""
    return _comparable(a) == _comparable(b)


def node_signature(node: Node):
    """Location-free structural fingerprint of any AST node (test support)."""
    return _comparable(node)
