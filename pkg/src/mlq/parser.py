"""Recursive-descent parser for mlq source text.

Single-token lookahead throughout.  On a syntax error the parser reports the
expected-token set, then synchronizes at the next top-level keyword (`thing`
or `configuration`) and keeps going, up to 20 diagnostics.
"""

from __future__ import annotations

from mlq import nodes as n
from mlq.diagnostics import Diagnostic, error
from mlq.lexer import MAX_DIAGNOSTICS, Token, TokenKind, string_value, tokenize

_TOP_LEVEL = {"thing", "configuration"}

_DTYPES = {
    "int": n.Dtype.INT,
    "real": n.Dtype.REAL,
    "bool": n.Dtype.BOOL,
    "string": n.Dtype.STRING,
}

_ACTION_STARTS = ("print", "var", "if", "da_train", "da_predict", "da_save",
                  "da_observe")


class _SyntaxError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


class _Parser:
    def __init__(self, tokens: list[Token], source_name: str):
        self.tokens = tokens
        self.pos = 0
        self.source_name = source_name
        self.diags: list[Diagnostic] = []

    # -- token plumbing ----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at(self, lexeme: str) -> bool:
        return self.cur.lexeme == lexeme and self.cur.kind in (
            TokenKind.KEYWORD, TokenKind.PUNCT, TokenKind.OP)

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.advance()
            return True
        return False

    def fail(self, expected: str):
        tok = self.cur
        if tok.kind is TokenKind.EOF:
            raise _SyntaxError(error(
                "SYN002", f"premature end of input; expected {expected}",
                tok.line, tok.col))
        raise _SyntaxError(error(
            "SYN001", f"unexpected {tok.kind.value} {tok.lexeme!r}; "
                      f"expected {expected}",
            tok.line, tok.col))

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.fail(f"`{lexeme}`")
        return self.advance()

    def expect_ident(self, what: str = "an identifier") -> Token:
        if self.cur.kind is not TokenKind.IDENT:
            self.fail(what)
        return self.advance()

    def expect_name(self, what: str = "an identifier") -> n.Name:
        tok = self.expect_ident(what)
        return n.Name(tok.lexeme, line=tok.line, col=tok.col)

    def expect_string(self) -> tuple[str, Token]:
        if self.cur.kind is not TokenKind.STRING:
            self.fail("a string literal")
        tok = self.advance()
        return string_value(tok.lexeme), tok

    def expect_int(self) -> tuple[int, Token]:
        if self.cur.kind is not TokenKind.INT:
            self.fail("an integer literal")
        tok = self.advance()
        return int(tok.lexeme), tok

    def expect_dtype(self) -> n.Dtype:
        if self.cur.kind is TokenKind.KEYWORD and self.cur.lexeme in _DTYPES:
            return _DTYPES[self.advance().lexeme]
        self.fail("a type (`int`, `real`, `bool` or `string`)")

    def report(self, err: _SyntaxError):
        if len(self.diags) < MAX_DIAGNOSTICS:
            self.diags.append(err.diag)

    def sync_top_level(self):
        while self.cur.kind is not TokenKind.EOF:
            if self.cur.kind is TokenKind.KEYWORD and self.cur.lexeme in _TOP_LEVEL:
                return
            self.advance()

    # -- grammar -----------------------------------------------------------

    def parse_model(self) -> n.Model:
        model = n.Model(source_name=self.source_name, line=1, col=1)
        if self.cur.kind is TokenKind.EOF:
            self.fail("`thing` (a model declares at least one thing)")
        while self.cur.kind is not TokenKind.EOF:
            try:
                if self.at("thing"):
                    model.things.append(self.parse_thing())
                elif self.at("configuration"):
                    model.configurations.append(self.parse_configuration())
                else:
                    self.fail("`thing` or `configuration`")
            except _SyntaxError as err:
                self.report(err)
                if len(self.diags) >= MAX_DIAGNOSTICS:
                    break
                self.advance()
                self.sync_top_level()
        if not model.things and not self.diags:
            self.fail("`thing` (a model declares at least one thing)")
        return model

    def parse_thing(self) -> n.ThingDef:
        kw = self.expect("thing")
        name = self.expect_ident("a thing name")
        thing = n.ThingDef(name.lexeme, line=kw.line, col=kw.col)
        self.expect("{")
        while not self.at("}"):
            if self.at("property"):
                thing.properties.append(self.parse_property())
            elif self.at("message"):
                thing.messages.append(self.parse_message())
            elif self.at("provided") or self.at("required"):
                thing.ports.append(self.parse_port())
            elif self.at("data_analytics"):
                thing.analytics.append(self.parse_analytics())
            elif self.at("statechart"):
                thing.statechart = self.parse_statechart()
                break
            else:
                self.fail("a thing member (`property`, `message`, `provided`,"
                          " `required`, `data_analytics` or `statechart`)")
        if thing.statechart is None:
            self.fail("`statechart` (every thing needs one)")
        self.expect("}")
        return thing

    def parse_property(self) -> n.PropertyDef:
        kw = self.expect("property")
        name = self.expect_ident("a property name")
        self.expect(":")
        dtype = self.expect_dtype()
        initial = None
        if self.accept("="):
            initial = self.parse_literal()
        return n.PropertyDef(name.lexeme, dtype, initial,
                             line=kw.line, col=kw.col)

    def parse_literal(self) -> n.Literal:
        tok = self.cur
        negate = False
        if self.at("-"):
            self.advance()
            negate = True
        lit = self.cur
        if lit.kind is TokenKind.INT:
            self.advance()
            value: object = -int(lit.lexeme) if negate else int(lit.lexeme)
            return n.Literal(value, n.Dtype.INT, line=tok.line, col=tok.col)
        if lit.kind is TokenKind.REAL:
            self.advance()
            rvalue = -float(lit.lexeme) if negate else float(lit.lexeme)
            return n.Literal(rvalue, n.Dtype.REAL, line=tok.line, col=tok.col)
        if negate:
            self.fail("a numeric literal")
        if lit.kind is TokenKind.BOOL:
            self.advance()
            return n.Literal(lit.lexeme == "true", n.Dtype.BOOL,
                             line=tok.line, col=tok.col)
        if lit.kind is TokenKind.STRING:
            self.advance()
            return n.Literal(string_value(lit.lexeme), n.Dtype.STRING,
                             line=tok.line, col=tok.col)
        self.fail("a literal")

    def parse_message(self) -> n.MessageDef:
        kw = self.expect("message")
        name = self.expect_ident("a message name")
        msg = n.MessageDef(name.lexeme, line=kw.line, col=kw.col)
        self.expect("(")
        if not self.at(")"):
            while True:
                pname = self.expect_ident("a parameter name")
                self.expect(":")
                dtype = self.expect_dtype()
                msg.params.append(n.ParamDef(pname.lexeme, dtype,
                                             line=pname.line, col=pname.col))
                if not self.accept(","):
                    break
        self.expect(")")
        return msg

    def parse_port(self) -> n.PortDef:
        kw = self.advance()  # provided | required
        kind = (n.PortKind.PROVIDED if kw.lexeme == "provided"
                else n.PortKind.REQUIRED)
        self.expect("port")
        name = self.expect_ident("a port name")
        port = n.PortDef(name.lexeme, kind, line=kw.line, col=kw.col)
        self.expect("{")
        if self.accept("receives"):
            port.receives = self.parse_name_list()
        if self.accept("sends"):
            port.sends = self.parse_name_list()
        self.expect("}")
        return port

    def parse_name_list(self) -> list[n.Name]:
        names = [self.expect_name()]
        while self.accept(","):
            names.append(self.expect_name())
        return names

    def parse_analytics(self) -> n.DataAnalyticsDef:
        kw = self.expect("data_analytics")
        name = self.expect_ident("a data-analytics block name")
        da = n.DataAnalyticsDef(name.lexeme, line=kw.line, col=kw.col)
        self.expect("{")
        self.expect("dataset")
        da.dataset_path, _ = self.expect_string()
        self.expect("features")
        da.features = self.parse_name_list()
        self.expect("label")
        da.label = self.expect_name("a label column name")
        self.expect("model")
        if self.accept("linear_regression"):
            da.algorithm = n.LinearRegression(line=kw.line, col=kw.col)
        elif self.at("knn"):
            knn_tok = self.advance()
            self.expect("(")
            k, _ = self.expect_int()
            self.expect(")")
            da.algorithm = n.KnnRegression(k, line=knn_tok.line,
                                           col=knn_tok.col)
        else:
            self.fail("`linear_regression` or `knn`")
        self.expect("save_to")
        da.model_path, _ = self.expect_string()
        self.expect("}")
        return da

    def parse_statechart(self) -> n.StatechartDef:
        kw = self.expect("statechart")
        self.expect("init")
        initial = self.expect_name("the initial state name")
        chart = n.StatechartDef(initial, line=kw.line, col=kw.col)
        self.expect("{")
        while self.at("state"):
            chart.states.append(self.parse_state())
        if not chart.states:
            self.fail("`state` (a statechart needs at least one state)")
        self.expect("}")
        return chart

    def parse_state(self) -> n.StateDef:
        kw = self.expect("state")
        name = self.expect_ident("a state name")
        state = n.StateDef(name.lexeme, line=kw.line, col=kw.col)
        self.expect("{")
        if self.at("on"):
            save = self.pos
            self.advance()
            if self.accept("entry"):
                state.entry_actions = self.parse_action_block()
            else:
                self.pos = save
        if self.at("on"):
            self.advance()
            self.expect("exit")
            state.exit_actions = self.parse_action_block()
        while self.at("transition"):
            state.transitions.append(self.parse_transition())
        self.expect("}")
        return state

    def parse_action_block(self) -> list[n.Action]:
        self.expect("{")
        actions = []
        while not self.at("}"):
            actions.append(self.parse_action())
        self.expect("}")
        return actions

    def parse_transition(self) -> n.TransitionDef:
        kw = self.expect("transition")
        self.expect("->")
        target = self.expect_name("a target state name")
        self.expect("event")
        trigger = self.parse_trigger()
        tr = n.TransitionDef(target, trigger, line=kw.line, col=kw.col)
        if self.accept("guard"):
            tr.guard = self.parse_expr()
        if self.accept("action"):
            tr.actions = self.parse_action_block()
        return tr

    def parse_trigger(self) -> n.EventTrigger:
        if self.at("after"):
            kw = self.advance()
            self.expect("(")
            ticks, _ = self.expect_int()
            self.expect(")")
            return n.After(ticks, line=kw.line, col=kw.col)
        port = self.expect_name("a port name or `after`")
        self.expect("?")
        message = self.expect_name("a message name")
        return n.MessageOn(port, message, line=port.line, col=port.col)

    # -- actions -----------------------------------------------------------

    def parse_action(self) -> n.Action:
        tok = self.cur
        if self.at("print"):
            self.advance()
            return n.Print(self.parse_expr(), line=tok.line, col=tok.col)
        if self.at("var"):
            self.advance()
            name = self.expect_ident("a variable name")
            self.expect(":")
            dtype = self.expect_dtype()
            self.expect("=")
            return n.VarDecl(name.lexeme, dtype, self.parse_expr(),
                             line=tok.line, col=tok.col)
        if self.at("if"):
            self.advance()
            cond = self.parse_expr()
            self.expect("then")
            node = n.If(cond, line=tok.line, col=tok.col)
            while not (self.at("else") or self.at("end")):
                node.then_actions.append(self.parse_action())
            if self.accept("else"):
                while not self.at("end"):
                    node.else_actions.append(self.parse_action())
            self.expect("end")
            return node
        if self.at("da_train"):
            self.advance()
            return n.DaTrain(self.expect_name("a data-analytics block name"),
                             line=tok.line, col=tok.col)
        if self.at("da_save"):
            self.advance()
            return n.DaSave(self.expect_name("a data-analytics block name"),
                            line=tok.line, col=tok.col)
        if self.at("da_predict"):
            self.advance()
            da = self.expect_name("a data-analytics block name")
            self.expect("->")
            result = self.expect_name("a result target")
            self.expect("(")
            features = self.parse_expr_list()
            self.expect(")")
            return n.DaPredict(da, result, features,
                               line=tok.line, col=tok.col)
        if self.at("da_observe"):
            self.advance()
            da = self.expect_name("a data-analytics block name")
            self.expect("(")
            features = self.parse_expr_list()
            self.expect(";")
            label = self.parse_expr()
            self.expect(")")
            return n.DaObserve(da, features, label,
                               line=tok.line, col=tok.col)
        if self.cur.kind is TokenKind.IDENT:
            name = self.expect_name()
            if self.accept("="):
                return n.Assign(name, self.parse_expr(),
                                line=name.line, col=name.col)
            if self.accept("!"):
                message = self.expect_name("a message name")
                self.expect("(")
                args = [] if self.at(")") else self.parse_expr_list()
                self.expect(")")
                return n.Send(name, message, args,
                              line=name.line, col=name.col)
            self.fail("`=` (assignment) or `!` (send)")
        self.fail("an action (assignment, send, `" +
                  "`, `".join(_ACTION_STARTS) + "`)")

    def parse_expr_list(self) -> list[n.Expr]:
        exprs = [self.parse_expr()]
        while self.accept(","):
            exprs.append(self.parse_expr())
        return exprs

    # -- expressions (precedence climbing) ----------------------------------

    def parse_expr(self) -> n.Expr:
        return self.parse_or()

    def parse_or(self) -> n.Expr:
        left = self.parse_and()
        while self.at("or"):
            tok = self.advance()
            left = n.Binary("or", left, self.parse_and(),
                            line=tok.line, col=tok.col)
        return left

    def parse_and(self) -> n.Expr:
        left = self.parse_not()
        while self.at("and"):
            tok = self.advance()
            left = n.Binary("and", left, self.parse_not(),
                            line=tok.line, col=tok.col)
        return left

    def parse_not(self) -> n.Expr:
        if self.at("not"):
            tok = self.advance()
            return n.Unary("not", self.parse_not(), line=tok.line, col=tok.col)
        return self.parse_comparison()

    def parse_comparison(self) -> n.Expr:
        left = self.parse_additive()
        while self.cur.kind is TokenKind.OP and self.cur.lexeme in (
                "<", "<=", ">", ">=", "==", "!="):
            tok = self.advance()
            left = n.Binary(tok.lexeme, left, self.parse_additive(),
                            line=tok.line, col=tok.col)
        return left

    def parse_additive(self) -> n.Expr:
        left = self.parse_multiplicative()
        while self.cur.kind is TokenKind.OP and self.cur.lexeme in ("+", "-"):
            tok = self.advance()
            left = n.Binary(tok.lexeme, left, self.parse_multiplicative(),
                            line=tok.line, col=tok.col)
        return left

    def parse_multiplicative(self) -> n.Expr:
        left = self.parse_unary()
        while self.cur.kind is TokenKind.OP and self.cur.lexeme in ("*", "/"):
            tok = self.advance()
            left = n.Binary(tok.lexeme, left, self.parse_unary(),
                            line=tok.line, col=tok.col)
        return left

    def parse_unary(self) -> n.Expr:
        if self.at("-"):
            tok = self.advance()
            return n.Unary("-", self.parse_unary(), line=tok.line, col=tok.col)
        return self.parse_primary()

    def parse_primary(self) -> n.Expr:
        tok = self.cur
        if tok.kind in (TokenKind.INT, TokenKind.REAL, TokenKind.BOOL,
                        TokenKind.STRING):
            return self.parse_literal()
        if tok.kind is TokenKind.IDENT:
            self.advance()
            return n.NameRef(tok.lexeme, line=tok.line, col=tok.col)
        if self.accept("("):
            expr = self.parse_expr()
            self.expect(")")
            return expr
        self.fail("an expression")

    def parse_configuration(self) -> n.ConfigurationDef:
        kw = self.expect("configuration")
        name = self.expect_ident("a configuration name")
        config = n.ConfigurationDef(name.lexeme, line=kw.line, col=kw.col)
        self.expect("{")
        while self.at("instance"):
            ikw = self.advance()
            iname = self.expect_ident("an instance name")
            self.expect(":")
            thing = self.expect_name("a thing name")
            config.instances.append(n.InstanceDef(iname.lexeme, thing,
                                                  line=ikw.line, col=ikw.col))
        if not config.instances:
            self.fail("`instance` (a configuration needs at least one)")
        while self.at("connector"):
            ckw = self.advance()
            a = self.parse_connector_end()
            self.expect("<->")
            b = self.parse_connector_end()
            config.connectors.append(n.ConnectorDef(a, b, line=ckw.line,
                                                    col=ckw.col))
        self.expect("}")
        return config

    def parse_connector_end(self) -> n.ConnectorEnd:
        inst = self.expect_name("an instance name")
        self.expect(".")
        port = self.expect_name("a port name")
        return n.ConnectorEnd(inst, port, line=inst.line, col=inst.col)


def parse(source: str, source_name: str = "model") -> tuple[n.Model | None, list[Diagnostic]]:
    """Parse mlq source; returns (model, diagnostics).

    The model is None whenever any diagnostic was produced (lexical errors
    included); a successful parse returns an empty diagnostic list.
    """
    tokens, lex_diags = tokenize(source)
    if lex_diags:
        return None, lex_diags
    parser = _Parser(tokens, source_name)
    try:
        model = parser.parse_model()
    except _SyntaxError as err:
        parser.report(err)
        return None, parser.diags
    if parser.diags:
        return None, parser.diags
    return model, []
