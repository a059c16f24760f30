from mlq.lexer import Token, TokenKind, quote_string, string_value, tokenize


def kinds(tokens):
    return [t.kind for t in tokens]


def lexemes(tokens):
    return [t.lexeme for t in tokens if t.kind is not TokenKind.EOF]


def test_minimal_thing():
    tokens, diags = tokenize("thing T {}")
    assert not diags
    assert lexemes(tokens) == ["thing", "T", "{", "}"]
    assert kinds(tokens)[:2] == [TokenKind.KEYWORD, TokenKind.IDENT]


def test_positions_are_one_based():
    tokens, _ = tokenize("thing T {\n  property x : int\n}")
    assert (tokens[0].line, tokens[0].col) == (1, 1)
    prop = next(t for t in tokens if t.lexeme == "property")
    assert (prop.line, prop.col) == (2, 3)


def test_unterminated_string():
    tokens, diags = tokenize('"abc')
    assert [d.code for d in diags] == ["LEX002"]
    assert (diags[0].line, diags[0].col) == (1, 1)


def test_unknown_character():
    _, diags = tokenize("thing @ T")
    assert [d.code for d in diags] == ["LEX001"]
    assert (diags[0].line, diags[0].col) == (1, 7)


def test_comments_skipped():
    tokens, diags = tokenize("// a comment\nthing // trailing\n")
    assert not diags
    assert lexemes(tokens) == ["thing"]


def test_numeric_literals():
    tokens, _ = tokenize("42 3.14 1e3 2.5e-4 7")
    assert kinds(tokens)[:-1] == [TokenKind.INT, TokenKind.REAL,
                                  TokenKind.REAL, TokenKind.REAL,
                                  TokenKind.INT]


def test_compound_operators_max_munch():
    tokens, _ = tokenize("<-> -> <= >= == != < >")
    assert lexemes(tokens) == ["<->", "->", "<=", ">=", "==", "!=", "<", ">"]


def test_bool_literals_classified():
    tokens, _ = tokenize("true false")
    assert kinds(tokens)[:-1] == [TokenKind.BOOL, TokenKind.BOOL]


def test_lexeme_concatenation_reconstructs_source():
    source = 'thing T {\n  property s : string = "a\\"b"\n}\n'
    tokens, diags = tokenize(source)
    assert not diags
    # splice lexemes back into the gaps they came from
    rebuilt = list(source)
    for token in tokens:
        if token.kind is TokenKind.EOF:
            continue
        offset = 0
        for line in source.split("\n")[:token.line - 1]:
            offset += len(line) + 1
        offset += token.col - 1
        assert source[offset:offset + len(token.lexeme)] == token.lexeme
    assert "".join(rebuilt) == source


def test_determinism():
    source = "thing T { statechart init S { state S { } } }"
    assert tokenize(source) == tokenize(source)


def test_string_escape_round_trip():
    for value in ["plain", 'quote " inside', "back\\slash", "tab\tand\nnl"]:
        assert string_value(quote_string(value)) == value


def test_diagnostic_cap():
    _, diags = tokenize("@" * 100)
    assert len(diags) == 20
