import pytest

from conftest import CORPUS_DIR, FLAGSHIP, corpus_names, parse_corpus

from mlq import nodes as n
from mlq.parser import parse
from mlq.validator import (TypeMismatch, make_dataset_reader, type_of,
                           validate)

SCOPE = {"i": n.Dtype.INT, "r": n.Dtype.REAL, "b": n.Dtype.BOOL,
         "s": n.Dtype.STRING}


def expr(source: str) -> n.Expr:
    wrapper = f"""\
thing T {{
  property p : bool = false
  statechart init S {{
    state S {{
      transition -> S event after(1) guard {source}
    }}
  }}
}}
"""
    model, diags = parse(wrapper)
    assert model is not None, [d.render() for d in diags]
    return model.things[0].statechart.states[0].transitions[0].guard


def validate_src(source: str, with_reader: bool = False):
    model, diags = parse(source)
    assert model is not None, [d.render() for d in diags]
    reader = make_dataset_reader(CORPUS_DIR) if with_reader else None
    return validate(model, reader)


def codes(report):
    return [d.code for d in report.diagnostics]


class TestTypeOf:
    def test_int_arithmetic(self):
        assert type_of(expr("1 + 2"), {}) is n.Dtype.INT

    def test_division_is_real(self):
        assert type_of(expr("1 / 2"), {}) is n.Dtype.REAL

    def test_mixed_widens(self):
        assert type_of(expr("i + r"), SCOPE) is n.Dtype.REAL

    def test_comparison_is_bool(self):
        assert type_of(expr("i < r"), SCOPE) is n.Dtype.BOOL

    def test_equality_same_type(self):
        assert type_of(expr("s == s"), SCOPE) is n.Dtype.BOOL
        assert type_of(expr("b != b"), SCOPE) is n.Dtype.BOOL

    def test_bool_plus_int_raises(self):
        with pytest.raises(TypeMismatch):
            type_of(expr("true + 1"), SCOPE)

    def test_and_requires_bool(self):
        with pytest.raises(TypeMismatch):
            type_of(expr("1 and 2"), SCOPE)

    def test_not_requires_bool(self):
        with pytest.raises(TypeMismatch):
            type_of(expr("not 1"), SCOPE)

    def test_unary_minus_keeps_type(self):
        assert type_of(expr("-i"), SCOPE) is n.Dtype.INT
        assert type_of(expr("-r"), SCOPE) is n.Dtype.REAL


def test_flagship_valid_with_datasets():
    report = validate(parse_corpus(FLAGSHIP), make_dataset_reader(CORPUS_DIR))
    assert report.valid
    assert report.diagnostics == []


def test_whole_corpus_valid():
    reader = make_dataset_reader(CORPUS_DIR)
    for name in corpus_names():
        report = validate(parse_corpus(name), reader)
        assert report.valid, (name, [d.render() for d in report.diagnostics])


def test_report_is_deterministic():
    model = parse_corpus(FLAGSHIP)
    reader = make_dataset_reader(CORPUS_DIR)
    assert validate(model, reader).render() == validate(model, reader).render()


def test_widening_assignment_allowed():
    report = validate_src("""\
thing T {
  property r : real = 0.0
  statechart init S {
    state S {
      on entry {
        r = 1 + 2
      }
    }
  }
}
""")
    assert report.valid


def test_narrowing_assignment_rejected():
    report = validate_src("""\
thing T {
  property i : int = 0
  statechart init S {
    state S {
      on entry {
        i = 1.5
      }
    }
  }
}
""")
    assert codes(report) == ["VAL003"]


def test_initial_literal_must_match_exactly():
    report = validate_src("""\
thing T {
  property r : real = 1
  statechart init S { state S { } }
}
""")
    assert codes(report) == ["VAL003"]


def test_send_argument_type_checked():
    report = validate_src("""\
thing T {
  message m(a : int)
  required port p { sends m }
  statechart init S {
    state S {
      on entry {
        p!m(1.5)
      }
    }
  }
}
""")
    assert codes(report) == ["VAL004"]


def test_port_must_receive_triggering_message():
    report = validate_src("""\
thing T {
  message m()
  message other()
  provided port p { receives other }
  statechart init S {
    state S {
      transition -> S event p?m
    }
  }
}
""")
    assert codes(report) == ["VAL001"]


def test_assign_to_param_rejected():
    report = validate_src("""\
thing T {
  message m(a : int)
  provided port p { receives m }
  statechart init S {
    state S {
      transition -> S event p?m action {
        a = 3
      }
    }
  }
}
""")
    assert codes(report) == ["VAL003"]


def test_connector_param_signature_mismatch():
    report = validate_src("""\
thing A {
  message m(x : int)
  required port p { sends m }
  statechart init S { state S { } }
}
thing B {
  message m(x : real)
  provided port q { receives m }
  statechart init S { state S { } }
}
configuration C {
  instance a : A
  instance b : B
  connector a.p <-> b.q
}
""")
    assert codes(report) == ["VAL006"]


def test_prediction_target_must_be_real():
    report = validate_src("""\
thing T {
  property i : int = 0
  data_analytics d {
    dataset "data/line.csv"
    features x
    label y
    model linear_regression
    save_to "out.model"
  }
  statechart init S {
    state S {
      on entry {
        da_train d
        da_predict d -> i (1.0)
      }
    }
  }
}
""")
    assert codes(report) == ["VAL003"]


def test_observe_arity_checked():
    report = validate_src("""\
thing T {
  data_analytics d {
    dataset "data/line.csv"
    features x
    label y
    model linear_regression
    save_to "out.model"
  }
  statechart init S {
    state S {
      on entry {
        da_observe d (1.0, 2.0 ; 3.0)
      }
    }
  }
}
""")
    assert codes(report) == ["VAL009"]


def test_dataset_checks_skipped_without_reader():
    source = """\
thing T {
  data_analytics d {
    dataset "data/line.csv"
    features x, volt
    label y
    model linear_regression
    save_to "out.model"
  }
  statechart init S { state S { } }
}
"""
    assert validate_src(source).valid
    assert codes(validate_src(source, with_reader=True)) == ["VAL007"]


def test_missing_dataset_file_is_val007():
    report = validate_src("""\
thing T {
  data_analytics d {
    dataset "data/nonexistent.csv"
    features x
    label y
    model linear_regression
    save_to "out.model"
  }
  statechart init S { state S { } }
}
""", with_reader=True)
    assert codes(report) == ["VAL007"]


def test_warning_does_not_invalidate():
    report = validate_src("""\
thing T {
  statechart init S {
    state S { }
    state Orphan { }
  }
}
""")
    assert codes(report) == ["VAL005"]
    assert report.valid
