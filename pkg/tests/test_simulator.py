import re
import tempfile

import pytest

from conftest import (CORPUS_DIR, FLAGSHIP, config_for, corpus_names,
                      parse_corpus)
from fuzz_models import generate_model_source

from mlq import ml, simulator
from mlq.engine import UnknownConfiguration
from mlq.parser import parse
from mlq.validator import make_dataset_reader, validate


def run_corpus(name: str, ticks: int):
    model = parse_corpus(name)
    with tempfile.TemporaryDirectory() as wd:
        return simulator.run(model, config_for(name), ticks,
                             base_dir=CORPUS_DIR, workdir=wd)


def run_src(source: str, config: str, ticks: int, workdir: str = "."):
    model, diags = parse(source)
    assert model is not None, [d.render() for d in diags]
    return simulator.run(model, config, ticks, workdir=workdir)


SINGLE_AFTER = """\
thing T {
  statechart init S0 {
    state S0 {
      transition -> S1 event after(1)
    }
    state S1 {
    }
  }
}
configuration Main {
  instance t : T
}
"""


def test_after_fires_during_its_tick():
    events = run_src(SINGLE_AFTER, "Main", 5)
    enters = [(e.tick, e.detail) for e in events if e.kind == "STATE_ENTER"]
    assert enters == [(0, "S0"), (1, "S1")]


def test_instantiate_initial_state():
    model = parse_corpus(FLAGSHIP)
    sim = simulator.instantiate(model, "Main", base_dir=CORPUS_DIR)
    assert sim.tick == 0
    assert [i.name for i in sim.instances] == ["grid", "home"]
    assert sim.instances[0].current_state == "Boot"
    assert sim.instances[0].props == {"hour": 0, "temp": 10.0, "total": 0.0,
                                      "imputed": 0.0}
    assert sim.events == []  # entry actions run on the first step


def test_unknown_configuration():
    model = parse_corpus(FLAGSHIP)
    with pytest.raises(UnknownConfiguration):
        simulator.instantiate(model, "nope")


def test_step_returns_new_events():
    model = parse_corpus(FLAGSHIP)
    with tempfile.TemporaryDirectory() as wd:
        sim = simulator.instantiate(model, "Main", base_dir=CORPUS_DIR,
                                    workdir=wd)
        _, first = simulator.step(sim)
        assert [e.kind for e in first] == ["STATE_ENTER", "DA_TRAIN",
                                           "DA_SAVE", "STATE_ENTER"]
        _, second = simulator.step(sim)
        assert [e.kind for e in second] == ["STATE_ENTER"]
        assert sim.tick == 2


def test_send_delivered_next_tick():
    source = """\
thing A {
  message m(v : int)
  required port out { sends m }
  statechart init S {
    state S {
      transition -> Done event after(2) action {
        out!m(1)
      }
    }
    state Done { }
  }
}
thing B {
  message m(v : int)
  provided port inp { receives m }
  statechart init W {
    state W {
      transition -> W event inp?m action {
        print v
      }
    }
  }
}
configuration Main {
  instance a : A
  instance b : B
  connector a.out <-> b.inp
}
"""
    events = run_src(source, "Main", 10)
    send_tick = next(e.tick for e in events if e.kind == "SEND")
    recv_tick = next(e.tick for e in events if e.kind == "RECEIVE")
    assert (send_tick, recv_tick) == (2, 3)


def test_no_transitions_quiesces_after_tick_zero():
    events = run_corpus("quiescent-minimal", 100)
    assert [(e.tick, e.kind) for e in events] == [(0, "STATE_ENTER"),
                                                  (0, "PRINT")]


def test_ping_pong_hand_simulated_ten_ticks():
    events = run_corpus("ping-pong", 10)
    expected = [(0, "a", "STATE_ENTER", "Boot"),
                (0, "a", "SEND", "out!ping(0)"),
                (0, "b", "STATE_ENTER", "Run")]
    for k in range(5):
        odd = 2 * k + 1
        expected += [(odd, "b", "RECEIVE", f"io?ping({k})"),
                     (odd, "b", "SEND", f"io!pong({k})"),
                     (odd, "b", "STATE_ENTER", "Run")]
        even = 2 * k + 2
        if even < 10:
            expected += [(even, "a", "RECEIVE", f"out?pong({k})"),
                         (even, "a", "SEND", f"out!ping({k + 1})"),
                         (even, "a", "STATE_ENTER", "Run")]
    got = [(e.tick, e.instance, e.kind, e.detail) for e in events]
    assert got == expected
    assert max(e.tick for e in events) == 9  # exactly 10 ticks ran


def test_unmatched_event_dropped_without_trace():
    events = run_corpus("guard-priority", 10)
    receives = [e.detail for e in events if e.kind == "RECEIVE"]
    assert receives == ["inlet?value(5)", "inlet?value(50)"]
    prints = [e.detail for e in events if e.kind == "PRINT"]
    assert prints == ["low", "high"]


def test_run_to_completion_contiguity():
    source = """\
thing Pair {
  statechart init S {
    state S {
      transition -> S event after(1) action {
        print "first"
        print "second"
      }
    }
  }
}
configuration Main {
  instance x : Pair
  instance y : Pair
}
"""
    events = run_src(source, "Main", 4)
    prints = [(e.instance, e.detail) for e in events if e.kind == "PRINT"]
    for i in range(0, len(prints), 2):
        assert prints[i][0] == prints[i + 1][0]
        assert (prints[i][1], prints[i + 1][1]) == ("first", "second")


def test_determinism_byte_identical():
    for name in corpus_names():
        first = simulator.trace_text(run_corpus(name, 20))
        second = simulator.trace_text(run_corpus(name, 20))
        assert first == second, name


def test_trace_format():
    events = run_corpus("echo-types", 10)
    lines = simulator.trace_text(events).splitlines()
    for line in lines:
        tick, instance, kind, detail = line.split("\t")
        assert tick.isdigit()
    prints = [e.detail for e in events if e.kind == "PRINT"]
    assert prints == ["hello", "true", "42", "2.500000",
                      "bye", "false", "7", "0.333333"]


def test_causality_every_receive_has_prior_send():
    for name in ("ping-pong", "relay-chain", FLAGSHIP):
        events = run_corpus(name, 25)
        sends = {}
        for e in events:
            if e.kind == "SEND":
                payload = e.detail.split("!", 1)[1]
                sends.setdefault(payload, []).append(e.tick)
        for e in events:
            if e.kind == "RECEIVE":
                payload = e.detail.split("?", 1)[1]
                # the receiving port differs; match on message(args)
                assert any(t < e.tick for t in sends.get(payload, [])), e


def test_conservation_of_messages():
    for name in corpus_names():
        events = run_corpus(name, 25)
        sent = sum(1 for e in events if e.kind == "SEND")
        received = sum(1 for e in events if e.kind == "RECEIVE")
        assert sent >= received, name
    # fully-bound models that quiesce without dropping events balance out
    for name in ("relay-chain", "echo-types"):
        events = run_corpus(name, 100)
        sent = sum(1 for e in events if e.kind == "SEND")
        received = sum(1 for e in events if e.kind == "RECEIVE")
        assert sent == received, name


def test_self_transition_resets_timer():
    source = """\
thing T {
  property c : int = 0
  statechart init S {
    state S {
      transition -> S event after(2) action {
        c = c + 1
        print c
      }
    }
  }
}
configuration Main { instance t : T }
"""
    events = run_src(source, "Main", 9)
    prints = [(e.tick, e.detail) for e in events if e.kind == "PRINT"]
    assert prints == [(2, "1"), (4, "2"), (6, "3"), (8, "4")]


def test_unbound_port_send_traced_but_undelivered():
    source = """\
thing T {
  message m()
  required port out { sends m }
  statechart init S {
    state S {
      transition -> Done event after(1) action {
        out!m()
      }
    }
    state Done { }
  }
}
configuration Main { instance t : T }
"""
    events = run_src(source, "Main", 10)
    assert sum(1 for e in events if e.kind == "SEND") == 1
    assert sum(1 for e in events if e.kind == "RECEIVE") == 0


def test_da_predict_trace_matches_runtime(tmp_path):
    events = run_corpus(FLAGSHIP, 50)
    pattern = re.compile(r"^power\(([^,]+),([^)]+)\) -> (.+)$")
    config = ml.DaConfig(
        name="power",
        dataset_path=f"{CORPUS_DIR}/data/power_loads.csv",
        feature_names=["hour", "temp"], label_name="load",
        algorithm=ml.LINEAR_REGRESSION)
    dataset = ml.load_dataset(config.dataset_path, ["hour", "temp", "load"])
    model = ml.train(config, dataset)
    checked = 0
    for e in events:
        if e.kind != "DA_PREDICT":
            continue
        h, t, y = pattern.match(e.detail).groups()
        prediction = ml.predict(model, [float(h), float(t)])
        assert f"{prediction:.6f}" == y
        checked += 1
    assert checked >= 5


def test_fuzzed_valid_models_simulate_without_faults():
    for seed in range(40):
        source = generate_model_source(seed)
        model, diags = parse(source)
        assert model is not None, (seed, [d.render() for d in diags], source)
        report = validate(model, make_dataset_reader(CORPUS_DIR))
        assert report.valid, (seed, [d.render() for d in
                                     report.diagnostics], source)
        events = simulator.run(model, "Main", 15)
        again = simulator.run(model, "Main", 15)
        assert simulator.trace_text(events) == simulator.trace_text(again)
