from __future__ import annotations

import glob
import os

import pytest

from mlq.parser import parse

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "mlq",
                          "corpus")
CORPUS_DIR = os.path.normpath(CORPUS_DIR)
ERRORS_DIR = os.path.join(CORPUS_DIR, "errors")
GOLDEN_DIR = os.path.join(CORPUS_DIR, "golden")

#: configuration to run per corpus model (default "Main")
CONFIGS = {"ping-pong": "PingPong", "relay-chain": "Chain"}

FLAGSHIP = "smart-grid-imputation"


def corpus_paths() -> list[str]:
    return sorted(glob.glob(os.path.join(CORPUS_DIR, "*.mlq")))


def corpus_names() -> list[str]:
    return [os.path.splitext(os.path.basename(p))[0] for p in corpus_paths()]


def read_corpus(name: str) -> str:
    with open(os.path.join(CORPUS_DIR, name + ".mlq"), encoding="utf-8") as fh:
        return fh.read()


def parse_corpus(name: str):
    model, diags = parse(read_corpus(name), name)
    assert model is not None, [d.render() for d in diags]
    return model


def config_for(name: str) -> str:
    return CONFIGS.get(name, "Main")


@pytest.fixture
def corpus_dir() -> str:
    return CORPUS_DIR


@pytest.fixture
def flagship_model():
    return parse_corpus(FLAGSHIP)
