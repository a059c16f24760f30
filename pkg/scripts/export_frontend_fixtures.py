#!/usr/bin/env python3
"""Export real toolchain outputs as fixtures for the frontend test suite.

Produces, under frontend/tests/fixtures/:
  flagship.json        the flagship example entry {name, source}
  flagship-tokens.json the server lexer's tokens for the flagship source
                       (kind, lexeme, line, col) for highlighter cross-checks
  validate-ok.json     real /api/validate response for the flagship
  validate-val003.json real response for the flagship with a seeded type
                       error, plus the edit that produced it
  generated.zip        real zip from the CLI's generate path
  generated.json       its sha256 and filename metadata

Regenerate after changing the corpus, lexer, validator, or codegen.
"""

import hashlib
import json
import os
import sys

ROOT = os.path.normpath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, os.path.join(ROOT, "src"))

from mlq import codegen  # noqa: E402
from mlq.lexer import TokenKind, tokenize  # noqa: E402
from mlq.parser import parse  # noqa: E402
from mlq.validator import make_dataset_reader, validate  # noqa: E402

CORPUS = os.path.join(ROOT, "src", "mlq", "corpus")
OUT = os.path.join(ROOT, "frontend", "tests", "fixtures")
FLAGSHIP = "smart-grid-imputation"


def dump(name: str, payload) -> None:
    with open(os.path.join(OUT, name), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def diagnostics_json(diagnostics):
    return [{"severity": d.severity.value, "code": d.code,
             "message": d.message, "line": d.line, "col": d.col}
            for d in diagnostics]


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    source = open(os.path.join(CORPUS, FLAGSHIP + ".mlq"),
                  encoding="utf-8").read()
    dump("flagship.json", {"name": FLAGSHIP, "source": source})

    tokens, lex_diags = tokenize(source)
    assert not lex_diags
    dump("flagship-tokens.json", [
        {"kind": t.kind.value, "lexeme": t.lexeme, "line": t.line,
         "col": t.col}
        for t in tokens if t.kind is not TokenKind.EOF])

    reader = make_dataset_reader(CORPUS)
    model, _ = parse(source, FLAGSHIP)
    report = validate(model, reader)
    assert report.valid
    dump("validate-ok.json",
         {"valid": True, "diagnostics": diagnostics_json(report.diagnostics)})

    # seed one type error: assign a REAL into the INT `counter` property
    broken_line = "        counter = counter + 1"
    assert broken_line in source
    broken = source.replace(broken_line, "        counter = counter + 1.5")
    broken_model, _ = parse(broken, FLAGSHIP)
    broken_report = validate(broken_model, reader)
    assert not broken_report.valid
    diags = diagnostics_json(broken_report.diagnostics)
    assert [d["code"] for d in diags] == ["VAL003"]
    dump("validate-val003.json", {
        "edit": {"from": broken_line.strip(), "to": "counter = counter + 1.5"},
        "source": broken,
        "response": {"valid": False, "diagnostics": diags},
    })

    bundle = codegen.generate(model, "Main", "self",
                              codegen.make_dataset_resolver(CORPUS))
    blob = codegen.zip_bundle(bundle)
    with open(os.path.join(OUT, "generated.zip"), "wb") as fh:
        fh.write(blob)
    dump("generated.json", {
        "filename": f"{FLAGSHIP}-generated.zip",
        "sha256": hashlib.sha256(blob).hexdigest(),
        "bytes": len(blob),
    })
    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
