#!/usr/bin/env python3
"""Regenerate the synthetic power-load dataset shipped with the corpus.

200 rows, header `hour,temp,load`, where load = 3.0*hour + 0.5*temp + 10
exactly (no noise).  Hours cycle 0..23; temperatures step through multiples
of 0.5 degrees so every load value is exactly representable in binary
floating point.  The test suite asserts the shipped CSV matches this script's
output byte for byte.
"""

import os

ROWS = 200
OUT = os.path.join(os.path.dirname(__file__), "..", "src", "mlq", "corpus",
                   "data", "power_loads.csv")


def rows():
    for i in range(ROWS):
        hour = i % 24
        temp = 10.0 + (i * 3 % 31) * 0.5
        load = 3.0 * hour + 0.5 * temp + 10.0
        yield hour, temp, load


def render() -> str:
    lines = ["hour,temp,load"]
    for hour, temp, load in rows():
        lines.append(f"{hour},{temp!r},{load!r}")
    return "\n".join(lines) + "\n"


def main():
    path = os.path.normpath(OUT)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render())
    print(f"wrote {ROWS} rows to {path}")


if __name__ == "__main__":
    main()
