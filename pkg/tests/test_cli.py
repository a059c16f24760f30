import io
import os

from conftest import CORPUS_DIR, FLAGSHIP, GOLDEN_DIR

from mlq.cli import cli_main

FLAGSHIP_PATH = os.path.join(CORPUS_DIR, FLAGSHIP + ".mlq")


def run_cli(*argv):
    out = io.StringIO()
    code = cli_main(list(argv), out=out)
    return code, out.getvalue()


def test_validate_flagship_exits_zero():
    code, output = run_cli("validate", FLAGSHIP_PATH)
    assert code == 0
    assert output == ""


def test_validate_broken_model(tmp_path):
    path = tmp_path / "broken.mlq"
    path.write_text("""\
thing T {
  property flag : bool = false
  statechart init S {
    state S {
      on entry {
        flag = 1
      }
    }
  }
}
""")
    code, output = run_cli("validate", str(path))
    assert code == 1
    assert "VAL003" in output
    # normative line format: SEVERITY CODE line:col message
    first = output.splitlines()[0]
    assert first.startswith("ERROR VAL003 6:9 ")


def test_validate_missing_file_is_io_error():
    code, _ = run_cli("validate", "/nonexistent/model.mlq")
    assert code == 3


def test_usage_error_exit_code():
    code, _ = run_cli("simulate", FLAGSHIP_PATH)  # missing --config/--ticks
    assert code == 2


def test_simulate_matches_golden(tmp_path):
    trace_path = tmp_path / "t.tsv"
    code, _ = run_cli("simulate", FLAGSHIP_PATH, "--config", "Main",
                      "--ticks", "30", "--trace", str(trace_path))
    assert code == 0
    golden = open(os.path.join(GOLDEN_DIR, FLAGSHIP + ".t30.tsv"),
                  "rb").read()
    assert trace_path.read_bytes() == golden


def test_simulate_unknown_config():
    code, _ = run_cli("simulate", FLAGSHIP_PATH, "--config", "Nope",
                      "--ticks", "5")
    assert code == 1


def test_simulate_to_stdout():
    code, output = run_cli("simulate", FLAGSHIP_PATH, "--config", "Main",
                           "--ticks", "2")
    assert code == 0
    assert output.startswith("0\tgrid\tSTATE_ENTER\tBoot\n")


def test_generate_writes_bundle(tmp_path):
    out_dir = tmp_path / "proj"
    code, output = run_cli("generate", FLAGSHIP_PATH, "--config", "Main",
                           "--out", str(out_dir))
    assert code == 0
    assert (out_dir / "build.sh").exists()
    assert (out_dir / "manifest.txt").exists()
    assert "generated" in output


def test_generate_collision_is_io_error(tmp_path):
    out_dir = tmp_path / "proj"
    run_cli("generate", FLAGSHIP_PATH, "--config", "Main", "--out",
            str(out_dir))
    code, _ = run_cli("generate", FLAGSHIP_PATH, "--config", "Main",
                      "--out", str(out_dir))
    assert code == 3


def test_fmt_in_place_idempotent(tmp_path):
    path = tmp_path / "m.mlq"
    path.write_text("thing   T {\n statechart init S {    state S {}}}\n")
    code, _ = run_cli("fmt", str(path))
    assert code == 0
    formatted = path.read_text()
    assert formatted == ("thing T {\n  statechart init S {\n    state S {\n"
                         "    }\n  }\n}\n")
    code, _ = run_cli("fmt", str(path))
    assert code == 0
    assert path.read_text() == formatted


def test_fmt_invalid_source(tmp_path):
    path = tmp_path / "m.mlq"
    path.write_text("thing {")
    original = path.read_text()
    code, output = run_cli("fmt", str(path))
    assert code == 1
    assert "SYN001" in output
    assert path.read_text() == original  # untouched on failure
