import hashlib
import io
import os
import subprocess
import tempfile
import zipfile

import pytest

from conftest import CORPUS_DIR, FLAGSHIP, config_for, parse_corpus

from mlq import codegen, simulator
from mlq.engine import UnknownConfiguration
from mlq.parser import parse


def flagship_bundle():
    model = parse_corpus(FLAGSHIP)
    resolver = codegen.make_dataset_resolver(CORPUS_DIR)
    return codegen.generate(model, "Main", "self", resolver)


def test_bundle_structure():
    bundle = flagship_bundle()
    assert len(bundle.files) >= 4
    assert bundle.entrypoint == "build.sh"
    assert bundle.entrypoint in bundle.files
    assert "README.md" in bundle.files
    assert "manifest.txt" in bundle.files
    assert "src/main.py" in bundle.files
    assert "src/thing_SmartGrid.py" in bundle.files
    assert "src/thing_SmartHome.py" in bundle.files
    assert "data/power_loads.csv" in bundle.files


def test_manifest_covers_files_except_itself():
    bundle = flagship_bundle()
    listed = {path for path, _len, _sha in bundle.manifest}
    assert listed == set(bundle.files) - {"manifest.txt"}
    for path, length, digest in bundle.manifest:
        data = bundle.files[path]
        assert len(data) == length
        assert hashlib.sha256(data).hexdigest() == digest


def test_invalid_model_rejected():
    model, _ = parse("""\
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
configuration Main { instance t : T }
""")
    with pytest.raises(codegen.GenerationPreconditionFailed) as err:
        codegen.generate(model, "Main")
    assert any(d.code == "VAL003" for d in err.value.diagnostics)


def test_unknown_backend():
    model = parse_corpus(FLAGSHIP)
    with pytest.raises(codegen.UnknownBackend):
        codegen.generate(model, "Main", "cobol",
                         codegen.make_dataset_resolver(CORPUS_DIR))


def test_unknown_configuration():
    model = parse_corpus(FLAGSHIP)
    with pytest.raises(UnknownConfiguration):
        codegen.generate(model, "Missing",
                         dataset_resolver=codegen.make_dataset_resolver(CORPUS_DIR))


def test_generation_is_deterministic():
    first = flagship_bundle()
    second = flagship_bundle()
    assert first.manifest == second.manifest
    assert first.files == second.files
    assert codegen.zip_bundle(first) == codegen.zip_bundle(second)


def test_write_bundle_round_trip(tmp_path):
    bundle = flagship_bundle()
    out = tmp_path / "gen"
    codegen.write_bundle(bundle, str(out))
    for path, length, digest in bundle.manifest:
        data = (out / path).read_bytes()
        assert len(data) == length
        assert hashlib.sha256(data).hexdigest() == digest
    assert os.access(out / bundle.entrypoint, os.X_OK)


def test_write_bundle_collision(tmp_path):
    bundle = flagship_bundle()
    out = tmp_path / "gen"
    out.mkdir()
    (out / "README.md").write_text("already here")
    with pytest.raises(codegen.BundleIO) as err:
        codegen.write_bundle(bundle, str(out))
    assert "README.md" in str(err.value)


def test_zip_round_trip(tmp_path):
    bundle = flagship_bundle()
    blob = codegen.zip_bundle(bundle)
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        assert sorted(zf.namelist()) == sorted(bundle.files)
        for name in zf.namelist():
            assert zf.read(name) == bundle.files[name]


def test_generated_project_runs_standalone(tmp_path):
    bundle = flagship_bundle()
    out = tmp_path / "gen"
    codegen.write_bundle(bundle, str(out))
    proc = subprocess.run(["sh", "build.sh", "--ticks", "12"],
                          cwd=str(out), capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "DA_TRAIN\tpower rows=200" in proc.stdout


def test_missing_dataset_noted_in_readme():
    model = parse_corpus(FLAGSHIP)
    bundle = codegen.generate(model, "Main", "self",
                              dataset_resolver=lambda path: None)
    assert "data/power_loads.csv" not in bundle.files
    assert b"data/power_loads.csv" in bundle.files["README.md"]


def test_register_backend_rejects_duplicates():
    with pytest.raises(codegen.UnknownBackend):
        codegen.register_backend("self", lambda *a: {})


def test_differential_trace_equivalence(tmp_path):
    """The artifact's central property, model by model."""
    from conftest import corpus_names

    resolver = codegen.make_dataset_resolver(CORPUS_DIR)
    for name in corpus_names():
        model = parse_corpus(name)
        cfg = config_for(name)
        bundle = codegen.generate(model, cfg, "self", resolver)
        out = tmp_path / name
        codegen.write_bundle(bundle, str(out))
        proc = subprocess.run(
            ["sh", "build.sh", "--ticks", "20", "--trace", "trace.tsv"],
            cwd=str(out), capture_output=True, text=True)
        assert proc.returncode == 0, (name, proc.stderr)
        generated = (out / "trace.tsv").read_bytes()
        with tempfile.TemporaryDirectory() as wd:
            simulated = simulator.trace_text(
                simulator.run(model, cfg, 20, base_dir=CORPUS_DIR,
                              workdir=wd)).encode()
        assert generated == simulated, name
