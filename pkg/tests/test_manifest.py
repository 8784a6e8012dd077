import json

import pytest

from centclust.manifest import RunManifest, load_manifest, write_manifest


def test_roundtrip(tmp_path):
    m = RunManifest(
        subcommand="simulate",
        args={"n": 10, "sigma": 0.5, "out": str(tmp_path / "d.csv")},
        seeds=[7],
        inputs=[],
        outputs=[str(tmp_path / "d.csv")],
        wall_clock_seconds=0.123,
    )
    path = tmp_path / "m.json"
    write_manifest(m, path)
    back = load_manifest(path)
    assert back == m
    assert back.artifact_version == m.artifact_version


def test_written_json_is_sorted_and_versioned(tmp_path):
    m = RunManifest(subcommand="metric", args={"b": "x", "a": "y"}, seeds=[],
                    inputs=["y", "x"], outputs=["z"], wall_clock_seconds=1.0)
    path = tmp_path / "m.json"
    write_manifest(m, path)
    payload = json.loads(path.read_text())
    assert payload["artifact_version"]
    assert list(payload) == sorted(payload)
    assert not list(tmp_path.glob("*.tmp*"))


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{}")
    with pytest.raises(ValueError):
        load_manifest(path)
    path.write_text("not json")
    with pytest.raises(ValueError):
        load_manifest(path)
