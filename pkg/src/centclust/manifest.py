"""Run manifests: a JSON record written next to every command output.

A manifest stores the subcommand, its full flag set, the seeds involved and
the input/output paths, which is enough to rerun the command and reproduce
the outputs byte for byte.  Writes go through a temporary file in the same
directory followed by an atomic rename.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

ARTIFACT_VERSION = "1"


@dataclass
class RunManifest:
    subcommand: str
    args: dict
    seeds: list
    inputs: list
    outputs: list
    wall_clock_seconds: float
    artifact_version: str = ARTIFACT_VERSION


def write_manifest(manifest: RunManifest, path) -> None:
    path = Path(path)
    blob = json.dumps(asdict(manifest), sort_keys=True, indent=2) + "\n"
    tmp = path.with_name(f".{path.name}.{os.getpid()}.part")
    tmp.write_text(blob)
    os.replace(tmp, path)


def load_manifest(path) -> RunManifest:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ValueError(f"{path}: not a run manifest ({err})") from None
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: not a run manifest (expected a JSON object)")
    names = [f.name for f in fields(RunManifest)]
    missing = [name for name in names if name not in payload]
    if missing:
        raise ValueError(f"{path}: manifest missing fields {', '.join(missing)}")
    return RunManifest(**{name: payload[name] for name in names})


def replay_manifest(path, output_dir=None) -> list:
    """Rerun the command a manifest describes, optionally redirecting its
    outputs into output_dir, and return the paths written."""
    from .cli import dispatch

    manifest = load_manifest(path)
    args = dict(manifest.args)
    if output_dir is not None:
        outdir = Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.get("out"):
            args["out"] = str(outdir / Path(args["out"]).name)
        if args.get("outdir"):
            args["outdir"] = str(outdir)
    result = dispatch(manifest.subcommand, args)
    return [Path(p) for p in result.outputs]
