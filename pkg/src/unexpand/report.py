"""Dual-format reports (text + JSON section) and run manifests."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from . import __version__
from .util import RNG_NAME

REPORT_HEADER = "# unexpand report v1"
JSON_MARKER = "--- machine-readable ---"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    return obj


def render(title: str, lines: list[str], data: dict) -> str:
    body = [REPORT_HEADER, title, ""] + lines + ["", JSON_MARKER,
                                                 json.dumps(_plain(data), indent=2, sort_keys=True)]
    return "\n".join(body) + "\n"


def parse(text: str) -> dict:
    _, _, tail = text.partition(JSON_MARKER)
    return json.loads(tail)


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path) -> str:
    return digest_bytes(Path(path).read_bytes())


def manifest(command: str, params: dict, seed: int | None, inputs: dict[str, str],
             outputs: dict[str, str]) -> str:
    doc = {
        "command": command,
        "params": _plain(params),
        "seed": seed,
        "tool": f"unexpand {__version__}",
        "rng": RNG_NAME,
        "inputs": inputs,
        "outputs": outputs,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_with_manifest(path, text: str, command: str, params: dict, seed: int | None,
                        inputs: dict[str, str]) -> None:
    path = Path(path)
    data = text.encode()
    path.write_bytes(data)
    man = manifest(command, params, seed, inputs, {path.name: digest_bytes(data)})
    Path(str(path) + ".manifest.json").write_text(man)


def table(rows: list[list[str]], header: list[str]) -> list[str]:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header), fmt.format(*["-" * w for w in widths])]
    out += [fmt.format(*r) for r in cells[1:]]
    return [ln.rstrip() for ln in out]


def env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default
