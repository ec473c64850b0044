"""File formats: JSON for maps, sequence specifications and solver results;
deterministic CSV (with a reproducibility header block) for tabular output.

CSV floats are written with 17 significant digits so values round-trip
bit-exactly; no timestamps are ever written, making reruns byte-identical.
"""

from __future__ import annotations

import hashlib
import json

from .errors import DomainError
from .iteration import (
    MapSequence,
    explicit_sequence,
    moebius_family,
    rotation_family,
    squaring_family,
    tangential_family,
)
from .products import FiniteBlaschke


def blaschke_to_json(B: FiniteBlaschke) -> str:
    return json.dumps(B.to_dict(), sort_keys=True)


def blaschke_from_json(text: str) -> FiniteBlaschke:
    return FiniteBlaschke.from_dict(json.loads(text))


def sequence_from_spec(spec: dict) -> MapSequence:
    """Build a map sequence from a named-family specification block.

    Families: squaring; tangential (rate); rotation (angle); moebius (w as
    [re, im]); explicit (maps as a list of FiniteBlaschke dicts).
    """
    spec = dict(spec)
    family = spec.pop("family", None)
    if family == "squaring":
        _reject_extras(spec, ())
        return squaring_family()
    if family == "tangential":
        rate = spec.pop("rate", 2.0)
        _reject_extras(spec, ())
        return tangential_family(float(rate))
    if family == "rotation":
        angle = spec.pop("angle", 1.0)
        _reject_extras(spec, ())
        return rotation_family(float(angle))
    if family == "moebius":
        w = spec.pop("w", None)
        _reject_extras(spec, ())
        if w is None:
            raise DomainError("moebius family needs 'w': [re, im]")
        return moebius_family(complex(w[0], w[1]))
    if family == "explicit":
        maps = spec.pop("maps", None)
        _reject_extras(spec, ())
        if not maps:
            raise DomainError("explicit family needs a nonempty 'maps' list")
        return explicit_sequence([FiniteBlaschke.from_dict(m) for m in maps])
    raise DomainError(f"unknown sequence family: {family!r}")


def _reject_extras(block: dict, allowed) -> None:
    extras = set(block) - set(allowed)
    if extras:
        raise DomainError(f"unknown keys: {sorted(extras)}")


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(path, columns, rows, meta: dict) -> None:
    """Write a CSV table preceded by '#'-prefixed reproducibility header
    lines (tool version, config hash, seed -- never a timestamp)."""
    lines = [f"# {key}={meta[key]}" for key in sorted(meta)]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
