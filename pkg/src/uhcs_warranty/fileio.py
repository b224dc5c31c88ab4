"""File formats: failure-time lists, censored samples, atomic writes."""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .censoring import CensoredSample, UhcsScheme
from .errors import ValidationError

BUILTIN_PREFIX = "builtin:"
BUILTIN_DATASETS = {"boeing_aircon": "boeing_aircon.txt"}


def resolve_data_path(spec: str, base_dir: Path | None = None) -> str:
    """Normalise a data reference and check that it exists."""
    if spec.startswith(BUILTIN_PREFIX):
        if spec[len(BUILTIN_PREFIX):] not in BUILTIN_DATASETS:
            raise ValidationError(f"unknown builtin dataset {spec!r}")
        return spec
    path = Path(spec)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if not path.is_file():
        raise FileNotFoundError(f"data file not found: {path}")
    return str(path.resolve())


def read_text(spec: str) -> str:
    if spec.startswith(BUILTIN_PREFIX):
        name = BUILTIN_DATASETS.get(spec[len(BUILTIN_PREFIX):])
        if name is None:
            raise ValidationError(f"unknown builtin dataset {spec!r}")
        return resources.files("uhcs_warranty.data").joinpath(name).read_text()
    return Path(spec).read_text()


def parse_times(text: str) -> np.ndarray:
    """One decimal failure time per line; blank lines and ``#`` comments skipped."""
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: not a number: {line!r}") from exc
    return np.array(values, dtype=float)


def read_times(spec: str) -> np.ndarray:
    return parse_times(read_text(spec))


def load_boeing() -> np.ndarray:
    """The 30 ordered air-conditioner failure intervals (hours)."""
    return read_times(BUILTIN_PREFIX + "boeing_aircon")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def censored_to_dict(sample: CensoredSample) -> dict:
    s = sample.scheme
    return {
        "case": sample.case_label,
        "d": sample.d,
        "xi": sample.xi,
        "times": list(sample.times),
        "scheme": {"n": s.n, "l": s.l, "r": s.r, "T1": s.T1, "T2": s.T2},
    }


def censored_from_dict(raw: dict) -> CensoredSample:
    try:
        sample = CensoredSample(
            times=tuple(float(t) for t in raw["times"]),
            xi=float(raw["xi"]),
            case_label=raw["case"],
            scheme=UhcsScheme(**raw["scheme"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed censored-sample file: {exc}") from exc
    if "d" in raw and int(raw["d"]) != sample.d:
        raise ValidationError("censored-sample file: d disagrees with the number of times")
    return sample


def tsv(header, rows) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
