"""Run configuration: defaults, config file, command line, in that order."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import DocumentError


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, resolvable from defaults, file and flags.

    The effective values are embedded verbatim in output documents so a
    result can be reproduced from its own provenance block.
    """

    m: float = 1.0
    a: float = 1.5
    U: float = 1.0
    channel: str = "plus"
    gamma: int = 1
    index: int = 1
    n: int = 1
    depths: tuple[float, ...] = ()
    alpha_cap: float | None = None
    k_window: float | None = None
    step_initial: float = 0.01
    step_minimum: float = 1e-6
    step_maximum: float = 0.05
    closure_tol: float = 1e-6
    samples: int = 200
    seed: int = 20260816
    certify: bool = True
    out: str | None = None
    format: str = "json"
    svg: str | None = None

    def __post_init__(self):
        if self.m <= 0 or self.a <= 0:
            raise ValueError("mass and half width must be positive")
        if self.U < 0:
            raise ValueError("depth must be nonnegative")
        if self.channel not in ("plus", "minus"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.gamma not in (1, -1):
            raise ValueError("gamma selects a real coupling, +1 or -1")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")

    @property
    def alpha(self) -> float:
        return 0.0 if self.gamma == 1 else math.pi

    def to_dict(self) -> dict:
        # output sinks do not shape the computation; leaving them out keeps
        # the emitted document byte-identical wherever it is written
        d = asdict(self)
        d["depths"] = list(self.depths)
        del d["out"]
        del d["svg"]
        return d


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def load_config_file(path: str | Path) -> dict:
    """Read a JSON config file; only known keys are accepted."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DocumentError(f"config {path} must hold a JSON object")
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise DocumentError(
            f"config {path} has unknown keys: {', '.join(sorted(unknown))}"
        )
    if "depths" in data:
        if not isinstance(data["depths"], list):
            raise DocumentError("config key 'depths' must be a list")
        data["depths"] = tuple(data["depths"])
    return data


def merge_config(file_values: dict | None = None, cli_values: dict | None = None) -> RunConfig:
    """Layer config sources: defaults, then file, then explicit flags.

    cli_values entries of None mean the flag was not given.
    """
    merged: dict = {}
    for source in (file_values or {}, cli_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _FIELD_NAMES:
                raise DocumentError(f"unknown configuration key {key!r}")
            merged[key] = value
    if "depths" in merged:
        merged["depths"] = tuple(merged["depths"])
    return RunConfig(**merged)
