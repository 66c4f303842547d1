"""Node configuration: a flat ``key=value`` file inside the data directory.

The data directory itself is resolved outside the file — command-line flag
first, then the MEDALCHAIN_DATA_DIR environment variable, then a per-user
default — because the config file lives inside it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional

from .chain import MAX_DIFFICULTY
from .errors import DifficultyOutOfRange, KeyTooSmall, SchemaViolation
from .rsa import MIN_KEY_BITS

DATA_DIR_ENV = "MEDALCHAIN_DATA_DIR"
CONFIG_FILENAME = "node.conf"

DEFAULT_DIFFICULTY = 8
DEFAULT_QUORUM = 10
DEFAULT_THRESHOLD = Fraction(3, 5)
DEFAULT_KEY_BITS = 2048
DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8000

_KNOWN_KEYS = {"difficulty", "quorum", "threshold", "key_bits", "host", "port"}


def resolve_data_dir(cli_value: Optional[str] = None, env: Mapping[str, str] = os.environ) -> Path:
    if cli_value:
        return Path(cli_value)
    from_env = env.get(DATA_DIR_ENV)
    if from_env:
        return Path(from_env)
    return Path.home() / ".medalchain"


def parse_flat_config(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; comments (#) and blank lines are skipped."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaViolation(f"config line {lineno} is not key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise SchemaViolation(f"unknown config key {key!r} on line {lineno}")
        if key in values:
            raise SchemaViolation(f"duplicate config key {key!r} on line {lineno}")
        values[key] = value
    return values


def _parse_int(values: dict[str, str], key: str, default: int) -> int:
    if key not in values:
        return default
    try:
        return int(values[key])
    except ValueError:
        raise SchemaViolation(f"config key {key!r} must be an integer")


@dataclass(frozen=True)
class NodeConfig:
    difficulty: int = DEFAULT_DIFFICULTY
    quorum: int = DEFAULT_QUORUM
    threshold: Fraction = DEFAULT_THRESHOLD
    key_bits: int = DEFAULT_KEY_BITS
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT

    def __post_init__(self):
        if not isinstance(self.difficulty, int) or not 0 <= self.difficulty <= MAX_DIFFICULTY:
            raise DifficultyOutOfRange(
                f"difficulty must be an integer in [0, {MAX_DIFFICULTY}], got {self.difficulty!r}"
            )
        if not isinstance(self.quorum, int) or self.quorum < 1:
            raise SchemaViolation(f"quorum must be a positive integer, got {self.quorum!r}")
        if not isinstance(self.threshold, Fraction) or not 0 < self.threshold <= 1:
            raise SchemaViolation(
                f"threshold must satisfy 0 < T <= 1, got {self.threshold!r}"
            )
        if not isinstance(self.key_bits, int) or self.key_bits < MIN_KEY_BITS:
            raise KeyTooSmall(
                f"key_bits must be at least {MIN_KEY_BITS}, got {self.key_bits!r}"
            )
        if not isinstance(self.port, int) or not 1 <= self.port <= 65535:
            raise SchemaViolation(f"port must be in [1, 65535], got {self.port!r}")
        if not self.host:
            raise SchemaViolation("host must be non-empty")

    @classmethod
    def from_text(cls, text: str) -> "NodeConfig":
        values = parse_flat_config(text)
        threshold = DEFAULT_THRESHOLD
        if "threshold" in values:
            try:
                threshold = Fraction(values["threshold"])
            except (ValueError, ZeroDivisionError):
                raise SchemaViolation(
                    f"threshold must be a number or a ratio, got {values['threshold']!r}"
                )
        return cls(
            difficulty=_parse_int(values, "difficulty", DEFAULT_DIFFICULTY),
            quorum=_parse_int(values, "quorum", DEFAULT_QUORUM),
            threshold=threshold,
            key_bits=_parse_int(values, "key_bits", DEFAULT_KEY_BITS),
            host=values.get("host", DEFAULT_HOST),
            port=_parse_int(values, "port", DEFAULT_PORT),
        )

    @classmethod
    def from_file(cls, path: Path) -> "NodeConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def load(cls, data_dir: Path) -> "NodeConfig":
        path = Path(data_dir) / CONFIG_FILENAME
        if not path.exists():
            return cls()
        return cls.from_file(path)

    def to_text(self) -> str:
        lines = [
            "# medalchain node configuration",
            f"difficulty={self.difficulty}",
            f"quorum={self.quorum}",
            f"threshold={self.threshold.numerator}/{self.threshold.denominator}",
            f"key_bits={self.key_bits}",
            f"host={self.host}",
            f"port={self.port}",
        ]
        return "\n".join(lines) + "\n"

    def write(self, data_dir: Path) -> Path:
        path = Path(data_dir) / CONFIG_FILENAME
        path.write_text(self.to_text(), encoding="utf-8")
        return path
