"""Run configuration shared by the commands, validated before any work starts."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InvalidInput
from ..generators import specs as S

CHECKPOINT_ENV = "LOCALBENFORD_CHECKPOINT_DIR"
DIGITS_CAP = 10**6
FORMATS = ("plain", "csv", "json")

_POWER = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*$")


def parse_count(text, what: str = "N") -> int:
    """Positive integer from ``1000``, ``1e6`` or ``10^6``."""
    if isinstance(text, int):
        value = text
    else:
        s = str(text).strip()
        m = _POWER.match(s)
        try:
            if m:
                value = int(m.group(1)) ** int(m.group(2))
            else:
                q = Fraction(s)
                if q.denominator != 1:
                    raise ValueError
                value = int(q)
        except (ValueError, ZeroDivisionError):
            raise InvalidInput(f"{what} must be a positive integer (e.g. 1e6), got {text!r}") from None
    if value < 1:
        raise InvalidInput(f"{what} must be a positive integer, got {text!r}")
    return value


def parse_t(text: str) -> tuple:
    """Comma-separated integer weight vector, not all zero."""
    try:
        t = tuple(int(p) for p in str(text).replace(" ", "").split(",") if p != "")
    except ValueError:
        raise InvalidInput(f"t must be comma-separated integers, got {text!r}") from None
    if not t:
        raise InvalidInput("t must not be empty")
    if not any(t):
        raise InvalidInput("t must not be the zero vector")
    return t


def default_checkpoint_dir():
    return os.environ.get(CHECKPOINT_ENV) or None


@dataclass(frozen=True)
class RunConfig:
    seq: str | None = None          # canonical spec text
    base: int = 10
    N: int = 10**6
    k: int | None = None
    k_max: int | None = None
    t: tuple | None = None
    frac_bits: int = 128
    escalate_bits: int = 4096
    max_bits: int | None = None
    fmt: str = "plain"
    output: str | None = None
    workers: int = 1
    checkpoint_dir: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def spec(self):
        return S.parse(self.seq) if self.seq is not None else None

    def options(self) -> dict:
        opts = {"escalate_bits": self.escalate_bits}
        if self.max_bits is not None:
            opts["max_bits"] = self.max_bits
        return opts


def make_config(seq=None, base=10, N=None, fmt="plain", workers=1, checkpoint_dir=None,
                frac_bits=128, escalate_bits=4096, max_bits=None, **extra) -> RunConfig:
    """Validate every flag and canonicalise the spec text."""
    if not isinstance(base, int) or base < 2:
        raise InvalidInput("base must be an integer >= 2")
    if fmt not in FORMATS:
        raise InvalidInput(f"format must be one of {FORMATS}")
    if not isinstance(workers, int) or workers < 1:
        raise InvalidInput("workers must be a positive integer")
    if frac_bits != 128:
        raise InvalidInput("only 128 fractional bits are supported for emitted values")
    if escalate_bits < 256:
        raise InvalidInput("escalation ceiling must be at least 256 bits")
    canonical = S.render(S.parse(seq)) if seq is not None else None
    n = parse_count(N) if N is not None else 10**6
    k = extra.pop("k", None)
    k_max = extra.pop("k_max", None)
    t = extra.pop("t", None)
    for name, v in (("k", k), ("k_max", k_max)):
        if v is not None and (not isinstance(v, int) or v < 1):
            raise InvalidInput(f"{name} must be a positive integer")
    return RunConfig(canonical, base, n, k, k_max, t, frac_bits, escalate_bits, max_bits, fmt,
                     extra.pop("output", None), workers,
                     checkpoint_dir if checkpoint_dir is not None else default_checkpoint_dir(), extra)
