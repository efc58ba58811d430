"""Token counters.

The default scheme is deterministic and vocabulary-free: every maximal run of
letters, every maximal run of digits, and every other non-whitespace character
is one token.  External counters run a command that reads text on stdin and
prints an integer.
"""

from __future__ import annotations

import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Optional

_DEFAULT_RE = re.compile(r"[^\W\d_]+|\d+|\S")


class ExternalCounterFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class TokenCounter:
    scheme: str = "default_deterministic"
    command: Optional[str] = None
    timeout: float = 30.0

    @classmethod
    def from_spec(cls, spec: Optional[str]) -> "TokenCounter":
        """Parse a CLI ``--counter`` value: ``default`` or ``external:<cmd>``."""
        if not spec or spec == "default":
            return cls()
        if spec.startswith("external:"):
            command = spec[len("external:"):].strip()
            if not command:
                raise ValueError("external counter needs a command")
            return cls("external", command)
        raise ValueError(f"unknown counter {spec!r}")

    def count(self, text: str) -> int:
        if self.scheme == "default_deterministic":
            return len(_DEFAULT_RE.findall(text))
        if not text:
            return 0
        try:
            proc = subprocess.run(
                shlex.split(self.command or ""),
                input=text,
                capture_output=True,
                text=True,
                timeout=self.timeout,
                check=False,
            )
        except (OSError, subprocess.SubprocessError) as exc:
            raise ExternalCounterFailure(f"{self.command}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalCounterFailure(
                f"{self.command} exited {proc.returncode}: {proc.stderr.strip()}")
        try:
            value = int(proc.stdout.strip())
        except ValueError:
            raise ExternalCounterFailure(
                f"{self.command} printed {proc.stdout.strip()!r}, not an integer") from None
        if value < 0:
            raise ExternalCounterFailure(f"{self.command} returned negative count {value}")
        return value

    __call__ = count


DEFAULT_COUNTER = TokenCounter()


def count_tokens(text: str, counter: TokenCounter = DEFAULT_COUNTER) -> int:
    return counter.count(text)
