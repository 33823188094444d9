"""Validity reports shared by the machine and term checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class ValidityReport:
    ok: bool = True
    problems: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.ok = False
        self.problems.append(msg)

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else "\n".join(self.problems)
