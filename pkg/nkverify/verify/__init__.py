from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

from nkverify.errors import UnknownCheckError

Suite = Literal["structure", "immersion"]
ToleranceKind = Literal["algebraic", "fd", "loose"]


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    suite: Suite
    func: Callable
    tolerance: ToleranceKind = "algebraic"
    requires_lagrangian: bool = True

    def tol(self, cfg) -> float:
        match self.tolerance:
            case "algebraic":
                return cfg.tol_algebraic
            case "fd":
                return cfg.tol_fd
            case "loose":
                return 10 * cfg.tol_fd


class CheckRegistry:
    """Verification checks by id, in registration order."""

    def __init__(self):
        self.checks: dict[str, Check] = {}

    def check(
        self,
        check_id: str,
        anchor: str,
        suite: Suite,
        tolerance: ToleranceKind = "algebraic",
        requires_lagrangian: bool = True,
    ):
        def decorator(func: Callable) -> Callable:
            if check_id in self.checks:
                raise ValueError(f"check {check_id} is already registered")
            self.checks[check_id] = Check(check_id, anchor, suite, func, tolerance, requires_lagrangian)
            return func

        return decorator

    def get(self, check_id: str) -> Check:
        if check_id not in self.checks:
            raise UnknownCheckError(check_id, self.ids())
        return self.checks[check_id]

    def ids(self, suite: Suite | None = None) -> list[str]:
        return [c.id for c in self.suite(suite)] if suite else list(self.checks)

    def suite(self, suite: Suite) -> list[Check]:
        return [c for c in self.checks.values() if c.suite == suite]


registry = CheckRegistry()
