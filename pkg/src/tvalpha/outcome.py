"""Result container shared by all six tests."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError

#: Canonical test names in reporting order.
TEST_NAMES = ("SUM", "MAX", "CC", "DSUM", "DMAX", "DCC")

#: Calibration kinds attached to outcomes.
CALIBRATIONS = ("analytic-normal", "gumbel", "bootstrap", "cauchy")


@dataclass(frozen=True)
class TestOutcome:
    """A named statistic with its p-value and the quantities it consumed."""

    name: str
    statistic: float
    p_value: float
    calibration: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in TEST_NAMES:
            raise DomainError(f"unknown test name {self.name!r}")
        if self.calibration not in CALIBRATIONS:
            raise DomainError(f"unknown calibration {self.calibration!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise DomainError(f"p-value {self.p_value} outside [0, 1]")

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level
