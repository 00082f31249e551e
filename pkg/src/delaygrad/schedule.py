"""Stepsize schedules shared by the solvers and the bound formulas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INVERSE_SQRT = "inverse_sqrt"
CONSTANT = "constant"


@dataclass(frozen=True)
class StepsizeSchedule:
    """Non-increasing stepsize rule, usable at real or integer times.

    ``inverse_sqrt`` is 1 up to time 1 and 1/sqrt(t) after, which covers the
    discrete convention alpha(0) = 1, alpha(k) = 1/sqrt(k). The extension
    alpha(t) = 1 for t <= 1 also applies to negative arguments, as the bound
    integrands require.
    """

    rule: str = INVERSE_SQRT
    value: float = 1.0

    def __post_init__(self) -> None:
        if self.rule not in (INVERSE_SQRT, CONSTANT):
            raise ValueError(f"unknown schedule rule {self.rule!r}")
        if self.rule == CONSTANT and self.value <= 0:
            raise ValueError("constant stepsize must be > 0")

    @classmethod
    def inverse_sqrt(cls) -> "StepsizeSchedule":
        return cls(rule=INVERSE_SQRT)

    @classmethod
    def constant(cls, value: float) -> "StepsizeSchedule":
        return cls(rule=CONSTANT, value=value)

    def alpha(self, t: float) -> float:
        if self.rule == CONSTANT:
            return self.value
        return 1.0 if t <= 1.0 else 1.0 / float(np.sqrt(t))

    def alpha_array(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.rule == CONSTANT:
            return np.full_like(t, self.value)
        return np.where(t <= 1.0, 1.0, 1.0 / np.sqrt(np.maximum(t, 1.0)))

    def to_config(self) -> dict:
        if self.rule == CONSTANT:
            return {"rule": CONSTANT, "value": self.value}
        return {"rule": INVERSE_SQRT}

    @classmethod
    def from_config(cls, cfg: dict | str) -> "StepsizeSchedule":
        if isinstance(cfg, str):
            return cls(rule=cfg)
        return cls(rule=cfg.get("rule", INVERSE_SQRT), value=float(cfg.get("value", 1.0)))
