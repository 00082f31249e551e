"""Fixed-lag history storage for delayed state reads.

A ring buffer holds the last ``lag_steps + 1`` pushed snapshots. Reads that
reach back before the first push return the constant pre-history fill, so a
fresh buffer behaves like a trajectory that sat at its initial state for all
earlier times.
"""

from __future__ import annotations

import numpy as np


class LagOutOfRange(Exception):
    """Requested lag exceeds the buffer's configured maximum."""


class DimensionMismatch(ValueError):
    """Pushed state does not match the buffer's snapshot shape."""


class DelayBuffer:
    """Ring buffer over state snapshots with constant pre-history."""

    def __init__(self, lag_steps: int, initial_fill: np.ndarray):
        if lag_steps < 0:
            raise ValueError("lag_steps must be >= 0")
        self._lag_steps = lag_steps
        self._fill = np.array(initial_fill, dtype=float, copy=True)
        self._slots: list[np.ndarray | None] = [None] * (lag_steps + 1)
        self._head = -1
        self._pushes = 0

    @property
    def lag_steps(self) -> int:
        return self._lag_steps

    @property
    def capacity(self) -> int:
        return self._lag_steps + 1

    @property
    def pushes(self) -> int:
        return self._pushes

    def push(self, state: np.ndarray) -> None:
        """Record ``state`` as the new lag-0 snapshot."""
        state = np.asarray(state, dtype=float)
        if state.shape != self._fill.shape:
            raise DimensionMismatch(
                f"expected shape {self._fill.shape}, got {state.shape}")
        self._head = (self._head + 1) % self.capacity
        self._slots[self._head] = state.copy()
        self._pushes += 1

    def delayed(self, lag: int) -> np.ndarray:
        """State pushed ``lag`` pushes ago; the initial fill if that predates
        the first push. Always returns a copy."""
        if not 0 <= lag <= self._lag_steps:
            raise LagOutOfRange(f"lag {lag} outside [0, {self._lag_steps}]")
        if self._pushes <= lag:
            return self._fill.copy()
        slot = self._slots[(self._head - lag) % self.capacity]
        assert slot is not None
        return slot.copy()
