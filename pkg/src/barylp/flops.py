"""Lightweight floating-point operation accounting.

Kernels in this package optionally accept a :class:`FlopCounter` and charge
it for the arithmetic they perform (adds, subtracts, multiplies, divides and
max-style compares on array elements).  Plain assignments, copies and buffer
zeroing are not flops and are not counted.  The counter exists so that tests
can pin per-call operation budgets; passing ``None`` keeps the hot paths
free of bookkeeping.
"""

__all__ = ["FlopCounter"]


class FlopCounter:
    """Accumulates a flop count across instrumented kernel calls."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def add(self, n):
        self.count += int(n)

    def reset(self):
        self.count = 0

    def __repr__(self):
        return f"FlopCounter(count={self.count})"
