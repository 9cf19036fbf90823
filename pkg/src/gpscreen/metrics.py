"""Regret accounting over a screening run.

One :class:`RunRecord` is written per tested molecule.  The regret of a
step is the gap to the best reward in the dataset (rewards are fixed per
molecule, so the gap is deterministic); the average regret is the mean gap
over the run and the simple regret is the gap of the best molecule found
anywhere in the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InputError


@dataclass(frozen=True)
class RunRecord:
    """One step of one replicate."""

    t: int
    arm_id: str
    y_observed: float
    r_star: float
    iregret: float
    running_aregret: float
    best_so_far: float


def instantaneous_regret(r_star: float, r: float) -> float:
    """Gap between the best attainable reward and the reward just observed."""
    return float(r_star) - float(r)


def average_regret(records: Sequence[RunRecord], T: int) -> float:
    """Mean instantaneous regret over a complete run of T steps."""
    if not records:
        raise InputError("no records")
    if len(records) != T:
        raise InputError(f"expected {T} records, got {len(records)}")
    return sum(r.iregret for r in records) / T


def simple_regret(records: Sequence[RunRecord]) -> float:
    """Regret of the best molecule found anywhere in the run.

    Equals ``r_star - max_t y_t``, i.e. the minimum instantaneous regret.
    """
    if not records:
        raise InputError("no records")
    r_star = records[0].r_star
    return r_star - max(r.y_observed for r in records)
