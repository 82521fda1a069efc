"""Peak-sharpness confidence and the high-confidence update gate.

The average-to-peak criterion measures how much the best response stands
out from the whole surface; it collapses when the target is occluded or
lost, long before the raw peak value does.  Model updates are allowed only
when both the peak value and the sharpness clear fixed fractions of their
historical running means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateResponseError


@dataclass(frozen=True)
class UpdateGateState:
    """Running history of peak values and sharpness since the first update."""

    count: int = 0
    mean_f_max: float = 0.0
    mean_apce: float = 0.0


def apce(response) -> float:
    """Average peak-to-correlation energy: |f_max - f_min|^2 / mean((F - f_min)^2).

    Scale-invariant and equal to the cell count for a one-hot impulse map.
    Raises for an exactly constant map, whose sharpness is undefined.
    """
    values = np.asarray(getattr(response, "values", response), dtype=np.float64)
    f_max = float(np.max(values))
    f_min = float(np.min(values))
    dev_sq = float(np.sum((values - f_min) ** 2))
    if dev_sq == 0.0:
        raise DegenerateResponseError("constant response map: peak sharpness undefined")
    peak = f_max - f_min
    # peak*peak/sum*size rather than peak**2/mean: a one-hot map then scores
    # exactly its cell count, with no intermediate division rounding
    return peak * peak / dev_sq * values.size


def should_update(gate: UpdateGateState, f_max: float, apce_value: float,
                  beta1: float, beta2: float) -> tuple[bool, UpdateGateState]:
    """Gate decision plus the advanced history state.

    The very first submission (frame 2 of a track) always passes, because
    there is no history yet.  Every finite submission is accumulated into
    the running means regardless of the decision; non-finite inputs fail
    the gate and leave the history untouched.
    """
    if not (math.isfinite(f_max) and math.isfinite(apce_value)):
        return False, gate
    if gate.count == 0:
        decision = True
    else:
        decision = (f_max >= beta1 * gate.mean_f_max
                    and apce_value >= beta2 * gate.mean_apce)
    count = gate.count + 1
    new_gate = UpdateGateState(
        count=count,
        mean_f_max=gate.mean_f_max + (f_max - gate.mean_f_max) / count,
        mean_apce=gate.mean_apce + (apce_value - gate.mean_apce) / count,
    )
    return decision, new_gate
