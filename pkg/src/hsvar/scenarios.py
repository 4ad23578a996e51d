"""Simulated three-variable designs mirroring the oil-market model variants.

m1: distinct variance shifts, no restrictions (point identification).
m2: shocks 1 and 2 share a variance shift; sign pattern of the oil preset.
m3: same pooling as m2 with a single impact zero instead of signs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .restrictions import TABLE2_OIL_TEXT
from .simulate import HsvarTruth

NAMES = ("prod", "rea", "rpo")

_B = np.array(
    [
        [0.0, 0.30, 0.00, 0.00],
        [0.0, 0.00, 0.50, 0.00],
        [0.0, 0.00, 0.05, 0.85],
    ]
)

_C_M1 = np.array([[1.0, 0.3, 0.1], [0.3, 1.0, -0.2], [-0.5, 0.4, 1.0]])
# columns: supply (prod -, rea -, rpo +), aggregate demand (all +), oil-specific demand
_C_M2 = np.array([[-1.0, 0.3, 0.1], [-0.3, 1.0, -0.2], [0.5, 0.4, 1.0]])
_C_M3 = np.array([[-1.0, 0.3, 0.1], [0.0, 1.0, -0.2], [0.5, 0.4, 1.0]])

M3_TEXT = """\
shocks 2 3 1
pool 2..3
normalize C - + +
interest 1
zero A0inv 2 1
"""


@dataclass(frozen=True)
class Scenario:
    name: str
    truth: HsvarTruth
    T: int
    T_B: int
    restrictions: str
    names: tuple[str, ...] = NAMES

    @property
    def lag_order(self) -> int:
        return self.truth.lag_order


def get_scenario(name: str, T: int = 480, T_B: int | None = None) -> Scenario:
    T_B = T // 2 if T_B is None else T_B
    if name == "m1":
        truth = HsvarTruth(_C_M1, np.array([4.0, 1.0, 0.25]), _B)
        return Scenario(name, truth, T, T_B, "# distinct variance shifts, no restrictions\n")
    if name == "m2":
        truth = HsvarTruth(_C_M2, np.array([1.0, 1.0, 4.0]), _B)
        return Scenario(name, truth, T, T_B, TABLE2_OIL_TEXT)
    if name == "m3":
        truth = HsvarTruth(_C_M3, np.array([1.0, 1.0, 4.0]), _B)
        return Scenario(name, truth, T, T_B, M3_TEXT)
    raise ValidationError(f"unknown scenario {name!r}; choose m1, m2 or m3")


SCENARIOS = ("m1", "m2", "m3")
