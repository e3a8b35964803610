"""Acoustic transverse Riemann solver.

Splits a normal fluctuation into up-going and down-going acoustic
contributions using the sound speeds of the three cells stacked in the
transverse direction.  Only the density and transverse-momentum
components take part; normal momentum and energy are neglected and come
out identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k


@dataclass(frozen=True)
class TransverseInput:
    """A normal fluctuation plus cell-local sound speeds.

    ``fluct`` components: 0 density, 1 normal momentum, 2 transverse
    momentum, 3 energy.  ``c_below``/``c_mid``/``c_above`` are the sound
    speeds of the cell below, the updated cell, and the cell above.
    """

    fluct: np.ndarray
    c_below: float
    c_mid: float
    c_above: float

    def __post_init__(self) -> None:
        if not (self.c_below > 0.0 and self.c_mid > 0.0 and self.c_above > 0.0):
            raise ValueError("sound speeds must be positive")


@dataclass(frozen=True)
class TransverseSplit:
    up: np.ndarray    # (4,)
    down: np.ndarray  # (4,)


def transverse_split(inp: TransverseInput) -> TransverseSplit:
    """Up/down acoustic decomposition of a normal fluctuation.

    up   = [c3 (c2 D1 + D3) / (c3 + c2)] * [1, 0,  c3, 0]
    down = [-c1 (c2 D1 - D3) / (c1 + c2)] * [1, 0, -c1, 0]

    with D1 the density component and D3 the transverse-momentum
    component of the input fluctuation.
    """
    d1 = float(inp.fluct[0])
    d3 = float(inp.fluct[2])
    coef_up, coef_dn = k.transverse_coeffs(d1, d3, inp.c_below, inp.c_mid, inp.c_above)
    up = np.array([coef_up, 0.0, coef_up * inp.c_above, 0.0])
    down = np.array([coef_dn, 0.0, -coef_dn * inp.c_below, 0.0])
    return TransverseSplit(up, down)
