"""Square momentum grids and their conjugate position grids.

The momentum axis carries a half-cell offset by default so that no node
coincides with p = (0, 0), where the helicity factor of the energy
decomposition has no defined direction. The conjugate position axis is the
standard DFT partner (spacing pi / half_extent) and does contain x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridError


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform N x N momentum grid on [-half_extent, half_extent]^2."""

    half_extent: float = 8.0
    points: int = 256
    offset: bool = True

    def __post_init__(self):
        if not self.half_extent > 0:
            raise GridError(f"half_extent must be positive, got {self.half_extent}")
        if self.points < 16 or self.points % 2:
            raise GridError(f"points must be even and >= 16, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.points

    @property
    def cell(self) -> float:
        return self.spacing**2

    @cached_property
    def axis(self) -> np.ndarray:
        shift = 0.5 if self.offset else 0.0
        ax = -self.half_extent + (np.arange(self.points) + shift) * self.spacing
        ax.flags.writeable = False
        return ax

    @property
    def position_spacing(self) -> float:
        # conjugate DFT spacing: dx = 2 pi / (N dp)
        return np.pi / self.half_extent

    @property
    def position_cell(self) -> float:
        return self.position_spacing**2

    @cached_property
    def position_axis(self) -> np.ndarray:
        ax = (np.arange(self.points) - self.points // 2) * self.position_spacing
        ax.flags.writeable = False
        return ax

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        px, py = np.meshgrid(self.axis, self.axis, indexing="ij")
        px.flags.writeable = False
        py.flags.writeable = False
        return px, py

    def contains_origin_node(self) -> bool:
        return bool(np.any(np.isclose(self.axis, 0.0, atol=1e-15)))
