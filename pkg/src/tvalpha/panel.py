"""Data containers for return panels and factor series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class ReturnPanel:
    """T x N matrix of excess returns plus axis metadata.

    ``values[t, i]`` is the excess return of asset ``i`` in period ``t``.
    """

    values: np.ndarray
    assets: tuple = field(default=())
    periods: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise DimensionError(f"returns must be 2-D, got shape {v.shape}")
        object.__setattr__(self, "values", v)
        if self.assets and len(self.assets) != v.shape[1]:
            raise DimensionError("asset labels do not match column count")
        if self.periods and len(self.periods) != v.shape[0]:
            raise DimensionError("period labels do not match row count")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FactorSeries:
    """T x d matrix of observed factors (d fixed and small)."""

    values: np.ndarray
    names: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise DimensionError(f"factors must be 2-D, got shape {v.shape}")
        object.__setattr__(self, "values", v)
        if self.names and len(self.names) != v.shape[1]:
            raise DimensionError("factor names do not match column count")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]
