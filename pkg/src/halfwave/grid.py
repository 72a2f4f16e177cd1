"""Uniform periodic grid and sampled fields.

Conventions used throughout the package:

* the domain is ``[-L/2, L/2)`` sampled at ``x_j = -L/2 + j*dx`` with
  ``dx = L/n`` and ``n`` a power of two,
* discrete frequencies are ``xi_m = 2*pi*m/L`` for ``m`` in
  ``[-n/2, n/2)``, stored in standard FFT order,
* quadrature of integrals over the period is the trapezoid rule, which
  for periodic samples is just ``dx * sum``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "Field", "make_grid"]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)``.

    Parameters
    ----------
    n:
        Number of points, a power of two, at least 16.
    length:
        Period ``L`` of the domain, positive.
    """

    n: int
    length: float

    def __post_init__(self) -> None:
        if not _is_power_of_two(self.n) or self.n < 16:
            raise ValueError(f"grid size must be a power of two >= 16, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"domain length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        """Sample points ``x_j = -L/2 + j*dx``."""
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Angular frequencies ``2*pi*m/L`` in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    @property
    def spectral_weight(self) -> float:
        """Plancherel weight: ``integral |f|^2 dx = w * sum |fft(f)|^2``."""
        return self.length / self.n**2


@dataclass
class Field:
    """Samples of a (possibly complex) function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"field has {self.values.shape} values for a grid of size {self.grid.n}"
            )
        if not np.issubdtype(self.values.dtype, np.inexact):
            self.values = self.values.astype(float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite samples")

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def reflected(self) -> "Field":
        """Samples of ``f(-x)``; the grid point x=0 (index n/2) is fixed."""
        return Field(self.grid, np.roll(self.values[::-1], 1))


def make_grid(n: int, length: float) -> Grid:
    """Convenience constructor, kept for symmetry with older scripts."""
    return Grid(n=n, length=float(length))
