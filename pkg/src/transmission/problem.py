"""Geometry and data containers of the two-dimensional problem."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class Geometry:
    """Omega- = (a, gamma) x (0, ell) and Omega+ = (gamma, b) x (0, ell)."""

    a: float
    gamma: float
    b: float
    ell: float
    K: int = 16
    Nx: int = 65
    Ny: int = 33
    _mirror_source: object = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        if not self.a < self.gamma:
            raise ValueError("a < gamma violated")
        if not self.gamma < self.b:
            raise ValueError("gamma < b violated")
        if not self.ell > 0:
            raise ValueError("ell > 0 violated")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K >= 1 violated")
        if self.Nx < 2 or self.Ny < 2:
            raise ValueError("grid must have at least 2 points per direction")

    @property
    def c(self) -> float:
        return self.gamma - self.a

    @property
    def d(self) -> float:
        return self.b - self.gamma

    def eigenvalue(self, k: int) -> float:
        return (k * math.pi / self.ell) ** 2

    @property
    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.K + 1)
        return (k * math.pi / self.ell) ** 2

    @property
    def lambda_min(self) -> float:
        return self.eigenvalue(1)


@dataclass
class ProblemData:
    """Forcing g(x, y) per side and boundary data phi(y) at x = a and x = b.

    phi1 is the trace u, phi2 the normal derivative du/dx.  Entries may be
    vectorized callables, constants, or None (zero).
    """

    g_minus: Callable | float | None = None
    g_plus: Callable | float | None = None
    phi1_minus: Callable | float | None = None
    phi1_plus: Callable | float | None = None
    phi2_minus: Callable | float | None = None
    phi2_plus: Callable | float | None = None
    _mirror_source: object = field(default=None, init=False, compare=False, repr=False)


class Reflected2D:
    """(x, y) -> sign * fn(center - x, y)."""

    def __init__(self, fn, center: float, sign: float = 1.0):
        self.fn, self.center, self.sign = fn, center, sign

    def __call__(self, x, y):
        return self.sign * np.asarray(self.fn(self.center - np.asarray(x, dtype=float), y))


class Negated:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, *args):
        return -np.asarray(self.fn(*args))


def reflect_forcing(fn, center: float):
    if fn is None or not callable(fn):
        return fn
    if isinstance(fn, Reflected2D) and fn.center == center and fn.sign == 1.0:
        return fn.fn
    return Reflected2D(fn, center)


def negate(fn):
    if fn is None:
        return None
    if not callable(fn):
        return -fn
    if isinstance(fn, Negated):
        return fn.fn
    return Negated(fn)
