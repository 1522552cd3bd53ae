"""
Configuration-space data types.

A Configuration is a finite multiset of real (or d-dimensional) positions
stored sorted; a Window is the open ball (-r, r); an EmpiricalLaw is a
uniformly weighted family of configurations; a WeylPoint is the labelled
state x_1 > ... > x_k of a k-particle system.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from dysonlab.core.exceptions import (
    Collision,
    ConfigError,
    InvalidInterval,
    NonFiniteInput,
    ValidationError,
)

logger = logging.getLogger(__name__)


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


class Configuration:
    """A finite configuration of points.

    One-dimensional configurations are stored as a sorted 1-D array. Points in
    higher dimensions are stored as an (n, d) array sorted lexicographically;
    only the matching distances accept them.
    """

    __slots__ = ("_points",)

    def __init__(self, points: Union[Sequence[float], np.ndarray] = ()) -> None:
        array = np.asarray(points, dtype=float)
        if array.ndim == 0:
            array = array.reshape(1)
        if array.ndim > 2:
            raise ValidationError(f"points must be a 1-D list or an (n, d) array, got shape {array.shape}")
        if array.size and not np.all(np.isfinite(array)):
            raise NonFiniteInput("Configuration coordinates must be finite")
        if array.ndim == 1:
            array = np.sort(array)
        elif array.shape[0] > 1:
            order = np.lexsort(array.T[::-1])
            array = array[order]
        self._points = _frozen(array.copy())

    @property
    def points(self) -> np.ndarray:
        """Read-only sorted coordinates."""
        return self._points

    @property
    def dimension(self) -> int:
        return 1 if self._points.ndim == 1 else int(self._points.shape[1])

    def __len__(self) -> int:
        return int(self._points.shape[0])

    def __iter__(self) -> Iterator[float]:
        return iter(self._points.tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._points.shape == other._points.shape and bool(np.all(self._points == other._points))

    def __hash__(self) -> int:
        return hash((self._points.shape, self._points.tobytes()))

    def __repr__(self) -> str:
        return f"Configuration({', '.join(repr(float(v)) for v in self._points.ravel())})"

    def tolist(self) -> List:
        return self._points.tolist()


@dataclass(frozen=True)
class Window:
    """The open ball B_r = (-r, r)."""

    radius: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"Window radius must be positive and finite, got {self.radius}")

    def contains(self, x: float) -> bool:
        return abs(x) < self.radius


class EmpiricalLaw:
    """A uniformly weighted, nonempty family of configurations."""

    __slots__ = ("_members",)

    def __init__(self, members: Iterable[Union[Configuration, Sequence[float]]]) -> None:
        converted = tuple(m if isinstance(m, Configuration) else Configuration(m) for m in members)
        if not converted:
            raise ValidationError("EmpiricalLaw needs at least one member")
        self._members = converted

    @property
    def members(self) -> Tuple[Configuration, ...]:
        return self._members

    @property
    def weight(self) -> float:
        return 1.0 / len(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[Configuration]:
        return iter(self._members)

    def __getitem__(self, index: int) -> Configuration:
        return self._members[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmpiricalLaw):
            return NotImplemented
        return self._members == other._members

    def __repr__(self) -> str:
        return f"EmpiricalLaw(N={len(self._members)})"

    def tolist(self) -> List[List]:
        return [m.tolist() for m in self._members]

    @classmethod
    def from_array(cls, states: np.ndarray) -> "EmpiricalLaw":
        """Build a law from an (N, k) array, one configuration per row."""
        return cls(Configuration(row) for row in np.asarray(states, dtype=float))


class WeylPoint:
    """An ordered k-vector x_1 > x_2 > ... > x_k (open Weyl chamber)."""

    __slots__ = ("_coords",)

    def __init__(self, coords: Union[Sequence[float], np.ndarray]) -> None:
        array = np.asarray(coords, dtype=float).reshape(-1)
        if array.size < 1:
            raise ValidationError("WeylPoint needs k >= 1 coordinates")
        if not np.all(np.isfinite(array)):
            raise NonFiniteInput("WeylPoint coordinates must be finite")
        if array.size > 1 and not np.all(np.diff(array) < 0):
            raise Collision(f"WeylPoint coordinates must be strictly decreasing: {array.tolist()}")
        self._coords = _frozen(array.copy())

    @classmethod
    def from_unordered(cls, values: Union[Sequence[float], np.ndarray]) -> "WeylPoint":
        """Sort values in decreasing order and wrap them."""
        return cls(np.sort(np.asarray(values, dtype=float))[::-1])

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def k(self) -> int:
        return int(self._coords.size)

    def __len__(self) -> int:
        return self.k

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeylPoint):
            return NotImplemented
        return bool(np.array_equal(self._coords, other._coords))

    def __hash__(self) -> int:
        return hash(self._coords.tobytes())

    def __repr__(self) -> str:
        return f"WeylPoint({', '.join(repr(float(v)) for v in self._coords)})"

    def to_configuration(self) -> Configuration:
        return Configuration(self._coords)


def from_points(values: Union[Sequence[float], np.ndarray]) -> Configuration:
    """Build a sorted Configuration from raw values.

    Raises:
        NonFiniteInput: If any value is NaN or infinite
    """
    return Configuration(values)


def _radius(window: Union[Window, float]) -> float:
    return window.radius if isinstance(window, Window) else Window(float(window)).radius


def restrict(gamma: Configuration, window: Union[Window, float]) -> Configuration:
    """Sub-configuration of the points strictly inside the window."""
    r = _radius(window)
    pts = gamma.points
    if gamma.dimension == 1:
        return Configuration(pts[np.abs(pts) < r])
    return Configuration(pts[np.linalg.norm(pts, axis=1) < r])


def count(gamma: Configuration, a: float, b: float) -> int:
    """Number of points of a 1-D configuration in the half-open interval [a, b).

    Raises:
        InvalidInterval: If a > b
    """
    if a > b:
        raise InvalidInterval(f"Interval endpoints reversed: [{a}, {b})")
    pts = gamma.points
    return int(np.searchsorted(pts, b, side="left") - np.searchsorted(pts, a, side="left"))


def counts_in_interval(states: np.ndarray, a: float, b: float) -> np.ndarray:
    """Vectorized count over a batch of point arrays (rows, NaN-padded allowed)."""
    if a > b:
        raise InvalidInterval(f"Interval endpoints reversed: [{a}, {b})")
    values = np.asarray(states, dtype=float)
    return np.sum((values >= a) & (values < b), axis=-1)
