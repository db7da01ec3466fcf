"""Finite metric spaces, point subsets and the Hausdorff distance.

All scalars are :class:`fractions.Fraction`.  A space also carries an integer
copy of its distance matrix (scaled by the least common denominator) so the
kernels in :mod:`perimfix.kernels` can run exact integer scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from perimfix import kernels

Rational = Fraction
PointSet = tuple[int, ...]

MAX_POINTS = 64


class InstanceError(ValueError):
    """Base class for anything that makes an instance unusable."""


class NonSquareMatrix(InstanceError):
    pass


class DuplicateLabel(InstanceError):
    pass


class SpaceTooLarge(InstanceError):
    pass


class EmptyImage(InstanceError):
    pass


@dataclass(frozen=True)
class Violation:
    axiom: str  # "identity" | "positivity" | "symmetry" | "triangle"
    indices: tuple[int, ...]
    values: tuple[Fraction, ...]

    def __str__(self) -> str:
        vals = ", ".join(str(v) for v in self.values)
        return f"{self.axiom} at {self.indices}: {vals}"


class MetricViolation(InstanceError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            head += f"; ... ({more} more)"
        super().__init__(f"metric axioms violated: {head}")


def as_rational(value) -> Fraction:
    """Exact conversion; floats are refused since they are already rounded."""
    if isinstance(value, bool):
        raise TypeError("booleans are not distances")
    if isinstance(value, float):
        raise TypeError(f"refusing inexact float {value!r}; use an integer, 'p/q' or a decimal string")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _scale(dist: Sequence[Sequence[Fraction]]):
    """Integer matrix and scale factor with dist == ints / scale."""
    scale = 1
    for row in dist:
        for v in row:
            scale = math.lcm(scale, v.denominator)
    ints = [[v.numerator * (scale // v.denominator) for v in row] for row in dist]
    return ints, scale


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    labels: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and self.dist == other.dist

    def __hash__(self):
        return hash((self.labels, self.dist))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"unknown point label {label!r}") from None

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def _scaled(self):
        ints, scale = _scale(self.dist)
        top = max((max(r) for r in ints), default=0)
        arr = np.array(ints, dtype=np.int64) if top <= kernels.SAFE_MAX else None
        return ints, scale, arr

    @property
    def scale(self) -> int:
        """Common denominator: ``dist[i][j] == int_dist[i][j] / scale``."""
        return self._scaled[1]

    @property
    def int_dist(self) -> list[list[int]]:
        return self._scaled[0]

    @property
    def kernel_dist(self) -> np.ndarray | None:
        """int64 copy of the scaled matrix, or None when too large for the kernels."""
        return self._scaled[2]


def metric_violations(dist: Sequence[Sequence[Fraction]]) -> list[Violation]:
    n = len(dist)
    out: list[Violation] = []
    for i in range(n):
        if dist[i][i] != 0:
            out.append(Violation("identity", (i, i), (dist[i][i],)))
    for i in range(n):
        for j in range(n):
            if i != j and dist[i][j] <= 0:
                out.append(Violation("positivity", (i, j), (dist[i][j],)))
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] != dist[j][i]:
                out.append(Violation("symmetry", (i, j), (dist[i][j], dist[j][i])))
    if n:
        ints, _ = _scale(dist)
        top = max(abs(v) for r in ints for v in r)
        a = np.array(ints, dtype=np.int64 if top < (1 << 61) else object)
        bad = a[:, None, :] > a[:, :, None] + a[None, :, :]  # d(i,k) > d(i,j) + d(j,k)
        for i, j, k in zip(*np.nonzero(bad)):
            i, j, k = int(i), int(j), int(k)
            out.append(Violation("triangle", (i, j, k), (dist[i][k], dist[i][j], dist[j][k])))
    return out


def validate_metric(labels: Sequence[str], dist, max_points: int = MAX_POINTS) -> FiniteMetricSpace:
    """Build a space from labels and a distance matrix, checking every axiom.

    Raises :class:`MetricViolation` listing every failed axiom instance; nothing
    is repaired.
    """
    labels = tuple(str(x) for x in labels)
    rows = [list(r) for r in dist]
    n = len(labels)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise NonSquareMatrix(f"distance matrix must be {n}x{n} to match the labels")
    if n < 1:
        raise InstanceError("a metric space needs at least one point")
    if n > max_points:
        raise SpaceTooLarge(f"{n} points exceeds the cap of {max_points}")
    seen: set[str] = set()
    for lab in labels:
        if lab in seen:
            raise DuplicateLabel(f"duplicate label {lab!r}")
        seen.add(lab)
    frac = tuple(tuple(as_rational(v) for v in r) for r in rows)
    bad = metric_violations(frac)
    if bad:
        raise MetricViolation(bad)
    return FiniteMetricSpace(labels, frac)


def point_set(members: Iterable[int], n: int | None = None) -> PointSet:
    s = tuple(sorted(set(int(m) for m in members)))
    if not s:
        raise EmptyImage("point sets must be nonempty")
    if n is not None and (s[0] < 0 or s[-1] >= n):
        raise IndexError(f"point index out of range for a space of {n} points: {s}")
    return s


@dataclass(frozen=True, eq=False)
class MultiMap:
    """A set-valued self-map; ``images[i]`` is the sorted image of point ``i``."""

    images: tuple[PointSet, ...]

    def __post_init__(self):
        n = len(self.images)
        object.__setattr__(self, "images", tuple(point_set(img, n) for img in self.images))

    def __eq__(self, other):
        if not isinstance(other, MultiMap):
            return NotImplemented
        return self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, i: int) -> PointSet:
        return self.images[i]

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << m for m in img) for img in self.images)

    @cached_property
    def membership(self) -> np.ndarray:
        n = len(self.images)
        out = np.zeros((n, n), dtype=np.bool_)
        for i, img in enumerate(self.images):
            out[i, list(img)] = True
        return out

    def check_against(self, space: FiniteMetricSpace) -> None:
        if len(self.images) != space.size:
            raise InstanceError(f"map has {len(self.images)} images for a space of {space.size} points")


def point_set_distance(space: FiniteMetricSpace, p: int, s: PointSet) -> Fraction:
    return min(space.dist[p][q] for q in s)


def hausdorff(space: FiniteMetricSpace, a: PointSet, b: PointSet) -> Fraction:
    ab = max(point_set_distance(space, x, b) for x in a)
    ba = max(point_set_distance(space, y, a) for y in b)
    return max(ab, ba)


class HausdorffTable:
    """All ``H(Tx, Ty)`` for one (space, map) pair, in scaled integers.

    ``ints[i][j] / scale`` is the exact value; :meth:`value` returns it as a
    Fraction.  ``array`` is the int64 matrix used by the kernels (None when the
    space is too large for int64 scans).
    """

    def __init__(self, space: FiniteMetricSpace, fmap: MultiMap):
        fmap.check_against(space)
        self.space = space
        self.map = fmap
        self.scale = space.scale
        kd = space.kernel_dist
        if kd is not None:
            self.array = kernels.hausdorff_matrix(kd, fmap.membership)
            self.ints = self.array.tolist()
        else:
            self.array = None
            self.ints = _hausdorff_ints_python(space.int_dist, fmap.images)

    def value(self, i: int, j: int) -> Fraction:
        return Fraction(self.ints[i][j], self.scale)

    def as_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(v, self.scale) for v in row] for row in self.ints]


def _hausdorff_ints_python(d: list[list[int]], images: Sequence[PointSet]) -> list[list[int]]:
    n = len(images)
    to_image = [[min(d[a][b] for b in images[j]) for j in range(n)] for a in range(n)]
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            h = max(max(to_image[a][j] for a in images[i]), max(to_image[b][i] for b in images[j]))
            out[i][j] = out[j][i] = h
    return out


def hausdorff_matrix(space: FiniteMetricSpace, fmap: MultiMap) -> list[list[Fraction]]:
    return HausdorffTable(space, fmap).as_fractions()
