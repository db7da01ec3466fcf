"""Contraction factors, periodic points and the forming-a-triangle property."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from perimfix import kernels
from perimfix.metric import FiniteMetricSpace, HausdorffTable, MultiMap, PointSet

HALF = Fraction(1, 2)
THREE_QUARTERS = Fraction(3, 4)


class AnalysisError(ValueError):
    """A precondition of an analyzer does not hold."""


class SpaceTooSmall(AnalysisError):
    pass


class LambdaOutOfRange(AnalysisError):
    pass


@dataclass(frozen=True)
class LambdaReport:
    lambda_min_mlc: Fraction
    mlc_witness: tuple[int, int]
    lambda_min_mlcp: Fraction
    mlcp_witness: tuple[int, int, int]


@dataclass(frozen=True)
class Lemma1Check:
    antecedent: bool
    consequent: bool

    @property
    def vacuous(self) -> bool:
        return not self.antecedent

    @property
    def verdict(self) -> bool:
        return (not self.antecedent) or self.consequent


@dataclass(frozen=True)
class PropertyReport:
    fixed_points: frozenset[int]
    prime_period_points: dict[int, frozenset[int]] = field(default_factory=dict)
    forming_triangle: bool = True
    forming_triangle_failure: tuple[int, int] | None = None
    lemma1: Lemma1Check | None = None


def _table(space, fmap, table):
    return table if table is not None else HausdorffTable(space, fmap)


def pair_ratio(space: FiniteMetricSpace, table: HausdorffTable, i: int, j: int) -> Fraction:
    return table.value(i, j) / space.dist[i][j]


def triplet_ratio(space: FiniteMetricSpace, table: HausdorffTable, i: int, j: int, k: int) -> Fraction:
    d = space.dist
    num = table.value(i, j) + table.value(j, k) + table.value(i, k)
    return num / (d[i][j] + d[j][k] + d[i][k])


def lambda_min_contraction(
    space: FiniteMetricSpace, fmap: MultiMap, table: HausdorffTable | None = None
) -> tuple[Fraction, tuple[int, int]]:
    """Largest ``H(Tx,Ty)/d(x,y)`` over distinct pairs, with the lex-first pair attaining it."""
    if space.size < 2:
        raise SpaceTooSmall("the pairwise contraction factor needs at least 2 points")
    table = _table(space, fmap, table)
    if table.array is not None:
        i, j = kernels.max_pair_ratio(space.kernel_dist, table.array)
    else:
        d, h = space.int_dist, table.ints
        # max() keeps the first maximal item: lexicographic tie-break
        i, j = max(combinations(range(space.size), 2), key=lambda p: Fraction(h[p[0]][p[1]], d[p[0]][p[1]]))
    i, j = int(i), int(j)
    return pair_ratio(space, table, i, j), (i, j)


def lambda_min_perimeter(
    space: FiniteMetricSpace, fmap: MultiMap, table: HausdorffTable | None = None
) -> tuple[Fraction, tuple[int, int, int]]:
    """Largest image-perimeter over point-perimeter ratio across pairwise-distinct triplets."""
    if space.size < 3:
        raise SpaceTooSmall("perimeter contraction needs at least 3 points")
    table = _table(space, fmap, table)
    if table.array is not None:
        i, j, k = kernels.max_triplet_ratio(space.kernel_dist, table.array)
    else:
        d, h = space.int_dist, table.ints

        def key(t):
            a, b, c = t
            return Fraction(h[a][b] + h[b][c] + h[a][c], d[a][b] + d[b][c] + d[a][c])

        i, j, k = max(combinations(range(space.size), 3), key=key)
    i, j, k = int(i), int(j), int(k)
    return triplet_ratio(space, table, i, j, k), (i, j, k)


def lambda_report(space: FiniteMetricSpace, fmap: MultiMap, table: HausdorffTable | None = None) -> LambdaReport:
    table = _table(space, fmap, table)
    mlc, pw = lambda_min_contraction(space, fmap, table)
    mlcp, tw = lambda_min_perimeter(space, fmap, table)
    return LambdaReport(mlc, pw, mlcp, tw)


def check_lambda(lam) -> Fraction:
    lam = Fraction(lam)
    if not (0 <= lam < 1):
        raise LambdaOutOfRange(f"lambda must lie in [0, 1), got {lam}")
    return lam


def is_mlcp(space: FiniteMetricSpace, fmap: MultiMap, lam, table: HausdorffTable | None = None) -> bool:
    """Whether the perimeter inequality holds (non-strictly) for every distinct triplet at ``lam``."""
    lam = check_lambda(lam)
    value, _ = lambda_min_perimeter(space, fmap, table)
    return value <= lam


# -- set-valued dynamics ------------------------------------------------------
# Point sets are handled as int bitmasks internally; bit i set <=> point i.


def _mask(s) -> int:
    return sum(1 << i for i in s)


def _unmask(m: int) -> PointSet:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return tuple(out)


def _image_mask(masks: tuple[int, ...], m: int) -> int:
    out = 0
    i = 0
    while m:
        if m & 1:
            out |= masks[i]
        m >>= 1
        i += 1
    return out


def image_of_set(fmap: MultiMap, s: PointSet) -> PointSet:
    if not s:
        raise ValueError("image_of_set needs a nonempty set")
    return _unmask(_image_mask(fmap.masks, _mask(s)))


def _orbit_masks(fmap: MultiMap, x: int, n: int) -> list[int]:
    """[T^1 x, ..., T^n x] as bitmasks."""
    out = []
    cur = 1 << x
    for _ in range(n):
        cur = _image_mask(fmap.masks, cur)
        out.append(cur)
    return out


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"period must be a positive integer, got {n}")


def periodic_points(space: FiniteMetricSpace, fmap: MultiMap, n: int) -> frozenset[int]:
    _check_n(n)
    return frozenset(x for x in range(len(fmap)) if _orbit_masks(fmap, x, n)[-1] >> x & 1)


def prime_period_points(space: FiniteMetricSpace, fmap: MultiMap, n: int) -> frozenset[int]:
    _check_n(n)
    out = []
    for x in range(len(fmap)):
        hits = [m >> x & 1 for m in _orbit_masks(fmap, x, n)]
        if hits[-1] and not any(hits[:-1]):
            out.append(x)
    return frozenset(out)


def fixed_points(space: FiniteMetricSpace, fmap: MultiMap) -> frozenset[int]:
    return frozenset(x for x, img in enumerate(fmap.images) if x in img)


def triangle_candidates(
    space: FiniteMetricSpace, fmap: MultiMap, table: HausdorffTable, x: int, y: int
) -> list[int]:
    """Every z in Ty with H(Tx,Tz) > 0 and d(y,z) <= H(Tx,Ty)."""
    h, d = table.ints, space.int_dist
    bound = h[x][y]
    return [z for z in fmap.images[y] if h[x][z] > 0 and d[y][z] <= bound]


def has_forming_triangle(
    space: FiniteMetricSpace, fmap: MultiMap, table: HausdorffTable | None = None
) -> tuple[bool, tuple[int, int] | None]:
    """Decide the forming-a-triangle property.

    On a finite space the "for every alpha > 0 there is z with
    d(y,z) <= H(Tx,Ty) + alpha" clause ranges over finitely many z, so it is
    equivalent to asking for a z with d(y,z) <= H(Tx,Ty) outright: if every
    admissible z exceeded the bound, alpha smaller than the least excess would
    refute the property.  Returns the lex-first failing (x, y) when false.
    """
    table = _table(space, fmap, table)
    for x, img in enumerate(fmap.images):
        for y in img:
            if y == x:
                continue
            if not triangle_candidates(space, fmap, table, x, y):
                return False, (x, y)
    return True, None


def check_lemma1(space: FiniteMetricSpace, fmap: MultiMap, table: HausdorffTable | None = None) -> Lemma1Check:
    antecedent = not fixed_points(space, fmap) and not prime_period_points(space, fmap, 2)
    consequent, _ = has_forming_triangle(space, fmap, table)
    return Lemma1Check(antecedent=antecedent, consequent=consequent)


def property_report(
    space: FiniteMetricSpace,
    fmap: MultiMap,
    periods: tuple[int, ...] = (2,),
    table: HausdorffTable | None = None,
) -> PropertyReport:
    table = _table(space, fmap, table)
    fixed = fixed_points(space, fmap)
    prime = {n: prime_period_points(space, fmap, n) for n in sorted(set(periods) | {2})}
    ft, failure = has_forming_triangle(space, fmap, table)
    lemma = Lemma1Check(antecedent=not fixed and not prime[2], consequent=ft)
    return PropertyReport(fixed, prime, ft, failure, lemma)
