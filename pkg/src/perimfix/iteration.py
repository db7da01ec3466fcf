"""The constructive fixed-point sequence for perimeter-contracting set-valued maps.

Starting from ``x0`` and some ``x1`` in ``T(x0)``, each next point ``z`` is
picked from ``T(x_n)`` so that

* ``H(T x_{n-1}, T z) > 0`` and
* ``d(x_n, z) <= H(T x_{n-1}, T x_n) + slack(n)``, where ``slack(1) = lam``
  and ``slack(n) = min(lam**n, H(T x_{n-2}, T x_n))`` for ``n >= 2``.

On a finite space the sequence cannot converge without becoming stationary,
so the run stops as soon as the current point lies in its own image.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from perimfix.analysis import HALF, AnalysisError, check_lambda, lambda_min_perimeter
from perimfix.metric import FiniteMetricSpace, HausdorffTable, MultiMap

POLICIES = ("nearest-lex", "lex")


class IterationError(RuntimeError):
    pass


class LambdaGateViolated(AnalysisError):
    pass


class TraceTooShort(ValueError):
    pass


class SelectionInfeasible(IterationError):
    def __init__(self, x_prev: int, x_cur: int, n: int):
        self.x_prev = x_prev
        self.x_cur = x_cur
        self.n = n
        super().__init__(
            f"no admissible successor of point {x_cur} (predecessor {x_prev}) at step {n}; "
            "the forming-a-triangle property fails here"
        )


@dataclass(frozen=True)
class IterationConfig:
    lam: Fraction
    start: int
    max_steps: int | None = None
    policy: str = "nearest-lex"
    theorem4: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lam", check_lambda(self.lam))
        if self.policy not in POLICIES:
            raise ValueError(f"unknown selection policy {self.policy!r}; expected one of {POLICIES}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class IterationStep:
    n: int
    point: int
    step_distance: Fraction
    hausdorff_prev: Fraction
    slack: Fraction
    separation: Fraction


@dataclass(frozen=True)
class Outcome:
    kind: str  # "fixed-point" | "max-steps" | "infeasible"
    point: int | None = None
    pair: tuple[int, int] | None = None

    @property
    def found(self) -> bool:
        return self.kind == "fixed-point"


@dataclass
class IterationTrace:
    points: list[int]
    steps: list[IterationStep]
    distances: list[Fraction]
    outcome: Outcome
    lam: Fraction = Fraction(0)
    policy: str = "nearest-lex"

    @classmethod
    def from_points(cls, space: FiniteMetricSpace, points: Sequence[int], outcome: Outcome | None = None):
        """Bare trace for bound checking; no steps are recorded."""
        pts = list(points)
        dists = [space.dist[a][b] for a, b in zip(pts, pts[1:])]
        return cls(pts, [], dists, outcome or Outcome("max-steps"))


def slack(n: int, lam: Fraction, h_prev2_cur: Fraction | None) -> Fraction:
    if n == 1:
        return lam
    return min(lam**n, h_prev2_cur)


def _first_point(space: FiniteMetricSpace, fmap: MultiMap, x0: int, policy: str) -> int:
    img = fmap.images[x0]
    if policy == "lex":
        return img[0]
    return min(img, key=lambda z: (space.dist[x0][z], z))


def select_next(
    space: FiniteMetricSpace,
    fmap: MultiMap,
    x_prev2: int | None,
    x_prev: int,
    x_cur: int,
    n: int,
    lam,
    policy: str = "nearest-lex",
    table: HausdorffTable | None = None,
) -> int:
    if n < 1:
        raise ValueError("step index starts at 1")
    if n >= 2 and x_prev2 is None:
        raise ValueError("steps n >= 2 need the point two back")
    if x_cur not in fmap.images[x_prev] or x_cur == x_prev:
        raise ValueError(f"{x_cur} must be a point of T({x_prev}) other than {x_prev}")
    lam = Fraction(lam)
    table = table if table is not None else HausdorffTable(space, fmap)
    h, d = table.ints, space.int_dist
    scale = table.scale
    s = slack(n, lam, None if n == 1 else table.value(x_prev2, x_cur))
    bound = Fraction(h[x_prev][x_cur], scale) + s
    best = None
    for z in fmap.images[x_cur]:
        if h[x_prev][z] == 0:
            continue
        if Fraction(d[x_cur][z], scale) > bound:
            continue
        if policy == "lex":
            return z
        if best is None or d[x_cur][z] < d[x_cur][best]:
            best = z
    if best is None:
        raise SelectionInfeasible(x_prev, x_cur, n)
    return best


def run_iteration(space: FiniteMetricSpace, fmap: MultiMap, config: IterationConfig, table=None) -> IterationTrace:
    """Run the sequence from ``config.start`` until it reaches a fixed point.

    In Theorem-4 mode (the default) ``config.lam`` must be below 1/2 and the
    map must be perimeter-contracting at that factor; otherwise
    :class:`LambdaGateViolated` is raised.  Infeasible selections and the step
    cap are reported through ``trace.outcome`` rather than raised.
    """
    if space.size < 3:
        raise AnalysisError("the iteration needs at least 3 points")
    fmap.check_against(space)
    table = table if table is not None else HausdorffTable(space, fmap)
    lam = config.lam
    if config.theorem4:
        if lam >= HALF:
            raise LambdaGateViolated(f"lambda = {lam} is not below 1/2")
        mlcp, witness = lambda_min_perimeter(space, fmap, table)
        if mlcp > lam:
            raise LambdaGateViolated(f"map is not perimeter-contracting at {lam}: ratio {mlcp} at {witness}")
    max_steps = config.max_steps or 10 * space.size**2
    x0 = config.start
    if not 0 <= x0 < space.size:
        raise IndexError(f"start point {x0} out of range")

    points = [x0]
    steps: list[IterationStep] = []

    def finish(outcome):
        trace = IterationTrace.from_points(space, points, outcome)
        trace.steps = steps
        trace.lam = lam
        trace.policy = config.policy
        return trace

    if x0 in fmap.images[x0]:
        return finish(Outcome("fixed-point", point=x0))
    points.append(_first_point(space, fmap, x0, config.policy))

    while True:
        n = len(points) - 1
        x_cur = points[n]
        if x_cur in fmap.images[x_cur]:
            return finish(Outcome("fixed-point", point=x_cur))
        if len(steps) >= max_steps:
            return finish(Outcome("max-steps"))
        x_prev = points[n - 1]
        x_prev2 = points[n - 2] if n >= 2 else None
        try:
            z = select_next(space, fmap, x_prev2, x_prev, x_cur, n, lam, config.policy, table)
        except SelectionInfeasible:
            return finish(Outcome("infeasible", pair=(x_prev, x_cur)))
        step = IterationStep(
            n=n,
            point=z,
            step_distance=space.dist[x_cur][z],
            hausdorff_prev=table.value(x_prev, x_cur),
            slack=slack(n, lam, None if n == 1 else table.value(x_prev2, x_cur)),
            separation=table.value(x_prev, z),
        )
        if step.step_distance > step.hausdorff_prev + step.slack or step.separation <= 0:
            raise IterationError(f"step {n} breaks its own admissibility record: {step}")
        steps.append(step)
        points.append(z)


@dataclass(frozen=True)
class BoundCheck:
    ok: bool
    index: int | None = None
    bound: str | None = None  # "recurrence" | "unrolled"
    lhs: Fraction | None = None
    rhs: Fraction | None = None
    checked: int = field(default=0, compare=False)

    def __bool__(self) -> bool:
        return self.ok


def verify_cauchy_bounds(trace: IterationTrace | Sequence[Fraction], lam) -> BoundCheck:
    """Check the two-step distance bounds along a trace.

    For every ``n >= 1`` with ``x_{n+2}`` present, with ``S_n = d(x_n,x_{n+1}) + d(x_{n+1},x_{n+2})``:

    * ``S_n <= 2 lam S_{n-1} + lam**n``
    * ``S_n <= (2 lam)**n S_0 + 2**n lam**n``

    ``trace`` may also be the bare list of consecutive distances.
    """
    lam = Fraction(lam)
    if not 0 <= lam < HALF:
        raise ValueError(f"the bounds are only meaningful for lambda in [0, 1/2), got {lam}")
    dists = list(trace.distances if isinstance(trace, IterationTrace) else trace)
    if len(dists) < 2:
        raise TraceTooShort(f"need at least 3 points, got {len(dists) + 1}")
    s0 = dists[0] + dists[1]
    two_lam = 2 * lam
    checked = 0
    for n in range(1, len(dists) - 1):
        s_n = dists[n] + dists[n + 1]
        rec = two_lam * (dists[n - 1] + dists[n]) + lam**n
        if s_n > rec:
            return BoundCheck(False, n, "recurrence", s_n, rec, checked)
        unrolled = two_lam**n * s0 + 2**n * lam**n
        if s_n > unrolled:
            return BoundCheck(False, n, "unrolled", s_n, unrolled, checked)
        checked += 1
    return BoundCheck(True, checked=checked)
