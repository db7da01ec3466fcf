"""Instance generation, classification and the search over the open lambda gap."""

from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from perimfix import kernels
from perimfix.analysis import (
    HALF,
    THREE_QUARTERS,
    LambdaReport,
    PropertyReport,
    lambda_report,
    property_report,
)
from perimfix.metric import FiniteMetricSpace, HausdorffTable, MultiMap, validate_metric

REGIMES = ("contraction-regime", "open-gap", "counterexample-regime", "non-mlcp")
BUILTINS = ("ex1", "cyclic7", "nadler-gap")

EXHAUSTIVE_MAX_POINTS = 4
EXHAUSTIVE_MAX_WEIGHT = 3
DEFAULT_BUDGET = 1_000_000


class UnknownInstance(KeyError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class SelfCheckFailure(AssertionError):
    """A contraction-regime instance with the triangle property but no fixed point."""

    def __init__(self, message: str, report: "HuntReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class GenConfig:
    n_points: int
    weight_max: int = 9
    image_size_min: int = 1
    image_size_max: int | None = None
    seed: int = 0
    count: int = 100

    def __post_init__(self):
        if self.image_size_max is None:
            object.__setattr__(self, "image_size_max", self.n_points)
        if self.n_points < 3:
            raise ValueError("n_points must be at least 3")
        if self.weight_max < 1:
            raise ValueError("weight_max must be positive")
        if not 1 <= self.image_size_min <= self.image_size_max <= self.n_points:
            raise ValueError("need 1 <= image_size_min <= image_size_max <= n_points")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.count < 0:
            raise ValueError("count must be nonnegative")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def instance_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for instance ``index`` of a run, so any index range can be regenerated alone."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _closure_space(weights: np.ndarray) -> FiniteMetricSpace:
    d = kernels.metric_closure(weights)
    n = d.shape[0]
    return validate_metric([str(i) for i in range(n)], d.tolist())


def gen_random_space(n: int, weight_max: int, seed) -> FiniteMetricSpace:
    """Shortest-path closure of uniform integer weights on the complete graph."""
    if n < 1 or weight_max < 1:
        raise ValueError("need n >= 1 and weight_max >= 1")
    rng = _rng(seed)
    w = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    w[iu] = rng.integers(1, weight_max + 1, size=len(iu[0]))
    w = w + w.T
    return _closure_space(w)


def gen_random_map(space: FiniteMetricSpace, size_min: int, size_max: int, seed) -> MultiMap:
    n = space.size
    if not 1 <= size_min <= size_max <= n:
        raise ValueError("need 1 <= size_min <= size_max <= |X|")
    rng = _rng(seed)
    images = []
    for _ in range(n):
        k = int(rng.integers(size_min, size_max + 1))
        images.append(tuple(sorted(int(v) for v in rng.choice(n, size=k, replace=False))))
    return MultiMap(tuple(images))


def parity_distance(a: int, b: int) -> int:
    if a == b:
        return 0
    return 2 if (a - b) % 2 == 0 else 1


def parity_space(values: Sequence[int]) -> FiniteMetricSpace:
    return validate_metric([str(v) for v in values], [[parity_distance(a, b) for b in values] for a in values])


def line_space(coords: Sequence, labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    cs = [Fraction(c) for c in coords]
    labels = labels if labels is not None else [str(c) for c in cs]
    return validate_metric(labels, [[abs(a - b) for b in cs] for a in cs])


def builtin_instance(name: str) -> tuple[FiniteMetricSpace, MultiMap]:
    if name == "ex1":
        space = parity_space(range(6))
        cls = {0: (2, 3), 1: (2, 3), 2: (4, 5), 3: (4, 5), 4: (0, 1), 5: (0, 1)}
        return space, MultiMap(tuple(cls[x] for x in range(6)))
    if name == "cyclic7":
        space = parity_space(range(7))
        return space, MultiMap(tuple(tuple((x + k) % 7 for k in range(1, 5)) for x in range(7)))
    if name == "nadler-gap":
        space = line_space([0, 1, 4, 5, 6])
        # indices: 0->"0", 1->"1", 2->"4", 3->"5", 4->"6"
        return space, MultiMap(((0,), (1,), (0, 1), (0, 1), (0, 1)))
    raise UnknownInstance(f"unknown built-in instance {name!r}; choose from {', '.join(BUILTINS)}")


def regime_of(lambda_mlcp: Fraction) -> str:
    if lambda_mlcp < HALF:
        return "contraction-regime"
    if lambda_mlcp < THREE_QUARTERS:
        return "open-gap"
    if lambda_mlcp < 1:
        return "counterexample-regime"
    return "non-mlcp"


@dataclass(frozen=True)
class ClassifiedInstance:
    space: FiniteMetricSpace
    map: MultiMap
    lambdas: LambdaReport
    properties: PropertyReport

    @property
    def regime(self) -> str:
        return regime_of(self.lambdas.lambda_min_mlcp)

    @property
    def contradicts_theorem4(self) -> bool:
        p = self.properties
        return self.regime == "contraction-regime" and p.forming_triangle and not p.fixed_points


def classify(space: FiniteMetricSpace, fmap: MultiMap, periods: Iterable[int] = (2,)) -> ClassifiedInstance:
    table = HausdorffTable(space, fmap)
    lambdas = lambda_report(space, fmap, table)
    props = property_report(space, fmap, tuple(periods), table)
    return ClassifiedInstance(space, fmap, lambdas, props)


# -- the hunter ---------------------------------------------------------------

FILTERS = ("open-gap", "counterexample", "all")


@dataclass(frozen=True)
class Finding:
    index: int  # position in the instance stream; injected instances get negative indices
    instance: ClassifiedInstance


@dataclass
class HuntReport:
    mode: str
    filter: str
    total: int = 0
    regime_counts: Counter = field(default_factory=Counter)
    findings: list[Finding] = field(default_factory=list)
    theorem4_violations: int = 0

    def merge(self, other: "HuntReport") -> None:
        self.total += other.total
        self.regime_counts.update(other.regime_counts)
        self.findings.extend(other.findings)
        self.theorem4_violations += other.theorem4_violations


def _wanted(ci: ClassifiedInstance, filt: str) -> bool:
    p = ci.properties
    if not p.forming_triangle or p.fixed_points:
        return False
    if filt == "open-gap":
        return ci.regime == "open-gap"
    if filt == "counterexample":
        return ci.regime == "counterexample-regime"
    return True


def exhaustive_spaces(n: int, weight_max: int) -> list[FiniteMetricSpace]:
    """Every distinct metric obtained by closing integer weights in [1, weight_max]."""
    iu = np.triu_indices(n, 1)
    seen: dict[bytes, FiniteMetricSpace] = {}
    for ws in itertools.product(range(1, weight_max + 1), repeat=len(iu[0])):
        w = np.zeros((n, n), dtype=np.int64)
        w[iu] = ws
        d = kernels.metric_closure(w + w.T)
        key = d.tobytes()
        if key not in seen:
            seen[key] = validate_metric([str(i) for i in range(n)], d.tolist())
    return [seen[k] for k in sorted(seen)]


def _image_choices(n: int, size_min: int, size_max: int) -> list[tuple[int, ...]]:
    return [c for k in range(size_min, size_max + 1) for c in itertools.combinations(range(n), k)]


class _Stream:
    """Indexable instance stream for one GenConfig (random or exhaustive)."""

    def __init__(self, gen: GenConfig, exhaustive: bool):
        self.gen = gen
        self.exhaustive = exhaustive
        if exhaustive:
            self.spaces = exhaustive_spaces(gen.n_points, gen.weight_max)
            self.choices = _image_choices(gen.n_points, gen.image_size_min, gen.image_size_max)
            self.maps_per_space = len(self.choices) ** gen.n_points
            self.total = len(self.spaces) * self.maps_per_space
        else:
            self.total = gen.count

    def __getitem__(self, index: int) -> tuple[FiniteMetricSpace, MultiMap]:
        g = self.gen
        if not self.exhaustive:
            rng = instance_rng(g.seed, index)
            space = gen_random_space(g.n_points, g.weight_max, rng)
            return space, gen_random_map(space, g.image_size_min, g.image_size_max, rng)
        s, m = divmod(index, self.maps_per_space)
        base = len(self.choices)
        images = []
        for _ in range(g.n_points):
            m, r = divmod(m, base)
            images.append(self.choices[r])
        return self.spaces[s], MultiMap(tuple(reversed(images)))


def _scan(gen: GenConfig, exhaustive: bool, filt: str, lo: int, hi: int) -> HuntReport:
    stream = _Stream(gen, exhaustive)
    rep = HuntReport("exhaustive" if exhaustive else "random", filt)
    for i in range(lo, hi):
        _tally(rep, i, classify(*stream[i]))
    return rep


def _tally(rep: HuntReport, index: int, ci: ClassifiedInstance) -> None:
    rep.total += 1
    rep.regime_counts[ci.regime] += 1
    if ci.contradicts_theorem4:
        rep.theorem4_violations += 1
    if _wanted(ci, rep.filter):
        rep.findings.append(Finding(index, ci))


def hunt_open_problem(
    gen: GenConfig,
    exhaustive: bool = False,
    *,
    filter: str = "open-gap",
    inject: Sequence[tuple[FiniteMetricSpace, MultiMap]] = (),
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> HuntReport:
    """Classify a stream of instances and collect the ones worth a human look.

    With the default filter a finding is an instance in the open gap
    ``1/2 <= lambda < 3/4`` that has the triangle property and no fixed point.
    Random mode draws ``gen.count`` instances; exhaustive mode enumerates every
    metric from weights in ``[1, weight_max]`` and every map with image sizes
    in range.  Raises :class:`SelfCheckFailure` if any contraction-regime
    instance with the triangle property lacks a fixed point.
    """
    if filter not in FILTERS:
        raise ValueError(f"filter must be one of {FILTERS}")
    if exhaustive and (gen.n_points > EXHAUSTIVE_MAX_POINTS or gen.weight_max > EXHAUSTIVE_MAX_WEIGHT):
        raise ValueError(
            f"exhaustive mode is capped at n_points <= {EXHAUSTIVE_MAX_POINTS} and weight_max <= {EXHAUSTIVE_MAX_WEIGHT}"
        )
    stream = _Stream(gen, exhaustive)
    if stream.total > budget:
        raise BudgetExceeded(f"{stream.total} instances exceed the budget of {budget}")

    report = HuntReport("exhaustive" if exhaustive else "random", filter)
    for k, (space, fmap) in enumerate(inject):
        _tally(report, -1 - k, classify(space, fmap))

    if workers <= 1 or stream.total < 2 * workers:
        report.merge(_scan(gen, exhaustive, filter, 0, stream.total))
    else:
        bounds = np.linspace(0, stream.total, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _scan,
                itertools.repeat(gen),
                itertools.repeat(exhaustive),
                itertools.repeat(filter),
                bounds[:-1].tolist(),
                bounds[1:].tolist(),
            )
            for part in parts:
                report.merge(part)
    report.findings.sort(key=lambda f: f.index)
    if report.theorem4_violations:
        raise SelfCheckFailure(
            f"{report.theorem4_violations} contraction-regime instance(s) with the triangle property have no fixed point",
            report,
        )
    return report


def iter_random_instances(gen: GenConfig) -> Iterator[tuple[FiniteMetricSpace, MultiMap]]:
    stream = _Stream(gen, exhaustive=False)
    for i in range(stream.total):
        yield stream[i]
