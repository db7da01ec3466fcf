"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL  detail`` line.  Run the
module directly (``python tests/test_acceptance.py``) to get just those lines.
"""

import itertools
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from perimfix.analysis import (  # noqa: E402
    fixed_points,
    has_forming_triangle,
    is_mlcp,
    lambda_min_contraction,
    lambda_min_perimeter,
    prime_period_points,
)
from perimfix.instance_io import emit_instance  # noqa: E402
from perimfix.iteration import IterationConfig, TraceTooShort, run_iteration, verify_cauchy_bounds  # noqa: E402
from perimfix.metric import hausdorff, validate_metric  # noqa: E402
from perimfix.search import (  # noqa: E402
    GenConfig,
    builtin_instance,
    gen_random_map,
    gen_random_space,
    hunt_open_problem,
    instance_rng,
)
from samplers import layered_instance, lemma1_instance, random_instance  # noqa: E402

HALF = Fraction(1, 2)
TARGET = 1000


def _cauchy_ok(trace, lam):
    """True if the bounds hold; traces under three points pass vacuously."""
    try:
        return bool(verify_cauchy_bounds(trace, lam)), True
    except TraceTooShort:
        return True, False


def criterion_1():
    space, fmap = builtin_instance("ex1")
    mlc, (x, y) = lambda_min_contraction(space, fmap)
    cross = (x - y) % 2 == 1
    mlcp, _ = lambda_min_perimeter(space, fmap)
    checks = {
        "mlc>=1": mlc >= 1 and mlc == 1,
        "cross-parity witness": cross and space.dist[x][y] == 1,
        "mlcp(3/4)": is_mlcp(space, fmap, Fraction(3, 4)),
        "lambda_mlcp=3/4": mlcp == Fraction(3, 4) == oracles.max_perimeter_ratio(space, fmap),
        "no fixed points": fixed_points(space, fmap) == frozenset(),
        "no prime period 2": prime_period_points(space, fmap, 2) == frozenset(),
        "forming triangle": has_forming_triangle(space, fmap)[0],
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, f"mlc={mlc} at ({x},{y}), mlcp={mlcp}" + (f"; failed {bad}" if bad else "")


def criterion_2():
    space, fmap = builtin_instance("cyclic7")
    ft = has_forming_triangle(space, fmap)[0]
    p2 = prime_period_points(space, fmap, 2)
    return ft and bool(p2), f"forming_triangle={ft}, |prime period 2|={len(p2)}"


def criterion_3():
    space, fmap = builtin_instance("nadler-gap")
    lab = space.labels
    mlc, _ = lambda_min_contraction(space, fmap)
    mlcp, _ = lambda_min_perimeter(space, fmap)
    fixed = fixed_points(space, fmap)
    ok = (
        mlc == 1
        and mlcp == Fraction(3, 8)
        and not prime_period_points(space, fmap, 2)
        and has_forming_triangle(space, fmap)[0]
        and {lab[i] for i in fixed} == {"0", "1"}
    )
    checked = 0
    for start in range(space.size):
        trace = run_iteration(space, fmap, IterationConfig(mlcp, start))
        bound_ok, nonvacuous = _cauchy_ok(trace, mlcp)
        checked += nonvacuous
        ok = ok and trace.outcome.kind == "fixed-point" and lab[trace.outcome.point] in {"0", "1"} and bound_ok
    return ok, f"mlc={mlc}, mlcp={mlcp}, {space.size} starts converge; Cauchy check non-vacuous on {checked} traces"


def criterion_4():
    population = failures = runs = long_traces = generic = 0
    draws = itertools.chain(
        (("generic", *random_instance(instance_rng(401, i))) for i in range(2000)),
        (("layered", *layered_instance(instance_rng(402, i))) for i in itertools.count()),
    )
    for source, space, fmap in draws:
        if population >= TARGET:
            break
        lam, _ = lambda_min_perimeter(space, fmap)
        if lam >= HALF or not has_forming_triangle(space, fmap)[0]:
            continue
        population += 1
        generic += source == "generic"
        fixed = {x for x in range(space.size) if x in fmap.images[x]}
        for start in range(space.size):
            trace = run_iteration(space, fmap, IterationConfig(lam, start))
            runs += 1
            bound_ok, nonvacuous = _cauchy_ok(trace, lam)
            long_traces += nonvacuous
            if not (trace.outcome.found and trace.outcome.point in fixed and bound_ok):
                failures += 1
    detail = f"{population} instances ({generic} generic), {runs} runs, {failures} failures"
    return failures == 0, f"{detail}, {long_traces} traces with >=3 points"


def criterion_5():
    population = failures = generic = 0
    draws = itertools.chain(
        (("generic", *random_instance(instance_rng(501, i))) for i in range(3000)),
        (("oriented", *lemma1_instance(instance_rng(502, i))) for i in itertools.count()),
    )
    for source, space, fmap in draws:
        if population >= TARGET:
            break
        if fixed_points(space, fmap) or prime_period_points(space, fmap, 2):
            continue
        population += 1
        generic += source == "generic"
        if not has_forming_triangle(space, fmap)[0]:
            failures += 1
    return failures == 0, f"{population} instances ({generic} generic), {failures} without the triangle property"


def criterion_6():
    bad = 0
    for i in range(TARGET):
        space, fmap = random_instance(instance_rng(601, i))
        if lambda_min_perimeter(space, fmap)[0] > lambda_min_contraction(space, fmap)[0]:
            bad += 1
    return bad == 0, f"{TARGET} instances, {bad} with lambda_mlcp > lambda_mlc"


def criterion_7():
    bad = 0
    for i in range(TARGET):
        rng = instance_rng(701, i)
        n = int(rng.integers(1, 9))
        space = gen_random_space(n, int(rng.integers(1, 10)), rng)
        a, b, c = (gen_random_map(space, 1, n, rng).images[0] for _ in range(3))
        hab, hba = hausdorff(space, a, b), hausdorff(space, b, a)
        hac, hbc = hausdorff(space, a, c), hausdorff(space, b, c)
        axioms = (
            hab >= 0 and hausdorff(space, a, a) == 0,
            (hab == 0) == (a == b),
            hab == hba,
            hac <= hab + hbc,
        )
        bad += not all(axioms)
    return bad == 0, f"{TARGET} draws, {bad} axiom failures"


def criterion_8():
    invalid = mismatched = 0
    for seed in range(TARGET):
        rng = instance_rng(seed, 0)
        n = int(rng.integers(1, 9))
        w = int(rng.integers(1, 20))
        space = gen_random_space(n, w, rng)
        fmap = gen_random_map(space, 1, n, rng)
        try:
            validate_metric(space.labels, space.dist)
        except ValueError:
            invalid += 1
        rng2 = instance_rng(seed, 0)
        n2, w2 = int(rng2.integers(1, 9)), int(rng2.integers(1, 20))
        space2 = gen_random_space(n2, w2, rng2)
        fmap2 = gen_random_map(space2, 1, n2, rng2)
        if emit_instance((space, fmap)).encode() != emit_instance((space2, fmap2)).encode():
            mismatched += 1
    return invalid == mismatched == 0, f"{TARGET} seeds, {invalid} invalid, {mismatched} not reproduced"


def criterion_9():
    t0 = time.perf_counter()
    rep = hunt_open_problem(GenConfig(3, weight_max=1), exhaustive=True, filter="all")
    elapsed = time.perf_counter() - t0
    summed = sum(rep.regime_counts.values())
    ok = elapsed < 60 and summed == rep.total == 7**3 and rep.theorem4_violations == 0
    counts = ", ".join(f"{k}={v}" for k, v in sorted(rep.regime_counts.items()))
    return ok, f"{rep.total} maps in {elapsed:.2f}s ({counts}), {rep.theorem4_violations} violations"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9]  # fmt: skip


def _line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [(n, *fn()) for n, fn in enumerate(CRITERIA, 1)]
    for r in results:
        print(_line(*r))
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
