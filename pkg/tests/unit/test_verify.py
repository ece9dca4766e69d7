"""Verification run unit tests"""

from __future__ import annotations

import pytest
from pytest_mock import MockerFixture

from dynsketch.errors import InvalidGraphError, SizeLimitError
from dynsketch.graph import Graph
from dynsketch.mst import MstSketch
from dynsketch.verify import TrialOutcome, VerificationReport, Verifier


def report(
    failures: int = 0, exact_failures: int = 0, *, randomized: bool = True
) -> VerificationReport:
    """Report over 100 queries with ``delta = 0.05``"""
    return VerificationReport(
        "matching", 10, 1, 100, failures, exact_failures, 0, 0.05, randomized
    )


@pytest.mark.parametrize(
    "trials, probability, confidence, expected",
    [
        (0, 0.5, 0.99, 0),
        (100, 0.0, 0.99, 0),
        (7, 1.0, 0.99, 7),
        (1, 0.5, 0.99, 1),
        (2, 0.1, 0.5, 0),
        (10, 0.5, 0.99, 9),
        (10, 0.5, 0.5, 5),
    ],
)
def test_binomial_quantile(
    trials: int, probability: float, confidence: float, expected: int
) -> None:
    """Quantiles of small binomial distributions"""
    quantile = VerificationReport.binomial_quantile(trials, probability, confidence)
    assert quantile == expected


def test_binomial_quantile_large() -> None:
    """The 99% quantile lies a few deviations above the mean"""
    quantile = VerificationReport.binomial_quantile(1000, 0.01, 0.99)
    assert 10 < quantile < 25


def test_report_gate() -> None:
    """Randomized runs tolerate the quantile, exact mismatches never pass"""
    allowed = report().allowed_failures
    assert allowed > 5
    assert report(allowed).passed
    assert not report(allowed + 1).passed
    assert not report(0, 1).passed
    assert report(randomized=False).allowed_failures == 0
    assert not report(1, randomized=False).passed
    assert report(3).failure_rate == pytest.approx(0.03)
    assert report(3).summary().startswith("matching: PASS 9/10 trials, 100 queries")


def test_trial_outcome() -> None:
    """Counting and merging"""
    outcome = TrialOutcome()
    outcome.record(1, 1)
    outcome.record(1, 2)
    outcome.record(3, 2, exact=True)
    other = TrialOutcome(queries=4, failures=1, parity_violations=2)
    outcome.merge(other)
    assert (outcome.queries, outcome.failures, outcome.exact_failures) == (7, 2, 1)
    assert outcome.parity_violations == 2


@pytest.mark.parametrize(
    "problem, bounds",
    [
        ("flow", {}),
        ("matching", {"max_n": 30}),
        ("mst", {"max_k": 0}),
        ("mst", {"max_k": 4, "max_n": 5}),
    ],
)
def test_verifier_invalid(problem: str, bounds: dict[str, int]) -> None:
    """Unknown problems and empty bounds are rejected"""
    with pytest.raises(SizeLimitError):
        Verifier(problem, **bounds)  # type: ignore[arg-type]


@pytest.mark.parametrize(
    "problem, trials",
    [
        ("matching", 3),
        ("cut", 2),
        ("stconn", 2),
        ("mst", 4),
        ("path", 4),
        ("membership", 2),
        ("cutlb", 1),
    ],
)
def test_verifier_small_runs(problem: str, trials: int) -> None:
    """Short runs of every problem pass"""
    verifier = Verifier(problem, delta=1e-6, seed=5, max_k=2, max_n=5, workers=2)
    result = verifier.run(trials)
    assert result.passed, result.summary()
    assert result.trials == trials
    assert result.exact_failures == result.parity_violations == 0
    assert result.randomized == (problem in Verifier.RANDOMIZED)
    assert result.queries > 0 or result.skipped == trials


def test_verifier_fixed_graph() -> None:
    """A given graph is verified in every trial"""
    graph = Graph.build(5, [(0, 1, 3), (1, 2, 1), (2, 3, 2), (1, 4, 5)], [0, 3])
    result = Verifier("mst", graph=graph).run(3)
    assert result.passed
    assert result.queries == 3 * (1 + 3 + 10)


def test_verifier_reports_mismatch(mocker: MockerFixture) -> None:
    """Wrong deterministic answers fail the run"""
    mocker.patch.object(MstSketch, "extract", return_value=-1)
    result = Verifier("mst", max_n=5, max_k=2).run(2)
    assert not result.passed
    assert result.exact_failures == result.queries > 0


def test_verifier_trial_error(mocker: MockerFixture) -> None:
    """Errors inside a trial are logged and propagated"""
    mocker.patch.object(MstSketch, "compress", side_effect=InvalidGraphError("bad"))
    trace = mocker.patch("dynsketch.util.Log.trace_exception")
    with pytest.raises(InvalidGraphError):
        Verifier("mst", max_n=5, max_k=2).run(2)
    trace.assert_called()


def test_trial_outcome_budget() -> None:
    """Per-query failure probabilities add up across records and merges"""
    outcome = TrialOutcome()
    outcome.record(1, 1, delta=0.25)
    outcome.record(2, 2, exact=True)
    outcome.merge(TrialOutcome(queries=2, budget=0.5))
    assert (outcome.queries, outcome.budget) == (4, pytest.approx(0.75))


def test_verifier_cut_gate() -> None:
    """Cut runs gate on the per-cut failure probability, ``delta / 3^k``"""
    graph = Graph.build(3, [(0, 1), (1, 2)], [0, 2], directed=True)
    result = Verifier("cut", delta=0.3, graph=graph, workers=1).run(10)
    assert result.queries == 10 * 2
    assert result.delta == pytest.approx(0.3 / 9)
    allowed = VerificationReport.binomial_quantile(20, 0.3 / 9, 0.99)
    assert result.allowed_failures == allowed
    assert allowed < VerificationReport.binomial_quantile(20, 0.3, 0.99)


def test_verifier_exact_problems_have_no_budget() -> None:
    """Deterministic runs carry a zero failure probability"""
    result = Verifier("mst", max_n=5, max_k=2).run(2)
    assert result.delta == 0.0 and result.allowed_failures == 0
