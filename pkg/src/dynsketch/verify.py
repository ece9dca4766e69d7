"""Verification of sketch answers against the brute-force oracles over many seeded
trials, run on worker threads. Deterministic sketches must agree on every query;
randomized ones may fail on at most the number of queries that a binomial
distribution with the configured failure probability exceeds with probability 1%."""

from __future__ import annotations

import concurrent.futures
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator

from tqdm import tqdm

from dynsketch.cut import CutSketch
from dynsketch.errors import DynSketchError, EmptyTerminalError, SizeLimitError
from dynsketch.fixtures import CutLbGadget, MembershipGadget, RandomInstances
from dynsketch.graph import Graph, Query, TerminalCut
from dynsketch.matching import MatchingSketch
from dynsketch.mst import MstSketch
from dynsketch.oracles import Oracle
from dynsketch.path import PathSketch
from dynsketch.stconn import StconnSketch
from dynsketch.util import Log, Time

log = logging.getLogger(__name__)


@dataclass
class TrialOutcome:
    """Counts of a single trial"""

    queries: int = 0
    failures: int = 0
    """Randomized answers that disagree with the oracle"""
    exact_failures: int = 0
    """Disagreements that no failure probability excuses"""
    parity_violations: int = 0
    """Matching extractions with an odd rank sum"""
    skipped: bool = False
    budget: float = 0.0
    """Expected randomized failures, the sum of the per-query failure
    probabilities of the answering sketches"""

    def record(
        self, answer: int, expected: int, *, exact: bool = False, delta: float = 0.0
    ) -> None:
        """Count one compared query answered with failure probability ``delta``"""
        self.queries += 1
        self.budget += delta
        if answer != expected:
            if exact:
                self.exact_failures += 1
            else:
                self.failures += 1

    def merge(self, other: TrialOutcome) -> None:
        """Add the counts of another trial"""
        self.queries += other.queries
        self.failures += other.failures
        self.exact_failures += other.exact_failures
        self.parity_violations += other.parity_violations
        self.budget += other.budget


@dataclass(frozen=True)
class VerificationReport:
    """Aggregated agreement statistics of a verification run"""

    problem: str
    trials: int
    skipped: int
    queries: int
    failures: int
    exact_failures: int
    parity_violations: int
    delta: float
    """Mean per-query failure probability the sketches were built with"""
    randomized: bool

    CONFIDENCE = 0.99

    @property
    def failure_rate(self) -> float:
        """Empirical failure rate of randomized answers"""
        return self.failures / self.queries if self.queries else 0.0

    @property
    def allowed_failures(self) -> int:
        """Failure count gate: the 99% quantile of ``Binomial(queries, delta)``,
        zero for deterministic problems"""
        if not self.randomized:
            return 0
        return self.binomial_quantile(self.queries, self.delta, self.CONFIDENCE)

    @property
    def passed(self) -> bool:
        """Whether the run stays within the gate"""
        return self.exact_failures == 0 and self.failures <= self.allowed_failures

    @staticmethod
    def binomial_quantile(trials: int, probability: float, confidence: float) -> int:
        """Smallest ``c`` with ``P[Binomial(trials, probability) <= c] >=
        confidence``, summing the probability mass in log space.

        :param trials: number of Bernoulli trials
        :param probability: success probability, ``0 <= probability <= 1``
        :param confidence: target cumulative probability
        :return: quantile
        """
        if probability <= 0 or trials == 0:
            return 0
        if probability >= 1:
            return trials
        log_p, log_q = math.log(probability), math.log1p(-probability)
        log_n = math.lgamma(trials + 1)
        cumulative = 0.0
        for count in range(trials + 1):
            cumulative += math.exp(
                log_n
                - math.lgamma(count + 1)
                - math.lgamma(trials - count + 1)
                + count * log_p
                + (trials - count) * log_q
            )
            if cumulative >= confidence:
                return count
        return trials

    def summary(self) -> str:
        """One-line human-readable summary"""
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.problem}: {verdict} {self.trials - self.skipped}/{self.trials} "
            f"trials, {self.queries} queries, {self.failures} failures "
            f"(rate {self.failure_rate:.4f}, allowed {self.allowed_failures}), "
            f"{self.exact_failures} exact mismatches, "
            f"{self.parity_violations} parity violations"
        )


class Verifier:
    """Runs independent trials of one problem and reduces their outcomes"""

    PROBLEMS = ("matching", "cut", "stconn", "mst", "path", "membership", "cutlb")
    RANDOMIZED = frozenset(("matching", "cut", "stconn", "membership", "cutlb"))

    def __init__(
        self,
        problem: str,
        *,
        delta: float = 0.01,
        seed: int = 0,
        max_k: int = 3,
        max_n: int = 10,
        workers: int | None = None,
        progress: bool = False,
        graph: Graph | None = None,
        max_expanded_edges: int = 30,
        membership_size: int = 9,
        cut_fixture_q_count: int = 2,
    ) -> None:
        """Configure a verification run.

        :param problem: one of :attr:`PROBLEMS`
        :param delta: sketch failure probability
        :param seed: base seed; trial ``i`` draws everything from ``seed + i``
        :param max_k: terminal count bound of random instances
        :param max_n: vertex count bound of random instances
        :param workers: worker threads, ``None`` for the executor default
        :param progress: show a progress bar on :data:`sys.stderr`
        :param graph: verify this graph in every trial (with varying sketch seeds)
            instead of drawing random instances
        :param max_expanded_edges: expansion bound of cut sketches
        :param membership_size: universe size of membership fixtures
        :param cut_fixture_q_count: ``k'`` of cut lower-bound fixtures
        :raises SizeLimitError: unknown problem or bounds beyond what the oracles
            handle
        """
        if problem not in self.PROBLEMS:
            raise SizeLimitError(f"Unknown verification problem {problem!r}")
        if max_n > Oracle.MATCHING_MAX_VERTICES and problem == "matching":
            raise SizeLimitError(
                f"Matching verification handles {Oracle.MATCHING_MAX_VERTICES} "
                f"vertices, got max_n={max_n}"
            )
        if max_k < 1 or max_n < max_k + 2:
            raise SizeLimitError(
                f"Bounds max_k={max_k}, max_n={max_n} leave no instances"
            )
        self.problem = problem
        self.delta = delta
        self.seed = seed
        self.max_k = max_k
        self.max_n = max_n
        self.workers = workers
        self.progress = progress
        self.graph = graph
        self.max_expanded_edges = max_expanded_edges
        self.membership_size = membership_size
        self.cut_fixture_q_count = cut_fixture_q_count

    def run(self, trials: int) -> VerificationReport:
        """Run trials on worker threads and aggregate their outcomes.

        :param trials: number of trials
        :return: report
        :raises DynSketchError: a trial failed with an error rather than a wrong
            answer
        """
        check: Callable[[int], TrialOutcome] = getattr(self, f"_trial_{self.problem}")
        total, skipped = TrialOutcome(), 0
        start = Time.now()
        with concurrent.futures.ThreadPoolExecutor(self.workers) as executor, tqdm(
            total=trials,
            desc=self.problem,
            disable=(not self.progress or None),
            leave=False,
            dynamic_ncols=True,
            colour="blue",
        ) as progress_bar:
            futures = {
                executor.submit(check, self.seed + index): index
                for index in range(trials)
            }
            for future in concurrent.futures.as_completed(futures):
                try:
                    outcome = future.result()
                except DynSketchError as ex:
                    Log.trace_exception(ex, f"Trial {futures[future]} failed")
                    raise
                total.merge(outcome)
                skipped += outcome.skipped
                progress_bar.update()

        report = VerificationReport(
            self.problem,
            trials,
            skipped,
            total.queries,
            total.failures,
            total.exact_failures,
            total.parity_violations,
            total.budget / total.queries if total.queries else 0.0,
            self.problem in self.RANDOMIZED,
        )
        log.info("%s [%s]", report.summary(), Time.elapsed_since(start))
        return report

    def _sizes(self, draw: RandomInstances, min_k: int = 1) -> tuple[int, int]:
        """Random ``(n, k)`` within the configured bounds"""
        k = draw.integer(min(min_k, self.max_k), self.max_k)
        return draw.integer(k + 2, self.max_n), k

    def _trial_matching(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        if self.graph is None:
            n, k = self._sizes(draw)
            graph = draw.undirected(n, k, density=draw.integer(1, 6) / 10)
        else:
            graph = self.graph
        sketch = MatchingSketch.compress(graph, self.delta, seed)
        outcome = TrialOutcome()
        for query in Query.enumerate_all(graph.k):
            total = sketch.extraction_rank(query)
            outcome.parity_violations += total % 2
            expected = Oracle.matching(graph.apply_query(query)).value
            outcome.record(total // 2, expected, delta=self.delta)
        return outcome

    @staticmethod
    def cut_pairs(k: int) -> Iterator[TerminalCut]:
        """Every pair of disjoint nonempty terminal sets"""
        for sides in itertools.product((0, 1, 2), repeat=k):
            a = [i for i, side in enumerate(sides) if side == 1]
            b = [i for i, side in enumerate(sides) if side == 2]
            if a and b:
                yield TerminalCut.of(a, b)

    def _trial_cut(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        if self.graph is None:
            n, k = self._sizes(draw, min_k=2)
            k = max(k, 2)
            graph = draw.capacitated(n, k, draw.integer(1, 3) / 10, max_capacity=2)
            if graph.total_weight() > self.max_expanded_edges:
                return TrialOutcome(skipped=True)
        else:
            graph = self.graph
        try:
            sketch = CutSketch.compress(
                graph, self.delta, seed, max_expanded_edges=self.max_expanded_edges
            )
        except EmptyTerminalError:
            return TrialOutcome(skipped=True)

        delta = float(CutSketch.query_delta(self.delta, graph.k))
        outcome = TrialOutcome()
        for cut in self.cut_pairs(graph.k):
            expected = Oracle.terminal_cut(graph, cut).value
            outcome.record(sketch.query_cut(cut), expected, delta=delta)
            everything = frozenset(range(graph.k))
            separating = min(
                Oracle.terminal_cut(graph, TerminalCut(side, everything - side)).value
                for side in CutSketch.separating_sides(cut, graph.k)
            )
            if separating != expected:
                outcome.exact_failures += 1
        return outcome

    def _trial_stconn(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        if self.graph is None:
            n, k = self._sizes(draw)
            graph = draw.directed(n, k, density=0.3)
        else:
            graph = self.graph
        sketch = StconnSketch.compress(graph, self.delta, seed)
        directed = graph.to_directed()
        outcome = TrialOutcome()
        for query in Query.enumerate_all(graph.k, directed=True):
            expected = Oracle.st_connectivity(directed.apply_query(query)).value
            outcome.record(sketch.extract(query), expected, delta=self.delta)
        return outcome

    def _trial_mst(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        if self.graph is None:
            n, k = self._sizes(draw)
            graph = draw.weighted(n, k, density=draw.integer(1, 5) / 10)
        else:
            graph = self.graph
        sketch = MstSketch.compress(graph)
        outcome = TrialOutcome()
        if sketch.n > 4 * max(graph.k, 1):
            log.error("Spanning forest sketch keeps %s vertices", sketch.n)
            outcome.exact_failures += 1

        queries = [Query.of([])]
        for pair in sorted(Query.all_pairs(graph.k).pairs()):
            for weight in (1, draw.integer(1, 20), 100):
                queries.append(Query.of([(*pair, weight)]))
        queries += [
            draw.query(graph.k, directed=False, max_size=4, max_weight=20)
            for _ in range(10)
        ]
        for query in queries:
            expected = Oracle.mst(graph.apply_query(query))
            outcome.record(sketch.extract(query), expected.value, exact=True)
            assert expected.components is not None
            if sketch.components(query) != expected.components:
                outcome.exact_failures += 1
        return outcome

    def _trial_path(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        if self.graph is None:
            n, k = self._sizes(draw, min_k=2)
            graph = draw.weighted(n, max(k, 2), density=0.25, directed=True)
        else:
            graph = self.graph
        sketch = PathSketch.compress(graph)
        extended = PathSketch.with_endpoints(graph).to_directed()
        source, sink = extended.source, extended.sink
        assert source is not None and sink is not None
        pairs = sorted(Query.all_pairs(sketch.k, directed=True).pairs())
        weights = {pair: draw.integer(0, 20) for pair in pairs}
        outcome = TrialOutcome()
        for size in range(min(3, len(pairs)) + 1):
            for chosen in itertools.combinations(pairs, size):
                query = Query.of(
                    [(*pair, weights[pair]) for pair in chosen], directed=True
                )
                expected = Oracle.shortest_path(
                    extended.apply_query(query), source, sink
                ).value
                outcome.record(sketch.extract(query), expected, exact=True)
        return outcome

    def _trial_membership(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        gadget = MembershipGadget.generate(
            self.membership_size, draw.subset(self.membership_size)
        )
        sketch = MatchingSketch.compress(gadget.graph, self.delta, seed)
        outcome = TrialOutcome()
        for element, query in gadget.queries.items():
            total = sketch.extraction_rank(query)
            outcome.parity_violations += total % 2
            outcome.record(total // 2, gadget.expected(element), delta=self.delta)
        return outcome

    def _trial_cutlb(self, seed: int) -> TrialOutcome:
        draw = RandomInstances(seed)
        size = len(CutLbGadget.subsets_of(self.cut_fixture_q_count))
        gadget = CutLbGadget.generate(self.cut_fixture_q_count, draw.bits(size))
        outcome = TrialOutcome()

        exact = gadget.check_output_profile(
            lambda cut: Oracle.terminal_cut(gadget.graph, cut).value
        )
        for bit, expected in zip(exact, gadget.bits):
            outcome.record(bit, expected, exact=True)

        sketch = CutSketch.compress(
            gadget.graph,
            self.delta,
            seed,
            max_expanded_edges=gadget.graph.total_weight(),
        )
        recovered = gadget.check_output_profile(sketch.query_cut)
        delta = float(CutSketch.query_delta(self.delta, gadget.graph.k))
        for bit, expected in zip(recovered, gadget.bits):
            outcome.record(bit, expected, delta=delta)
        return outcome
