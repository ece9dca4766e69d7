"""Command-line interface, should be called via main module: python -m dynsketch"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib import metadata
from typing import NoReturn, Sequence

from dynsketch.container import Sketch, SketchContainer
from dynsketch.cut import CutSketch
from dynsketch.errors import ContainerError, FixtureError, FormatError
from dynsketch.fixtures import CutLbGadget, MembershipGadget
from dynsketch.graph import Graph, GraphFormat, Query, TerminalCut
from dynsketch.matching import MatchingSketch
from dynsketch.mst import MstSketch
from dynsketch.oracles import Oracle
from dynsketch.path import PathSketch
from dynsketch.stconn import StconnSketch
from dynsketch.util import Cryptography, FileSystem, Log
from dynsketch.verify import Verifier

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VERIFY = 0, 1, 2, 3

SEED_ENV = "DYNSKETCH_SEED"
"""Environment variable holding the default seed"""

FORMATTER = argparse.ArgumentDefaultsHelpFormatter

COMMANDS = {
    "build": "compress a graph into a sketch",
    "query": "answer a query from a sketch",
    "oracle": "answer a query exactly on the queried graph",
    "fixture": "generate an adversarial graph with known answers",
    "verify": "compare sketch answers with the oracles",
    "size": "report the size of a sketch",
}
"""Subcommands and their help, each with an ``_add_<name>_arguments`` method"""

ALIASES = {
    "build": (("problem", True), ("input", True)),
    "query": (("container", True), ("query", False)),
    "oracle": (("problem", True), ("input", True), ("query", False)),
    "verify": (("problem", True),),
    "size": (("container", True),),
}
"""Positional arguments per subcommand that may instead be given as options, and
whether they are required"""

DIRECTED_QUERIES = {"matching": False, "cut": True, "stconn": True, "mst": False}
"""Whether the query pairs of a problem are ordered"""


class UsageParser(argparse.ArgumentParser):
    """Argument parser that exits with the usage error status"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class CommandLine:
    """Command-line interface, exposed via module entry point"""

    def __init__(self) -> None:
        """Initialize argument parser and unhandled exception hook"""
        Log.setup_exception_logging_hooks()
        self.args = self._parse_arguments()
        log.debug("Configured: %s", self.args)

    @staticmethod
    def _configure_logger(args: argparse.Namespace) -> None:
        """Configure logger according to command-line arguments.
        Specifying `verbose` argument raises the log level to `debug`.

        :param args: command-line arguments
        """
        if args.verbose:
            args.log = "debug"
        Log.configure(args.log)
        if args.verbose:
            log.debug("Raising logging level to DEBUG")

    @staticmethod
    def _integer_list(text: str) -> list[int]:
        """Argument type of comma-separated integers, possibly empty"""
        try:
            return [int(item) for item in text.split(",") if item.strip()]
        except ValueError as ex:
            raise argparse.ArgumentTypeError(f"not a list of integers: {text}") from ex

    @staticmethod
    def _default_seed(parser: argparse.ArgumentParser) -> int:
        """Seed from :data:`SEED_ENV`, ``0`` if unset"""
        value = os.environ.get(SEED_ENV, "0")
        try:
            return int(value)
        except ValueError:
            parser.error(f"{SEED_ENV}={value!r} is not an integer")

    @classmethod
    def _parse_arguments(cls) -> argparse.Namespace:
        """Parse command-line arguments.

        :return: arguments after configuring the logger
        """
        parser = UsageParser(
            prog=__package__, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )
        log_choices = Log.LEVELS
        version = "%(prog)s " + cls._get_package_version()
        seed = cls._default_seed(parser)

        parser.add_argument(
            "-V",
            "--version",
            action="version",
            version=version,
            help="show program version and exit",
        )
        parser.add_argument(
            "-l",
            "--log",
            choices=log_choices,
            default="info",
            metavar="LEVEL",
            help="logging level: " + ", ".join(log_choices),
        )
        parser.add_argument(
            "-v",
            "--verbose",
            action="store_true",
            help="log algebraic milestones (implies -l debug)",
        )

        commands = parser.add_subparsers(dest="command", required=True)
        for name, help_text in COMMANDS.items():
            command = commands.add_parser(
                name, help=help_text, formatter_class=FORMATTER
            )
            getattr(cls, f"_add_{name}_arguments")(command, seed)

        args = parser.parse_args()
        cls._resolve_aliases(parser, args)
        cls._configure_logger(args)
        return args

    @staticmethod
    def _resolve_aliases(
        parser: argparse.ArgumentParser, args: argparse.Namespace
    ) -> None:
        """Merge positional arguments with their option forms (see :data:`ALIASES`).

        :param parser: parser reporting usage errors
        :param args: parsed arguments, updated in place
        """
        for name, required in ALIASES.get(args.command, ()):
            positional = getattr(args, name)
            option = getattr(args, f"{name}_option")
            if positional is not None and option is not None and positional != option:
                parser.error(f"{name} given twice: {positional!r} and {option!r}")
            value = option if option is not None else positional
            if value is None and required:
                parser.error(f"{args.command}: {name} is required")
            setattr(args, name, value)

    @staticmethod
    def _add_aliased(
        parser: argparse.ArgumentParser,
        name: str,
        flags: tuple[str, ...],
        help_text: str,
        choices: Sequence[str] | None = None,
    ) -> None:
        """Add an optional positional argument together with its option form"""
        parser.add_argument(
            name, nargs="?", choices=choices, help=f"{help_text}, or {flags[-1]}"
        )
        parser.add_argument(
            *flags,
            dest=f"{name}_option",
            metavar=name.upper(),
            choices=choices,
            help=help_text,
        )

    @classmethod
    def _add_build_arguments(cls, build: argparse.ArgumentParser, seed: int) -> None:
        problems = sorted(SketchContainer.PROBLEMS)
        cls._add_aliased(build, "problem", ("--problem",), "sketched problem", problems)
        cls._add_aliased(build, "input", ("-i", "--input"), "graph file")
        build.add_argument("-o", "--output", required=True, help="container file")
        cls._add_randomness_arguments(build, seed)
        build.add_argument(
            "--max-expanded-edges",
            type=int,
            default=100_000,
            help="bound on parallel edges from capacity expansion",
        )
        build.add_argument(
            "--per-query-delta",
            action="store_true",
            help="cut sketch: delta bounds every query rather than all cuts at once",
        )
        cls._add_endpoint_arguments(build)

    @classmethod
    def _add_query_arguments(cls, query: argparse.ArgumentParser, _: int) -> None:
        cls._add_aliased(query, "container", ("-i", "--input"), "container file")
        cls._add_digest_argument(query)
        cls._add_aliased(
            query,
            "query",
            ("-q", "--query"),
            "query file; for cut sketches one 'A:i,j B:l' cut per line",
        )
        query.add_argument(
            "--problem",
            choices=sorted(SketchContainer.PROBLEMS),
            help="expected problem of the container",
        )
        cls._add_query_options(query)

    @classmethod
    def _add_oracle_arguments(cls, oracle: argparse.ArgumentParser, _: int) -> None:
        problems = sorted(SketchContainer.PROBLEMS)
        cls._add_aliased(oracle, "problem", ("--problem",), "queried problem", problems)
        cls._add_aliased(oracle, "input", ("-i", "--input"), "graph file")
        cls._add_aliased(
            oracle, "query", ("-q", "--query"), "query file, as for 'query'"
        )
        cls._add_query_options(oracle)
        cls._add_endpoint_arguments(oracle)

    @classmethod
    def _add_fixture_arguments(cls, fixture: argparse.ArgumentParser, _: int) -> None:
        fixture.add_argument("--name", choices=["membership", "cutlb"], required=True)
        fixture.add_argument("-o", "--output", help="graph file, stdout if omitted")
        fixture.add_argument(
            "--size", type=int, default=9, help="membership: universe size N"
        )
        fixture.add_argument(
            "--members",
            type=cls._integer_list,
            default=[],
            help="membership: comma-separated elements of S",
        )
        fixture.add_argument(
            "--element", type=int, help="membership: element whose query to write"
        )
        fixture.add_argument(
            "--q-count", type=int, default=2, help="cutlb: number k' of q terminals"
        )
        fixture.add_argument(
            "--bits",
            type=cls._integer_list,
            help="cutlb: comma-separated bit vector, all zeros if omitted",
        )
        fixture.add_argument(
            "--query-output",
            help="membership: query file of --element; cutlb: one cut per line",
        )

    @classmethod
    def _add_verify_arguments(cls, verify: argparse.ArgumentParser, seed: int) -> None:
        cls._add_aliased(
            verify, "problem", ("--problem",), "verified problem", Verifier.PROBLEMS
        )
        verify.add_argument("--input", help="graph file, random graphs if omitted")
        verify.add_argument("--trials", type=int, default=20, help="number of trials")
        cls._add_randomness_arguments(verify, seed)
        verify.add_argument("--max-k", type=int, default=3, help="terminal bound")
        verify.add_argument("--max-n", type=int, default=10, help="vertex bound")
        verify.add_argument(
            "--max-expanded-edges",
            type=int,
            default=30,
            help="cut: skip random graphs with more expanded edges",
        )
        verify.add_argument("--workers", type=int, help="worker threads")
        verify.add_argument(
            "-p", "--progress", action="store_true", help="visualize progress on stderr"
        )

    @staticmethod
    def _add_endpoint_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("-s", "--source", type=int, help="path: source vertex")
        parser.add_argument("-t", "--target", type=int, help="path: target vertex")

    @classmethod
    def _add_size_arguments(cls, size: argparse.ArgumentParser, _: int) -> None:
        cls._add_aliased(size, "container", ("-i", "--input"), "container file")
        cls._add_digest_argument(size)

    @staticmethod
    def _add_digest_argument(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--sha256", metavar="DIGEST", help="verify the container digest first"
        )

    @staticmethod
    def _add_randomness_arguments(parser: argparse.ArgumentParser, seed: int) -> None:
        parser.add_argument(
            "--delta", type=float, default=0.01, help="failure probability"
        )
        parser.add_argument(
            "--seed", type=int, default=seed, help=f"RNG seed (default from {SEED_ENV})"
        )

    @staticmethod
    def _add_query_options(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--cut",
            action="append",
            default=[],
            help="terminal cut 'A:i,j B:l', may repeat",
        )
        parser.add_argument(
            "--flow",
            nargs=2,
            type=int,
            metavar=("S", "T"),
            help="cut: maximum flow between terminal indices under a directed query",
        )
        parser.add_argument(
            "--components",
            action="store_true",
            help="mst: also print the spanning forest component count",
        )

    def main(self) -> int:
        """Command-line program entry point.

        :return: program exit status
        """
        try:
            status: int = getattr(self, f"cmd_{self.args.command}")()
        except (ValueError, OSError) as ex:
            Log.trace_exception(ex, f"Command {self.args.command} failed")
            return EXIT_PARSE
        return status

    @staticmethod
    def _build_sketch(problem: str, graph: Graph, args: argparse.Namespace) -> Sketch:
        """Compress a graph with the sketch of a problem"""
        if problem == "matching":
            return MatchingSketch.compress(graph, args.delta, args.seed)
        if problem == "cut":
            return CutSketch.compress(
                graph,
                args.delta,
                args.seed,
                max_expanded_edges=args.max_expanded_edges,
                per_query_delta=args.per_query_delta,
            )
        if problem == "stconn":
            return StconnSketch.compress(
                graph, args.delta, args.seed, max_expanded_edges=args.max_expanded_edges
            )
        if problem == "mst":
            return MstSketch.compress(graph)
        return PathSketch.compress(graph, args.source, args.target)

    def cmd_build(self) -> int:
        """Build a sketch and write its container"""
        graph = GraphFormat.read_graph(self.args.input)
        sketch = self._build_sketch(self.args.problem, graph, self.args)
        digest = SketchContainer.write(self.args.output, sketch)
        words = sketch.sketch_size_words()
        FileSystem.verify_size(self.args.output, 8 * words)
        print(f"{self.args.problem}: {words} words, {8 * words} bytes, sha256 {digest}")
        return EXIT_OK

    def _cuts(self, problem: str) -> list[TerminalCut]:
        """Cuts from ``--cut`` options and, for cut problems, the query file"""
        cuts = [TerminalCut.parse(spec) for spec in self.args.cut]
        if problem == "cut" and self.args.query and not self.args.flow:
            with open(self.args.query, encoding="utf-8") as query_file:
                for number, line in enumerate(query_file, start=1):
                    if line.split("#", 1)[0].strip():
                        try:
                            cuts.append(TerminalCut.parse(line.split("#", 1)[0]))
                        except FormatError as ex:
                            raise FormatError(str(ex), line=number) from ex
        if problem == "cut" and not cuts and not self.args.flow:
            raise FormatError("Cut queries need --cut, --flow or a cut file")
        return cuts

    def _query(self, problem: str) -> Query:
        """Query file contents, the empty query if no file is given"""
        directed = DIRECTED_QUERIES.get(problem, True)
        if not self.args.query:
            return Query.of([], directed=directed)
        return GraphFormat.read_query(self.args.query, directed=directed)

    def _verify_digest(self) -> None:
        """Check the container against ``--sha256`` when given"""
        if self.args.sha256:
            Cryptography.verify_digest(self.args.container, "sha256", self.args.sha256)

    def cmd_query(self) -> int:
        """Answer a query from a container"""
        self._verify_digest()
        sketch = SketchContainer.read(self.args.container)
        problem = SketchContainer.problem_of(sketch)
        if self.args.problem and self.args.problem != problem:
            raise ContainerError(
                f"{self.args.container} holds a {problem} sketch, "
                f"not {self.args.problem}"
            )
        if isinstance(sketch, CutSketch):
            if self.args.flow:
                s, t = self.args.flow
                print(sketch.query_st_maxflow(s, t, self._query(problem)))
            for cut in self._cuts(problem):
                print(sketch.query_cut(cut))
            return EXIT_OK

        query = self._query(problem)
        if isinstance(sketch, PathSketch):
            print(PathSketch.describe(sketch.extract(query)))
        elif isinstance(sketch, MstSketch) and self.args.components:
            print(sketch.extract(query), sketch.components(query))
        else:
            print(sketch.extract(query))
        return EXIT_OK

    def cmd_oracle(self) -> int:
        """Answer a query exactly"""
        problem = self.args.problem
        graph = GraphFormat.read_graph(self.args.input)
        if problem == "cut":
            if self.args.flow:
                s, t = self.args.flow
                queried = graph.to_directed().apply_query(self._query(problem))
                cut = TerminalCut.of([s], [t])
                print(Oracle.terminal_cut(queried, cut).value)
            for cut in self._cuts(problem):
                print(Oracle.terminal_cut(graph, cut).value)
            return EXIT_OK

        query = self._query(problem)
        if problem == "matching":
            print(Oracle.matching(graph.apply_query(query)).value)
        elif problem == "stconn":
            queried = graph.to_directed().apply_query(query)
            print(Oracle.st_connectivity(queried).value)
        elif problem == "mst":
            result = Oracle.mst(graph.apply_query(query))
            if self.args.components:
                print(result.value, result.components)
            else:
                print(result.value)
        else:
            extended = PathSketch.with_endpoints(
                graph, self.args.source, self.args.target
            ).to_directed()
            queried = extended.apply_query(query)
            assert extended.source is not None and extended.sink is not None
            distance = Oracle.shortest_path(queried, extended.source, extended.sink)
            print(PathSketch.describe(distance.value))
        return EXIT_OK

    @staticmethod
    def _emit(path: str | None, text: str) -> None:
        """Write text atomically to a file, or to stdout without a path"""
        if path:
            FileSystem.write_atomically(path, text.encode("utf-8"))
        else:
            sys.stdout.write(text)

    def cmd_fixture(self) -> int:
        """Generate a fixture graph and optionally its queries"""
        if self.args.name == "membership":
            membership = MembershipGadget.generate(self.args.size, self.args.members)
            self._emit(self.args.output, GraphFormat.format_graph(membership.graph))
            if self.args.element is not None:
                if self.args.element not in membership.queries:
                    raise FixtureError(f"No element {self.args.element} in the fixture")
                log.info(
                    "Expected matching with element %s: %s",
                    self.args.element,
                    membership.expected(self.args.element),
                )
                query = membership.queries[self.args.element]
                self._emit(self.args.query_output, GraphFormat.format_query(query))
            return EXIT_OK

        bits = self.args.bits
        if bits is None:
            bits = [0] * len(CutLbGadget.subsets_of(self.args.q_count))
        gadget = CutLbGadget.generate(self.args.q_count, bits)
        log.info("Cut fixture offset c = %s", gadget.offset)
        self._emit(self.args.output, GraphFormat.format_graph(gadget.graph))
        if self.args.query_output:
            cuts = "".join(f"{cut}\n" for cut in gadget.cuts)
            self._emit(self.args.query_output, cuts)
        return EXIT_OK

    def cmd_verify(self) -> int:
        """Run a verification and report it"""
        graph = GraphFormat.read_graph(self.args.input) if self.args.input else None
        verifier = Verifier(
            self.args.problem,
            delta=self.args.delta,
            seed=self.args.seed,
            max_k=self.args.max_k,
            max_n=self.args.max_n,
            workers=self.args.workers,
            progress=self.args.progress,
            graph=graph,
            max_expanded_edges=self.args.max_expanded_edges,
        )
        report = verifier.run(self.args.trials)
        print(report.summary())
        return EXIT_OK if report.passed else EXIT_VERIFY

    def cmd_size(self) -> int:
        """Report stored and closed-form sizes of a container"""
        self._verify_digest()
        stored = FileSystem.get_file_size(self.args.container)
        sketch = SketchContainer.read(self.args.container)
        words = stored // 8
        print(
            f"{SketchContainer.problem_of(sketch)}: {words} words ({stored} bytes), "
            f"formula {sketch.sketch_size_words()} words"
        )
        return EXIT_OK

    @staticmethod
    def _get_package_version() -> str:
        """Retrieve package version from metadata, raising error for uninstalled
        development sources.

        :return: package version string
        :raises metadata.PackageNotFoundError: version is not available, e.g. when
            package is not installed
        """
        try:
            return metadata.version(__package__)
        except metadata.PackageNotFoundError:
            log.error(
                "Generated version not available, install package as usual or in "
                "editable mode"
            )
            raise


def main() -> int:
    """Command-line static entry point, suitable for install-time script generation.

    :return: program exit status
    """
    return CommandLine().main()
