"""Compress a graph with designated terminals into a sketch that answers queries
about edges later inserted between the terminals. See :class:`dynsketch.Graph`
for the input model and the ``dynsketch`` command for file-based usage."""

from dynsketch.container import SketchContainer
from dynsketch.cut import CutSketch
from dynsketch.errors import DynSketchError
from dynsketch.fixtures import CutLbGadget, MembershipGadget, RandomInstances
from dynsketch.graph import Graph, GraphFormat, Query, TerminalCut
from dynsketch.matching import MatchingSketch
from dynsketch.mst import MstSketch
from dynsketch.oracles import Oracle
from dynsketch.path import PathSketch
from dynsketch.stconn import StconnSketch
from dynsketch.verify import Verifier
