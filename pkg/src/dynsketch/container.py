"""Versioned binary container for sketches: a stream of little-endian unsigned 64-bit
words. Word 0 holds the magic ``DSK1`` followed by a four-byte problem tag, word 1
the format version, and the rest is the sketch payload whose schema the tag
selects."""

from __future__ import annotations

import logging
import os
from typing import Callable, ClassVar, Sequence, Union

import numpy as np

from dynsketch.cut import CutSketch
from dynsketch.errors import ContainerError
from dynsketch.matching import MatchingSketch
from dynsketch.mst import MstSketch
from dynsketch.path import PathSketch
from dynsketch.stconn import StconnSketch
from dynsketch.util import FileSystem

log = logging.getLogger(__name__)

Sketch = Union[MatchingSketch, CutSketch, StconnSketch, MstSketch, PathSketch]


def _matching_from_words(words: Sequence[int]) -> MatchingSketch:
    sketch, consumed = MatchingSketch.from_words(words)
    if consumed != len(words):
        raise ContainerError("Trailing data after matching sketch")
    return sketch


class SketchContainer:
    """Serialization of every sketch type to and from container bytes"""

    MAGIC = b"DSK1"
    VERSION = 1
    WORD = np.dtype("<u8")
    PREAMBLE_WORDS = 2

    PARSERS: ClassVar[dict[bytes, Callable[[Sequence[int]], Sketch]]] = {
        MatchingSketch.TAG: _matching_from_words,
        CutSketch.TAG: CutSketch.from_words,
        StconnSketch.TAG: StconnSketch.from_words,
        MstSketch.TAG: MstSketch.from_words,
        PathSketch.TAG: PathSketch.from_words,
    }
    """Payload parser per problem tag"""

    PROBLEMS = {
        "matching": MatchingSketch.TAG,
        "cut": CutSketch.TAG,
        "stconn": StconnSketch.TAG,
        "mst": MstSketch.TAG,
        "path": PathSketch.TAG,
    }
    """Problem name per tag, as used on the command line"""

    @classmethod
    def problem_of(cls, sketch: Sketch) -> str:
        """Command-line problem name of a sketch"""
        return next(name for name, tag in cls.PROBLEMS.items() if tag == sketch.TAG)

    @classmethod
    def words(cls, sketch: Sketch) -> list[int]:
        """Complete container as words: preamble and payload"""
        head = int.from_bytes(cls.MAGIC + sketch.TAG, "little")
        return [head, cls.VERSION] + sketch.to_words()

    @classmethod
    def pack(cls, sketch: Sketch) -> bytes:
        """Serialize a sketch.

        :param sketch: any sketch
        :return: container bytes, ``8 * sketch.sketch_size_words()`` long
        :raises ContainerError: a payload value does not fit an unsigned 64-bit word
        """
        words = cls.words(sketch)
        if any(not 0 <= word < 2**64 for word in words):
            raise ContainerError("Sketch value does not fit a 64-bit word")
        return np.array(words, dtype=cls.WORD).tobytes()

    @classmethod
    def unpack(cls, data: bytes) -> Sketch:
        """Parse container bytes.

        :param data: container contents
        :return: sketch of the type named by the tag
        :raises ContainerError: truncated data, wrong magic, unknown tag, unsupported
            version or corrupt payload
        """
        if len(data) % cls.WORD.itemsize:
            raise ContainerError(f"Container size {len(data)} is not whole words")
        if len(data) < cls.PREAMBLE_WORDS * cls.WORD.itemsize:
            raise ContainerError("Container is truncated before the payload")
        array = np.frombuffer(data, dtype=cls.WORD)
        head = data[: cls.WORD.itemsize]
        if head[:4] != cls.MAGIC:
            raise ContainerError(f"Not a sketch container, magic is {head[:4]!r}")
        tag = head[4:]
        if tag not in cls.PARSERS:
            raise ContainerError(f"Unknown sketch tag {tag!r}")
        version = int(array[1])
        if version != cls.VERSION:
            raise ContainerError(
                f"Container format version {version} is not supported, "
                f"expected {cls.VERSION}"
            )
        words = [int(word) for word in array[cls.PREAMBLE_WORDS :]]
        sketch = cls.PARSERS[tag](words)
        log.debug("Unpacked %s sketch of %s words", tag.decode(), len(array))
        return sketch

    @classmethod
    def write(cls, path: str | os.PathLike[str], sketch: Sketch) -> str:
        """Write a container file atomically.

        :param path: output path
        :param sketch: sketch to store
        :return: SHA-256 digest of the file
        """
        digest = FileSystem.write_atomically(path, cls.pack(sketch))
        log.info("Wrote %s sketch to %s, SHA-256 %s", sketch.TAG.decode(), path, digest)
        return digest

    @classmethod
    def read(cls, path: str | os.PathLike[str]) -> Sketch:
        """Read a container file.

        :param path: input path
        :return: sketch
        :raises ContainerError: malformed container
        """
        with open(path, "rb") as container:
            return cls.unpack(container.read())
