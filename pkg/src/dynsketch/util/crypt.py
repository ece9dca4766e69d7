"""Cryptographic utilities for internal use"""

from __future__ import annotations

import hashlib
import logging
import os

log = logging.getLogger(__name__)


class Cryptography:
    """Digests of sketch containers, used to check that builds are reproducible"""

    FILE_CHUNK_BYTES = 8 * 1024**2
    DEFAULT_ALGO = "sha256"

    @staticmethod
    def get_available_digests() -> list[str]:
        """Fixed-size digest algorithms guaranteed by :mod:`hashlib` on every
        platform.

        :return: algorithm names accepted by :func:`hashlib.new`, sorted
        """
        return sorted(
            algo
            for algo in hashlib.algorithms_guaranteed
            if hashlib.new(algo).digest_size != 0
        )

    @classmethod
    def digest_bytes(cls, data: bytes, algo: str = DEFAULT_ALGO) -> str:
        """Hexadecimal digest of an in-memory buffer"""
        return hashlib.new(algo, data).hexdigest()

    @classmethod
    def file_digest(cls, path: str | os.PathLike[str], algo: str = DEFAULT_ALGO) -> str:
        """Hexadecimal digest of a file, read in chunks.

        :param path: input file path
        :param algo: hash algorithm name accepted by :func:`hashlib.new`
        :return: lowercase hexadecimal digest
        """
        hash_obj = hashlib.new(algo)
        with open(path, "rb") as path_obj:
            while chunk := path_obj.read(cls.FILE_CHUNK_BYTES):
                hash_obj.update(chunk)
        log.debug("%s of %s: %s", hash_obj.name.upper(), path, hash_obj.hexdigest())
        return hash_obj.hexdigest()

    @classmethod
    def verify_digest(
        cls, path: str | os.PathLike[str], algo: str, digest: str
    ) -> None:
        """Verify file digest and raise :class:`ValueError` in case of mismatch.

        :param path: input file path
        :param algo: hash algorithm name accepted by :func:`hashlib.new`
        :param digest: expected hexadecimal digest
        :raises ValueError: ``digest`` has incorrect length or does not match
        """
        digest_name = algo.upper()
        if hashlib.new(algo).digest_size * 2 != len(digest):
            raise ValueError(f"Expected {digest_name} for {path} has a wrong length")
        if cls.file_digest(path, algo) != digest.lower():
            raise ValueError(f"{digest_name} mismatch for {path}")
        log.info("Successfully verified %s of %s", digest_name, path)
