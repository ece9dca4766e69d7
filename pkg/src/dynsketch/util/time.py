"""Time measurement utilities for internal use"""

from __future__ import annotations

import datetime
import time


class Time:
    """Wall-clock measurements of build and verification runs"""

    @staticmethod
    def timestamp_delta(timestamp_delta: int | float) -> datetime.timedelta:
        """Convert a difference in seconds to a printable duration.

        :param timestamp_delta: time period in seconds
        :return: duration rounded to milliseconds
        """
        return datetime.timedelta(seconds=round(timestamp_delta, 3))

    @staticmethod
    def now() -> float:
        """Monotonic clock reading in seconds"""
        return time.monotonic()

    @classmethod
    def elapsed_since(cls, start: float) -> datetime.timedelta:
        """Duration since a :meth:`now` reading"""
        return cls.timestamp_delta(cls.now() - start)
